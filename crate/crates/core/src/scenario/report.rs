//! Renders a [`PlanningReport`] as CSV or Markdown, one file per table.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::plan::PlanningReport;
use crate::error::IoError;
use crate::link_budget::GapConvention;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "markdown",
        })
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown format `{other}` (expected csv or markdown)")),
        }
    }
}

/// A rendered-ready table: fixed header, formatted cells, and free-text
/// notes that only the Markdown form shows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub title: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

pub const NTN_BUDGET_HEADER: &[&str] = &[
    "case",
    "direction",
    "frequency_ghz",
    "eirp_dbw",
    "g_over_t_db_k",
    "bandwidth_mhz",
    "slant_range_km",
    "one_way_delay_ms",
    "fspl_db",
    "atmospheric_db",
    "shadow_margin_db",
    "scintillation_db",
    "polarization_db",
    "additional_db",
    "cnr_db",
];

pub const RIS_GAP_HEADER: &[&str] = &[
    "link",
    "kind",
    "mil_db",
    "shadow_margin_db",
    "penetration_margin_db",
    "body_losses_db",
    "available_path_loss_db",
    "bs_ris_db",
    "ris_ue_db",
    "deployment_mpl_db",
    "gap_db",
    "ris_needed",
];

pub const COVERAGE_HEADER: &[&str] = &[
    "link",
    "kind",
    "cell_radius_m",
    "path_loss_db",
    "available_path_loss_db",
    "cell_area_km2",
    "target_area_km2",
    "area_ratio",
    "sites_ceil",
    "sites_nearest",
    "policy",
    "sites_required",
    "max_radius_m",
];

pub const CAPACITY_HEADER: &[&str] = &[
    "set",
    "peak_dl_gbps",
    "peak_ul_gbps",
    "subscribers_dl",
    "subscribers_ul",
    "simultaneous_users",
    "max_users_per_site",
    "sites_required",
];

pub const GRID_SUMMARY_HEADER: &[&str] = &[
    "cells",
    "columns",
    "rows",
    "resolution_m",
    "rsrp_threshold_dbw",
    "sinr_target_db",
    "rsrp_coverage",
    "sinr_coverage",
    "mean_throughput_mbps",
    "p10_throughput_mbps",
    "p50_throughput_mbps",
    "p90_throughput_mbps",
    "ntn_cells",
    "ntn_mean_throughput_mbps",
];

fn f(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    // Values that round to zero print without a sign.
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn opt(v: Option<f64>, decimals: usize) -> String {
    v.map(|x| f(x, decimals)).unwrap_or_default()
}

fn kind(direct: bool) -> String {
    if direct { "direct" } else { "ris" }.to_string()
}

/// Tables present in `report`, in canonical order.
pub fn report_tables(report: &PlanningReport) -> Vec<Table> {
    let mut out = Vec::new();
    if let Some(rows) = &report.ntn_budget {
        out.push(Table {
            name: "ntn_budget",
            title: "Satellite link budget",
            header: NTN_BUDGET_HEADER.to_vec(),
            rows: rows
                .iter()
                .map(|r| {
                    vec![
                        r.case.clone(),
                        r.direction.to_string(),
                        f(r.frequency_ghz, 3),
                        f(r.eirp_dbw, 4),
                        f(r.g_over_t_db_k, 4),
                        f(r.bandwidth_hz / 1e6, 6),
                        f(r.slant_range_m / 1e3, 4),
                        f(r.one_way_delay_s * 1e3, 4),
                        f(r.fspl_db, 4),
                        f(r.atmospheric_db, 4),
                        f(r.shadow_margin_db, 4),
                        f(r.scintillation_db, 4),
                        f(r.polarization_db, 4),
                        f(r.additional_db, 4),
                        f(r.cnr_db, 4),
                    ]
                })
                .collect(),
            notes: Vec::new(),
        });
    }
    if let Some(t) = &report.ris_gap {
        let verdict = if t.ris_needed() { "yes" } else { "no" };
        let mut notes = vec![format!(
            "RIS needed: {verdict} (gap {} with threshold {} dB).",
            match t.convention {
                GapConvention::MarginPositive => "= APL − MPL",
                GapConvention::ShortfallPositive => "= MPL − APL",
            },
            f(t.threshold_db, 4)
        )];
        for r in &t.rows {
            notes.push(format!(
                "{} link {}: gap {} dB, RIS {}.",
                kind(r.direct),
                r.link,
                f(r.budget.gap_db, 4),
                if r.ris_needed { "needed" } else { "not needed" }
            ));
        }
        out.push(Table {
            name: "ris_gap",
            title: "RIS link budget and coverage gap",
            header: RIS_GAP_HEADER.to_vec(),
            rows: t
                .rows
                .iter()
                .map(|r| {
                    let b = &r.budget;
                    vec![
                        r.link.clone(),
                        kind(r.direct),
                        f(b.mil_db, 7),
                        f(b.shadow_margin_db, 7),
                        f(b.penetration_margin_db, 7),
                        f(b.body_losses_db, 7),
                        f(b.available_path_loss_db, 7),
                        opt(r.bs_ris_db, 7),
                        opt(r.ris_ue_db, 7),
                        f(b.deployment_mpl_db, 7),
                        f(b.gap_db, 7),
                        r.ris_needed.to_string(),
                    ]
                })
                .collect(),
            notes,
        });
    }
    if let Some(rows) = &report.coverage {
        out.push(Table {
            name: "coverage",
            title: "Coverage dimensioning",
            header: COVERAGE_HEADER.to_vec(),
            rows: rows
                .iter()
                .map(|r| {
                    vec![
                        r.link.clone(),
                        kind(r.direct),
                        f(r.cell_radius_m, 2),
                        f(r.path_loss_db, 4),
                        f(r.available_path_loss_db, 4),
                        f(r.cell_area_km2, 8),
                        f(r.target_area_km2, 8),
                        f(r.sites.ratio, 6),
                        r.sites.ceil.to_string(),
                        r.sites.nearest.to_string(),
                        r.policy.to_string(),
                        r.sites_required.to_string(),
                        opt(r.max_radius_m, 2),
                    ]
                })
                .collect(),
            notes: Vec::new(),
        });
    }
    if let Some(rows) = &report.capacity {
        out.push(Table {
            name: "capacity",
            title: "Capacity dimensioning",
            header: CAPACITY_HEADER.to_vec(),
            rows: rows
                .iter()
                .map(|r| {
                    vec![
                        r.set.clone(),
                        f(r.peak_dl_bps / 1e9, 6),
                        f(r.peak_ul_bps / 1e9, 6),
                        r.subscribers_dl.to_string(),
                        r.subscribers_ul.to_string(),
                        r.simultaneous_users.to_string(),
                        r.max_users_per_site.to_string(),
                        r.sites_required.to_string(),
                    ]
                })
                .collect(),
            notes: Vec::new(),
        });
    }
    if let Some(g) = &report.grid {
        let s = &g.summary;
        out.push(Table {
            name: "grid_summary",
            title: "Coverage raster summary",
            header: GRID_SUMMARY_HEADER.to_vec(),
            rows: vec![vec![
                s.cells.to_string(),
                g.columns.to_string(),
                g.rows.to_string(),
                f(g.resolution_m, 3),
                f(g.rsrp_threshold_dbw, 4),
                f(g.sinr_target_db, 4),
                f(s.rsrp_fraction, 6),
                f(s.sinr_fraction, 6),
                f(s.mean_throughput_bps / 1e6, 4),
                f(s.p10_throughput_bps / 1e6, 4),
                f(s.p50_throughput_bps / 1e6, 4),
                f(s.p90_throughput_bps / 1e6, 4),
                s.ntn_cells.to_string(),
                opt(s.ntn_mean_throughput_bps.map(|v| v / 1e6), 4),
            ]],
            notes: g
                .grid_file
                .iter()
                .filter_map(|p| p.file_name())
                .map(|n| format!("Per-cell raster: {}", n.to_string_lossy()))
                .collect(),
        });
    }
    out
}

fn csv_text(t: &Table) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&t.header).expect("writing to memory cannot fail");
    for r in &t.rows {
        w.write_record(r).expect("writing to memory cannot fail");
    }
    String::from_utf8(w.into_inner().expect("writing to memory cannot fail")).expect("cells are UTF-8")
}

fn markdown_text(t: &Table) -> String {
    let mut s = format!("## {}\n\n", t.title);
    s.push_str(&format!("| {} |\n", t.header.join(" | ")));
    s.push_str(&format!("|{}\n", "---|".repeat(t.header.len())));
    for r in &t.rows {
        s.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    if !t.notes.is_empty() {
        s.push('\n');
        for n in &t.notes {
            s.push_str(n);
            s.push('\n');
        }
    }
    s
}

/// Renders one table to text.
pub fn render_table(t: &Table, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => csv_text(t),
        ReportFormat::Markdown => markdown_text(t),
    }
}

/// Writes one file per table into `dir` and returns their paths.
pub fn render_report(report: &PlanningReport, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    fs::create_dir_all(dir).map_err(|e| IoError::new(dir, e))?;
    report_tables(report)
        .iter()
        .map(|t| {
            let path = dir.join(format!("{}.{}", t.name, format.extension()));
            fs::write(&path, render_table(t, format)).map_err(|e| IoError::new(&path, e))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_has_no_sign() {
        assert_eq!(f(-0.00001, 4), "0.0000");
        assert_eq!(f(-1.83756, 4), "-1.8376");
    }

    #[test]
    fn format_names() {
        assert_eq!("markdown".parse::<ReportFormat>().unwrap(), ReportFormat::Markdown);
        assert_eq!(ReportFormat::Csv.to_string().parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert!("pdf".parse::<ReportFormat>().is_err());
    }

    #[test]
    fn markdown_layout() {
        let t = Table {
            name: "x",
            title: "X",
            header: vec!["a", "b"],
            rows: vec![vec!["1".into(), "2".into()]],
            notes: vec!["note".into()],
        };
        assert_eq!(render_table(&t, ReportFormat::Markdown), "## X\n\n| a | b |\n|---|---|\n| 1 | 2 |\n\nnote\n");
        assert_eq!(render_table(&t, ReportFormat::Csv), "a,b\n1,2\n");
    }
}
