//! Runs planning commands against a validated configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use super::config::{BudgetLinkSpec, Deployment, MapSpec, MilSpec, PlanningConfig};
use crate::dimensioning::{
    cell_area, max_cell_radius, peak_data_rate, sites_for_capacity, subscribers_supported, CoverageSites,
    RadiusModel, SitePolicy,
};
use crate::error::{IoError, PlanError};
use crate::grid::{coverage_stats, evaluate_grid, export_grid, BsSite, NtnOverlay, RisPanel, Scenario};
use crate::link_budget::{cnr_breakdown, Direction, GapConvention, RisLinkBudget};
use crate::propagation::{ris_cascade_path_loss, uma_path_loss, UmaCoefficients};

/// File name of the raster export written by [`Command::Map`].
pub const GRID_FILE: &str = "grid.csv";

/// A planning step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Command {
    NtnBudget,
    RisBudget,
    Coverage,
    Capacity,
    Map,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::NtnBudget,
        Command::RisBudget,
        Command::Coverage,
        Command::Capacity,
        Command::Map,
    ];
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::NtnBudget => "ntn-budget",
            Command::RisBudget => "ris-budget",
            Command::Coverage => "coverage",
            Command::Capacity => "capacity",
            Command::Map => "map",
        })
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

/// Failure of a planning run.
#[derive(Debug, Error)]
pub enum PlanFailure {
    /// A computation rejected the values found at `path` in the config.
    #[error("{path}: {source}")]
    Compute {
        path: String,
        #[source]
        source: PlanError,
    },
    /// A section the command needs is absent from the config.
    #[error("{command} needs the `{section}` section of the configuration")]
    MissingSection { command: Command, section: &'static str },
    #[error(transparent)]
    Io(#[from] IoError),
}

fn at(path: impl Into<String>) -> impl FnOnce(PlanError) -> PlanFailure {
    let path = path.into();
    move |source| PlanFailure::Compute { path, source }
}

/// Run-time switches that override the configuration.
#[derive(Debug, Clone, Default)]
pub struct PlanOptions {
    pub policy: Option<SitePolicy>,
    /// Directory for the grid export; the map command writes nothing when unset.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NtnBudgetRow {
    pub case: String,
    pub direction: Direction,
    pub frequency_ghz: f64,
    pub eirp_dbw: f64,
    pub g_over_t_db_k: f64,
    pub bandwidth_hz: f64,
    pub slant_range_m: f64,
    pub one_way_delay_s: f64,
    pub fspl_db: f64,
    pub atmospheric_db: f64,
    pub shadow_margin_db: f64,
    pub scintillation_db: f64,
    pub polarization_db: f64,
    pub additional_db: f64,
    pub cnr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RisGapRow {
    pub link: String,
    /// `true` for a direct BS→UE link, `false` for a RIS cascade.
    pub direct: bool,
    pub budget: RisLinkBudget<f64>,
    pub bs_ris_db: Option<f64>,
    pub ris_ue_db: Option<f64>,
    pub ris_needed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RisGapTable {
    pub convention: GapConvention,
    pub threshold_db: f64,
    pub rows: Vec<RisGapRow>,
}

impl RisGapTable {
    /// Whether any direct link falls short, which is what triggers RIS
    /// deployment. Without direct links every link is considered.
    pub fn ris_needed(&self) -> bool {
        let direct: Vec<_> = self.rows.iter().filter(|r| r.direct).collect();
        if direct.is_empty() {
            self.rows.iter().any(|r| r.ris_needed)
        } else {
            direct.iter().any(|r| r.ris_needed)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub link: String,
    pub direct: bool,
    pub cell_radius_m: f64,
    pub path_loss_db: f64,
    pub available_path_loss_db: f64,
    pub cell_area_km2: f64,
    pub target_area_km2: f64,
    pub sites: CoverageSites<f64>,
    pub policy: SitePolicy,
    pub sites_required: u64,
    /// Largest radius the available path loss supports (direct links only).
    pub max_radius_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityRow {
    pub set: String,
    pub peak_dl_bps: f64,
    pub peak_ul_bps: f64,
    pub subscribers_dl: u64,
    pub subscribers_ul: u64,
    pub simultaneous_users: u64,
    pub max_users_per_site: u64,
    pub sites_required: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSummary {
    pub columns: usize,
    pub rows: usize,
    pub resolution_m: f64,
    pub rsrp_threshold_dbw: f64,
    pub sinr_target_db: f64,
    pub summary: crate::grid::CoverageSummary<f64>,
    pub grid_file: Option<PathBuf>,
}

/// Tables produced by one run; a table is `None` when its command was not run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanningReport {
    pub name: String,
    pub ntn_budget: Option<Vec<NtnBudgetRow>>,
    pub ris_gap: Option<RisGapTable>,
    pub coverage: Option<Vec<CoverageRow>>,
    pub capacity: Option<Vec<CapacityRow>>,
    pub grid: Option<GridSummary>,
}

/// Runs `commands` in canonical order; duplicates are ignored.
pub fn run_plan(config: &PlanningConfig, commands: &[Command], options: &PlanOptions) -> Result<PlanningReport, PlanFailure> {
    let mut selected = commands.to_vec();
    selected.sort();
    selected.dedup();
    let mut report = PlanningReport {
        name: config.name.clone(),
        ..PlanningReport::default()
    };
    for cmd in selected {
        match cmd {
            Command::NtnBudget => report.ntn_budget = Some(ntn_budget(config)?),
            Command::RisBudget => report.ris_gap = Some(ris_gap(config)?),
            Command::Coverage => report.coverage = Some(coverage(config, options.policy)?),
            Command::Capacity => report.capacity = Some(capacity(config)?),
            Command::Map => report.grid = Some(map(config, options)?),
        }
    }
    Ok(report)
}

fn ntn_budget(config: &PlanningConfig) -> Result<Vec<NtnBudgetRow>, PlanFailure> {
    config
        .ntn_links
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let l = &entry.link;
            let r = cnr_breakdown(l).map_err(at(format!("ntn_link[{i}]")))?;
            Ok(NtnBudgetRow {
                case: entry.name.clone(),
                direction: l.direction,
                frequency_ghz: l.fc_ghz,
                eirp_dbw: l.eirp_dbw,
                g_over_t_db_k: l.g_over_t_db_k,
                bandwidth_hz: l.bandwidth_hz,
                slant_range_m: l.geometry.slant_range_m,
                one_way_delay_s: l.geometry.one_way_delay_s(),
                fspl_db: r.fspl_db,
                atmospheric_db: l.losses.atmospheric_db,
                shadow_margin_db: l.losses.shadow_margin_db,
                scintillation_db: l.losses.scintillation_db,
                polarization_db: l.losses.polarization_db,
                additional_db: l.losses.additional_db,
                cnr_db: r.cnr_db,
            })
        })
        .collect()
}

fn deployment_mpl(d: &Deployment) -> Result<f64, PlanError> {
    match d {
        Deployment::Uma(p) => uma_path_loss(p),
        Deployment::Cascade { bs_ris_db, ris_ue_db } => Ok(ris_cascade_path_loss(*bs_ris_db, *ris_ue_db)),
    }
}

fn link_budget(l: &BudgetLinkSpec, convention: GapConvention, path: &str) -> Result<RisLinkBudget<f64>, PlanFailure> {
    let mil = match l.mil {
        MilSpec::Fixed(v) => v,
        MilSpec::Computed(m) => m.evaluate().map_err(at(format!("{path}.mil_inputs")))?,
    };
    let mpl = deployment_mpl(&l.deployment).map_err(at(format!("{path}.deployment")))?;
    RisLinkBudget::evaluate_with(
        convention,
        mil,
        l.shadow_margin_db,
        l.penetration_margin_db,
        l.body_losses_db,
        mpl,
    )
    .map_err(at(path))
}

fn ris_gap(config: &PlanningConfig) -> Result<RisGapTable, PlanFailure> {
    let b = config.ris_budget.as_ref().ok_or(PlanFailure::MissingSection {
        command: Command::RisBudget,
        section: "ris_budget",
    })?;
    let rows = b
        .links
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let budget = link_budget(l, b.convention, &format!("ris_budget.link[{i}]"))?;
            let (bs_ris_db, ris_ue_db) = match l.deployment {
                Deployment::Uma(_) => (None, None),
                Deployment::Cascade { bs_ris_db, ris_ue_db } => (Some(bs_ris_db), Some(ris_ue_db)),
            };
            Ok(RisGapRow {
                link: l.name.clone(),
                direct: matches!(l.deployment, Deployment::Uma(_)),
                ris_needed: budget.ris_needed_at(b.threshold_db),
                budget,
                bs_ris_db,
                ris_ue_db,
            })
        })
        .collect::<Result<_, PlanFailure>>()?;
    Ok(RisGapTable {
        convention: b.convention,
        threshold_db: b.threshold_db,
        rows,
    })
}

fn coverage(config: &PlanningConfig, policy: Option<SitePolicy>) -> Result<Vec<CoverageRow>, PlanFailure> {
    let c = config.coverage.as_ref().ok_or(PlanFailure::MissingSection {
        command: Command::Coverage,
        section: "coverage",
    })?;
    let budget = config.ris_budget.as_ref().ok_or(PlanFailure::MissingSection {
        command: Command::Coverage,
        section: "ris_budget",
    })?;
    let policy = policy.unwrap_or(c.policy);
    c.links
        .iter()
        .enumerate()
        .map(|(i, cl)| {
            let path = format!("coverage.link[{i}]");
            let (bi, bl) = budget
                .links
                .iter()
                .enumerate()
                .find(|(_, l)| l.name == cl.budget_link)
                .expect("budget references are checked when the config is loaded");
            let b = link_budget(bl, budget.convention, &format!("ris_budget.link[{bi}]"))?;
            let apl = b.available_path_loss_db;
            let max_radius_m = match bl.deployment {
                Deployment::Uma(p) => match max_cell_radius(apl, &RadiusModel::Uma(p)) {
                    Ok(r) => Some(r),
                    Err(PlanError::NoCoverage { .. }) => None,
                    Err(e) => return Err(at(format!("{path}.budget_link"))(e)),
                },
                Deployment::Cascade { .. } => None,
            };
            let (radius, path_loss) = match (bl.deployment, cl.cell_radius_m) {
                (Deployment::Uma(p), Some(r)) => {
                    (r, uma_path_loss(&p.at_distance(r)).map_err(at(format!("{path}.cell_radius")))?)
                }
                (Deployment::Uma(p), None) => {
                    let r = max_radius_m.ok_or_else(|| {
                        at(format!("{path}.budget_link"))(PlanError::NoCoverage {
                            apl_db: apl,
                            floor_db: uma_path_loss(&p.at_distance(p.coefficients.min_d2d_m)).unwrap_or(f64::NAN),
                        })
                    })?;
                    (r, uma_path_loss(&p.at_distance(r)).map_err(at(format!("{path}.budget_link")))?)
                }
                (Deployment::Cascade { .. }, Some(r)) => (r, b.deployment_mpl_db),
                (Deployment::Cascade { .. }, None) => {
                    return Err(at(format!("{path}.cell_radius"))(PlanError::Domain {
                        quantity: "cell radius",
                        detail: "a cascade link needs an explicit cell_radius".into(),
                    }))
                }
            };
            let area = cell_area(radius).map_err(at(format!("{path}.cell_radius")))?;
            let sites = CoverageSites::compute(c.target_area_km2, area).map_err(at(path.clone()))?;
            Ok(CoverageRow {
                link: cl.name.clone(),
                direct: matches!(bl.deployment, Deployment::Uma(_)),
                cell_radius_m: radius,
                path_loss_db: path_loss,
                available_path_loss_db: apl,
                cell_area_km2: area,
                target_area_km2: c.target_area_km2,
                sites,
                policy,
                sites_required: sites.under(policy),
                max_radius_m,
            })
        })
        .collect()
}

fn capacity(config: &PlanningConfig) -> Result<Vec<CapacityRow>, PlanFailure> {
    config
        .capacity
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let path = format!("capacity[{i}]");
            let dl = peak_data_rate(&s.params, Direction::Downlink).map_err(at(path.clone()))?;
            let ul = peak_data_rate(&s.params, Direction::Uplink).map_err(at(path.clone()))?;
            Ok(CapacityRow {
                set: s.name.clone(),
                peak_dl_bps: dl,
                peak_ul_bps: ul,
                subscribers_dl: subscribers_supported(dl, &s.traffic_dl).map_err(at(path.clone()))?,
                subscribers_ul: subscribers_supported(ul, &s.traffic_ul).map_err(at(path.clone()))?,
                simultaneous_users: s.traffic_dl.simultaneous_users,
                max_users_per_site: s.traffic_dl.max_users_per_site,
                sites_required: sites_for_capacity(s.traffic_dl.simultaneous_users, s.traffic_dl.max_users_per_site)
                    .map_err(at(format!("{path}.max_users_per_site")))?,
            })
        })
        .collect()
}

fn peak_dl(config: &PlanningConfig, name: &str, path: &str) -> Result<f64, PlanFailure> {
    let set = config
        .capacity_set(name)
        .expect("capacity references are checked when the config is loaded");
    peak_data_rate(&set.params, Direction::Downlink).map_err(at(path))
}

/// Builds the raster scenario described by the `map` section.
pub fn build_scenario(config: &PlanningConfig) -> Result<Scenario<f64>, PlanFailure> {
    let m: &MapSpec = config.map.as_ref().ok_or(PlanFailure::MissingSection {
        command: Command::Map,
        section: "map",
    })?;
    let bs_sites = m
        .bs
        .iter()
        .enumerate()
        .map(|(i, b)| {
            Ok(BsSite {
                name: b.name.clone(),
                position: b.position,
                height_m: b.height_m,
                eirp_dbw: b.eirp_dbw,
                fc_ghz: b.fc_ghz,
                bandwidth_hz: b.bandwidth_hz,
                state: b.state,
                coefficients: UmaCoefficients::default(),
                peak_rate_bps: peak_dl(config, &b.capacity, &format!("map.bs[{i}].capacity"))?,
            })
        })
        .collect::<Result<Vec<_>, PlanFailure>>()?;
    let ris_panels = m
        .ris
        .iter()
        .map(|r| RisPanel {
            name: r.name.clone(),
            position: r.position,
            height_m: r.height_m,
            serving_bs: m
                .bs
                .iter()
                .position(|b| b.name == r.serving_bs)
                .expect("RIS references are checked when the config is loaded"),
            gain_db: r.gain_db,
            reflection_loss_db: r.reflection_loss_db,
            state: r.state,
            bs_ris_loss_db: r.bs_ris_loss_db,
        })
        .collect();
    let ntn_overlay = match &m.ntn {
        None => None,
        Some(n) => {
            let link = config
                .ntn_link(&n.link)
                .expect("NTN references are checked when the config is loaded");
            let c = cnr_breakdown(&link.link).map_err(at("map.ntn.link"))?;
            Some(NtnOverlay {
                band: link.band,
                cnr_db: c.cnr_db,
                bandwidth_hz: link.link.bandwidth_hz,
                peak_rate_bps: peak_dl(config, &n.capacity, "map.ntn.capacity")?,
                co_channel: n.co_channel,
                footprint: n.footprint,
            })
        }
    };
    Ok(Scenario {
        polygon: m.polygon.clone(),
        resolution_m: m.resolution_m,
        bs_sites,
        ris_panels,
        ntn_overlay,
        ue: m.ue,
    })
}

fn map(config: &PlanningConfig, options: &PlanOptions) -> Result<GridSummary, PlanFailure> {
    let m = config.map.as_ref().ok_or(PlanFailure::MissingSection {
        command: Command::Map,
        section: "map",
    })?;
    let scenario = build_scenario(config)?;
    let grid = evaluate_grid(&scenario).map_err(at("map"))?;
    let summary = coverage_stats(&grid, m.rsrp_threshold_dbw, m.sinr_target_db).map_err(at("map.polygon"))?;
    let grid_file = match &options.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| IoError::new(dir, e))?;
            let path = dir.join(GRID_FILE);
            export_grid(&grid, &path)?;
            Some(path)
        }
        None => None,
    };
    Ok(GridSummary {
        columns: grid.columns,
        rows: grid.rows,
        resolution_m: grid.resolution_m,
        rsrp_threshold_dbw: m.rsrp_threshold_dbw,
        sinr_target_db: m.sinr_target_db,
        summary,
        grid_file,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.to_string().parse::<Command>().unwrap(), c);
        }
        assert!("report".parse::<Command>().is_err());
    }
}
