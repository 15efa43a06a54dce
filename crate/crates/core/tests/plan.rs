use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use skyplan::dimensioning::SitePolicy;
use skyplan::scenario::{
    load_config, parse_config, render_report, run_plan, Command, PlanFailure, PlanOptions, PlanningConfig,
    PlanningReport, ReportFormat, CAPACITY_HEADER, NTN_BUDGET_HEADER, RIS_GAP_HEADER,
};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/quito-stadium.toml")
}

fn golden() -> PlanningConfig {
    load_config(&golden_path()).unwrap()
}

fn run(config: &PlanningConfig, commands: &[Command], out: Option<&Path>) -> PlanningReport {
    let options = PlanOptions {
        policy: None,
        out_dir: out.map(Path::to_path_buf),
    };
    run_plan(config, commands, &options).unwrap()
}

fn sig3(x: f64) -> String {
    format!("{:.2e}", x)
}

#[test]
fn full_run_matches_published_tables() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&golden(), &Command::ALL, Some(dir.path()));

    let ntn = r.ntn_budget.as_ref().unwrap();
    let expected = [("SC6-DL", 8.5), ("SC6-UL", 18.4), ("SC9-DL", 6.6), ("SC9-UL", 2.8)];
    for (row, (case, cnr)) in ntn.iter().zip(expected) {
        assert_eq!(row.case, case);
        assert!((row.cnr_db - cnr).abs() <= 0.15, "{case}: {}", row.cnr_db);
    }

    let cap = r.capacity.as_ref().unwrap();
    let peaks = [(0.454e9, 0.485e9), (2.34e9, 2.50e9), (8.62e9, 9.46e9)];
    for (row, (dl, ul)) in cap.iter().zip(peaks) {
        assert_eq!(sig3(row.peak_dl_bps), sig3(dl), "{}", row.set);
        assert_eq!(sig3(row.peak_ul_bps), sig3(ul), "{}", row.set);
    }
    let sites: Vec<u64> = cap.iter().map(|c| c.sites_required).collect();
    assert_eq!(sites, vec![1, 2, 1]);

    let gap = r.ris_gap.as_ref().unwrap();
    assert!((gap.rows[0].budget.gap_db.abs() - 1.8376).abs() <= 0.01);
    assert!(gap.rows[0].ris_needed);
    assert!(gap.ris_needed());
    assert!((gap.rows[1].budget.deployment_mpl_db - 230.9580126).abs() <= 1e-6);

    let cov = r.coverage.as_ref().unwrap();
    assert_eq!(cov[0].cell_area_km2, 0.365625);
    assert_eq!(cov[1].cell_area_km2, 0.01274);
    assert_eq!((cov[0].sites.ceil, cov[0].sites.nearest), (1, 1));
    assert_eq!((cov[1].sites.ceil, cov[1].sites.nearest), (4, 3));

    let grid = r.grid.as_ref().unwrap();
    assert_eq!(grid.summary.cells, 41 * 40);
    let ntn_mean = grid.summary.ntn_mean_throughput_bps.unwrap();
    assert!((160e6..=1.81e9).contains(&ntn_mean), "{ntn_mean}");
    assert!(dir.path().join("grid.csv").exists());
}

#[test]
fn command_subset_yields_only_that_table() {
    let r = run(&golden(), &[Command::Capacity], None);
    assert!(r.capacity.is_some());
    assert!(r.ntn_budget.is_none() && r.ris_gap.is_none() && r.coverage.is_none() && r.grid.is_none());
}

#[test]
fn policy_override_changes_the_required_count() {
    let options = PlanOptions {
        policy: Some(SitePolicy::Nearest),
        out_dir: None,
    };
    let r = run_plan(&golden(), &[Command::Coverage], &options).unwrap();
    let cov = r.coverage.unwrap();
    assert_eq!(cov[1].policy, SitePolicy::Nearest);
    assert_eq!(cov[1].sites_required, 3);
    let default = run(&golden(), &[Command::Coverage], None).coverage.unwrap();
    assert_eq!(default[1].sites_required, 4);
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect()
}

#[test]
fn consecutive_runs_are_byte_identical() {
    let config = golden();
    let mut snaps = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let r = run(&config, &Command::ALL, Some(dir.path()));
        render_report(&r, ReportFormat::Csv, dir.path()).unwrap();
        render_report(&r, ReportFormat::Markdown, dir.path()).unwrap();
        snaps.push(snapshot(dir.path()));
    }
    assert_eq!(snaps[0].len(), 11);
    assert_eq!(snaps[0], snaps[1]);
}

#[test]
fn running_does_not_touch_the_config() {
    let config = golden();
    let before = config.clone();
    let _ = run(&config, &Command::ALL, None);
    assert_eq!(config, before);
}

#[test]
fn csv_files_have_fixed_headers_and_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(
        &golden(),
        &[Command::NtnBudget, Command::RisBudget, Command::Coverage, Command::Capacity],
        None,
    );
    let files = render_report(&r, ReportFormat::Csv, dir.path()).unwrap();
    assert_eq!(files.len(), 4);

    let read = |name: &str| {
        let mut rd = csv::Reader::from_path(dir.path().join(name)).unwrap();
        let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
        let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
        (header, rows)
    };

    let (h, rows) = read("ntn_budget.csv");
    assert_eq!(h, NTN_BUDGET_HEADER);
    for (row, src) in rows.iter().zip(r.ntn_budget.as_ref().unwrap()) {
        let cnr: f64 = row[14].parse().unwrap();
        let fspl: f64 = row[8].parse().unwrap();
        assert!((cnr - src.cnr_db).abs() <= 0.5e-4);
        assert!((fspl - src.fspl_db).abs() <= 0.5e-4);
    }

    let (h, rows) = read("ris_gap.csv");
    assert_eq!(h, RIS_GAP_HEADER);
    let gap = r.ris_gap.as_ref().unwrap();
    for (row, src) in rows.iter().zip(&gap.rows) {
        let g: f64 = row[10].parse().unwrap();
        let mpl: f64 = row[9].parse().unwrap();
        assert!((g - src.budget.gap_db).abs() <= 0.5e-7);
        assert!((mpl - src.budget.deployment_mpl_db).abs() <= 0.5e-7);
        assert_eq!(row[11].parse::<bool>().unwrap(), src.ris_needed);
    }

    let (h, rows) = read("capacity.csv");
    assert_eq!(h, CAPACITY_HEADER);
    for (row, src) in rows.iter().zip(r.capacity.as_ref().unwrap()) {
        let dl: f64 = row[1].parse().unwrap();
        assert!((dl - src.peak_dl_bps / 1e9).abs() <= 0.5e-6);
        assert_eq!(row[7].parse::<u64>().unwrap(), src.sites_required);
    }

    let (_, rows) = read("coverage.csv");
    assert_eq!(rows[0][5].parse::<f64>().unwrap(), 0.365625);
    assert_eq!(rows[1][5].parse::<f64>().unwrap(), 0.01274);
}

#[test]
fn markdown_gap_table_carries_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&golden(), &[Command::RisBudget], None);
    let files = render_report(&r, ReportFormat::Markdown, dir.path()).unwrap();
    assert_eq!(files, vec![dir.path().join("ris_gap.md")]);
    let md = fs::read_to_string(&files[0]).unwrap();
    assert!(md.contains("RIS needed: yes"), "{md}");
    assert!(md.contains("direct link UE-BS: gap -1.8376 dB, RIS needed."), "{md}");
    assert!(md.lines().any(|l| l.starts_with("| UE-RIS-BS | ris |")));
}

#[test]
fn render_into_a_file_path_reports_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("not-a-dir");
    fs::write(&blocker, "x").unwrap();
    let r = run(&golden(), &[Command::Capacity], None);
    let err = render_report(&r, ReportFormat::Csv, &blocker).unwrap_err();
    assert!(err.to_string().contains("not-a-dir"), "{err}");
}

#[test]
fn computation_errors_point_at_the_config() {
    let text = fs::read_to_string(golden_path())
        .unwrap()
        .replace("cell_radius = \"70 m\"\n", "");
    let config = parse_config(&text).unwrap();
    let err = run_plan(&config, &[Command::Coverage], &PlanOptions::default()).unwrap_err();
    match &err {
        PlanFailure::Compute { path, .. } => assert_eq!(path, "coverage.link[1].cell_radius"),
        other => panic!("{other:?}"),
    }
    let err = run_plan(
        &parse_config("name = \"bare\"").unwrap(),
        &[Command::Map],
        &PlanOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, PlanFailure::MissingSection { section: "map", .. }));
}

#[test]
fn direct_link_radius_comes_from_the_budget_when_omitted() {
    let text = fs::read_to_string(golden_path())
        .unwrap()
        .replace("cell_radius = \"375 m\"\n", "");
    let r = run(&parse_config(&text).unwrap(), &[Command::Coverage], None);
    let row = &r.coverage.unwrap()[0];
    assert_eq!(Some(row.cell_radius_m), row.max_radius_m);
    assert!(row.path_loss_db <= row.available_path_loss_db);
    assert!(row.available_path_loss_db - row.path_loss_db < 0.01);
}
