//! Configuration files, planning runs and report rendering.

mod config;
mod plan;
pub mod quantity;
mod report;

pub use config::{
    load_config, parse_config, to_toml_string, BudgetLinkSpec, CapacitySpec, ConfigError, CoverageLinkSpec,
    CoverageSpec, Deployment, LoadError, MapBsSpec, MapNtnSpec, MapRisSpec, MapSpec, MilSpec, NtnLinkSpec,
    PlanningConfig, RisBudgetSpec,
};
pub use plan::{
    build_scenario, run_plan, CapacityRow, Command, CoverageRow, GridSummary, NtnBudgetRow, PlanFailure,
    PlanOptions, PlanningReport, RisGapRow, RisGapTable, GRID_FILE,
};
pub use report::{
    render_report, render_table, report_tables, ReportFormat, Table, CAPACITY_HEADER, COVERAGE_HEADER,
    GRID_SUMMARY_HEADER, NTN_BUDGET_HEADER, RIS_GAP_HEADER,
};
