//! Planning configuration: TOML schema, validation and serialization.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::quantity::{
    format_point, format_quantity, parse_point, parse_quantity, parse_quantity_in, Dimension, QuantityError,
};
use crate::dimensioning::{NrCarrierCapacityParams, SitePolicy, TrafficProfile};
use crate::error::IoError;
use crate::geometry::{LinkGeometry, EARTH_RADIUS_M};
use crate::grid::{Point, Polygon, UeParams};
use crate::link_budget::{Direction, GapConvention, MilInputs, NtnLinkConfig, NtnLosses};
use crate::propagation::{uma_path_loss, Band, LinkState, UmaParams};
use crate::units::NoiseParams;

/// One problem found in a configuration file.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Unit { field: String, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("{field}: `{target}` is not defined")]
    Dangling { field: String, target: String },
    #[error("{field}: `{name}` is defined more than once")]
    Duplicate { field: String, name: String },
}

impl ConfigError {
    /// Config path the error refers to, if any.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Parse { .. } => None,
            ConfigError::Unit { field, .. }
            | ConfigError::Invalid { field, .. }
            | ConfigError::Dangling { field, .. }
            | ConfigError::Duplicate { field, .. } => Some(field),
        }
    }
}

/// Why [`load_config`] failed.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{} configuration error(s):\n  {}", .0.len(), join_errors(.0))]
    Config(Vec<ConfigError>),
}

fn join_errors(errors: &[ConfigError]) -> String {
    errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n  ")
}

// ---------------------------------------------------------------------------
// File schema. Physical quantities are unit-suffixed strings.

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    ntn_link: Vec<RawNtnLink>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ris_budget: Option<RawRisBudget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coverage: Option<RawCoverage>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    capacity: Vec<RawCapacity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    map: Option<RawMap>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNtnLink {
    name: String,
    band: String,
    direction: String,
    frequency: String,
    bandwidth: String,
    eirp: String,
    g_over_t: String,
    altitude: String,
    elevation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    earth_radius: Option<String>,
    atmospheric_loss: String,
    shadow_margin: String,
    scintillation_loss: String,
    polarization_loss: String,
    additional_loss: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRisBudget {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    convention: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<String>,
    #[serde(default)]
    link: Vec<RawBudgetLink>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBudgetLink {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mil: Option<String>,
    shadow_margin: String,
    penetration_margin: String,
    body_losses: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mil_inputs: Option<RawMilInputs>,
    deployment: RawDeployment,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMilInputs {
    tx_power: String,
    tx_losses: String,
    rx_gain: String,
    rx_losses: String,
    noise_figure: String,
    bandwidth: String,
    required_snr: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDeployment {
    model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frequency: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bs_height: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ue_height: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    env_height: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bs_ris: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ris_ue: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoverage {
    target_area: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    policy: Option<String>,
    #[serde(default)]
    link: Vec<RawCoverageLink>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoverageLink {
    name: String,
    budget_link: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cell_radius: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCapacity {
    name: String,
    carriers: u32,
    layers_dl: u32,
    layers_ul: u32,
    qm_dl: u32,
    qm_ul: u32,
    scaling: f64,
    numerology: u32,
    prbs: u32,
    overhead_dl: f64,
    overhead_ul: f64,
    bandwidth: String,
    per_user_rate_dl: String,
    per_user_rate_ul: String,
    duty_ratio_dl: f64,
    duty_ratio_ul: f64,
    connected_ratio: f64,
    overload_threshold: f64,
    simultaneous_users: u64,
    max_users_per_site: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    resolution: String,
    polygon: Vec<String>,
    rsrp_threshold: String,
    sinr_target: String,
    ue: RawUe,
    #[serde(default)]
    bs: Vec<RawBs>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    ris: Vec<RawRis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ntn: Option<RawMapNtn>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUe {
    noise_figure: String,
    height: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBs {
    name: String,
    position: String,
    height: String,
    eirp: String,
    frequency: String,
    bandwidth: String,
    state: String,
    capacity: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRis {
    name: String,
    position: String,
    height: String,
    serving_bs: String,
    gain: String,
    reflection_loss: String,
    state: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bs_ris_loss: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMapNtn {
    link: String,
    capacity: String,
    co_channel: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    footprint_center: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    footprint_radius: Option<String>,
}

// ---------------------------------------------------------------------------
// Validated model.

/// A validated planning configuration. Quantities are in SI units and dBW.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanningConfig {
    pub name: String,
    pub output_dir: Option<PathBuf>,
    pub ntn_links: Vec<NtnLinkSpec>,
    pub ris_budget: Option<RisBudgetSpec>,
    pub coverage: Option<CoverageSpec>,
    pub capacity: Vec<CapacitySpec>,
    pub map: Option<MapSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NtnLinkSpec {
    pub name: String,
    pub band: Band,
    pub link: NtnLinkConfig<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RisBudgetSpec {
    pub convention: GapConvention,
    pub threshold_db: f64,
    pub links: Vec<BudgetLinkSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MilSpec {
    Fixed(f64),
    Computed(MilInputs<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Deployment {
    /// Direct BS→UE link over the urban-macro model.
    Uma(UmaParams<f64>),
    /// BS→RIS→UE with both segment losses given.
    Cascade { bs_ris_db: f64, ris_ue_db: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetLinkSpec {
    pub name: String,
    pub mil: MilSpec,
    pub shadow_margin_db: f64,
    pub penetration_margin_db: f64,
    pub body_losses_db: f64,
    pub deployment: Deployment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSpec {
    pub target_area_km2: f64,
    pub policy: SitePolicy,
    pub links: Vec<CoverageLinkSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageLinkSpec {
    pub name: String,
    pub budget_link: String,
    pub cell_radius_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacitySpec {
    pub name: String,
    pub params: NrCarrierCapacityParams<f64>,
    pub traffic_dl: TrafficProfile<f64>,
    pub traffic_ul: TrafficProfile<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    pub resolution_m: f64,
    pub polygon: Polygon<f64>,
    pub rsrp_threshold_dbw: f64,
    pub sinr_target_db: f64,
    pub ue: UeParams<f64>,
    pub bs: Vec<MapBsSpec>,
    pub ris: Vec<MapRisSpec>,
    pub ntn: Option<MapNtnSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapBsSpec {
    pub name: String,
    pub position: Point<f64>,
    pub height_m: f64,
    pub eirp_dbw: f64,
    pub fc_ghz: f64,
    pub bandwidth_hz: f64,
    pub state: LinkState,
    pub capacity: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapRisSpec {
    pub name: String,
    pub position: Point<f64>,
    pub height_m: f64,
    pub serving_bs: String,
    pub gain_db: f64,
    pub reflection_loss_db: f64,
    pub state: LinkState,
    pub bs_ris_loss_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapNtnSpec {
    pub link: String,
    pub capacity: String,
    pub co_channel: bool,
    pub footprint: Option<(Point<f64>, f64)>,
}

impl PlanningConfig {
    pub fn ntn_link(&self, name: &str) -> Option<&NtnLinkSpec> {
        self.ntn_links.iter().find(|l| l.name == name)
    }

    pub fn capacity_set(&self, name: &str) -> Option<&CapacitySpec> {
        self.capacity.iter().find(|c| c.name == name)
    }

    pub fn budget_link(&self, name: &str) -> Option<&BudgetLinkSpec> {
        self.ris_budget.as_ref()?.links.iter().find(|l| l.name == name)
    }
}

// ---------------------------------------------------------------------------
// Loading.

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<PlanningConfig, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::new(path, e))?;
    parse_config(&text).map_err(LoadError::Config)
}

/// Validates configuration text, reporting every problem found.
pub fn parse_config(text: &str) -> Result<PlanningConfig, Vec<ConfigError>> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_column(text, s.start)).unwrap_or((1, 1));
        vec![ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }]
    })?;
    let mut v = Validator::default();
    let cfg = v.config(&raw);
    if v.errors.is_empty() {
        Ok(cfg)
    } else {
        Err(v.errors)
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[derive(Default)]
struct Validator {
    errors: Vec<ConfigError>,
}

impl Validator {
    fn invalid(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.errors.push(ConfigError::Invalid {
            field: field.into(),
            message: message.into(),
        });
    }

    fn quantity_error(&mut self, field: &str, e: QuantityError) {
        self.errors.push(match e {
            QuantityError::Unit(message) => ConfigError::Unit {
                field: field.to_string(),
                message,
            },
            QuantityError::Syntax(message) => ConfigError::Invalid {
                field: field.to_string(),
                message,
            },
        });
    }

    fn q(&mut self, field: &str, text: &str, dim: Dimension) -> f64 {
        parse_quantity(text, dim).unwrap_or_else(|e| {
            self.quantity_error(field, e);
            f64::NAN
        })
    }

    fn q_in(&mut self, field: &str, text: &str, dim: Dimension, unit: &str) -> f64 {
        parse_quantity_in(text, dim, unit).unwrap_or_else(|e| {
            self.quantity_error(field, e);
            f64::NAN
        })
    }

    fn positive(&mut self, field: &str, text: &str, dim: Dimension) -> f64 {
        let v = self.q(field, text, dim);
        if v.is_finite() && v <= 0.0 {
            self.invalid(field, format!("`{text}` must be > 0"));
        }
        v
    }

    fn non_negative(&mut self, field: &str, text: &str, dim: Dimension) -> f64 {
        let v = self.q(field, text, dim);
        if v.is_finite() && v < 0.0 {
            self.invalid(field, format!("`{text}` must be >= 0"));
        }
        v
    }

    fn frequency_ghz(&mut self, field: &str, text: &str) -> f64 {
        let v = self.q_in(field, text, Dimension::Frequency, "GHz");
        if v.is_finite() && v <= 0.0 {
            self.invalid(field, format!("`{text}` must be > 0"));
        }
        v
    }

    fn point(&mut self, field: &str, text: &str) -> Point<f64> {
        match parse_point(text) {
            Ok((x, y)) => Point::new(x, y),
            Err(e) => {
                self.quantity_error(field, e);
                Point::new(f64::NAN, f64::NAN)
            }
        }
    }

    fn parsed<E: std::fmt::Display, V: std::str::FromStr<Err = E>>(&mut self, field: &str, text: &str, fallback: V) -> V {
        text.parse().unwrap_or_else(|e: E| {
            self.invalid(field, e.to_string());
            fallback
        })
    }

    fn label(&mut self, field: &str, name: &str) {
        if name.trim().is_empty() || name.contains([',', '"', '\n', '\r']) {
            self.invalid(field, format!("`{name}` must be non-empty without commas or quotes"));
        }
    }

    fn unique<'a>(&mut self, section: &str, names: impl IntoIterator<Item = &'a str>) {
        let mut seen = HashSet::new();
        for (i, n) in names.into_iter().enumerate() {
            if !seen.insert(n) {
                self.errors.push(ConfigError::Duplicate {
                    field: format!("{section}[{i}].name"),
                    name: n.to_string(),
                });
            }
        }
    }

    fn reference(&mut self, field: String, target: &str, defined: &[&str]) {
        if !defined.contains(&target) {
            self.errors.push(ConfigError::Dangling {
                field,
                target: target.to_string(),
            });
        }
    }

    fn config(&mut self, raw: &RawConfig) -> PlanningConfig {
        if raw.name.trim().is_empty() {
            self.invalid("name", "must not be empty");
        }
        let ntn_links: Vec<_> = raw.ntn_link.iter().enumerate().map(|(i, l)| self.ntn_link(i, l)).collect();
        self.unique("ntn_link", raw.ntn_link.iter().map(|l| l.name.as_str()));
        let ris_budget = raw.ris_budget.as_ref().map(|b| self.ris_budget(b));
        let capacity: Vec<_> = raw.capacity.iter().enumerate().map(|(i, c)| self.capacity(i, c)).collect();
        self.unique("capacity", raw.capacity.iter().map(|c| c.name.as_str()));

        let budget_names: Vec<&str> = raw
            .ris_budget
            .iter()
            .flat_map(|b| b.link.iter().map(|l| l.name.as_str()))
            .collect();
        let coverage = raw.coverage.as_ref().map(|c| self.coverage(c, &budget_names));

        let ntn_names: Vec<&str> = raw.ntn_link.iter().map(|l| l.name.as_str()).collect();
        let capacity_names: Vec<&str> = raw.capacity.iter().map(|c| c.name.as_str()).collect();
        let map = raw.map.as_ref().map(|m| self.map(m, &ntn_names, &capacity_names));

        PlanningConfig {
            name: raw.name.clone(),
            output_dir: raw.output_dir.as_ref().map(PathBuf::from),
            ntn_links,
            ris_budget,
            coverage,
            capacity,
            map,
        }
    }

    fn ntn_link(&mut self, i: usize, l: &RawNtnLink) -> NtnLinkSpec {
        let f = |k: &str| format!("ntn_link[{i}].{k}");
        self.label(&f("name"), &l.name);
        let band = self.parsed(&f("band"), &l.band, Band::S);
        let direction = self.parsed(&f("direction"), &l.direction, Direction::Downlink);
        let fc_ghz = self.frequency_ghz(&f("frequency"), &l.frequency);
        let bandwidth_hz = self.positive(&f("bandwidth"), &l.bandwidth, Dimension::Frequency);
        let eirp_dbw = self.q(&f("eirp"), &l.eirp, Dimension::Power);
        let g_over_t = self.q(&f("g_over_t"), &l.g_over_t, Dimension::GainOverTemperature);
        let altitude = self.positive(&f("altitude"), &l.altitude, Dimension::Length);
        let elevation = self.q(&f("elevation"), &l.elevation, Dimension::Angle);
        let earth_radius = match &l.earth_radius {
            Some(t) => self.positive(&f("earth_radius"), t, Dimension::Length),
            None => EARTH_RADIUS_M,
        };
        let losses = NtnLosses {
            atmospheric_db: self.non_negative(&f("atmospheric_loss"), &l.atmospheric_loss, Dimension::Decibel),
            shadow_margin_db: self.non_negative(&f("shadow_margin"), &l.shadow_margin, Dimension::Decibel),
            scintillation_db: self.non_negative(&f("scintillation_loss"), &l.scintillation_loss, Dimension::Decibel),
            polarization_db: self.non_negative(&f("polarization_loss"), &l.polarization_loss, Dimension::Decibel),
            additional_db: self.non_negative(&f("additional_loss"), &l.additional_loss, Dimension::Decibel),
        };
        let geometry = if altitude > 0.0 && elevation.is_finite() && earth_radius > 0.0 {
            LinkGeometry::with_earth_radius(altitude, elevation, earth_radius).unwrap_or_else(|e| {
                self.invalid(f("elevation"), e.to_string());
                nan_geometry()
            })
        } else {
            nan_geometry()
        };
        NtnLinkSpec {
            name: l.name.clone(),
            band,
            link: NtnLinkConfig {
                direction,
                fc_ghz,
                bandwidth_hz,
                eirp_dbw,
                g_over_t_db_k: g_over_t,
                losses,
                geometry,
            },
        }
    }

    fn ris_budget(&mut self, b: &RawRisBudget) -> RisBudgetSpec {
        let convention = match &b.convention {
            Some(t) => self.parsed("ris_budget.convention", t, GapConvention::default()),
            None => GapConvention::default(),
        };
        let threshold_db = match &b.threshold {
            Some(t) => self.q("ris_budget.threshold", t, Dimension::Decibel),
            None => 0.0,
        };
        if b.link.is_empty() {
            self.invalid("ris_budget.link", "at least one link is required");
        }
        let links = b.link.iter().enumerate().map(|(i, l)| self.budget_link(i, l)).collect();
        self.unique("ris_budget.link", b.link.iter().map(|l| l.name.as_str()));
        RisBudgetSpec {
            convention,
            threshold_db,
            links,
        }
    }

    fn budget_link(&mut self, i: usize, l: &RawBudgetLink) -> BudgetLinkSpec {
        let f = |k: &str| format!("ris_budget.link[{i}].{k}");
        self.label(&f("name"), &l.name);
        let mil = match (&l.mil, &l.mil_inputs) {
            (Some(t), None) => MilSpec::Fixed(self.q(&f("mil"), t, Dimension::Decibel)),
            (None, Some(m)) => MilSpec::Computed(self.mil_inputs(&f("mil_inputs"), m)),
            _ => {
                self.invalid(f("mil"), "give exactly one of `mil` or `mil_inputs`");
                MilSpec::Fixed(f64::NAN)
            }
        };
        BudgetLinkSpec {
            name: l.name.clone(),
            mil,
            shadow_margin_db: self.non_negative(&f("shadow_margin"), &l.shadow_margin, Dimension::Decibel),
            penetration_margin_db: self.non_negative(&f("penetration_margin"), &l.penetration_margin, Dimension::Decibel),
            body_losses_db: self.non_negative(&f("body_losses"), &l.body_losses, Dimension::Decibel),
            deployment: self.deployment(&f("deployment"), &l.deployment),
        }
    }

    fn mil_inputs(&mut self, base: &str, m: &RawMilInputs) -> MilInputs<f64> {
        let f = |k: &str| format!("{base}.{k}");
        MilInputs {
            tx_power_dbw: self.q(&f("tx_power"), &m.tx_power, Dimension::Power),
            tx_losses_db: self.non_negative(&f("tx_losses"), &m.tx_losses, Dimension::Decibel),
            rx_gain_dbi: self.q(&f("rx_gain"), &m.rx_gain, Dimension::AntennaGain),
            rx_losses_db: self.non_negative(&f("rx_losses"), &m.rx_losses, Dimension::Decibel),
            noise: NoiseParams::new(
                self.positive(&f("bandwidth"), &m.bandwidth, Dimension::Frequency),
                self.non_negative(&f("noise_figure"), &m.noise_figure, Dimension::Decibel),
            ),
            required_snr_db: self.q(&f("required_snr"), &m.required_snr, Dimension::Decibel),
        }
    }

    fn required<'a>(&mut self, field: String, v: &'a Option<String>) -> Option<&'a str> {
        if v.is_none() {
            self.invalid(field, "required for this deployment model");
        }
        v.as_deref()
    }

    fn deployment(&mut self, base: &str, d: &RawDeployment) -> Deployment {
        let f = |k: &str| format!("{base}.{k}");
        match d.model.as_str() {
            "uma" => {
                for (k, v) in [("bs_ris", &d.bs_ris), ("ris_ue", &d.ris_ue)] {
                    if v.is_some() {
                        self.invalid(f(k), "only valid for the cascade model");
                    }
                }
                let d2d = self
                    .required(f("distance"), &d.distance)
                    .map_or(f64::NAN, |t| self.positive(&f("distance"), t, Dimension::Length));
                let fc = self
                    .required(f("frequency"), &d.frequency)
                    .map_or(f64::NAN, |t| self.frequency_ghz(&f("frequency"), t));
                let state = self
                    .required(f("state"), &d.state)
                    .map_or(LinkState::Los, |t| self.parsed(&f("state"), t, LinkState::Los));
                let mut p = UmaParams::new(d2d, fc, state);
                if let Some(t) = &d.bs_height {
                    p.h_bs_m = self.positive(&f("bs_height"), t, Dimension::Length);
                }
                if let Some(t) = &d.ue_height {
                    p.h_ut_m = self.positive(&f("ue_height"), t, Dimension::Length);
                }
                if let Some(t) = &d.env_height {
                    p.coefficients.env_height_m = self.non_negative(&f("env_height"), t, Dimension::Length);
                }
                let inputs_ok = [d2d, fc, p.h_bs_m, p.h_ut_m, p.coefficients.env_height_m]
                    .iter()
                    .all(|v| v.is_finite());
                if inputs_ok {
                    if let Err(e) = uma_path_loss(&p) {
                        self.invalid(base.to_string(), e.to_string());
                    }
                }
                Deployment::Uma(p)
            }
            "cascade" => {
                for (k, v) in [
                    ("distance", &d.distance),
                    ("frequency", &d.frequency),
                    ("bs_height", &d.bs_height),
                    ("ue_height", &d.ue_height),
                    ("env_height", &d.env_height),
                    ("state", &d.state),
                ] {
                    if v.is_some() {
                        self.invalid(f(k), "only valid for the uma model");
                    }
                }
                let bs_ris_db = self
                    .required(f("bs_ris"), &d.bs_ris)
                    .map_or(f64::NAN, |t| self.non_negative(&f("bs_ris"), t, Dimension::Decibel));
                let ris_ue_db = self
                    .required(f("ris_ue"), &d.ris_ue)
                    .map_or(f64::NAN, |t| self.non_negative(&f("ris_ue"), t, Dimension::Decibel));
                Deployment::Cascade { bs_ris_db, ris_ue_db }
            }
            other => {
                self.invalid(f("model"), format!("unknown model `{other}` (expected uma or cascade)"));
                Deployment::Cascade {
                    bs_ris_db: f64::NAN,
                    ris_ue_db: f64::NAN,
                }
            }
        }
    }

    fn coverage(&mut self, c: &RawCoverage, budget_names: &[&str]) -> CoverageSpec {
        let target_area_km2 = self.non_negative("coverage.target_area", &c.target_area, Dimension::Area);
        let policy = match &c.policy {
            Some(t) => self.parsed("coverage.policy", t, SitePolicy::default()),
            None => SitePolicy::default(),
        };
        let mut links = Vec::with_capacity(c.link.len());
        for (i, l) in c.link.iter().enumerate() {
            let f = |k: &str| format!("coverage.link[{i}].{k}");
            self.label(&f("name"), &l.name);
            self.reference(f("budget_link"), &l.budget_link, budget_names);
            let cell_radius_m = l
                .cell_radius
                .as_ref()
                .map(|t| self.positive(&f("cell_radius"), t, Dimension::Length));
            links.push(CoverageLinkSpec {
                name: l.name.clone(),
                budget_link: l.budget_link.clone(),
                cell_radius_m,
            });
        }
        self.unique("coverage.link", c.link.iter().map(|l| l.name.as_str()));
        CoverageSpec {
            target_area_km2,
            policy,
            links,
        }
    }

    fn capacity(&mut self, i: usize, c: &RawCapacity) -> CapacitySpec {
        let f = |k: &str| format!("capacity[{i}].{k}");
        self.label(&f("name"), &c.name);
        let params = NrCarrierCapacityParams {
            carriers: c.carriers,
            layers_dl: c.layers_dl,
            layers_ul: c.layers_ul,
            qm_dl: c.qm_dl,
            qm_ul: c.qm_ul,
            scaling: c.scaling,
            numerology: c.numerology,
            n_prb: c.prbs,
            overhead_dl: c.overhead_dl,
            overhead_ul: c.overhead_ul,
            bandwidth_hz: self.positive(&f("bandwidth"), &c.bandwidth, Dimension::Frequency),
        };
        if params.bandwidth_hz.is_finite() {
            if let Err(e) = params.validate() {
                self.invalid(f("parameters"), e.to_string());
            }
        }
        let traffic = |rate: f64, duty: f64| TrafficProfile {
            per_user_busy_hour_rate_bps: rate,
            duty_ratio: duty,
            connected_ratio: c.connected_ratio,
            overload_threshold: c.overload_threshold,
            simultaneous_users: c.simultaneous_users,
            max_users_per_site: c.max_users_per_site,
        };
        let traffic_dl = traffic(
            self.positive(&f("per_user_rate_dl"), &c.per_user_rate_dl, Dimension::DataRate),
            c.duty_ratio_dl,
        );
        let traffic_ul = traffic(
            self.positive(&f("per_user_rate_ul"), &c.per_user_rate_ul, Dimension::DataRate),
            c.duty_ratio_ul,
        );
        for (dir, t) in [("dl", &traffic_dl), ("ul", &traffic_ul)] {
            if t.per_user_busy_hour_rate_bps.is_finite() {
                if let Err(e) = t.validate() {
                    self.invalid(f(&format!("traffic_{dir}")), e.to_string());
                }
            }
        }
        if c.max_users_per_site == 0 {
            self.invalid(f("max_users_per_site"), "must be > 0");
        }
        CapacitySpec {
            name: c.name.clone(),
            params,
            traffic_dl,
            traffic_ul,
        }
    }

    fn map(&mut self, m: &RawMap, ntn_names: &[&str], capacity_names: &[&str]) -> MapSpec {
        let resolution_m = self.positive("map.resolution", &m.resolution, Dimension::Length);
        let vertices: Vec<_> = m
            .polygon
            .iter()
            .enumerate()
            .map(|(i, t)| self.point(&format!("map.polygon[{i}]"), t))
            .collect();
        let polygon = if vertices.iter().all(|p| p.x.is_finite() && p.y.is_finite()) {
            Polygon::new(vertices.clone()).unwrap_or_else(|e| {
                self.invalid("map.polygon", e.to_string());
                Polygon { vertices }
            })
        } else {
            Polygon { vertices }
        };
        let ue = UeParams {
            noise_figure_db: self.non_negative("map.ue.noise_figure", &m.ue.noise_figure, Dimension::Decibel),
            height_m: self.positive("map.ue.height", &m.ue.height, Dimension::Length),
        };
        if m.bs.is_empty() {
            self.invalid("map.bs", "at least one base station is required");
        }
        let mut bs = Vec::with_capacity(m.bs.len());
        for (i, b) in m.bs.iter().enumerate() {
            let f = |k: &str| format!("map.bs[{i}].{k}");
            self.label(&f("name"), &b.name);
            self.reference(f("capacity"), &b.capacity, capacity_names);
            bs.push(MapBsSpec {
                name: b.name.clone(),
                position: self.point(&f("position"), &b.position),
                height_m: self.positive(&f("height"), &b.height, Dimension::Length),
                eirp_dbw: self.q(&f("eirp"), &b.eirp, Dimension::Power),
                fc_ghz: self.frequency_ghz(&f("frequency"), &b.frequency),
                bandwidth_hz: self.positive(&f("bandwidth"), &b.bandwidth, Dimension::Frequency),
                state: self.parsed(&f("state"), &b.state, LinkState::Los),
                capacity: b.capacity.clone(),
            });
        }
        let bs_names: Vec<&str> = m.bs.iter().map(|b| b.name.as_str()).collect();
        let mut ris = Vec::with_capacity(m.ris.len());
        for (i, r) in m.ris.iter().enumerate() {
            let f = |k: &str| format!("map.ris[{i}].{k}");
            self.label(&f("name"), &r.name);
            self.reference(f("serving_bs"), &r.serving_bs, &bs_names);
            ris.push(MapRisSpec {
                name: r.name.clone(),
                position: self.point(&f("position"), &r.position),
                height_m: self.positive(&f("height"), &r.height, Dimension::Length),
                serving_bs: r.serving_bs.clone(),
                gain_db: self.q(&f("gain"), &r.gain, Dimension::AntennaGain),
                reflection_loss_db: self.non_negative(&f("reflection_loss"), &r.reflection_loss, Dimension::Decibel),
                state: self.parsed(&f("state"), &r.state, LinkState::Los),
                bs_ris_loss_db: r
                    .bs_ris_loss
                    .as_ref()
                    .map(|t| self.non_negative(&f("bs_ris_loss"), t, Dimension::Decibel)),
            });
        }
        self.unique(
            "map.bs/map.ris",
            m.bs.iter().map(|b| b.name.as_str()).chain(m.ris.iter().map(|r| r.name.as_str())),
        );
        let ntn = m.ntn.as_ref().map(|n| {
            self.reference("map.ntn.link".into(), &n.link, ntn_names);
            self.reference("map.ntn.capacity".into(), &n.capacity, capacity_names);
            let footprint = match (&n.footprint_center, &n.footprint_radius) {
                (Some(c), Some(r)) => Some((
                    self.point("map.ntn.footprint_center", c),
                    self.positive("map.ntn.footprint_radius", r, Dimension::Length),
                )),
                (None, None) => None,
                _ => {
                    self.invalid("map.ntn.footprint", "give both footprint_center and footprint_radius, or neither");
                    None
                }
            };
            MapNtnSpec {
                link: n.link.clone(),
                capacity: n.capacity.clone(),
                co_channel: n.co_channel,
                footprint,
            }
        });
        MapSpec {
            resolution_m,
            polygon,
            rsrp_threshold_dbw: self.q("map.rsrp_threshold", &m.rsrp_threshold, Dimension::Power),
            sinr_target_db: self.q("map.sinr_target", &m.sinr_target, Dimension::Decibel),
            ue,
            bs,
            ris,
            ntn,
        }
    }
}

fn nan_geometry() -> LinkGeometry<f64> {
    LinkGeometry {
        altitude_m: f64::NAN,
        elevation_deg: f64::NAN,
        earth_radius_m: f64::NAN,
        slant_range_m: f64::NAN,
    }
}

// ---------------------------------------------------------------------------
// Serialization.

fn db(v: f64) -> String {
    format_quantity(v, Dimension::Decibel)
}

fn ghz(v: f64) -> String {
    format!("{v} GHz")
}

fn len(v: f64) -> String {
    format_quantity(v, Dimension::Length)
}

fn pt(p: &Point<f64>) -> String {
    format_point(p.x, p.y)
}

fn to_raw(c: &PlanningConfig) -> RawConfig {
    RawConfig {
        name: c.name.clone(),
        output_dir: c.output_dir.as_ref().map(|p| p.display().to_string()),
        ntn_link: c
            .ntn_links
            .iter()
            .map(|l| {
                let k = &l.link;
                RawNtnLink {
                    name: l.name.clone(),
                    band: l.band.to_string(),
                    direction: k.direction.to_string(),
                    frequency: ghz(k.fc_ghz),
                    bandwidth: format_quantity(k.bandwidth_hz, Dimension::Frequency),
                    eirp: format_quantity(k.eirp_dbw, Dimension::Power),
                    g_over_t: format_quantity(k.g_over_t_db_k, Dimension::GainOverTemperature),
                    altitude: len(k.geometry.altitude_m),
                    elevation: format_quantity(k.geometry.elevation_deg, Dimension::Angle),
                    earth_radius: Some(len(k.geometry.earth_radius_m)),
                    atmospheric_loss: db(k.losses.atmospheric_db),
                    shadow_margin: db(k.losses.shadow_margin_db),
                    scintillation_loss: db(k.losses.scintillation_db),
                    polarization_loss: db(k.losses.polarization_db),
                    additional_loss: db(k.losses.additional_db),
                }
            })
            .collect(),
        ris_budget: c.ris_budget.as_ref().map(|b| RawRisBudget {
            convention: Some(b.convention.to_string()),
            threshold: Some(db(b.threshold_db)),
            link: b
                .links
                .iter()
                .map(|l| {
                    let (mil, mil_inputs) = match l.mil {
                        MilSpec::Fixed(v) => (Some(db(v)), None),
                        MilSpec::Computed(m) => (
                            None,
                            Some(RawMilInputs {
                                tx_power: format_quantity(m.tx_power_dbw, Dimension::Power),
                                tx_losses: db(m.tx_losses_db),
                                rx_gain: format_quantity(m.rx_gain_dbi, Dimension::AntennaGain),
                                rx_losses: db(m.rx_losses_db),
                                noise_figure: db(m.noise.noise_figure_db),
                                bandwidth: format_quantity(m.noise.bandwidth_hz, Dimension::Frequency),
                                required_snr: db(m.required_snr_db),
                            }),
                        ),
                    };
                    let deployment = match l.deployment {
                        Deployment::Uma(p) => RawDeployment {
                            model: "uma".into(),
                            distance: Some(len(p.d2d_m)),
                            frequency: Some(ghz(p.fc_ghz)),
                            bs_height: Some(len(p.h_bs_m)),
                            ue_height: Some(len(p.h_ut_m)),
                            env_height: Some(len(p.coefficients.env_height_m)),
                            state: Some(p.state.to_string()),
                            ..RawDeployment::default()
                        },
                        Deployment::Cascade { bs_ris_db, ris_ue_db } => RawDeployment {
                            model: "cascade".into(),
                            bs_ris: Some(db(bs_ris_db)),
                            ris_ue: Some(db(ris_ue_db)),
                            ..RawDeployment::default()
                        },
                    };
                    RawBudgetLink {
                        name: l.name.clone(),
                        mil,
                        shadow_margin: db(l.shadow_margin_db),
                        penetration_margin: db(l.penetration_margin_db),
                        body_losses: db(l.body_losses_db),
                        mil_inputs,
                        deployment,
                    }
                })
                .collect(),
        }),
        coverage: c.coverage.as_ref().map(|cv| RawCoverage {
            target_area: format_quantity(cv.target_area_km2, Dimension::Area),
            policy: Some(cv.policy.to_string()),
            link: cv
                .links
                .iter()
                .map(|l| RawCoverageLink {
                    name: l.name.clone(),
                    budget_link: l.budget_link.clone(),
                    cell_radius: l.cell_radius_m.map(len),
                })
                .collect(),
        }),
        capacity: c
            .capacity
            .iter()
            .map(|s| RawCapacity {
                name: s.name.clone(),
                carriers: s.params.carriers,
                layers_dl: s.params.layers_dl,
                layers_ul: s.params.layers_ul,
                qm_dl: s.params.qm_dl,
                qm_ul: s.params.qm_ul,
                scaling: s.params.scaling,
                numerology: s.params.numerology,
                prbs: s.params.n_prb,
                overhead_dl: s.params.overhead_dl,
                overhead_ul: s.params.overhead_ul,
                bandwidth: format_quantity(s.params.bandwidth_hz, Dimension::Frequency),
                per_user_rate_dl: format_quantity(s.traffic_dl.per_user_busy_hour_rate_bps, Dimension::DataRate),
                per_user_rate_ul: format_quantity(s.traffic_ul.per_user_busy_hour_rate_bps, Dimension::DataRate),
                duty_ratio_dl: s.traffic_dl.duty_ratio,
                duty_ratio_ul: s.traffic_ul.duty_ratio,
                connected_ratio: s.traffic_dl.connected_ratio,
                overload_threshold: s.traffic_dl.overload_threshold,
                simultaneous_users: s.traffic_dl.simultaneous_users,
                max_users_per_site: s.traffic_dl.max_users_per_site,
            })
            .collect(),
        map: c.map.as_ref().map(|m| RawMap {
            resolution: len(m.resolution_m),
            polygon: m.polygon.vertices.iter().map(pt).collect(),
            rsrp_threshold: format_quantity(m.rsrp_threshold_dbw, Dimension::Power),
            sinr_target: db(m.sinr_target_db),
            ue: RawUe {
                noise_figure: db(m.ue.noise_figure_db),
                height: len(m.ue.height_m),
            },
            bs: m
                .bs
                .iter()
                .map(|b| RawBs {
                    name: b.name.clone(),
                    position: pt(&b.position),
                    height: len(b.height_m),
                    eirp: format_quantity(b.eirp_dbw, Dimension::Power),
                    frequency: ghz(b.fc_ghz),
                    bandwidth: format_quantity(b.bandwidth_hz, Dimension::Frequency),
                    state: b.state.to_string(),
                    capacity: b.capacity.clone(),
                })
                .collect(),
            ris: m
                .ris
                .iter()
                .map(|r| RawRis {
                    name: r.name.clone(),
                    position: pt(&r.position),
                    height: len(r.height_m),
                    serving_bs: r.serving_bs.clone(),
                    gain: format_quantity(r.gain_db, Dimension::AntennaGain),
                    reflection_loss: db(r.reflection_loss_db),
                    state: r.state.to_string(),
                    bs_ris_loss: r.bs_ris_loss_db.map(db),
                })
                .collect(),
            ntn: m.ntn.as_ref().map(|n| RawMapNtn {
                link: n.link.clone(),
                capacity: n.capacity.clone(),
                co_channel: n.co_channel,
                footprint_center: n.footprint.map(|(c, _)| pt(&c)),
                footprint_radius: n.footprint.map(|(_, r)| len(r)),
            }),
        }),
    }
}

/// Serializes a configuration with canonical units; loading the result
/// yields an equal configuration.
pub fn to_toml_string(config: &PlanningConfig) -> String {
    toml::to_string(&to_raw(config)).expect("configuration schema serializes to TOML")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"

[[ntn_link]]
name = "A"
band = "S"
direction = "DL"
frequency = "2 GHz"
bandwidth = "30 MHz"
eirp = "78.8 dBW"
g_over_t = "-31.6 dB/K"
altitude = "600 km"
elevation = "30 deg"
atmospheric_loss = "0.1 dB"
shadow_margin = "3 dB"
scintillation_loss = "2.2 dB"
polarization_loss = "0 dB"
additional_loss = "0 dB"
"#;

    #[test]
    fn minimal_loads() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.ntn_links[0].link.bandwidth_hz, 30e6);
        assert_eq!(c.ntn_links[0].link.fc_ghz, 2.0);
        let again = parse_config(&to_toml_string(&c)).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn collects_every_error() {
        let text = MINIMAL
            .replace("\"30 MHz\"", "\"-5 MHz\"")
            .replace("\"600 km\"", "\"600 dB\"")
            .replace("\"DL\"", "\"sideways\"");
        let errs = parse_config(&text).unwrap_err();
        assert_eq!(errs.len(), 3, "{errs:?}");
        assert!(errs.iter().any(|e| e.field() == Some("ntn_link[0].bandwidth")));
        assert!(errs
            .iter()
            .any(|e| matches!(e, ConfigError::Unit { field, .. } if field == "ntn_link[0].altitude")));
    }

    #[test]
    fn syntax_error_has_line() {
        let errs = parse_config("name = \"x\"\n\nbogus = = 3\n").unwrap_err();
        assert!(matches!(errs[0], ConfigError::Parse { line: 3, .. }), "{errs:?}");
    }

    #[test]
    fn line_column_counts_from_one() {
        assert_eq!(line_column("ab\ncd", 0), (1, 1));
        assert_eq!(line_column("ab\ncd", 4), (2, 2));
    }
}
