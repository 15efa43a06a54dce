use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::Band;
use crate::error::{PlanError, Result};
use crate::scalar::Scalar;

/// Environment class used for line-of-sight probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LosScenario {
    DenseUrban,
    Urban,
    SuburbanRural,
}

/// Shadow fading, clutter loss and LOS probability for one elevation and band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NtnEnvRow<T> {
    pub elevation_deg: T,
    pub band: Band,
    pub sigma_sf_los_db: T,
    pub sigma_sf_nlos_db: T,
    pub clutter_loss_db: T,
    pub p_los_dense_urban: T,
    pub p_los_urban: T,
    pub p_los_suburban_rural: T,
}

impl<T: Scalar> NtnEnvRow<T> {
    pub fn los_probability(&self, scenario: LosScenario) -> T {
        match scenario {
            LosScenario::DenseUrban => self.p_los_dense_urban,
            LosScenario::Urban => self.p_los_urban,
            LosScenario::SuburbanRural => self.p_los_suburban_rural,
        }
    }

    fn validate(&self) -> Result<()> {
        let probs = [self.p_los_dense_urban, self.p_los_urban, self.p_los_suburban_rural];
        if probs.iter().any(|p| !(*p >= T::zero() && *p <= T::one())) {
            return Err(PlanError::domain(
                "LOS probability",
                format!("row at {} deg has a probability outside [0, 1]", self.elevation_deg),
            ));
        }
        let nonneg = [self.sigma_sf_los_db, self.sigma_sf_nlos_db, self.clutter_loss_db];
        if nonneg.iter().any(|v| !(*v >= T::zero())) {
            return Err(PlanError::domain(
                "environment row",
                format!("row at {} deg has a negative sigma or clutter loss", self.elevation_deg),
            ));
        }
        if !(self.elevation_deg > T::zero() && self.elevation_deg <= T::lit(90.0)) {
            return Err(PlanError::domain(
                "elevation",
                format!("{} deg must lie in (0, 90]", self.elevation_deg),
            ));
        }
        Ok(())
    }
}

/// Read-only lookup table keyed by (elevation, band). Elevations match
/// exactly; there is no interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct NtnEnvTable<T> {
    rows: Vec<NtnEnvRow<T>>,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    elevation_deg: f64,
    band: String,
    sigma_los: f64,
    sigma_nlos: f64,
    clutter_db: f64,
    p_los_denseurban: f64,
    p_los_urban: f64,
    p_los_suburban: f64,
}

const ELEVATION_MATCH_DEG: f64 = 1e-9;

impl<T: Scalar> Default for NtnEnvTable<T> {
    /// Dense-urban values at 90° elevation for S and Ka bands.
    fn default() -> Self {
        let row = |band, los: f64, nlos: f64, cl: f64| NtnEnvRow {
            elevation_deg: T::lit(90.0),
            band,
            sigma_sf_los_db: T::lit(los),
            sigma_sf_nlos_db: T::lit(nlos),
            clutter_loss_db: T::lit(cl),
            p_los_dense_urban: T::lit(0.981),
            p_los_urban: T::lit(0.992),
            p_los_suburban_rural: T::lit(0.998),
        };
        Self {
            rows: vec![row(Band::S, 1.2, 9.2, 25.5), row(Band::Ka, 0.6, 12.3, 32.9)],
        }
    }
}

impl<T: Scalar> NtnEnvTable<T> {
    pub fn new(rows: Vec<NtnEnvRow<T>>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            r.validate()?;
            let dup = rows[..i].iter().any(|o| {
                o.band == r.band
                    && (o.elevation_deg - r.elevation_deg).abs() <= T::lit(ELEVATION_MATCH_DEG)
            });
            if dup {
                return Err(PlanError::domain(
                    "environment table",
                    format!("duplicate row for {} band at {} deg", r.band, r.elevation_deg),
                ));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[NtnEnvRow<T>] {
        &self.rows
    }

    /// Parses the comma-separated table format (header row required).
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for (i, rec) in rdr.deserialize::<CsvRow>().enumerate() {
            let rec = rec.map_err(|e| {
                PlanError::domain("environment table", format!("data row {}: {e}", i + 1))
            })?;
            let band = rec.band.parse::<Band>().map_err(|e| {
                PlanError::domain("environment table", format!("data row {}: {e}", i + 1))
            })?;
            rows.push(NtnEnvRow {
                elevation_deg: T::lit(rec.elevation_deg),
                band,
                sigma_sf_los_db: T::lit(rec.sigma_los),
                sigma_sf_nlos_db: T::lit(rec.sigma_nlos),
                clutter_loss_db: T::lit(rec.clutter_db),
                p_los_dense_urban: T::lit(rec.p_los_denseurban),
                p_los_urban: T::lit(rec.p_los_urban),
                p_los_suburban_rural: T::lit(rec.p_los_suburban),
            });
        }
        Self::new(rows)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| {
            PlanError::domain("environment table", format!("{}: {e}", path.display()))
        })?;
        Self::from_csv_reader(file)
    }

    pub fn row(&self, elevation_deg: T, band: Band) -> Result<&NtnEnvRow<T>> {
        self.rows
            .iter()
            .find(|r| {
                r.band == band
                    && (r.elevation_deg - elevation_deg).abs() <= T::lit(ELEVATION_MATCH_DEG)
            })
            .ok_or_else(|| PlanError::MissingRow(format!("{band} band at {elevation_deg} deg")))
    }

    /// LOS probability at an elevation present in the table (any band).
    pub fn los_probability(&self, elevation_deg: T, scenario: LosScenario) -> Result<T> {
        self.rows
            .iter()
            .find(|r| (r.elevation_deg - elevation_deg).abs() <= T::lit(ELEVATION_MATCH_DEG))
            .map(|r| r.los_probability(scenario))
            .ok_or_else(|| PlanError::MissingRow(format!("LOS probability at {elevation_deg} deg")))
    }
}
