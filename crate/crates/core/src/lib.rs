//! Deterministic radio network planning for satellite (NTN) and
//! RIS-assisted terrestrial layers serving a high-density venue.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` aliases below fix it to `f64`, which is what the configuration
//! and report layer uses.

pub mod dimensioning;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod link_budget;
pub mod propagation;
pub mod scalar;
pub mod scenario;
pub mod units;

pub use error::{IoError, PlanError, Result};
pub use scalar::Scalar;

pub type PowerDbF64 = units::PowerDb<f64>;
pub type NoiseParamsF64 = units::NoiseParams<f64>;
pub type LinkGeometryF64 = geometry::LinkGeometry<f64>;
pub type LinkGeometryF32 = geometry::LinkGeometry<f32>;
pub type OrbitKinematicsF64 = geometry::OrbitKinematics<f64>;
pub type PathLossBreakdownF64 = propagation::PathLossBreakdown<f64>;
pub type NtnEnvTableF64 = propagation::NtnEnvTable<f64>;
pub type UmaParamsF64 = propagation::UmaParams<f64>;
pub type UmaParamsF32 = propagation::UmaParams<f32>;
pub type RisCascadeF64 = propagation::RisCascade<f64>;
pub type NtnLinkConfigF64 = link_budget::NtnLinkConfig<f64>;
pub type NtnLinkConfigF32 = link_budget::NtnLinkConfig<f32>;
pub type SinrBreakdownF64 = link_budget::SinrBreakdown<f64>;
pub type RisLinkBudgetF64 = link_budget::RisLinkBudget<f64>;
pub type NrCarrierCapacityParamsF64 = dimensioning::NrCarrierCapacityParams<f64>;
pub type TrafficProfileF64 = dimensioning::TrafficProfile<f64>;
pub type CoveragePlanF64 = dimensioning::CoveragePlan<f64>;
pub type ScenarioF64 = grid::Scenario<f64>;
pub type GridResultF64 = grid::GridResult<f64>;
pub type CoverageSummaryF64 = grid::CoverageSummary<f64>;
