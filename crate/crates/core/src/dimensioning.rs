//! Coverage and capacity dimensioning: NR peak rates, cell areas, site
//! counts and cell-radius inversion of the path-loss models.

use std::fmt;
use std::str::FromStr;

use crate::error::{PlanError, Result};
use crate::link_budget::Direction;
use crate::propagation::{ris_cascade_path_loss, uma_path_loss, UmaParams};
use crate::scalar::Scalar;

/// Maximum code rate 948/1024.
pub const R_MAX: f64 = 948.0 / 1024.0;

/// Hexagonal cell-area coefficient applied to radius².
pub const HEX_AREA_COEFF: f64 = 2.6;

/// Bisection stops once the bracket is narrower than this, in meters.
pub const RADIUS_TOLERANCE_M: f64 = 0.01;

/// NR carrier parameters entering the peak-rate formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NrCarrierCapacityParams<T> {
    pub carriers: u32,
    pub layers_dl: u32,
    pub layers_ul: u32,
    pub qm_dl: u32,
    pub qm_ul: u32,
    pub scaling: T,
    pub numerology: u32,
    pub n_prb: u32,
    pub overhead_dl: T,
    pub overhead_ul: T,
    pub bandwidth_hz: T,
}

impl<T: Scalar> NrCarrierCapacityParams<T> {
    pub fn r_max() -> T {
        T::lit(R_MAX)
    }

    /// Subcarrier spacing 15 kHz · 2^μ.
    pub fn scs_hz(&self) -> T {
        T::lit(15e3) * T::lit(2.0).powi(self.numerology as i32)
    }

    /// Average OFDM symbol duration 1 ms / (14 · 2^μ).
    pub fn symbol_duration_s(&self) -> T {
        T::lit(1e-3) / (T::lit(14.0) * T::lit(2.0).powi(self.numerology as i32))
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = |name: &'static str, v: u32, lo: u32, hi: u32| {
            if v < lo || v > hi {
                Err(PlanError::domain(name, format!("{v} outside [{lo}, {hi}]")))
            } else {
                Ok(())
            }
        };
        in_range("carriers", self.carriers, 1, 16)?;
        in_range("DL layers", self.layers_dl, 1, 8)?;
        in_range("UL layers", self.layers_ul, 1, 8)?;
        in_range("DL modulation order", self.qm_dl, 1, 8)?;
        in_range("UL modulation order", self.qm_ul, 1, 8)?;
        in_range("numerology", self.numerology, 0, 6)?;
        in_range("PRB count", self.n_prb, 1, 275)?;
        for (name, oh) in [("DL overhead", self.overhead_dl), ("UL overhead", self.overhead_ul)] {
            if !(oh >= T::zero() && oh <= T::one()) {
                return Err(PlanError::domain(name, format!("{oh} outside [0, 1]")));
            }
        }
        if !(self.scaling > T::zero() && self.scaling <= T::one()) {
            return Err(PlanError::domain("scaling factor", format!("{} outside (0, 1]", self.scaling)));
        }
        if !(self.bandwidth_hz > T::zero()) {
            return Err(PlanError::domain("bandwidth", format!("{} Hz must be > 0", self.bandwidth_hz)));
        }
        Ok(())
    }
}

/// Approximate NR peak data rate in bit/s, summed over identical carriers.
pub fn peak_data_rate<T: Scalar>(p: &NrCarrierCapacityParams<T>, direction: Direction) -> Result<T> {
    p.validate()?;
    let (layers, qm, oh) = match direction {
        Direction::Downlink => (p.layers_dl, p.qm_dl, p.overhead_dl),
        Direction::Uplink => (p.layers_ul, p.qm_ul, p.overhead_ul),
    };
    let re_rate = T::lit(12.0) * T::lit(p.n_prb as f64) / p.symbol_duration_s();
    let per_carrier = T::lit(layers as f64)
        * T::lit(qm as f64)
        * p.scaling
        * NrCarrierCapacityParams::<T>::r_max()
        * re_rate
        * (T::one() - oh);
    Ok(T::lit(p.carriers as f64) * per_carrier)
}

/// Hexagonal cell area in km² for a radius in meters.
pub fn cell_area<T: Scalar>(radius_m: T) -> Result<T> {
    if !(radius_m >= T::zero()) {
        return Err(PlanError::domain("cell radius", format!("{radius_m} m must be >= 0")));
    }
    // 2.6·(r/1000)² written as 26·r²/1e7 keeps the integer-valued part exact.
    Ok(T::lit(HEX_AREA_COEFF * 10.0) * radius_m * radius_m / T::lit(1e7))
}

/// Rounding policy for site counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SitePolicy {
    /// Round up: every part of the target is covered.
    #[default]
    Ceil,
    /// Round to the nearest whole site.
    Nearest,
}

impl fmt::Display for SitePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SitePolicy::Ceil => "ceil",
            SitePolicy::Nearest => "nearest",
        })
    }
}

impl FromStr for SitePolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ceil" => Ok(SitePolicy::Ceil),
            "nearest" => Ok(SitePolicy::Nearest),
            other => Err(format!("unknown site policy `{other}` (expected ceil or nearest)")),
        }
    }
}

// Ratios within this relative distance of an integer count as that integer,
// so 3.0000000000000004 does not ceil to 4.
const INTEGER_SNAP: f64 = 1e-9;

fn snap<T: Scalar>(x: T) -> T {
    let r = x.round();
    if (x - r).abs() <= T::lit(INTEGER_SNAP) * r.abs().max(T::one()) {
        r
    } else {
        x
    }
}

/// Number of cells of `cell_area_km2` needed to cover `target_area_km2`.
pub fn sites_for_coverage<T: Scalar>(target_area_km2: T, cell_area_km2: T, policy: SitePolicy) -> Result<u64> {
    if !(cell_area_km2 > T::zero()) {
        return Err(PlanError::domain("cell area", format!("{cell_area_km2} km² must be > 0")));
    }
    if !(target_area_km2 >= T::zero()) {
        return Err(PlanError::domain("target area", format!("{target_area_km2} km² must be >= 0")));
    }
    if target_area_km2 == T::zero() {
        return Ok(0);
    }
    let ratio = snap(target_area_km2 / cell_area_km2);
    let n = match policy {
        SitePolicy::Ceil => ratio.ceil(),
        SitePolicy::Nearest => ratio.round(),
    };
    Ok(n.to_u64().unwrap_or(u64::MAX).max(1))
}

/// Site counts under both rounding policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageSites<T> {
    pub ratio: T,
    pub ceil: u64,
    pub nearest: u64,
}

impl<T: Scalar> CoverageSites<T> {
    pub fn compute(target_area_km2: T, cell_area_km2: T) -> Result<Self> {
        Ok(Self {
            ceil: sites_for_coverage(target_area_km2, cell_area_km2, SitePolicy::Ceil)?,
            nearest: sites_for_coverage(target_area_km2, cell_area_km2, SitePolicy::Nearest)?,
            ratio: target_area_km2 / cell_area_km2,
        })
    }

    pub fn under(&self, policy: SitePolicy) -> u64 {
        match policy {
            SitePolicy::Ceil => self.ceil,
            SitePolicy::Nearest => self.nearest,
        }
    }
}

/// Radius, area and site count of a coverage design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveragePlan<T> {
    pub cell_radius_m: T,
    pub cell_area_km2: T,
    pub target_area_km2: T,
    pub sites_required: u64,
}

impl<T: Scalar> CoveragePlan<T> {
    pub fn new(cell_radius_m: T, target_area_km2: T, policy: SitePolicy) -> Result<Self> {
        let area = cell_area(cell_radius_m)?;
        Ok(Self {
            cell_radius_m,
            cell_area_km2: area,
            target_area_km2,
            sites_required: sites_for_coverage(target_area_km2, area, policy)?,
        })
    }
}

/// Sites needed to serve `simultaneous_users` when each site takes at most
/// `max_users_per_site`.
pub fn sites_for_capacity(simultaneous_users: u64, max_users_per_site: u64) -> Result<u64> {
    if max_users_per_site == 0 {
        return Err(PlanError::domain("users per site", "site capacity must be > 0"));
    }
    Ok(simultaneous_users.div_ceil(max_users_per_site))
}

/// Busy-hour traffic assumptions for one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficProfile<T> {
    pub per_user_busy_hour_rate_bps: T,
    pub duty_ratio: T,
    pub connected_ratio: T,
    pub overload_threshold: T,
    pub simultaneous_users: u64,
    pub max_users_per_site: u64,
}

impl<T: Scalar> TrafficProfile<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("duty ratio", self.duty_ratio),
            ("connected ratio", self.connected_ratio),
            ("overload threshold", self.overload_threshold),
        ] {
            if !(v > T::zero() && v <= T::one()) {
                return Err(PlanError::domain(name, format!("{v} outside (0, 1]")));
            }
        }
        if !(self.per_user_busy_hour_rate_bps > T::zero()) {
            return Err(PlanError::domain(
                "per-user rate",
                format!("{} bit/s must be > 0", self.per_user_busy_hour_rate_bps),
            ));
        }
        Ok(())
    }
}

/// Subscribers a cell of `cell_rate_bps` carries in the busy hour.
pub fn subscribers_supported<T: Scalar>(cell_rate_bps: T, t: &TrafficProfile<T>) -> Result<u64> {
    t.validate()?;
    if !(cell_rate_bps >= T::zero()) {
        return Err(PlanError::domain("cell rate", format!("{cell_rate_bps} bit/s must be >= 0")));
    }
    let demand = t.per_user_busy_hour_rate_bps * t.duty_ratio * t.connected_ratio;
    let n = snap(cell_rate_bps * t.overload_threshold / demand).floor();
    Ok(n.to_u64().unwrap_or(u64::MAX))
}

/// Path-loss model inverted by [`max_cell_radius`]. The distance being
/// solved for replaces `d2d_m` of the contained UMa link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusModel<T> {
    /// Direct BS→UE link.
    Uma(UmaParams<T>),
    /// Fixed BS→RIS segment loss plus a RIS→UE segment whose length varies.
    RisCascade { bs_ris_db: T, ris_ue: UmaParams<T> },
}

impl<T: Scalar> RadiusModel<T> {
    pub fn path_loss_at(&self, d2d_m: T) -> Result<T> {
        match self {
            RadiusModel::Uma(p) => uma_path_loss(&p.at_distance(d2d_m)),
            RadiusModel::RisCascade { bs_ris_db, ris_ue } => {
                Ok(ris_cascade_path_loss(*bs_ris_db, uma_path_loss(&ris_ue.at_distance(d2d_m))?))
            }
        }
    }

    fn distance_range(&self) -> (T, T) {
        let c = match self {
            RadiusModel::Uma(p) => &p.coefficients,
            RadiusModel::RisCascade { ris_ue, .. } => &ris_ue.coefficients,
        };
        (c.min_d2d_m, c.max_d2d_m)
    }
}

/// Largest distance at which the model's path loss stays within `apl_db`,
/// found by bisection. Saturates at the model's maximum valid distance.
pub fn max_cell_radius<T: Scalar>(apl_db: T, model: &RadiusModel<T>) -> Result<T> {
    let (mut lo, mut hi) = model.distance_range();
    let floor = model.path_loss_at(lo)?;
    if apl_db < floor {
        return Err(PlanError::NoCoverage {
            apl_db: apl_db.as_f64(),
            floor_db: floor.as_f64(),
        });
    }
    if model.path_loss_at(hi)? <= apl_db {
        return Ok(hi);
    }
    let tol = T::lit(RADIUS_TOLERANCE_M);
    while hi - lo > tol {
        let mid = (lo + hi) / T::lit(2.0);
        if model.path_loss_at(mid)? <= apl_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::LinkState;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    pub(crate) fn band(numerology: u32, n_prb: u32, dl: f64, ul: f64, bw: f64) -> NrCarrierCapacityParams<f64> {
        NrCarrierCapacityParams {
            carriers: 1,
            layers_dl: 4,
            layers_ul: 4,
            qm_dl: 8,
            qm_ul: 8,
            scaling: 1.0,
            numerology,
            n_prb,
            overhead_dl: dl,
            overhead_ul: ul,
            bandwidth_hz: bw,
        }
    }

    #[test]
    fn numerology_relations() {
        let p = band(1, 273, 0.14, 0.08, 100e6);
        assert_eq!(p.scs_hz(), 30e3);
        assert_abs_diff_eq!(p.symbol_duration_s(), 35.714_285e-6, epsilon = 1e-11);
        assert_eq!(NrCarrierCapacityParams::<f64>::r_max(), 0.925_781_25);
    }

    #[test]
    fn peak_rate_examples() {
        let s = peak_data_rate(&band(0, 106, 0.14, 0.08, 20e6), Direction::Downlink).unwrap();
        assert_abs_diff_eq!(s / 1e9, 0.454, epsilon = 0.001);
        let c = peak_data_rate(&band(1, 273, 0.14, 0.08, 100e6), Direction::Downlink).unwrap();
        assert_abs_diff_eq!(c / 1e9, 2.34, epsilon = 0.01);
        let ka = peak_data_rate(&band(3, 264, 0.18, 0.1, 400e6), Direction::Uplink).unwrap();
        assert_abs_diff_eq!(ka / 1e9, 9.46, epsilon = 0.01);
        let full = peak_data_rate(&band(1, 273, 1.0, 1.0, 100e6), Direction::Downlink).unwrap();
        assert_eq!(full, 0.0);
    }

    #[test]
    fn peak_rate_validation() {
        let mut p = band(1, 273, 0.14, 0.08, 100e6);
        p.qm_dl = 9;
        assert!(peak_data_rate(&p, Direction::Downlink).is_err());
        let mut p = band(1, 273, 1.2, 0.08, 100e6);
        assert!(peak_data_rate(&p, Direction::Downlink).is_err());
        p.overhead_dl = 0.1;
        p.layers_ul = 0;
        assert!(peak_data_rate(&p, Direction::Uplink).is_err());
    }

    #[test]
    fn cell_area_exact() {
        assert_eq!(cell_area(375.0_f64).unwrap(), 0.365625);
        assert_eq!(cell_area(70.0_f64).unwrap(), 0.01274);
        assert_eq!(cell_area(0.0_f64).unwrap(), 0.0);
        assert!(cell_area(-1.0_f64).is_err());
    }

    #[test]
    fn coverage_site_counts() {
        let bs = cell_area(375.0_f64).unwrap();
        assert_eq!(sites_for_coverage(0.041, bs, SitePolicy::Ceil).unwrap(), 1);
        assert_eq!(sites_for_coverage(0.041, bs, SitePolicy::Nearest).unwrap(), 1);
        let ris = cell_area(70.0_f64).unwrap();
        assert_eq!(sites_for_coverage(0.041, ris, SitePolicy::Ceil).unwrap(), 4);
        assert_eq!(sites_for_coverage(0.041, ris, SitePolicy::Nearest).unwrap(), 3);
        assert_eq!(sites_for_coverage(0.0, ris, SitePolicy::Ceil).unwrap(), 0);
        assert!(sites_for_coverage(0.041, 0.0, SitePolicy::Ceil).is_err());
        // Exact multiple does not spill over into an extra site.
        assert_eq!(sites_for_coverage(0.3_f64, 0.1, SitePolicy::Ceil).unwrap(), 3);
        let both = CoverageSites::compute(0.041, ris).unwrap();
        assert_eq!((both.ceil, both.nearest), (4, 3));
        assert_eq!(CoveragePlan::new(70.0, 0.041, SitePolicy::Nearest).unwrap().sites_required, 3);
    }

    #[test]
    fn capacity_site_counts() {
        assert_eq!(sites_for_capacity(15_000, 10_000).unwrap(), 2);
        assert_eq!(sites_for_capacity(5_000, 10_000).unwrap(), 1);
        assert_eq!(sites_for_capacity(0, 10_000).unwrap(), 0);
        assert!(sites_for_capacity(10, 0).is_err());
    }

    fn profile(rate: f64, duty: f64, connected: f64, overload: f64) -> TrafficProfile<f64> {
        TrafficProfile {
            per_user_busy_hour_rate_bps: rate,
            duty_ratio: duty,
            connected_ratio: connected,
            overload_threshold: overload,
            simultaneous_users: 0,
            max_users_per_site: 10_000,
        }
    }

    #[test]
    fn subscriber_examples() {
        assert_eq!(subscribers_supported(454e6, &profile(50e6, 0.1, 0.9, 0.9)).unwrap(), 90);
        assert_eq!(subscribers_supported(7e6, &profile(7e6, 1.0, 1.0, 1.0)).unwrap(), 1);
        assert_eq!(subscribers_supported(2.34e9, &profile(10e6, 0.2, 0.9, 0.9)).unwrap(), 1170);
        assert!(subscribers_supported(1e9, &profile(10e6, 0.0, 0.9, 0.9)).is_err());
        assert!(subscribers_supported(1e9, &profile(0.0, 0.1, 0.9, 0.9)).is_err());
    }

    fn los_35() -> RadiusModel<f64> {
        RadiusModel::Uma(UmaParams::new(100.0, 3.5, LinkState::Los))
    }

    #[test]
    fn radius_round_trip_golden() {
        let apl = uma_path_loss(&UmaParams::new(375.0_f64, 3.5, LinkState::Los)).unwrap();
        let r = max_cell_radius(apl, &los_35()).unwrap();
        assert!((r - 375.0).abs() < 0.5, "{r}");
    }

    #[test]
    fn radius_from_available_path_loss() {
        // Closed-form inverse of the near-breakpoint LOS branch.
        let d3d = 10f64.powf((97.35 - 28.0 - 20.0 * 3.5f64.log10()) / 22.0);
        let oracle = (d3d * d3d - 23.5 * 23.5).sqrt();
        let r = max_cell_radius(97.35, &los_35()).unwrap();
        assert!((r - oracle).abs() < 0.05, "{r} vs {oracle}");
        assert!((r - 456.0).abs() < 3.0);
        assert!(uma_path_loss(&UmaParams::new(r, 3.5, LinkState::Los)).unwrap() <= 97.35);
    }

    #[test]
    fn radius_errors_and_saturation() {
        assert!(matches!(
            max_cell_radius(40.0, &los_35()),
            Err(PlanError::NoCoverage { .. })
        ));
        assert_eq!(max_cell_radius(400.0, &los_35()).unwrap(), 5000.0);
    }

    #[test]
    fn radius_for_cascade() {
        let model = RadiusModel::RisCascade {
            bs_ris_db: 129.443_463_4,
            ris_ue: UmaParams::new(70.0, 3.5, LinkState::Los).with_heights(35.0, 1.5),
        };
        let target = model.path_loss_at(70.0).unwrap();
        let r = max_cell_radius(target, &model).unwrap();
        assert!((r - 70.0_f64).abs() < 0.5);
    }

    proptest! {
        #[test]
        fn peak_rate_linearity(layers in 1u32..=4, qm in 1u32..=4, prb in 1u32..=137, oh in 0.0_f64..0.5, mu in 0u32..=5) {
            let mut p = band(mu, prb, oh, oh, 1e8);
            p.layers_dl = layers;
            p.qm_dl = qm;
            let base = peak_data_rate(&p, Direction::Downlink).unwrap();
            let scaled = |f: &dyn Fn(&mut NrCarrierCapacityParams<f64>)| {
                let mut q = p;
                f(&mut q);
                peak_data_rate(&q, Direction::Downlink).unwrap()
            };
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
            prop_assert!(close(scaled(&|q| q.layers_dl *= 2), 2.0 * base));
            prop_assert!(close(scaled(&|q| q.qm_dl *= 2), 2.0 * base));
            prop_assert!(close(scaled(&|q| q.n_prb *= 2), 2.0 * base));
            prop_assert!(close(scaled(&|q| q.numerology += 1), 2.0 * base));
            let half_oh = scaled(&|q| q.overhead_dl = 1.0 - (1.0 - oh) / 2.0);
            prop_assert!(close(2.0 * half_oh, base));
        }

        #[test]
        fn coverage_ceil_covers_target(r in 1.0_f64..2000.0, a in 1e-4_f64..50.0) {
            let area = cell_area(r).unwrap();
            let n = sites_for_coverage(a, area, SitePolicy::Ceil).unwrap();
            prop_assert!(n as f64 * area >= a * (1.0 - 1e-9));
        }

        #[test]
        fn radius_inversion_identity(d in 10.5_f64..4900.0, nlos: bool) {
            let state = if nlos { LinkState::Nlos } else { LinkState::Los };
            let params = UmaParams::new(d, 3.5, state);
            let apl = uma_path_loss(&params).unwrap();
            let r = max_cell_radius(apl, &RadiusModel::Uma(params)).unwrap();
            prop_assert!((r - d).abs() < 0.5, "{} vs {}", r, d);
        }

        #[test]
        fn radius_monotone_in_apl(a in 75.0_f64..140.0, delta in 0.1_f64..10.0) {
            let r1 = max_cell_radius(a, &los_35()).unwrap();
            let r2 = max_cell_radius(a + delta, &los_35()).unwrap();
            prop_assert!(r2 > r1 || r2 == 5000.0);
        }
    }
}
