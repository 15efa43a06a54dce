//! Link budgets: satellite carrier-to-noise, the SINR combiner, and the
//! maximum-isotropic-loss / gap chain that decides RIS deployment.

use std::fmt;
use std::str::FromStr;

use crate::error::{PlanError, Result};
use crate::geometry::LinkGeometry;
use crate::propagation::fspl;
use crate::scalar::Scalar;
use crate::units::{power_sum_db, thermal_noise_dbw, NoiseParams, BOLTZMANN};

/// Link direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Downlink,
    Uplink,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Downlink => "DL",
            Direction::Uplink => "UL",
        })
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "DL" | "DOWNLINK" => Ok(Direction::Downlink),
            "UL" | "UPLINK" => Ok(Direction::Uplink),
            other => Err(format!("unknown direction `{other}` (expected DL or UL)")),
        }
    }
}

/// Loss terms of a satellite link, dB each.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NtnLosses<T> {
    pub atmospheric_db: T,
    pub shadow_margin_db: T,
    pub scintillation_db: T,
    pub polarization_db: T,
    pub additional_db: T,
}

impl<T: Scalar> NtnLosses<T> {
    pub fn total(&self) -> T {
        self.atmospheric_db
            + self.shadow_margin_db
            + self.scintillation_db
            + self.polarization_db
            + self.additional_db
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("atmospheric loss", self.atmospheric_db),
            ("shadow margin", self.shadow_margin_db),
            ("scintillation loss", self.scintillation_db),
            ("polarization loss", self.polarization_db),
            ("additional loss", self.additional_db),
        ] {
            if !(v >= T::zero()) {
                return Err(PlanError::domain(name, format!("{v} dB must be >= 0")));
            }
        }
        Ok(())
    }
}

/// One satellite service link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NtnLinkConfig<T> {
    pub direction: Direction,
    pub fc_ghz: T,
    pub bandwidth_hz: T,
    pub eirp_dbw: T,
    pub g_over_t_db_k: T,
    pub losses: NtnLosses<T>,
    pub geometry: LinkGeometry<T>,
}

/// Carrier-to-noise evaluation with its intermediate terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnrResult<T> {
    pub fspl_db: T,
    pub total_losses_db: T,
    pub noise_bandwidth_db_hz: T,
    pub cnr_db: T,
}

/// −10·log10(k) in dBW/K/Hz.
pub fn boltzmann_db<T: Scalar>() -> T {
    T::lit(-10.0 * BOLTZMANN.log10())
}

/// Full carrier-to-noise breakdown of a satellite link.
pub fn cnr_breakdown<T: Scalar>(link: &NtnLinkConfig<T>) -> Result<CnrResult<T>> {
    if !(link.bandwidth_hz > T::zero()) {
        return Err(PlanError::domain(
            "bandwidth",
            format!("{} Hz must be > 0", link.bandwidth_hz),
        ));
    }
    link.losses.validate()?;
    let fspl_db = fspl(link.geometry.slant_range_m, link.fc_ghz)?;
    let total_losses_db = link.losses.total();
    let noise_bandwidth_db_hz = T::lit(10.0) * link.bandwidth_hz.log10();
    let cnr_db = link.eirp_dbw + link.g_over_t_db_k - fspl_db - total_losses_db + boltzmann_db()
        - noise_bandwidth_db_hz;
    Ok(CnrResult {
        fspl_db,
        total_losses_db,
        noise_bandwidth_db_hz,
        cnr_db,
    })
}

/// Carrier-to-noise ratio of a satellite link, dB.
pub fn cnr<T: Scalar>(link: &NtnLinkConfig<T>) -> Result<T> {
    cnr_breakdown(link).map(|r| r.cnr_db)
}

/// Terms of the SINR combiner, all powers in dBW.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrBreakdown<T> {
    pub p_signal_dbw: T,
    pub i_ntn_dbw: Vec<T>,
    pub i_ris_dbw: Vec<T>,
    pub i_tn_dbw: Vec<T>,
    pub n0_dbw: T,
    pub sinr_db: T,
}

impl<T: Scalar> SinrBreakdown<T> {
    /// Evaluates the SINR from a serving power, three interference groups
    /// and the noise floor. Empty groups mean no interference of that kind.
    pub fn evaluate(
        p_signal_dbw: T,
        i_ntn_dbw: Vec<T>,
        i_ris_dbw: Vec<T>,
        i_tn_dbw: Vec<T>,
        n0_dbw: T,
    ) -> Result<Self> {
        let sinr_db = sinr_db(p_signal_dbw, &i_ntn_dbw, &i_ris_dbw, &i_tn_dbw, n0_dbw)?;
        Ok(Self {
            p_signal_dbw,
            i_ntn_dbw,
            i_ris_dbw,
            i_tn_dbw,
            n0_dbw,
            sinr_db,
        })
    }

    pub fn snr_db(&self) -> T {
        self.p_signal_dbw - self.n0_dbw
    }
}

/// Signal over (NTN + RIS + terrestrial interference + noise), summed in
/// the linear domain.
pub fn sinr_db<T: Scalar>(
    p_signal_dbw: T,
    i_ntn_dbw: &[T],
    i_ris_dbw: &[T],
    i_tn_dbw: &[T],
    n0_dbw: T,
) -> Result<T> {
    if !p_signal_dbw.is_finite() {
        return Err(PlanError::domain("signal power", format!("{p_signal_dbw} dBW is not finite")));
    }
    let mut denom = Vec::with_capacity(1 + i_ntn_dbw.len() + i_ris_dbw.len() + i_tn_dbw.len());
    denom.push(n0_dbw);
    denom.extend_from_slice(i_ntn_dbw);
    denom.extend_from_slice(i_ris_dbw);
    denom.extend_from_slice(i_tn_dbw);
    if denom.len() == 1 {
        if !n0_dbw.is_finite() {
            return Err(PlanError::domain("noise floor", format!("{n0_dbw} dBW is not finite")));
        }
        return Ok(p_signal_dbw - n0_dbw);
    }
    Ok(p_signal_dbw - power_sum_db(&denom)?)
}

/// Inputs of a maximum-isotropic-loss computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MilInputs<T> {
    pub tx_power_dbw: T,
    pub tx_losses_db: T,
    pub rx_gain_dbi: T,
    pub rx_losses_db: T,
    pub noise: NoiseParams<T>,
    pub required_snr_db: T,
}

impl<T: Scalar> MilInputs<T> {
    pub fn evaluate(&self) -> Result<T> {
        let floor = thermal_noise_dbw(&self.noise)?;
        Ok(mil(
            self.tx_power_dbw,
            self.tx_losses_db,
            self.rx_gain_dbi,
            self.rx_losses_db,
            floor,
            self.required_snr_db,
        ))
    }
}

/// Maximum isotropic loss: the largest path loss the link closes at the
/// required SNR.
pub fn mil<T: Scalar>(
    tx_power_dbw: T,
    tx_losses_db: T,
    rx_gain_dbi: T,
    rx_losses_db: T,
    noise_floor_dbw: T,
    required_snr_db: T,
) -> T {
    tx_power_dbw - tx_losses_db + rx_gain_dbi - rx_losses_db - noise_floor_dbw - required_snr_db
}

/// MIL minus shadow, penetration and body margins.
pub fn available_path_loss<T: Scalar>(mil_db: T, shadow_db: T, penetration_db: T, body_db: T) -> Result<T> {
    for (name, v) in [
        ("shadow margin", shadow_db),
        ("penetration margin", penetration_db),
        ("body loss", body_db),
    ] {
        if !(v >= T::zero()) {
            return Err(PlanError::domain(name, format!("{v} dB must be >= 0")));
        }
    }
    Ok(mil_db - shadow_db - penetration_db - body_db)
}

/// Coverage gap: positive means the link closes with margin, negative is a
/// shortfall.
#[inline]
pub fn coverage_gap<T: Scalar>(apl_db: T, deployment_mpl_db: T) -> T {
    apl_db - deployment_mpl_db
}

/// Orientation of the gap figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapConvention {
    /// `APL − MPL`: positive is margin, negative is shortfall.
    #[default]
    MarginPositive,
    /// `MPL − APL`, the orientation used by published venue budgets.
    ShortfallPositive,
}

impl fmt::Display for GapConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GapConvention::MarginPositive => "margin-positive",
            GapConvention::ShortfallPositive => "shortfall-positive",
        })
    }
}

impl FromStr for GapConvention {
    type Err = PlanError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "margin-positive" | "margin_positive" => Ok(GapConvention::MarginPositive),
            "shortfall-positive" | "shortfall_positive" => Ok(GapConvention::ShortfallPositive),
            _ => Err(PlanError::domain(
                "gap convention",
                format!("`{s}` is neither margin-positive nor shortfall-positive"),
            )),
        }
    }
}

/// [`coverage_gap`] under an explicit orientation.
#[inline]
pub fn coverage_gap_with<T: Scalar>(convention: GapConvention, apl_db: T, deployment_mpl_db: T) -> T {
    match convention {
        GapConvention::MarginPositive => coverage_gap(apl_db, deployment_mpl_db),
        GapConvention::ShortfallPositive => coverage_gap(deployment_mpl_db, apl_db),
    }
}

/// Whether a link's gap calls for a RIS (`gap < threshold`).
#[inline]
pub fn ris_needed<T: Scalar>(gap_db: T, threshold_db: T) -> bool {
    gap_db < threshold_db
}

/// MIL, margins, available path loss, deployment path loss and the resulting gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisLinkBudget<T> {
    pub mil_db: T,
    pub shadow_margin_db: T,
    pub penetration_margin_db: T,
    pub body_losses_db: T,
    pub available_path_loss_db: T,
    pub deployment_mpl_db: T,
    pub gap_db: T,
    pub convention: GapConvention,
}

impl<T: Scalar> RisLinkBudget<T> {
    /// Budget with the default margin-positive gap.
    pub fn evaluate(
        mil_db: T,
        shadow_margin_db: T,
        penetration_margin_db: T,
        body_losses_db: T,
        deployment_mpl_db: T,
    ) -> Result<Self> {
        Self::evaluate_with(
            GapConvention::default(),
            mil_db,
            shadow_margin_db,
            penetration_margin_db,
            body_losses_db,
            deployment_mpl_db,
        )
    }

    pub fn evaluate_with(
        convention: GapConvention,
        mil_db: T,
        shadow_margin_db: T,
        penetration_margin_db: T,
        body_losses_db: T,
        deployment_mpl_db: T,
    ) -> Result<Self> {
        let apl = available_path_loss(mil_db, shadow_margin_db, penetration_margin_db, body_losses_db)?;
        Ok(Self {
            mil_db,
            shadow_margin_db,
            penetration_margin_db,
            body_losses_db,
            available_path_loss_db: apl,
            deployment_mpl_db,
            gap_db: coverage_gap_with(convention, apl, deployment_mpl_db),
            convention,
        })
    }

    pub fn ris_needed(&self) -> bool {
        ris_needed(self.gap_db, T::zero())
    }

    pub fn ris_needed_at(&self, threshold_db: T) -> bool {
        ris_needed(self.gap_db, threshold_db)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use crate::units::dbm_to_dbw;

    fn link(dir: Direction, fc: f64, eirp_dbm: f64, gt: f64, bw: f64, losses: NtnLosses<f64>) -> NtnLinkConfig<f64> {
        NtnLinkConfig {
            direction: dir,
            fc_ghz: fc,
            bandwidth_hz: bw,
            eirp_dbw: dbm_to_dbw(eirp_dbm),
            g_over_t_db_k: gt,
            losses,
            geometry: LinkGeometry::new(600e3, 30.0).unwrap(),
        }
    }

    fn ka_losses() -> NtnLosses<f64> {
        NtnLosses {
            atmospheric_db: 0.5,
            scintillation_db: 0.3,
            ..Default::default()
        }
    }

    fn s_losses() -> NtnLosses<f64> {
        NtnLosses {
            atmospheric_db: 0.1,
            shadow_margin_db: 3.0,
            scintillation_db: 2.2,
            ..Default::default()
        }
    }

    #[test]
    fn satellite_cnr_cases() {
        let sc6_dl = link(Direction::Downlink, 20.0, 60.0, 15.9, 400e6, ka_losses());
        assert_abs_diff_eq!(cnr(&sc6_dl).unwrap(), 8.5, epsilon = 0.15);
        let sc6_ul = link(Direction::Uplink, 30.0, 76.2, 13.0, 400e6, ka_losses());
        assert_abs_diff_eq!(cnr(&sc6_ul).unwrap(), 18.4, epsilon = 0.15);
        let sc9_dl = link(Direction::Downlink, 2.0, 78.8, -31.6, 30e6, s_losses());
        assert_abs_diff_eq!(cnr(&sc9_dl).unwrap(), 6.6, epsilon = 0.15);
        let sc9_ul = link(Direction::Uplink, 2.0, 23.0, 1.1, 360e3, s_losses());
        assert_abs_diff_eq!(cnr(&sc9_ul).unwrap(), 2.8, epsilon = 0.15);
        // The rounded 0.4 MHz figure lands half a dB lower.
        let rounded = link(Direction::Uplink, 2.0, 23.0, 1.1, 400e3, s_losses());
        assert_abs_diff_eq!(cnr(&rounded).unwrap(), 2.279, epsilon = 0.01);
    }

    #[test]
    fn cnr_rejects_bad_inputs() {
        let mut l = link(Direction::Downlink, 20.0, 60.0, 15.9, 0.0, ka_losses());
        assert!(cnr(&l).is_err());
        l.bandwidth_hz = 1e6;
        l.losses.additional_db = -1.0;
        assert!(cnr(&l).is_err());
    }

    #[test]
    fn sinr_examples() {
        assert_eq!(sinr_db(-90.0_f64, &[], &[], &[], -117.0).unwrap(), 27.0);
        let one = sinr_db(-90.0_f64, &[], &[], &[-117.0], -117.0).unwrap();
        assert_abs_diff_eq!(one, 27.0 - 3.0103, epsilon = 1e-4);
        let loud = sinr_db(-90.0_f64, &[-107.0], &[], &[], -117.0).unwrap();
        assert_abs_diff_eq!(loud, 27.0 - 10.414, epsilon = 1e-3);
        let b = SinrBreakdown::evaluate(-90.0_f64, vec![-120.0], vec![-125.0], vec![-119.0], -117.0).unwrap();
        assert!(b.sinr_db < b.snr_db());
    }

    #[test]
    fn mil_examples() {
        assert_eq!(mil(-117.0_f64, 0.0, 0.0, 0.0, -117.0, 0.0), 0.0);
        let m = mil(-7.0_f64, 3.0, 41.08, 20.0, -117.0, -7.1);
        assert_abs_diff_eq!(m, 135.18, epsilon = 0.01);
        let from_noise = MilInputs {
            tx_power_dbw: -7.0_f64,
            tx_losses_db: 3.0,
            rx_gain_dbi: 17.0 + 10.0 * 256.0_f64.log10(),
            rx_losses_db: 20.0,
            noise: NoiseParams::new(100e6, 7.0),
            required_snr_db: -7.1,
        };
        assert_abs_diff_eq!(from_noise.evaluate().unwrap(), 135.18, epsilon = 0.05);
    }

    #[test]
    fn available_path_loss_examples() {
        assert_abs_diff_eq!(
            available_path_loss(131.1538_f64, 8.0, 22.8, 3.0).unwrap(),
            97.3538,
            epsilon = 1e-9
        );
        assert_eq!(available_path_loss(120.0_f64, 0.0, 0.0, 0.0).unwrap(), 120.0);
        assert_abs_diff_eq!(
            available_path_loss(131.1538_f64, 8.0, 3.0, 3.0).unwrap(),
            117.1538,
            epsilon = 1e-9
        );
        assert!(available_path_loss(131.0_f64, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn gap_and_decision() {
        let g = coverage_gap(97.3538_f64, 95.5162);
        assert_abs_diff_eq!(g.abs(), 1.8376, epsilon = 0.01);
        assert_eq!(coverage_gap(90.0_f64, 90.0), 0.0);
        assert_abs_diff_eq!(coverage_gap(154.87_f64, 230.958), -76.088, epsilon = 0.01);
        assert!(ris_needed(-1.84_f64, 0.0));
        assert!(!ris_needed(0.0_f64, 0.0));
        assert!(!ris_needed(76.09_f64, 0.0));
        let budget = RisLinkBudget::evaluate(131.1538_f64, 8.0, 22.8, 3.0, 95.5162).unwrap();
        assert_abs_diff_eq!(budget.gap_db, 1.8376, epsilon = 1e-9);
        assert!(!budget.ris_needed());
        let printed =
            RisLinkBudget::evaluate_with(GapConvention::ShortfallPositive, 131.1538_f64, 8.0, 22.8, 3.0, 95.5162)
                .unwrap();
        assert_abs_diff_eq!(printed.gap_db, -1.8376, epsilon = 1e-9);
        assert!(printed.ris_needed());
    }

    #[test]
    fn convention_text() {
        assert_eq!("shortfall-positive".parse::<GapConvention>().unwrap(), GapConvention::ShortfallPositive);
        assert_eq!(GapConvention::MarginPositive.to_string().parse::<GapConvention>().unwrap(), GapConvention::MarginPositive);
        assert!("upside-down".parse::<GapConvention>().is_err());
    }

    proptest! {
        #[test]
        fn gap_antisymmetric(a in -300.0_f64..300.0, b in -300.0_f64..300.0) {
            prop_assert_eq!(coverage_gap(a, b), -coverage_gap(b, a));
            prop_assert_eq!(coverage_gap_with(GapConvention::ShortfallPositive, a, b), coverage_gap(b, a));
        }

        #[test]
        fn interferer_strictly_lowers_sinr(p in -150.0_f64..0.0, n0 in -140.0_f64..-90.0, i in -160.0_f64..-60.0) {
            let base = sinr_db(p, &[], &[], &[], n0).unwrap();
            prop_assert_eq!(base, p - n0);
            let with = sinr_db(p, &[], &[i], &[], n0).unwrap();
            prop_assert!(with < base);
        }

        #[test]
        fn cnr_loss_and_eirp_sensitivity(extra in 0.01_f64..20.0, bw in 1e5_f64..1e9) {
            let base = link(Direction::Downlink, 20.0, 60.0, 15.9, bw, ka_losses());
            let c0 = cnr(&base).unwrap();
            let mut lossy = base;
            lossy.losses.polarization_db += extra;
            prop_assert!(cnr(&lossy).unwrap() < c0);
            let mut wider = base;
            wider.bandwidth_hz *= 1.0 + extra;
            prop_assert!(cnr(&wider).unwrap() < c0);
            let mut louder = base;
            louder.eirp_dbw += 10.0 * 2.0_f64.log10();
            prop_assert!((cnr(&louder).unwrap() - c0 - 3.0103).abs() < 1e-4);
        }
    }
}
