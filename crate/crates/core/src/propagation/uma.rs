use super::LinkState;
use crate::error::{PlanError, Result};
use crate::geometry::SPEED_OF_LIGHT;
use crate::scalar::Scalar;

/// Coefficient set of the urban-macro path-loss model.
///
/// LOS below the breakpoint:
///   `los_a + los_near_slope·log10(d3d) + freq_slope·log10(fc)`
/// LOS beyond the breakpoint:
///   `los_a + los_far_slope·log10(d3d) + freq_slope·log10(fc)
///    − bp_coeff·log10(d'bp² + (h_bs − h_ut)²)`
/// NLOS:
///   `max(LOS, nlos_a + nlos_slope·log10(d3d) + freq_slope·log10(fc)
///    − ut_height_slope·(h_ut − ut_height_ref))`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UmaCoefficients<T> {
    pub los_a: T,
    pub los_near_slope: T,
    pub los_far_slope: T,
    pub bp_coeff: T,
    pub nlos_a: T,
    pub nlos_slope: T,
    pub freq_slope: T,
    pub ut_height_slope: T,
    pub ut_height_ref_m: T,
    /// Effective environment height subtracted from both antennas for the breakpoint.
    pub env_height_m: T,
    pub min_d2d_m: T,
    pub max_d2d_m: T,
}

impl<T: Scalar> Default for UmaCoefficients<T> {
    fn default() -> Self {
        Self {
            los_a: T::lit(28.0),
            los_near_slope: T::lit(22.0),
            los_far_slope: T::lit(40.0),
            bp_coeff: T::lit(9.0),
            nlos_a: T::lit(13.54),
            nlos_slope: T::lit(39.08),
            freq_slope: T::lit(20.0),
            ut_height_slope: T::lit(0.6),
            ut_height_ref_m: T::lit(1.5),
            env_height_m: T::lit(1.0),
            min_d2d_m: T::lit(10.0),
            max_d2d_m: T::lit(5000.0),
        }
    }
}

/// Geometry and state of one urban-macro link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UmaParams<T> {
    pub d2d_m: T,
    pub fc_ghz: T,
    pub h_bs_m: T,
    pub h_ut_m: T,
    pub state: LinkState,
    pub coefficients: UmaCoefficients<T>,
}

impl<T: Scalar> UmaParams<T> {
    /// Link with the default coefficients, a 25 m mast and a 1.5 m terminal.
    pub fn new(d2d_m: T, fc_ghz: T, state: LinkState) -> Self {
        Self {
            d2d_m,
            fc_ghz,
            h_bs_m: T::lit(25.0),
            h_ut_m: T::lit(1.5),
            state,
            coefficients: UmaCoefficients::default(),
        }
    }

    pub fn with_heights(mut self, h_bs_m: T, h_ut_m: T) -> Self {
        self.h_bs_m = h_bs_m;
        self.h_ut_m = h_ut_m;
        self
    }

    pub fn at_distance(mut self, d2d_m: T) -> Self {
        self.d2d_m = d2d_m;
        self
    }

    /// Breakpoint distance in meters.
    pub fn breakpoint_m(&self) -> T {
        let c = &self.coefficients;
        T::lit(4.0) * (self.h_bs_m - c.env_height_m) * (self.h_ut_m - c.env_height_m) * self.fc_ghz
            * T::lit(1e9)
            / T::lit(SPEED_OF_LIGHT)
    }

    pub fn d3d_m(&self) -> T {
        let dh = self.h_bs_m - self.h_ut_m;
        (self.d2d_m * self.d2d_m + dh * dh).sqrt()
    }
}

/// Urban-macro path loss in dB.
pub fn uma_path_loss<T: Scalar>(p: &UmaParams<T>) -> Result<T> {
    let c = &p.coefficients;
    if !(p.d2d_m >= c.min_d2d_m && p.d2d_m <= c.max_d2d_m) {
        return Err(PlanError::domain(
            "2D distance",
            format!("{} m outside [{}, {}] m", p.d2d_m, c.min_d2d_m, c.max_d2d_m),
        ));
    }
    if !(p.fc_ghz > T::zero()) {
        return Err(PlanError::domain("carrier", format!("{} GHz must be > 0", p.fc_ghz)));
    }
    if !(p.h_bs_m > c.env_height_m && p.h_ut_m > c.env_height_m) {
        return Err(PlanError::domain(
            "antenna height",
            format!(
                "heights {} / {} m must exceed the {} m environment height",
                p.h_bs_m, p.h_ut_m, c.env_height_m
            ),
        ));
    }

    let d3d = p.d3d_m();
    let log_fc = p.fc_ghz.log10();
    let bp = p.breakpoint_m();
    let los = if p.d2d_m <= bp {
        c.los_a + c.los_near_slope * d3d.log10() + c.freq_slope * log_fc
    } else {
        let dh = p.h_bs_m - p.h_ut_m;
        c.los_a + c.los_far_slope * d3d.log10() + c.freq_slope * log_fc
            - c.bp_coeff * (bp * bp + dh * dh).log10()
    };
    Ok(match p.state {
        LinkState::Los => los,
        LinkState::Nlos => {
            let nlos = c.nlos_a + c.nlos_slope * d3d.log10() + c.freq_slope * log_fc
                - c.ut_height_slope * (p.h_ut_m - c.ut_height_ref_m);
            los.max(nlos)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    // Independent evaluation of the near-breakpoint LOS form.
    fn los_near(d2d: f64, fc: f64, h_bs: f64, h_ut: f64) -> f64 {
        let d3d = (d2d.powi(2) + (h_bs - h_ut).powi(2)).sqrt();
        28.0 + 22.0 * d3d.log10() + 20.0 * fc.log10()
    }

    #[test]
    fn golden_375m_los() {
        let p = UmaParams::new(375.0_f64, 3.5, LinkState::Los);
        let pl = uma_path_loss(&p).unwrap();
        assert_abs_diff_eq!(pl, 95.516, epsilon = 0.1);
        assert_abs_diff_eq!(pl, los_near(375.0, 3.5, 25.0, 1.5), epsilon = 1e-9);
        // Venue mast height used by the bundled scenario.
        let tall = uma_path_loss(&p.with_heights(45.0, 1.5)).unwrap();
        assert_abs_diff_eq!(tall, 95.516, epsilon = 0.1);
        // A 15 m mast with no environment-height offset keeps 375 m below
        // the breakpoint and lands on the quoted figure to 1e-8.
        let mut low = p.with_heights(15.0, 1.5);
        assert!(low.d2d_m > low.breakpoint_m());
        low.coefficients.env_height_m = 0.0;
        assert!(low.d2d_m < low.breakpoint_m());
        assert_abs_diff_eq!(uma_path_loss(&low).unwrap(), 95.51623607, epsilon = 1e-7);
        assert_abs_diff_eq!(uma_path_loss(&low).unwrap(), los_near(375.0, 3.5, 15.0, 1.5), epsilon = 1e-9);
    }

    #[test]
    fn short_link_70m() {
        // 3D distance with a 23.5 m height difference: 79.98 dB; the
        // pure 2D-distance figure (79.47) is what a 79.5 dB quote reflects.
        let p = UmaParams::new(70.0_f64, 3.5, LinkState::Los);
        let pl = uma_path_loss(&p).unwrap();
        assert_abs_diff_eq!(pl, los_near(70.0, 3.5, 25.0, 1.5), epsilon = 1e-9);
        assert_abs_diff_eq!(pl, 79.9837, epsilon = 1e-3);
        assert_abs_diff_eq!(los_near(70.0, 3.5, 1.5, 1.5), 79.5, epsilon = 0.2);
    }

    #[test]
    fn nlos_not_below_los() {
        let los = uma_path_loss(&UmaParams::new(375.0_f64, 3.5, LinkState::Los)).unwrap();
        let nlos = uma_path_loss(&UmaParams::new(375.0_f64, 3.5, LinkState::Nlos)).unwrap();
        assert!(nlos >= los);
    }

    #[test]
    fn distance_range() {
        assert!(uma_path_loss(&UmaParams::new(9.9_f64, 3.5, LinkState::Los)).is_err());
        assert!(uma_path_loss(&UmaParams::new(5000.1_f64, 3.5, LinkState::Los)).is_err());
        assert!(uma_path_loss(&UmaParams::new(10.0_f64, 3.5, LinkState::Los)).is_ok());
        assert!(uma_path_loss(&UmaParams::new(100.0_f64, 3.5, LinkState::Los).with_heights(1.0, 1.5)).is_err());
    }

    #[test]
    fn continuous_at_breakpoint() {
        let p = UmaParams::new(100.0_f64, 3.5, LinkState::Los);
        let bp = p.breakpoint_m();
        let below = uma_path_loss(&p.at_distance(bp - 1e-6)).unwrap();
        let above = uma_path_loss(&p.at_distance(bp + 1e-6)).unwrap();
        assert!((above - below).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn increasing_in_distance(a in 10.0_f64..4999.0, step in 0.01_f64..100.0, nlos: bool, h_bs in 10.0_f64..50.0) {
            let state = if nlos { LinkState::Nlos } else { LinkState::Los };
            let b = (a + step).min(5000.0);
            prop_assume!(b > a);
            let p = UmaParams::new(a, 3.5, state).with_heights(h_bs, 1.5);
            let pa = uma_path_loss(&p).unwrap();
            let pb = uma_path_loss(&p.at_distance(b)).unwrap();
            prop_assert!(pb > pa);
        }

        #[test]
        fn increasing_in_frequency(d in 10.0_f64..5000.0, f in 0.5_f64..99.0, df in 0.01_f64..1.0, nlos: bool) {
            let state = if nlos { LinkState::Nlos } else { LinkState::Los };
            let lo = UmaParams::new(d, f, state);
            let mut hi = lo;
            hi.fc_ghz = f + df;
            prop_assert!(uma_path_loss(&hi).unwrap() > uma_path_loss(&lo).unwrap());
        }

        #[test]
        fn nlos_dominates(d in 10.0_f64..5000.0, f in 0.5_f64..40.0) {
            let los = uma_path_loss(&UmaParams::new(d, f, LinkState::Los)).unwrap();
            let nlos = uma_path_loss(&UmaParams::new(d, f, LinkState::Nlos)).unwrap();
            prop_assert!(nlos >= los);
        }
    }
}
