//! Decibel arithmetic and thermal noise.
//!
//! Link-budget arithmetic inside the crate is carried in dBW; dBm only shows
//! up at the edges (configuration files, reports).

use crate::error::{PlanError, Result};
use crate::scalar::Scalar;

/// Boltzmann constant in J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Default receiver reference temperature in kelvin.
pub const REFERENCE_TEMPERATURE_K: f64 = 290.0;

/// Reference a decibel value is expressed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DbReference {
    /// Decibels relative to one watt.
    Watt,
    /// Decibels relative to one milliwatt.
    Milliwatt,
    /// A pure power ratio.
    Ratio,
}

/// A decibel quantity tagged with what it is relative to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerDb<T> {
    pub value: T,
    pub reference: DbReference,
}

impl<T: Scalar> PowerDb<T> {
    pub fn dbw(value: T) -> Self {
        Self {
            value,
            reference: DbReference::Watt,
        }
    }

    pub fn dbm(value: T) -> Self {
        Self {
            value,
            reference: DbReference::Milliwatt,
        }
    }

    pub fn ratio(value: T) -> Self {
        Self {
            value,
            reference: DbReference::Ratio,
        }
    }

    /// Absolute power in dBW, or a domain error for a bare ratio.
    pub fn to_dbw(self) -> Result<T> {
        match self.reference {
            DbReference::Watt => Ok(self.value),
            DbReference::Milliwatt => Ok(dbm_to_dbw(self.value)),
            DbReference::Ratio => Err(PlanError::domain(
                "power",
                "a dB ratio has no absolute power level",
            )),
        }
    }

    /// Absolute power in dBm, or a domain error for a bare ratio.
    pub fn to_dbm(self) -> Result<T> {
        self.to_dbw().map(dbw_to_dbm)
    }
}

/// Receiver noise description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams<T> {
    pub bandwidth_hz: T,
    pub noise_figure_db: T,
    pub reference_temperature_k: T,
}

impl<T: Scalar> NoiseParams<T> {
    /// Noise parameters at the 290 K reference temperature.
    pub fn new(bandwidth_hz: T, noise_figure_db: T) -> Self {
        Self {
            bandwidth_hz,
            noise_figure_db,
            reference_temperature_k: T::lit(REFERENCE_TEMPERATURE_K),
        }
    }
}

/// 10^(x/10).
pub fn db_to_linear<T: Scalar>(x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(PlanError::domain("dB value", format!("{x} is not finite")));
    }
    Ok(T::lit(10.0).powf(x / T::lit(10.0)))
}

/// 10·log10(r) for a strictly positive ratio.
pub fn linear_to_db<T: Scalar>(r: T) -> Result<T> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(PlanError::domain(
            "linear ratio",
            format!("{r} must be finite and > 0"),
        ));
    }
    Ok(T::lit(10.0) * r.log10())
}

#[inline]
pub fn dbm_to_dbw<T: Scalar>(p: T) -> T {
    p - T::lit(30.0)
}

#[inline]
pub fn dbw_to_dbm<T: Scalar>(p: T) -> T {
    p + T::lit(30.0)
}

/// Thermal noise floor 10·log10(k·T·B) + NF, in dBW.
pub fn thermal_noise_dbw<T: Scalar>(n: &NoiseParams<T>) -> Result<T> {
    if !(n.bandwidth_hz > T::zero()) {
        return Err(PlanError::domain(
            "bandwidth",
            format!("{} Hz must be > 0", n.bandwidth_hz),
        ));
    }
    if n.noise_figure_db < T::zero() {
        return Err(PlanError::domain(
            "noise figure",
            format!("{} dB must be >= 0", n.noise_figure_db),
        ));
    }
    if !(n.reference_temperature_k > T::zero()) {
        return Err(PlanError::domain(
            "reference temperature",
            format!("{} K must be > 0", n.reference_temperature_k),
        ));
    }
    // Split the product into logs so f32 never sees k·T·B (~1e-21) directly.
    let k_db = T::lit(10.0 * BOLTZMANN.log10());
    Ok(k_db
        + T::lit(10.0) * n.reference_temperature_k.log10()
        + T::lit(10.0) * n.bandwidth_hz.log10()
        + n.noise_figure_db)
}

/// Sum of powers given in dB, evaluated in the linear domain.
///
/// An empty list is rejected: "no interference" is a state the caller owns.
pub fn power_sum_db<T: Scalar>(terms: &[T]) -> Result<T> {
    let Some(peak) = terms.iter().copied().reduce(T::max) else {
        return Err(PlanError::domain("power sum", "empty term list"));
    };
    if let Some(bad) = terms.iter().find(|t| !t.is_finite()) {
        return Err(PlanError::domain(
            "power sum",
            format!("term {bad} is not finite"),
        ));
    }
    // Factor out the largest term so very small (or very large) dB values
    // do not underflow in the linear domain.
    let ten = T::lit(10.0);
    let rel = terms
        .iter()
        .fold(T::zero(), |acc, &t| acc + ten.powf((t - peak) / ten));
    Ok(peak + ten * rel.log10())
}
