//! Satellite-to-ground geometry: slant range, delay, Doppler and beam footprint.

use crate::error::{PlanError, Result};
use crate::scalar::Scalar;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Standard gravitational parameter of the Earth, m³/s².
pub const EARTH_GM: f64 = 3.986_004_418e14;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Terminal-to-satellite geometry with the derived slant range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry<T> {
    pub altitude_m: T,
    pub elevation_deg: T,
    pub earth_radius_m: T,
    pub slant_range_m: T,
}

impl<T: Scalar> LinkGeometry<T> {
    /// Builds the geometry over a mean-radius Earth.
    pub fn new(altitude_m: T, elevation_deg: T) -> Result<Self> {
        Self::with_earth_radius(altitude_m, elevation_deg, T::lit(EARTH_RADIUS_M))
    }

    pub fn with_earth_radius(altitude_m: T, elevation_deg: T, earth_radius_m: T) -> Result<Self> {
        let slant_range_m = slant_range(altitude_m, elevation_deg, earth_radius_m)?;
        Ok(Self {
            altitude_m,
            elevation_deg,
            earth_radius_m,
            slant_range_m,
        })
    }

    pub fn one_way_delay_s(&self) -> T {
        one_way_delay(self.slant_range_m)
    }
}

/// Circular-orbit kinematics at a given altitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitKinematics<T> {
    pub geocentric_radius_m: T,
    pub orbital_velocity_m_s: T,
}

impl<T: Scalar> OrbitKinematics<T> {
    pub fn circular(altitude_m: T, earth_radius_m: T) -> Result<Self> {
        if !(altitude_m > T::zero()) {
            return Err(PlanError::domain("altitude", format!("{altitude_m} m must be > 0")));
        }
        let r = earth_radius_m + altitude_m;
        Ok(Self {
            geocentric_radius_m: r,
            orbital_velocity_m_s: (T::lit(EARTH_GM) / r).sqrt(),
        })
    }
}

/// Distance from a ground terminal to a platform at `altitude_m`, seen at
/// `elevation_deg` above the horizon.
pub fn slant_range<T: Scalar>(altitude_m: T, elevation_deg: T, earth_radius_m: T) -> Result<T> {
    if !(altitude_m > T::zero()) {
        return Err(PlanError::domain("altitude", format!("{altitude_m} m must be > 0")));
    }
    if !(elevation_deg > T::zero() && elevation_deg <= T::lit(90.0)) {
        return Err(PlanError::domain(
            "elevation",
            format!("{elevation_deg} deg must lie in (0, 90]"),
        ));
    }
    if !(earth_radius_m > T::zero()) {
        return Err(PlanError::domain(
            "earth radius",
            format!("{earth_radius_m} m must be > 0"),
        ));
    }
    let sin_el = elevation_deg.to_radians().sin();
    let re_sin = earth_radius_m * sin_el;
    let radicand = re_sin * re_sin + altitude_m * altitude_m + T::lit(2.0) * altitude_m * earth_radius_m;
    Ok(radicand.sqrt() - re_sin)
}

/// Free-space propagation delay over `distance_m`.
pub fn one_way_delay<T: Scalar>(distance_m: T) -> T {
    distance_m / T::lit(SPEED_OF_LIGHT)
}

/// Worst-case Doppler shift seen by a ground observer of a circular orbit.
///
/// Uses the orbital speed projected by R_E/(R_E + h0), the largest radial
/// velocity component reachable from the ground.
pub fn max_doppler_shift<T: Scalar>(carrier_hz: T, altitude_m: T, earth_radius_m: T) -> Result<T> {
    if carrier_hz < T::zero() {
        return Err(PlanError::domain("carrier", format!("{carrier_hz} Hz must be >= 0")));
    }
    let orbit = OrbitKinematics::circular(altitude_m, earth_radius_m)?;
    let radial = orbit.orbital_velocity_m_s * earth_radius_m / orbit.geocentric_radius_m;
    Ok(carrier_hz / T::lit(SPEED_OF_LIGHT) * radial)
}

/// Flat-Earth nadir footprint diameter of a beam of full width `beamwidth_deg`.
pub fn beam_footprint_diameter<T: Scalar>(distance_m: T, beamwidth_deg: T) -> Result<T> {
    if !(beamwidth_deg >= T::zero() && beamwidth_deg < T::lit(90.0)) {
        return Err(PlanError::domain(
            "beamwidth",
            format!("{beamwidth_deg} deg must lie in [0, 90)"),
        ));
    }
    Ok(T::lit(2.0) * distance_m * (beamwidth_deg / T::lit(2.0)).to_radians().tan())
}
