//! Path-loss models: free space, the satellite loss chain, urban macro and
//! the RIS cascade.

mod env_table;
mod uma;

pub use env_table::{LosScenario, NtnEnvRow, NtnEnvTable};
pub use uma::{uma_path_loss, UmaCoefficients, UmaParams};

use std::fmt;
use std::str::FromStr;

use crate::error::{PlanError, Result};
use crate::scalar::Scalar;

/// Line-of-sight state of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkState {
    Los,
    Nlos,
}

impl fmt::Display for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkState::Los => "LOS",
            LinkState::Nlos => "NLOS",
        })
    }
}

impl FromStr for LinkState {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LOS" => Ok(LinkState::Los),
            "NLOS" => Ok(LinkState::Nlos),
            other => Err(format!("unknown link state `{other}` (expected LOS or NLOS)")),
        }
    }
}

/// Satellite frequency band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    S,
    Ka,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Band::S => "S",
            Band::Ka => "Ka",
        })
    }
}

impl FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s" => Ok(Band::S),
            "ka" => Ok(Band::Ka),
            other => Err(format!("unknown band `{other}` (expected S or Ka)")),
        }
    }
}

/// Free-space path loss in dB for `distance_m` meters at `fc_ghz` GHz.
pub fn fspl<T: Scalar>(distance_m: T, fc_ghz: T) -> Result<T> {
    if !(distance_m >= T::one()) {
        return Err(PlanError::domain(
            "distance",
            format!("{distance_m} m is below the 1 m model floor"),
        ));
    }
    if !(fc_ghz > T::zero()) {
        return Err(PlanError::domain("carrier", format!("{fc_ghz} GHz must be > 0")));
    }
    Ok(T::lit(32.45) + T::lit(20.0) * fc_ghz.log10() + T::lit(20.0) * distance_m.log10())
}

/// Basic satellite path loss: FSPL plus `z` standard deviations of shadow
/// fading plus clutter loss.
///
/// Clutter loss is applied in NLOS only. `z = 0` gives the median.
pub fn ntn_basic_path_loss<T: Scalar>(
    distance_m: T,
    fc_ghz: T,
    env: &NtnEnvRow<T>,
    state: LinkState,
    shadow_quantile_z: T,
) -> Result<T> {
    let free = fspl(distance_m, fc_ghz)?;
    let (sigma, clutter) = match state {
        LinkState::Los => (env.sigma_sf_los_db, T::zero()),
        LinkState::Nlos => (env.sigma_sf_nlos_db, env.clutter_loss_db),
    };
    Ok(free + shadow_quantile_z * sigma + clutter)
}

/// Components of the satellite path loss chain, all in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossBreakdown<T> {
    pub basic_db: T,
    pub gases_db: T,
    pub scintillation_db: T,
    pub building_entry_db: T,
    pub total_db: T,
}

/// Assembles the total path loss from its components.
pub fn ntn_total_path_loss<T: Scalar>(
    basic_db: T,
    gases_db: T,
    scintillation_db: T,
    building_entry_db: T,
) -> Result<PathLossBreakdown<T>> {
    for (name, v) in [
        ("basic path loss", basic_db),
        ("gas attenuation", gases_db),
        ("scintillation loss", scintillation_db),
        ("building entry loss", building_entry_db),
    ] {
        if !(v >= T::zero()) {
            return Err(PlanError::domain(name, format!("{v} dB must be >= 0")));
        }
    }
    Ok(PathLossBreakdown {
        basic_db,
        gases_db,
        scintillation_db,
        building_entry_db,
        total_db: basic_db + gases_db + scintillation_db + building_entry_db,
    })
}

/// BS→RIS→UE cascade path loss.
///
/// The two segment losses multiply in the linear domain, which is plain
/// addition in dB. Both inputs are expected to be non-negative.
#[inline]
pub fn ris_cascade_path_loss<T: Scalar>(bs_ris_db: T, ris_ue_db: T) -> T {
    bs_ris_db + ris_ue_db
}

/// Segment losses of a RIS cascade together with the total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisCascade<T> {
    pub bs_ris_db: T,
    pub ris_ue_db: T,
    pub total_db: T,
}

impl<T: Scalar> RisCascade<T> {
    pub fn new(bs_ris_db: T, ris_ue_db: T) -> Result<Self> {
        if !(bs_ris_db >= T::zero() && ris_ue_db >= T::zero()) {
            return Err(PlanError::domain(
                "cascade segment",
                format!("segment losses {bs_ris_db} / {ris_ue_db} dB must be >= 0"),
            ));
        }
        Ok(Self {
            bs_ris_db,
            ris_ue_db,
            total_db: ris_cascade_path_loss(bs_ris_db, ris_ue_db),
        })
    }
}
