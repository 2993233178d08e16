use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Sign of the coupling: `+1` defocusing, `-1` focusing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Defocusing,
    Focusing,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
        }
    }

    pub fn from_value(mu: f64) -> Result<Self, Error> {
        if mu == 1.0 {
            Ok(Sign::Defocusing)
        } else if mu == -1.0 {
            Ok(Sign::Focusing)
        } else {
            Err(Error::InvalidArgument(format!("coupling sign must be +1 or -1, got {mu}")))
        }
    }
}

/// Nonlinearity: `|phi|^2 phi` (two-body, cubic) or `|phi|^4 phi`
/// (three-body, quintic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Power {
    Cubic,
    Quintic,
}

impl Power {
    /// Exponent `sigma` in `|phi|^(2 sigma) phi`.
    pub fn sigma(self) -> i32 {
        match self {
            Power::Cubic => 1,
            Power::Quintic => 2,
        }
    }

    /// How many levels up the collision operator reaches.
    pub fn order_offset(self) -> usize {
        match self {
            Power::Cubic => 1,
            Power::Quintic => 2,
        }
    }

    /// Prefactor of the interaction trace in the energy: `1/4` or `1/6`.
    pub fn energy_prefactor(self) -> f64 {
        1.0 / (2.0 * self.sigma() as f64 + 2.0)
    }

    /// Prefactor of the interaction trace in the second virial derivative,
    /// per unit dimension: `2` or `8/3`, i.e. `4 sigma / (sigma + 1)`.
    pub fn virial_prefactor(self) -> f64 {
        let s = self.sigma() as f64;
        4.0 * s / (s + 1.0)
    }
}

impl fmt::Display for Power {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Power::Cubic => "cubic",
            Power::Quintic => "quintic",
        })
    }
}

impl FromStr for Power {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "cubic" => Ok(Power::Cubic),
            "quintic" => Ok(Power::Quintic),
            other => Err(Error::InvalidArgument(format!("unknown equation '{other}' (expected cubic or quintic)"))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Defocusing => "defocusing",
            Sign::Focusing => "focusing",
        })
    }
}

/// Sign of the collision half-operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Extra particles contracted onto `x_j`.
    Plus,
    /// Extra particles contracted onto `x'_j`.
    Minus,
}
