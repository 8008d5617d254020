//! The 16-cell lattice of dynamic environments.
//!
//! An environment is named by two coordinates in `0..=3`. The elasticity
//! coordinate encodes horizontal elasticity in bit 0 and vertical elasticity
//! in bit 1; the overbooking coordinate encodes server overbooking in bit 0
//! and network overbooking in bit 1. Environments render as `(e,o)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvironmentError {
    #[error("elasticity out of range: {0} (expected 0..=3)")]
    ElasticityOutOfRange(i64),
    #[error("overbooking out of range: {0} (expected 0..=3)")]
    OverbookingOutOfRange(i64),
    #[error("malformed environment {0:?}: expected \"E,O\" or \"(E,O)\"")]
    Malformed(String),
}

/// Coordinates `(elasticity, overbooking)` of one dynamic environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EnvironmentId {
    elasticity: u8,
    overbooking: u8,
}

impl EnvironmentId {
    pub const STATIC: EnvironmentId = EnvironmentId {
        elasticity: 0,
        overbooking: 0,
    };

    pub fn new(elasticity: i64, overbooking: i64) -> Result<Self, EnvironmentError> {
        if !(0..=3).contains(&elasticity) {
            return Err(EnvironmentError::ElasticityOutOfRange(elasticity));
        }
        if !(0..=3).contains(&overbooking) {
            return Err(EnvironmentError::OverbookingOutOfRange(overbooking));
        }
        Ok(Self {
            elasticity: elasticity as u8,
            overbooking: overbooking as u8,
        })
    }

    pub fn elasticity(self) -> u8 {
        self.elasticity
    }

    pub fn overbooking(self) -> u8 {
        self.overbooking
    }

    pub fn capabilities(self) -> Capabilities {
        Capabilities {
            horizontal: self.elasticity & 1 != 0,
            vertical: self.elasticity & 2 != 0,
            server_overbooking: self.overbooking & 1 != 0,
            network_overbooking: self.overbooking & 2 != 0,
        }
    }

    pub fn from_capabilities(caps: Capabilities) -> Self {
        Self {
            elasticity: caps.horizontal as u8 | (caps.vertical as u8) << 1,
            overbooking: caps.server_overbooking as u8 | (caps.network_overbooking as u8) << 1,
        }
    }

    /// Label used in the "Elasticity Type" column of the lattice table.
    pub fn elasticity_label(self) -> &'static str {
        match self.elasticity {
            0 => "Not Considered",
            1 => "Horizontal",
            2 => "Vertical",
            _ => "Horizontal and Vertical",
        }
    }

    /// Label used in the "Overbooking Type" column of the lattice table.
    pub fn overbooking_label(self) -> &'static str {
        match self.overbooking {
            0 => "Not Considered",
            1 => "Server",
            2 => "Network",
            _ => "Server and Network",
        }
    }

    /// One row of the lattice table, e.g. `(2,1) Vertical / Server`.
    pub fn table_row(self) -> String {
        format!(
            "{} {} / {}",
            self,
            self.elasticity_label(),
            self.overbooking_label()
        )
    }
}

/// Shorthand for [`EnvironmentId::new`].
pub fn env_from_coords(elasticity: i64, overbooking: i64) -> Result<EnvironmentId, EnvironmentError> {
    EnvironmentId::new(elasticity, overbooking)
}

/// All 16 environments in lexicographic order, `(0,0)` through `(3,3)`.
pub fn enumerate_environments() -> Vec<EnvironmentId> {
    (0..4u8)
        .flat_map(|e| {
            (0..4u8).map(move |o| EnvironmentId {
                elasticity: e,
                overbooking: o,
            })
        })
        .collect()
}

impl fmt::Display for EnvironmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.elasticity, self.overbooking)
    }
}

impl FromStr for EnvironmentId {
    type Err = EnvironmentError;

    /// Accepts `E,O` with optional surrounding parentheses and whitespace.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || EnvironmentError::Malformed(s.to_string());
        let trimmed = s.trim();
        let inner = match (trimmed.strip_prefix('('), trimmed.strip_suffix(')')) {
            (Some(_), Some(_)) => &trimmed[1..trimmed.len() - 1],
            (None, None) => trimmed,
            _ => return Err(malformed()),
        };
        let (e, o) = inner.split_once(',').ok_or_else(malformed)?;
        let e: i64 = e.trim().parse().map_err(|_| malformed())?;
        let o: i64 = o.trim().parse().map_err(|_| malformed())?;
        EnvironmentId::new(e, o)
    }
}

impl Serialize for EnvironmentId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EnvironmentId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Dynamics an environment permits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Capabilities {
    pub horizontal: bool,
    pub vertical: bool,
    pub server_overbooking: bool,
    pub network_overbooking: bool,
}

impl Capabilities {
    fn union(self, other: Capabilities) -> Capabilities {
        Capabilities {
            horizontal: self.horizontal || other.horizontal,
            vertical: self.vertical || other.vertical,
            server_overbooking: self.server_overbooking || other.server_overbooking,
            network_overbooking: self.network_overbooking || other.network_overbooking,
        }
    }
}

impl std::ops::BitOr for Capabilities {
    type Output = Capabilities;

    fn bitor(self, rhs: Capabilities) -> Capabilities {
        self.union(rhs)
    }
}
