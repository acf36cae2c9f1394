//! Resource caps shared by the verifier, the oracle and the CLI.
//!
//! Defaults can be overridden through `BASISNET_CAPS`, e.g. `brg=500000,rg=100000,saturation=1000`.

use std::str::FromStr;

use thiserror::Error;

use crate::basis::DEFAULT_SATURATION_CAP;
use crate::brg::{BrgLimits, DEFAULT_STATE_CAP};
use crate::oracle::DEFAULT_RG_CAP;

pub const CAPS_ENV: &str = "BASISNET_CAPS";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CapsError {
    #[error("malformed cap entry '{0}' (expected key=value)")]
    Malformed(String),

    #[error("unknown cap '{0}' (known: brg, rg, saturation)")]
    UnknownKey(String),

    #[error("cap '{key}' must be a positive integer, found '{value}'")]
    BadValue { key: String, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub brg_states: usize,
    pub rg_states: usize,
    pub saturation: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            brg_states: DEFAULT_STATE_CAP,
            rg_states: DEFAULT_RG_CAP,
            saturation: DEFAULT_SATURATION_CAP,
        }
    }
}

impl Caps {
    /// Defaults overridden by `BASISNET_CAPS` when it is set.
    pub fn from_env() -> Result<Self, CapsError> {
        match std::env::var(CAPS_ENV) {
            Ok(s) => s.parse(),
            Err(_) => Ok(Caps::default()),
        }
    }

    pub fn brg_limits(&self) -> BrgLimits {
        BrgLimits {
            states: self.brg_states,
            saturation: self.saturation,
        }
    }

    /// Applies `key=value` pairs on top of `self`.
    pub fn apply(&mut self, spec: &str) -> Result<(), CapsError> {
        for entry in spec.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| CapsError::Malformed(entry.to_string()))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || CapsError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
            };
            let n: u64 = value.parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            match key {
                "brg" => self.brg_states = usize::try_from(n).map_err(|_| bad())?,
                "rg" => self.rg_states = usize::try_from(n).map_err(|_| bad())?,
                "saturation" => self.saturation = n,
                _ => return Err(CapsError::UnknownKey(key.to_string())),
            }
        }
        Ok(())
    }
}

impl FromStr for Caps {
    type Err = CapsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut caps = Caps::default();
        caps.apply(s)?;
        Ok(caps)
    }
}
