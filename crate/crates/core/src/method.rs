//! Divisor methods and their divisor functions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A named divisor method.
///
/// The two `Modified*` variants are Jefferson and Webster with the divisor at
/// zero seats forced to 0, which guarantees every state a seat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Adams,
    Jefferson,
    Webster,
    #[serde(rename = "hh")]
    HuntingtonHill,
    Dean,
    #[serde(rename = "mod-jefferson")]
    ModifiedJefferson,
    #[serde(rename = "mod-webster")]
    ModifiedWebster,
}

/// δ(s)² as an exact fraction of small integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquaredDivisor {
    pub num: u128,
    pub den: u128,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Adams,
        Method::Jefferson,
        Method::Webster,
        Method::HuntingtonHill,
        Method::Dean,
        Method::ModifiedJefferson,
        Method::ModifiedWebster,
    ];

    /// The five methods with δ(0) = 0, in the row order of the usual
    /// probability tables.
    pub const GUARANTEED: [Method; 5] = [
        Method::ModifiedJefferson,
        Method::Adams,
        Method::ModifiedWebster,
        Method::HuntingtonHill,
        Method::Dean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Adams => "adams",
            Method::Jefferson => "jefferson",
            Method::Webster => "webster",
            Method::HuntingtonHill => "hh",
            Method::Dean => "dean",
            Method::ModifiedJefferson => "mod-jefferson",
            Method::ModifiedWebster => "mod-webster",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Method::Adams => "Adams",
            Method::Jefferson => "Jefferson",
            Method::Webster => "Webster",
            Method::HuntingtonHill => "Huntington-Hill",
            Method::Dean => "Dean",
            Method::ModifiedJefferson => "Modified Jefferson",
            Method::ModifiedWebster => "Modified Webster",
        }
    }

    /// True iff δ(0) = 0, i.e. every state is seated once before any
    /// priority comparison happens.
    pub fn guarantees_nonzero(self) -> bool {
        !matches!(self, Method::Jefferson | Method::Webster)
    }

    /// δ(s).
    pub fn divisor(self, s: u32) -> f64 {
        let s = s as f64;
        match self {
            Method::Adams => s,
            Method::Jefferson => s + 1.0,
            Method::Webster => s + 0.5,
            Method::HuntingtonHill => (s * (s + 1.0)).sqrt(),
            Method::Dean => 2.0 * s * (s + 1.0) / (2.0 * s + 1.0),
            Method::ModifiedJefferson if s == 0.0 => 0.0,
            Method::ModifiedJefferson => s + 1.0,
            Method::ModifiedWebster if s == 0.0 => 0.0,
            Method::ModifiedWebster => s + 0.5,
        }
    }

    /// δ(s)², exactly. Every supported divisor has a rational square, which
    /// keeps Huntington-Hill comparisons inside rational arithmetic.
    pub fn divisor_squared(self, s: u32) -> SquaredDivisor {
        let s = s as u128;
        let (num, den) = match self {
            Method::Adams => (s * s, 1),
            Method::Jefferson => ((s + 1) * (s + 1), 1),
            Method::Webster => ((2 * s + 1) * (2 * s + 1), 4),
            Method::HuntingtonHill => (s * (s + 1), 1),
            Method::Dean => {
                let top = 2 * s * (s + 1);
                if top == 0 {
                    (0, 1)
                } else {
                    (top * top, (2 * s + 1) * (2 * s + 1))
                }
            }
            Method::ModifiedJefferson if s == 0 => (0, 1),
            Method::ModifiedJefferson => ((s + 1) * (s + 1), 1),
            Method::ModifiedWebster if s == 0 => (0, 1),
            Method::ModifiedWebster => ((2 * s + 1) * (2 * s + 1), 4),
        };
        SquaredDivisor { num, den }
    }

    /// Rejects the two methods without a seat guarantee.
    pub fn require_guarantee(self, reason: &'static str) -> Result<(), Error> {
        if self.guarantees_nonzero() {
            Ok(())
        } else {
            Err(Error::UnsupportedMethod {
                method: self,
                reason,
            })
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let m = match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "adams" => Method::Adams,
            "jefferson" => Method::Jefferson,
            "webster" => Method::Webster,
            "hh" | "huntington-hill" | "huntingtonhill" => Method::HuntingtonHill,
            "dean" => Method::Dean,
            "mod-jefferson" | "modified-jefferson" | "modifiedjefferson" => {
                Method::ModifiedJefferson
            }
            "mod-webster" | "modified-webster" | "modifiedwebster" => Method::ModifiedWebster,
            _ => {
                return Err(Error::Unknown {
                    kind: "method",
                    value: s.to_string(),
                })
            }
        };
        Ok(m)
    }
}
