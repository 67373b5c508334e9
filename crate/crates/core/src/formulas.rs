//! The five suspiciousness formulae.
//!
//! Every formula is reduced to one integer ratio `n / d` (Ochiai: the square
//! root of one) and evaluated with a single floating-point division, so the
//! result is the correctly rounded value of the exact rational. Two
//! implementations that follow this order agree bit for bit, which matters
//! because ties are detected with exact equality. Evaluation order, with
//! `F = ef + nf` and `P = ep + np`:
//!
//! | formula    | degenerate cases             | general case                      |
//! |------------|------------------------------|-----------------------------------|
//! | Tarantula  | ef = 0 → 0; P = 0 → 1        | `(ef·P) / (ef·P + ep·F)`          |
//! | Ochiai     | ef = 0 → 0                   | `sqrt(ef² / (F·(ef + ep)))`       |
//! | DStar      | ef = 0 → 0; ep + nf = 0 → +∞ | `ef^star / (ep + nf)`             |
//! | GP13       | ef = 0 → 0                   | `ef·(2ep + ef + 1) / (2ep + ef)`  |
//! | Confidence | P = 0 → `ef / F`             | `(ef·P − ep·F) / (F·P)`           |

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::{Counters, Error, MethodId, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    Tarantula,
    Ochiai,
    DStar { star: u32 },
    GP13,
    Confidence,
}

impl Formula {
    pub const DEFAULT_STAR: u32 = 2;

    /// All five formulae, DStar with the default exponent.
    pub const ALL: [Formula; 5] = [
        Formula::Confidence,
        Formula::DStar { star: Self::DEFAULT_STAR },
        Formula::GP13,
        Formula::Ochiai,
        Formula::Tarantula,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Formula::Tarantula => "tarantula",
            Formula::Ochiai => "ochiai",
            Formula::DStar { .. } => "dstar",
            Formula::GP13 => "gp13",
            Formula::Confidence => "confidence",
        }
    }

    /// Parses a formula name; `star` only applies to DStar.
    pub fn from_name(name: &str, star: u32) -> Result<Self> {
        if star == 0 {
            return Err(Error::Structural("DStar exponent must be at least 1".into()));
        }
        let f = match name.to_ascii_lowercase().as_str() {
            "tarantula" | "tar" => Formula::Tarantula,
            "ochiai" | "och" => Formula::Ochiai,
            "dstar" | "dst" => Formula::DStar { star },
            "gp13" => Formula::GP13,
            "confidence" | "conf" => Formula::Confidence,
            other => return Err(Error::unknown("formula", other)),
        };
        Ok(f)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::DStar { star } if *star != Self::DEFAULT_STAR => write!(f, "dstar{star}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Formula::from_name(s, Formula::DEFAULT_STAR)
    }
}

/// A suspiciousness value: finite or `+inf`, never NaN.
///
/// Equality is bit equality and ordering is total, with `-0.0` folded into
/// `0.0` at construction.
#[derive(Clone, Copy, Debug)]
pub struct Score(f64);

impl Score {
    pub const ZERO: Score = Score(0.0);
    pub const INFINITY: Score = Score(f64::INFINITY);

    pub fn new(value: f64) -> Option<Self> {
        if value.is_nan() || value == f64::NEG_INFINITY {
            None
        } else if value == 0.0 {
            Some(Score(0.0))
        } else {
            Some(Score(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl PartialEq for Score {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Score {}

impl std::hash::Hash for Score {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else if let Some(p) = f.precision() {
            write!(f, "{:.*}", p, self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

fn ratio(n: u128, d: u128) -> f64 {
    n as f64 / d as f64
}

/// Suspiciousness of one method.
pub fn score(formula: Formula, c: Counters) -> Result<Score> {
    let (ef, ep, nf, np) = (c.ef as u128, c.ep as u128, c.nf as u128, c.np as u128);
    let failed = ef + nf;
    let passed = ep + np;
    if failed == 0 {
        return Err(Error::NoFailingTest);
    }

    let value = match formula {
        Formula::Tarantula => {
            if ef == 0 {
                0.0
            } else if passed == 0 {
                1.0
            } else {
                ratio(ef * passed, ef * passed + ep * failed)
            }
        }
        Formula::Ochiai => {
            if ef == 0 {
                0.0
            } else {
                ratio(ef * ef, failed * (ef + ep)).sqrt()
            }
        }
        Formula::DStar { star } => {
            if star == 0 {
                return Err(Error::Structural("DStar exponent must be at least 1".into()));
            }
            let denom = ep + nf;
            if ef == 0 {
                0.0
            } else if denom == 0 {
                f64::INFINITY
            } else {
                match ef.checked_pow(star) {
                    Some(num) => ratio(num, denom),
                    None => (ef as f64).powf(star as f64) / denom as f64,
                }
            }
        }
        Formula::GP13 => {
            let denom = 2 * ep + ef;
            if ef == 0 {
                0.0
            } else {
                ratio(ef * (denom + 1), denom)
            }
        }
        Formula::Confidence => {
            if passed == 0 {
                ratio(ef, failed)
            } else {
                let num = (ef * passed) as i128 - (ep * failed) as i128;
                num as f64 / (failed * passed) as f64
            }
        }
    };
    Ok(Score::new(value).expect("formulae never produce NaN"))
}

/// Applies [`score`] to every method, preserving order.
pub fn score_all(formula: Formula, counters: &IndexMap<MethodId, Counters>) -> Result<IndexMap<MethodId, Score>> {
    counters
        .iter()
        .map(|(m, c)| Ok((m.clone(), score(formula, *c)?)))
        .collect()
}
