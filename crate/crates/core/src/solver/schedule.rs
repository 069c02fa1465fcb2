use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter sequences `n ↦ value` for `α_n`, `σ_n` and the W-mapping
/// weights.
///
/// Text form: `constant:c`, `harmonic:a,b` (`a/(n+b)`) and
/// `power:a,p,b` (`a/(n+b)^p`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant { value: f64 },
    Harmonic { a: f64, b: f64 },
    PowerDecay { a: f64, p: f64, b: f64 },
}

impl Schedule {
    pub fn constant(value: f64) -> Self {
        Schedule::Constant { value }
    }

    pub fn harmonic(a: f64, b: f64) -> Self {
        Schedule::Harmonic { a, b }
    }

    pub fn power(a: f64, p: f64, b: f64) -> Self {
        Schedule::PowerDecay { a, p, b }
    }

    pub fn value(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            Schedule::Constant { value } => value,
            Schedule::Harmonic { a, b } => a / (n + b),
            Schedule::PowerDecay { a, p, b } => a / (n + b).powf(p),
        }
    }

    /// Whether the sequence tends to zero. For the decaying variants this
    /// follows from the parameter signs checked in [`Schedule::check`].
    pub fn decays(&self) -> bool {
        !matches!(self, Schedule::Constant { .. })
    }

    pub fn limit(&self) -> f64 {
        match *self {
            Schedule::Constant { value } => value,
            _ => 0.0,
        }
    }

    fn params_ok(&self) -> bool {
        match *self {
            Schedule::Constant { value } => value.is_finite(),
            Schedule::Harmonic { a, b } => a.is_finite() && b.is_finite() && a >= 0.0 && b > 0.0,
            Schedule::PowerDecay { a, p, b } => {
                a.is_finite() && p.is_finite() && b.is_finite() && a >= 0.0 && p > 0.0 && b > 0.0
            }
        }
    }

    /// Range of values over `n ≥ 0`, as (infimum, supremum). The decaying
    /// variants are monotone, so both ends are analytic.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            Schedule::Constant { value } => (value, value),
            _ => (0.0, self.value(0)),
        }
    }

    /// Checks that every value lies in `(0, 1)`, or `[0, 1]` when `closed`.
    pub fn check(&self, closed: bool) -> Result<()> {
        if !self.params_ok() {
            return Err(Error::InvalidParameter(format!("malformed schedule `{self}`")));
        }
        let (inf, sup) = self.range();
        let ok = if closed {
            inf >= 0.0 && sup <= 1.0
        } else {
            // decaying schedules never reach their infimum 0
            let lower_ok = if self.decays() { self.value(0) > 0.0 } else { inf > 0.0 };
            lower_ok && sup < 1.0
        };
        if ok {
            Ok(())
        } else {
            let interval = if closed { "[0, 1]" } else { "(0, 1)" };
            Err(Error::InvalidParameter(format!(
                "schedule `{self}` leaves {interval} (values range over [{inf}, {sup}])"
            )))
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Constant { value } => write!(f, "constant:{value}"),
            Schedule::Harmonic { a, b } => write!(f, "harmonic:{a},{b}"),
            Schedule::PowerDecay { a, p, b } => write!(f, "power:{a},{p},{b}"),
        }
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse schedule `{s}`"));
        let (kind, params) = s.trim().split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = params
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        match (kind.trim(), nums.as_slice()) {
            ("constant", [c]) => Ok(Schedule::constant(*c)),
            ("harmonic", [a, b]) => Ok(Schedule::harmonic(*a, *b)),
            ("power", [a, p, b]) => Ok(Schedule::power(*a, *p, *b)),
            _ => Err(bad()),
        }
    }
}
