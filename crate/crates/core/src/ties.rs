//! Tie-class comparisons of log-values.
//!
//! Two log-values belong to the same tie class iff they differ by at most
//! `rel * max(1, |a|, |b|)`. The relative tolerance is `1e-24` for the
//! double-double backend and `1e-12` for the plain `f64` backend.

use crate::dd::Dd;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Floating point backend used to evaluate log singular values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    #[default]
    Dd,
}

impl Precision {
    /// Reads `TENSORPOW_PRECISION` (`double` or `dd`); unset means `dd`.
    pub fn from_env() -> Result<Self, String> {
        match std::env::var("TENSORPOW_PRECISION") {
            Err(_) => Ok(Precision::Dd),
            Ok(v) => v.parse(),
        }
    }

    pub fn tolerance(self) -> TieTolerance {
        match self {
            Precision::Double => TieTolerance::DOUBLE,
            Precision::Dd => TieTolerance::DD,
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "double" | "f64" => Ok(Precision::Double),
            "dd" | "double-double" => Ok(Precision::Dd),
            other => Err(format!("unknown precision `{other}` (expected `double` or `dd`)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TieTolerance {
    pub rel: f64,
}

impl Default for TieTolerance {
    fn default() -> Self {
        TieTolerance::DD
    }
}

impl TieTolerance {
    pub const DD: TieTolerance = TieTolerance { rel: 1e-24 };
    pub const DOUBLE: TieTolerance = TieTolerance { rel: 1e-12 };

    /// Absolute slack for comparisons at magnitude `scale`.
    #[inline]
    pub fn abs_at(self, scale: Dd) -> f64 {
        let m = if scale.is_finite() {
            scale.abs().to_f64().max(1.0)
        } else {
            1.0
        };
        self.rel * m
    }

    /// Ordering with ties collapsed.
    pub fn cmp(self, a: Dd, b: Dd) -> Ordering {
        if a.is_finite() && b.is_finite() {
            let slack = self.abs_at(a.abs().max(b.abs()));
            let diff = (a - b).to_f64();
            if diff.abs() <= slack {
                return Ordering::Equal;
            }
            if diff > 0.0 {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        } else {
            a.partial_cmp(&b).unwrap_or(Ordering::Equal)
        }
    }

    #[inline]
    pub fn eq(self, a: Dd, b: Dd) -> bool {
        self.cmp(a, b) == Ordering::Equal
    }

    /// `a >= b` up to ties.
    #[inline]
    pub fn ge(self, a: Dd, b: Dd) -> bool {
        self.cmp(a, b) != Ordering::Less
    }

    /// `a > b` beyond ties.
    #[inline]
    pub fn gt(self, a: Dd, b: Dd) -> bool {
        self.cmp(a, b) == Ordering::Greater
    }
}

/// Which side of a threshold is counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparison {
    /// `value >= t`
    #[serde(rename = "ge")]
    AtLeast,
    /// `value > t`
    #[serde(rename = "gt")]
    Above,
}

impl Comparison {
    #[inline]
    pub fn accepts(self, tol: TieTolerance, value: Dd, threshold: Dd) -> bool {
        match self {
            Comparison::AtLeast => tol.ge(value, threshold),
            Comparison::Above => tol.gt(value, threshold),
        }
    }
}
