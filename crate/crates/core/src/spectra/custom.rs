use super::{Envelope, Family, SequenceSource, UnivariateSpectrum};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::ties::TieTolerance;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// What follows an explicit prefix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Tail {
    /// Queries past the prefix fail.
    None,
    /// `σ(n) = c * n^(-s)` past the prefix.
    Power { c: f64, s: f64 },
    /// `σ(n) = 0` past the prefix.
    FiniteRank,
}

#[derive(Debug)]
struct CustomSource {
    logs: Vec<Dd>,
    tail: Tail,
    log_c: Dd,
}

impl SequenceSource for CustomSource {
    fn log_sigma(&self, n: u64) -> Result<Dd> {
        let len = self.logs.len() as u64;
        if n <= len {
            return Ok(self.logs[(n - 1) as usize]);
        }
        match self.tail {
            Tail::None => Err(Error::BeyondPrefix { n, len }),
            Tail::FiniteRank => Ok(Dd::NEG_INFINITY),
            Tail::Power { s, .. } => Ok(self.log_c - Dd::from_u64(n).ln().mul_f64(s)),
        }
    }

    fn domain_end(&self) -> Option<u64> {
        match self.tail {
            Tail::None => Some(self.logs.len() as u64),
            _ => None,
        }
    }

    fn rank(&self) -> Option<u64> {
        match self.tail {
            Tail::FiniteRank => Some(self.logs.len() as u64),
            _ => None,
        }
    }
}

/// Spectrum backed by an explicit prefix `σ(1), σ(2), ...` and a [`Tail`].
///
/// The prefix must be positive and nonincreasing, and a power tail must not
/// rise above the last prefix entry. Values are taken as given: inputs that
/// agree mathematically but differ after rounding to `f64` are distinct.
///
/// ```
/// use tensorpow::spectra::{custom_spectrum, Tail};
/// let sp = custom_spectrum(&[1.0, 0.5], Tail::Power { c: 1.0, s: 1.0 }).unwrap();
/// assert!((sp.sigma(10).unwrap() - 0.1).abs() < 1e-15);
/// assert!(custom_spectrum(&[1.0, 0.6, 0.7], Tail::None).is_err());
/// ```
pub fn custom_spectrum(values: &[f64], tail: Tail) -> Result<UnivariateSpectrum> {
    if values.is_empty() {
        return Err(Error::domain("custom spectrum needs at least one value"));
    }
    let mut prev = f64::INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!(
                "value {v} at n={} must be positive and finite (use a finite-rank tail for zeros)",
                i + 1
            )));
        }
        if v > prev {
            return Err(Error::domain(format!(
                "values must be nonincreasing: σ({}) = {v} > σ({}) = {prev}",
                i + 1,
                i
            )));
        }
        prev = v;
    }
    let logs: Vec<Dd> = values.iter().map(|&v| Dd::from_f64(v).ln()).collect();
    let len = values.len() as u64;
    let (log_c, envelope) = match tail {
        Tail::Power { c, s } => {
            if !(c > 0.0 && c.is_finite() && s > 0.0 && s.is_finite()) {
                return Err(Error::domain(format!("tail needs c > 0 and s > 0, got c={c}, s={s}")));
            }
            let log_c = Dd::from_f64(c).ln();
            let first_tail = log_c - Dd::from_u64(len + 1).ln().mul_f64(s);
            if TieTolerance::DD.gt(first_tail, logs[logs.len() - 1]) {
                return Err(Error::domain(format!(
                    "tail value at n={} exceeds the last prefix value",
                    len + 1
                )));
            }
            let prefix_sup = (2..=len)
                .map(|n| values[(n - 1) as usize] * (n as f64).powf(s))
                .fold(c, f64::max);
            (log_c, Some(Envelope { c: prefix_sup, s, certified: true }))
        }
        Tail::FiniteRank if len >= 2 => {
            let sup = (2..=len).map(|n| values[(n - 1) as usize] * n as f64).fold(0.0, f64::max);
            (Dd::ZERO, Some(Envelope { c: sup, s: 1.0, certified: true }))
        }
        _ => (Dd::ZERO, None),
    };
    let label = match tail {
        Tail::None => format!("custom({len} values)"),
        Tail::FiniteRank => format!("custom({len} values, finite rank)"),
        Tail::Power { c, s } => format!("custom({len} values, tail {c}*n^-{s})"),
    };
    UnivariateSpectrum::from_source(
        Arc::new(CustomSource { logs, tail, log_c }),
        envelope,
        Family::Custom,
        label,
    )
}
