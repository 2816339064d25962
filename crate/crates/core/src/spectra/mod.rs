//! Univariate singular value sequences.
//!
//! Every sequence is exposed through [`UnivariateSpectrum`], which evaluates
//! `ln σ(n)` in double-double precision and carries the metadata the bounds
//! need: `σ(1)`, `σ(2)`, the tie multiplicity `v` of `σ(2)` and a decay
//! envelope `σ(n) <= C n^(-s)`.
//!
//! Indices are grouped into *levels*: maximal runs of consecutive indices that
//! share one value by construction (the `±k` pairs of a torus spectrum, the
//! dyadic blocks). Counting works level by level. A source that does not know
//! its levels may report singletons; results stay exact, only slower.

mod cube;
mod custom;
mod dyadic;
mod jacobi;
mod torus;

pub use cube::{
    cube_h1_spectrum, cube_h2_spectrum, find_h2_frequencies, relative_residual, Branch, FrequencyRoot,
};
pub use custom::{custom_spectrum, Tail};
pub use dyadic::dyadic_spectrum;
pub use jacobi::jacobi_spectrum;
pub use torus::{torus_spectrum, TorusNorm, TorusNormKind};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::ties::{Precision, TieTolerance};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// Backing evaluator of a spectrum.
pub trait SequenceSource: Send + Sync + fmt::Debug {
    /// `ln σ(n)` for `n >= 1`; `-inf` for zero entries of a finite-rank sequence.
    fn log_sigma(&self, n: u64) -> Result<Dd>;

    /// Level containing index `n`. Level 0 must be `{1}`.
    fn level_of(&self, n: u64) -> u64 {
        n - 1
    }

    /// First index of `level`, saturating at `u64::MAX`.
    fn level_start(&self, level: u64) -> u64 {
        level.saturating_add(1)
    }

    /// Last index that can be evaluated, if the sequence is only partially known.
    fn domain_end(&self) -> Option<u64> {
        None
    }

    /// Number of nonzero entries for finite-rank sequences.
    fn rank(&self) -> Option<u64> {
        None
    }
}

/// Multiplicity `v = #{n >= 2 : σ(n) = σ(2)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiplicity {
    Finite(u64),
    Unbounded,
}

impl Multiplicity {
    pub fn finite(self) -> Option<u64> {
        match self {
            Multiplicity::Finite(v) => Some(v),
            Multiplicity::Unbounded => None,
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(v) => write!(f, "{v}"),
            Multiplicity::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// `σ(n) <= c * n^(-s)` for all `n >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Envelope {
    pub c: f64,
    pub s: f64,
    /// Proven for every index, not just a sampled prefix.
    pub certified: bool,
}

/// Provenance of a spectrum, used for the asymptotic constants.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Torus { norm: TorusNorm, s: f64, gamma: f64, a: f64, b: f64 },
    Jacobi { alpha: f64, beta: f64, s: f64 },
    CubeH1 { a: f64, b: f64 },
    CubeH2 { a: f64, b: f64 },
    Dyadic,
    Custom,
}

impl Family {
    /// `(c, s)` with `σ(n) ~ c n^(-s)`, when the sequence has such an asymptotic.
    pub fn asymptotic(&self) -> Option<(f64, f64)> {
        use std::f64::consts::PI;
        match *self {
            Family::Torus { s, gamma, a, b, .. } if s.is_finite() => {
                Some(((gamma * (b - a) / PI).powf(s), s))
            }
            Family::Jacobi { alpha, beta, s } => Some((((alpha + beta + 1.0) / 2.0).powf(s), s)),
            Family::CubeH1 { a, b } => Some(((b - a) / PI, 1.0)),
            Family::CubeH2 { a, b } => Some((((b - a) / PI).powi(2), 2.0)),
            _ => None,
        }
    }
}

/// A nonincreasing zero sequence `σ` with its metadata.
#[derive(Clone)]
pub struct UnivariateSpectrum {
    source: Arc<dyn SequenceSource>,
    log_sigma1: Dd,
    log_sigma2: Dd,
    tie_multiplicity: Multiplicity,
    envelope: Option<Envelope>,
    label: String,
    family: Family,
    precision: Precision,
}

impl fmt::Debug for UnivariateSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnivariateSpectrum")
            .field("label", &self.label)
            .field("sigma1", &self.sigma1())
            .field("sigma2", &self.sigma2())
            .field("v", &self.tie_multiplicity)
            .field("envelope", &self.envelope)
            .field("precision", &self.precision)
            .finish()
    }
}

impl UnivariateSpectrum {
    /// Wraps a source, reading `σ(1)`, `σ(2)` and `v` off the sequence.
    ///
    /// `v` is found by walking the levels after `σ(2)`; a source whose `σ(2)` run
    /// never ends must be finite rank with `σ(2) = 0`.
    pub fn from_source(
        source: Arc<dyn SequenceSource>,
        envelope: Option<Envelope>,
        family: Family,
        label: impl Into<String>,
    ) -> Result<Self> {
        let l1 = source.log_sigma(1)?;
        let l2 = match source.domain_end() {
            Some(end) if end < 2 => {
                return Err(Error::domain("a spectrum needs at least two known entries"))
            }
            _ => source.log_sigma(2)?,
        };
        if l2 > l1 {
            return Err(Error::domain("sequence increases from n=1 to n=2"));
        }
        let tie_multiplicity = if l2 == Dd::NEG_INFINITY {
            Multiplicity::Unbounded
        } else {
            let tol = TieTolerance::DD;
            let mut level = source.level_of(2);
            let mut v = 0u64;
            loop {
                let start = source.level_start(level);
                let next = source.level_start(level + 1);
                let value = source.log_sigma(start)?;
                if !tol.eq(value, l2) {
                    break;
                }
                v += next.saturating_sub(start.max(2));
                if source.domain_end().is_some_and(|e| next > e) {
                    break;
                }
                level += 1;
            }
            Multiplicity::Finite(v)
        };
        Ok(UnivariateSpectrum {
            source,
            log_sigma1: l1,
            log_sigma2: l2,
            tie_multiplicity,
            envelope,
            label: label.into(),
            family,
            precision: Precision::Dd,
        })
    }

    /// Same sequence evaluated through another floating point backend.
    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn tolerance(&self) -> TieTolerance {
        self.precision.tolerance()
    }

    #[inline]
    fn round(&self, v: Dd) -> Dd {
        match self.precision {
            Precision::Dd => v,
            Precision::Double => v.round_to_f64(),
        }
    }

    /// `ln σ(n)`.
    pub fn log_sigma(&self, n: u64) -> Result<Dd> {
        if n == 0 {
            return Err(Error::ZeroIndex);
        }
        if let Some(end) = self.source.domain_end() {
            if n > end {
                return Err(Error::BeyondPrefix { n, len: end });
            }
        }
        Ok(self.round(self.source.log_sigma(n)?))
    }

    /// `σ(n)` in linear space; underflows to zero for very small values.
    pub fn sigma(&self, n: u64) -> Result<f64> {
        Ok(self.log_sigma(n)?.exp().to_f64())
    }

    pub fn level_of(&self, n: u64) -> u64 {
        self.source.level_of(n)
    }

    pub fn level_start(&self, level: u64) -> u64 {
        self.source.level_start(level)
    }

    /// Number of indices in `level`.
    pub fn level_size(&self, level: u64) -> u64 {
        self.source
            .level_start(level + 1)
            .saturating_sub(self.source.level_start(level))
    }

    /// Whether `level` has at least one index inside the known domain.
    pub fn level_exists(&self, level: u64) -> bool {
        let start = self.source.level_start(level);
        start != u64::MAX && self.source.domain_end().is_none_or(|e| start <= e)
    }

    /// `ln σ` on `level`.
    pub fn level_log(&self, level: u64) -> Result<Dd> {
        let start = self.source.level_start(level);
        if start == u64::MAX {
            return Err(Error::UnboundedTie(format!(
                "level {level} of `{}` starts beyond the u64 index range",
                self.label
            )));
        }
        self.log_sigma(start)
    }

    pub fn domain_end(&self) -> Option<u64> {
        self.source.domain_end()
    }

    pub fn rank(&self) -> Option<u64> {
        self.source.rank()
    }

    pub fn log_sigma1(&self) -> Dd {
        self.round(self.log_sigma1)
    }

    pub fn log_sigma2(&self) -> Dd {
        self.round(self.log_sigma2)
    }

    pub fn sigma1(&self) -> f64 {
        self.log_sigma1.exp().to_f64()
    }

    pub fn sigma2(&self) -> f64 {
        self.log_sigma2.exp().to_f64()
    }

    pub fn tie_multiplicity(&self) -> Multiplicity {
        self.tie_multiplicity
    }

    pub fn envelope(&self) -> Option<Envelope> {
        self.envelope
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// `σ(2) = σ(1)`.
    pub fn is_degenerate(&self) -> bool {
        self.tolerance().eq(self.log_sigma1(), self.log_sigma2())
    }

    /// Same underlying sequence and backend.
    pub fn same_sequence(&self, other: &UnivariateSpectrum) -> bool {
        Arc::ptr_eq(&self.source, &other.source) && self.precision == other.precision
    }

    /// `(n, ln σ(n))` for `n = 1..=n_max`.
    pub fn sample(&self, n_max: u64) -> Result<Vec<(u64, Dd)>> {
        (1..=n_max).map(|n| Ok((n, self.log_sigma(n)?))).collect()
    }

    /// Checks monotonicity, the envelope and `v` on the prefix `1..=n_max`.
    pub fn check_prefix(&self, n_max: u64) -> Result<()> {
        let tol = self.tolerance();
        let n_max = self.domain_end().map_or(n_max, |e| n_max.min(e));
        let mut prev = self.log_sigma(1)?;
        let mut ties = 0u64;
        let mut tie_run_open = true;
        for n in 2..=n_max {
            let cur = self.log_sigma(n)?;
            if tol.gt(cur, prev) {
                return Err(Error::Invariant(format!(
                    "`{}` increases at n={n}: {} > {}",
                    self.label, cur, prev
                )));
            }
            if self.level_start(self.level_of(n)) > n && !tol.eq(cur, prev) {
                return Err(Error::Invariant(format!(
                    "`{}` is not constant on the level of n={n}",
                    self.label
                )));
            }
            if let Some(env) = self.envelope {
                // envelope constants are f64 values; allow their rounding
                let bound = Dd::from_f64(env.c * (1.0 + 4.0 * f64::EPSILON)).ln()
                    - Dd::from_u64(n).ln().mul_f64(env.s);
                if cur.is_finite() && tol.gt(cur, bound) {
                    return Err(Error::Invariant(format!(
                        "`{}` exceeds its envelope {}*n^-{} at n={n}",
                        self.label, env.c, env.s
                    )));
                }
            }
            if tie_run_open && tol.eq(cur, self.log_sigma2()) {
                ties += 1;
            } else {
                tie_run_open = false;
            }
            prev = cur;
        }
        if let Multiplicity::Finite(v) = self.tie_multiplicity {
            let expected = v.min(n_max.saturating_sub(1));
            if ties != expected {
                return Err(Error::Invariant(format!(
                    "`{}` reports v={v} but the prefix shows {ties}",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

/// `n -> floor(log2 n)`.
#[inline]
pub(crate) fn ilog2(n: u64) -> u64 {
    (63 - n.leading_zeros()) as u64
}

pub(crate) fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::domain(format!("interval [{a}, {b}] must satisfy a < b")));
    }
    Ok(())
}
