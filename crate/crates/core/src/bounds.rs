//! Closed-form bounds on `τ` and their verification against exact values.
//!
//! For `σ(1) > σ(2) > 0`, `v = #{n >= 2 : σ(n) = σ(2)}` and an envelope
//! `σ(n) <= C n^(-s)` (`n >= 2`), with `L = ln(σ(1)/σ(2))`:
//!
//! * upper, all `n >= 1` and `δ ∈ (0, 1]`:
//!   `τ(n)/σ(1)^d <= (C̃/n)^α` with `C̃ = exp((C/σ(1))^((1+δ)/s)/δ)` and
//!   `α = L / ((1+δ)/s · L + ln d)`;
//! * lower, `2 <= n <= (1+v)^d`:
//!   `τ(n)/σ(1)^d >= (σ(2)/σ(1)) n^(-β)` with `β = L / ln(1 + v d / log_{1+v} n)`.
//!
//! All evaluators take unnormalized spectra and rescale by `σ(1)` internally.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::hypercount::TensorProduct;
use crate::rearrange::{tau_at, tau_topk};
use crate::spectra::{Envelope, Family, Multiplicity, UnivariateSpectrum};
use rayon::prelude::*;
use serde::Serialize;
use std::ops::RangeInclusive;

/// Default `δ` values tried by [`verify_bounds`].
pub const DEFAULT_DELTAS: [f64; 4] = [0.25, 0.5, 0.65, 1.0];

/// Inputs of the preasymptotic bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PreasymptoticParams {
    pub log_sigma1: Dd,
    pub log_sigma2: Dd,
    /// Multiplicity of `σ(2)`.
    pub v: u64,
    /// Envelope constant `C`, unnormalized.
    pub c: f64,
    /// Envelope exponent `s`.
    pub s: f64,
    pub d: u32,
    pub delta: f64,
}

impl PreasymptoticParams {
    pub fn new(sigma1: f64, sigma2: f64, v: u64, c: f64, s: f64, d: u32, delta: f64) -> Result<Self> {
        let p = PreasymptoticParams {
            log_sigma1: Dd::from_f64(sigma1).ln(),
            log_sigma2: Dd::from_f64(sigma2).ln(),
            v,
            c,
            s,
            d,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Reads `σ(1)`, `σ(2)`, `v` and the envelope off a spectrum.
    pub fn from_spectrum(sp: &UnivariateSpectrum, d: u32, delta: f64) -> Result<Self> {
        let v = match sp.tie_multiplicity() {
            Multiplicity::Finite(v) => v,
            Multiplicity::Unbounded => {
                return Err(Error::domain(format!("`{}`: σ(2) has unbounded multiplicity", sp.label())))
            }
        };
        let Envelope { c, s, .. } = sp
            .envelope()
            .ok_or_else(|| Error::domain(format!("`{}` has no envelope σ(n) <= C n^-s", sp.label())))?;
        let p = PreasymptoticParams {
            log_sigma1: sp.log_sigma1(),
            log_sigma2: sp.log_sigma2(),
            v,
            c,
            s,
            d,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn sigma1(&self) -> f64 {
        self.log_sigma1.exp().to_f64()
    }

    pub fn sigma2(&self) -> f64 {
        self.log_sigma2.exp().to_f64()
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        self.delta = delta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.log_sigma1.is_finite() && self.log_sigma2.is_finite()) {
            return Err(Error::domain("σ(1) and σ(2) must be positive and finite"));
        }
        if !(self.log_sigma2 < self.log_sigma1) {
            return Err(Error::domain(format!(
                "the bounds need σ(2) < σ(1), got σ(1) = {}, σ(2) = {}",
                self.sigma1(),
                self.sigma2()
            )));
        }
        if self.v == 0 {
            return Err(Error::domain("the multiplicity v of σ(2) is at least 1"));
        }
        if !(self.c > 0.0 && self.c.is_finite() && self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::domain(format!("envelope needs C > 0 and s > 0, got C={}, s={}", self.c, self.s)));
        }
        if self.d == 0 {
            return Err(Error::domain("d must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::domain(format!("δ must lie in (0, 1], got {}", self.delta)));
        }
        Ok(())
    }

    /// `L = ln(σ(1)/σ(2))`
    pub fn gap_log(&self) -> Dd {
        self.log_sigma1 - self.log_sigma2
    }

    fn power(&self) -> Dd {
        Dd::from_f64(1.0 + self.delta) / Dd::from_f64(self.s)
    }

    /// `α(d, δ)`
    pub fn alpha(&self) -> Dd {
        let l = self.gap_log();
        l / (self.power() * l + Dd::from_u64(self.d as u64).ln())
    }

    /// `ln C̃(δ) = (C/σ(1))^((1+δ)/s) / δ`
    pub fn log_c_tilde(&self) -> Dd {
        let base = Dd::from_f64(self.c).ln() - self.log_sigma1;
        (self.power() * base).exp() / Dd::from_f64(self.delta)
    }

    /// `β(d, n)` for `2 <= n <= (1+v)^d`.
    pub fn beta(&self, n: u64) -> Result<Dd> {
        self.check_lower_range(n)?;
        let log_v1 = Dd::from_u64(self.v + 1).ln();
        let ratio = Dd::from_u64(self.v * self.d as u64) * log_v1 / Dd::from_u64(n).ln();
        Ok(self.gap_log() / ratio.ln_1p())
    }

    /// `(1+v)^d`, saturating.
    pub fn lower_range_end(&self) -> u64 {
        (self.v + 1).checked_pow(self.d).unwrap_or(u64::MAX)
    }

    fn check_lower_range(&self, n: u64) -> Result<()> {
        if n < 2 || n > self.lower_range_end() {
            return Err(Error::domain(format!(
                "the lower bound holds for 2 <= n <= (1+v)^d = {}^{}, got n = {n}",
                self.v + 1,
                self.d
            )));
        }
        Ok(())
    }
}

/// `ln` of the upper bound at `n >= 1`.
pub fn preasym_upper_log(p: &PreasymptoticParams, n: u64) -> Result<Dd> {
    p.validate()?;
    if n == 0 {
        return Err(Error::ZeroIndex);
    }
    let scale = p.log_sigma1.mul_f64(p.d as f64);
    Ok(scale + p.alpha() * (p.log_c_tilde() - Dd::from_u64(n).ln()))
}

/// Upper bound `σ(1)^d (C̃/n)^α` on `τ(n)`.
///
/// ```
/// use tensorpow::bounds::{preasym_upper, PreasymptoticParams};
/// let p = PreasymptoticParams::new(1.0, 0.5, 1, 1.0, 1.0, 4, 1.0).unwrap();
/// let want = (std::f64::consts::E / 16.0).powf(0.25);
/// assert!((preasym_upper(&p, 16).unwrap() - want).abs() < 1e-15);
/// ```
pub fn preasym_upper(p: &PreasymptoticParams, n: u64) -> Result<f64> {
    Ok(preasym_upper_log(p, n)?.exp().to_f64())
}

/// `ln` of the lower bound at `2 <= n <= (1+v)^d`.
pub fn preasym_lower_log(p: &PreasymptoticParams, n: u64) -> Result<Dd> {
    p.validate()?;
    let beta = p.beta(n)?;
    let scale = p.log_sigma1.mul_f64(p.d as f64);
    Ok(scale - p.gap_log() - beta * Dd::from_u64(n).ln())
}

/// Lower bound `σ(1)^d (σ(2)/σ(1)) n^(-β)` on `τ(n)`.
pub fn preasym_lower(p: &PreasymptoticParams, n: u64) -> Result<f64> {
    Ok(preasym_lower_log(p, n)?.exp().to_f64())
}

fn ln_factorial(m: u32) -> Dd {
    (2..=m as u64).map(|k| Dd::from_u64(k).ln()).sum()
}

/// Constant `K` in `τ(n) ~ K n^(-s) (ln n)^(s(d-1))`.
///
/// For sequences with `σ(n) ~ c n^(-s)` this is `c^d / ((d-1)!)^s`. The dyadic
/// sequence has no limit; its `lim sup` constant `2 (log₂ e)^(d-1) / (d-1)!`
/// is returned (see [`dyadic_constants`]).
///
/// ```
/// use tensorpow::bounds::asym_constant;
/// use tensorpow::spectra::{Family, TorusNorm};
/// let f = Family::Torus { norm: TorusNorm::Hash, s: 1.0, gamma: 1.0, a: 0.0, b: std::f64::consts::TAU };
/// assert!((asym_constant(&f, 3).unwrap() - 4.0).abs() < 1e-13);
/// ```
pub fn asym_constant(family: &Family, d: u32) -> Result<f64> {
    Ok(asym_constant_log(family, d)?.0.exp().to_f64())
}

/// `(ln K, s)`
pub fn asym_constant_log(family: &Family, d: u32) -> Result<(Dd, f64)> {
    if d == 0 {
        return Err(Error::domain("d must be at least 1"));
    }
    if *family == Family::Dyadic {
        let (upper, _) = dyadic_constants(d);
        return Ok((Dd::from_f64(upper).ln(), 1.0));
    }
    let (c, s) = family
        .asymptotic()
        .ok_or_else(|| Error::domain(format!("no asymptotic constant is known for {family:?}")))?;
    let log = Dd::from_f64(c).ln().mul_f64(d as f64) - ln_factorial(d - 1).mul_f64(s);
    Ok((log, s))
}

/// `(C_d, c_d)`, the `lim sup` and `lim inf` of `τ(n) n / (ln n)^(d-1)` for the
/// dyadic sequence: `C_d = 2 (log₂ e)^(d-1) / (d-1)!` and `c_d = C_d / 2`.
pub fn dyadic_constants(d: u32) -> (f64, f64) {
    let log2e = Dd::ONE / Dd::LN_2;
    let log = log2e.ln().mul_f64(d.saturating_sub(1) as f64) - ln_factorial(d.saturating_sub(1));
    let lower = log.exp().to_f64();
    (2.0 * lower, lower)
}

/// One index of a [`BoundReport`]. Logs are natural logarithms.
#[derive(Clone, Debug, Serialize)]
pub struct BoundRow {
    pub n: u64,
    pub tau_log: Dd,
    /// Absent outside `2 <= n <= (1+v)^d`.
    pub lower_log: Option<Dd>,
    /// Smallest upper bound over the `δ` grid.
    pub upper_log: Dd,
    pub delta_best: f64,
    /// `K n^(-s) (ln n)^(s(d-1))`, reported but never checked.
    pub asym_envelope_log: Option<f64>,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl BoundRow {
    pub fn pass(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub label: String,
    pub d: u32,
    pub sigma1: f64,
    pub sigma2: f64,
    pub v: u64,
    pub envelope: Envelope,
    pub deltas: Vec<f64>,
    pub rows: Vec<BoundRow>,
    pub violations: usize,
    /// Largest amount in log units by which a bound is violated; `0` if none.
    pub max_violation: f64,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.violations == 0
    }
}

/// Largest `n` for which [`verify_bounds`] lists `τ` by best-first search
/// instead of one [`tau_at`] call per index.
const TOPK_LIMIT: u64 = 1 << 20;

/// Checks `lower <= τ(n) <= min_δ upper` for every `n` in range, with the
/// tie tolerance as the only slack.
pub fn verify_bounds(
    sp: &UnivariateSpectrum,
    d: u32,
    n_range: RangeInclusive<u64>,
    deltas: &[f64],
) -> Result<BoundReport> {
    if deltas.is_empty() {
        return Err(Error::domain("the δ grid is empty"));
    }
    let (start, end) = (*n_range.start(), *n_range.end());
    if start == 0 || start > end {
        return Err(Error::domain(format!("invalid index range {start}..={end}")));
    }
    let params = deltas
        .iter()
        .map(|&delta| PreasymptoticParams::from_spectrum(sp, d, delta))
        .collect::<Result<Vec<_>>>()?;
    let p0 = params[0];
    let product = TensorProduct::power(sp.clone(), d as usize);
    let taus: Vec<Dd> = if end <= TOPK_LIMIT {
        tau_topk(&product, end)?[(start - 1) as usize..].to_vec()
    } else {
        (start..=end)
            .into_par_iter()
            .map(|n| tau_at(&product, n).map(|t| t.tau_log))
            .collect::<Result<Vec<_>>>()?
    };
    let asym = asym_constant_log(sp.family(), d).ok();
    let tol = sp.tolerance();
    let rows = taus
        .into_par_iter()
        .enumerate()
        .map(|(i, tau_log)| -> Result<BoundRow> {
            let n = start + i as u64;
            let mut best = (Dd::from_f64(f64::INFINITY), deltas[0]);
            for p in &params {
                let u = preasym_upper_log(p, n)?;
                if u < best.0 {
                    best = (u, p.delta);
                }
            }
            let lower_log = if n >= 2 && n <= p0.lower_range_end() {
                Some(preasym_lower_log(&p0, n)?)
            } else {
                None
            };
            let asym_envelope_log = asym.filter(|_| n >= 2).map(|(k, s)| {
                let ln_n = (n as f64).ln();
                k.to_f64() - s * ln_n + s * (d as f64 - 1.0) * ln_n.ln()
            });
            Ok(BoundRow {
                n,
                tau_log,
                lower_log,
                upper_log: best.0,
                delta_best: best.1,
                asym_envelope_log,
                lower_ok: lower_log.is_none_or(|l| tol.ge(tau_log, l)),
                upper_ok: tol.ge(best.0, tau_log),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut violations = 0;
    let mut max_violation = 0.0f64;
    for r in &rows {
        if !r.lower_ok {
            violations += 1;
            max_violation = max_violation.max((r.lower_log.unwrap() - r.tau_log).to_f64());
        }
        if !r.upper_ok {
            violations += 1;
            max_violation = max_violation.max((r.tau_log - r.upper_log).to_f64());
        }
    }
    Ok(BoundReport {
        label: sp.label().to_string(),
        d,
        sigma1: sp.sigma1(),
        sigma2: sp.sigma2(),
        v: p0.v,
        envelope: sp.envelope().expect("checked by from_spectrum"),
        deltas: deltas.to_vec(),
        rows,
        violations,
        max_violation,
    })
}
