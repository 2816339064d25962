//! Information complexity and polynomial tractability of tensor power problems.
//!
//! For norm-one operators `T_d` with singular values `a_n(T_d)` nonincreasing
//! in `d`, approximating the `d`-fold tensor power of `T_d` is strongly
//! polynomially tractable iff it is polynomially tractable iff `a_2(T_d)`
//! decays polynomially in `d`. [`classify`] tests that criterion on a finite
//! range of dimensions with explicit thresholds.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::hypercount::{tensor_count, BigCount, CountQuery, TensorProduct};
use crate::spectra::{
    cube_h1_spectrum, cube_h2_spectrum, find_h2_frequencies, jacobi_spectrum, torus_spectrum,
    TorusNorm, TorusNormKind, UnivariateSpectrum,
};
use crate::ties::Comparison;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// `n(ε, d) = #{n : τ(n) >= ε}`, the number of functionals needed for a
/// worst case error below `ε`.
///
/// ```
/// use tensorpow::prelude::*;
/// assert_eq!(info_complexity(&dyadic_spectrum(), 2, 0.5).unwrap(), 5u64);
/// assert_eq!(info_complexity(&dyadic_spectrum(), 2, 1.5).unwrap(), 0u64);
/// ```
pub fn info_complexity(sp: &UnivariateSpectrum, d: u32, epsilon: f64) -> Result<BigCount> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!("ε must be positive and finite, got {epsilon}")));
    }
    if d == 0 {
        return Err(Error::domain("d must be at least 1"));
    }
    tensor_count(&CountQuery {
        product: TensorProduct::power(sp.clone(), d as usize),
        threshold_log: Dd::from_f64(epsilon).ln(),
        comparison: Comparison::AtLeast,
    })
}

/// Smoothness `s_d` as a function of the dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum SmoothnessSchedule {
    Constant(f64),
    /// `⌈log₂ d⌉`, at least 1.
    CeilLog2,
    /// `d^p`
    Power(f64),
    /// `⌈d^p⌉`
    CeilPower(f64),
}

impl SmoothnessSchedule {
    pub fn at(self, d: u32) -> f64 {
        let d = d as f64;
        match self {
            SmoothnessSchedule::Constant(s) => s,
            SmoothnessSchedule::CeilLog2 => d.log2().ceil().max(1.0),
            SmoothnessSchedule::Power(p) => d.powf(p),
            SmoothnessSchedule::CeilPower(p) => d.powf(p).ceil(),
        }
    }
}

/// The univariate problem `T_d` at one dimension.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub spectrum: UnivariateSpectrum,
    /// Smoothness used for this member.
    pub smoothness: f64,
    /// Proven enclosure of `a_2(T_d)` when `spectrum` only stands in for it.
    pub a2_bracket: Option<(f64, f64)>,
    /// `spectrum` belongs to a less smooth problem that dominates `T_d`.
    pub surrogate: bool,
}

type Generator = dyn Fn(u32) -> Result<FamilyMember> + Send + Sync;

/// `d ↦ T_d`, a sequence of norm-one univariate problems.
#[derive(Clone)]
pub struct ProblemFamily {
    pub label: String,
    generator: Arc<Generator>,
    /// Caveats copied into every verdict.
    pub notes: Vec<String>,
}

impl fmt::Debug for ProblemFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemFamily").field("label", &self.label).finish_non_exhaustive()
    }
}

impl ProblemFamily {
    pub fn new(
        label: impl Into<String>,
        generator: impl Fn(u32) -> Result<FamilyMember> + Send + Sync + 'static,
    ) -> Self {
        ProblemFamily { label: label.into(), generator: Arc::new(generator), notes: Vec::new() }
    }

    pub fn member(&self, d: u32) -> Result<FamilyMember> {
        (self.generator)(d)
    }

    /// Periodic Sobolev spaces on `[a, b]` with smoothness `s_d`.
    pub fn torus(norm: TorusNorm, gamma: f64, interval: (f64, f64), schedule: SmoothnessSchedule) -> Self {
        let label = format!("torus({norm}, γ={gamma}, [{}, {}], s_d={schedule:?})", interval.0, interval.1);
        let mut family = ProblemFamily::new(label, move |d| {
            let s = schedule.at(d);
            Ok(FamilyMember {
                spectrum: torus_spectrum(TorusNormKind::new(norm, s, gamma, interval))?,
                smoothness: s,
                a2_bracket: None,
                surrogate: false,
            })
        });
        let eta = TorusNormKind::new(norm, 1.0, gamma, interval).eta().to_f64();
        if eta < 1.0 && norm != TorusNorm::Circ {
            family.notes.push(format!(
                "η = {eta} < 1: only the {} norm keeps a_2 bounded below for growing s_d; \
                 with this norm a_2 = σ(2) still decays",
                TorusNorm::Circ
            ));
        }
        family
    }

    /// Nonperiodic Sobolev spaces of integer smoothness `s_d` on `[a, b]`.
    ///
    /// `s_d = 1, 2` use the exact spectra. For `s_d >= 3` the `s = 2` spectrum
    /// stands in, and `a_2` is enclosed between the `s = ∞` lower bound
    /// `((b-a)²/(12+(b-a)²))^(1/2)` and `σ^(2)(2)`.
    pub fn cube(interval: (f64, f64), schedule: SmoothnessSchedule) -> Self {
        let label = format!("cube([{}, {}], s_d={schedule:?})", interval.0, interval.1);
        ProblemFamily::new(label, move |d| {
            let s = schedule.at(d);
            if s < 1.0 || s.fract() != 0.0 {
                return Err(Error::domain(format!("cube smoothness must be a positive integer, got {s}")));
            }
            if s == 1.0 {
                return Ok(FamilyMember {
                    spectrum: cube_h1_spectrum(interval)?,
                    smoothness: s,
                    a2_bracket: None,
                    surrogate: false,
                });
            }
            let spectrum = cube_h2_spectrum(interval, 64)?;
            let bracket = (s > 2.0).then(|| {
                let len2 = (interval.1 - interval.0).powi(2);
                ((len2 / (12.0 + len2)).sqrt(), spectrum.sigma2())
            });
            Ok(FamilyMember { spectrum, smoothness: s, a2_bracket: bracket, surrogate: s > 2.0 })
        })
    }

    /// Jacobi weighted spaces with smoothness `s_d`.
    pub fn jacobi(alpha: f64, beta: f64, schedule: SmoothnessSchedule) -> Self {
        let label = format!("jacobi(α={alpha}, β={beta}, s_d={schedule:?})");
        ProblemFamily::new(label, move |d| {
            let s = schedule.at(d);
            Ok(FamilyMember {
                spectrum: jacobi_spectrum(alpha, beta, s)?,
                smoothness: s,
                a2_bracket: None,
                surrogate: false,
            })
        })
    }
}

/// Thresholds of [`classify`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPolicy {
    /// Polynomial decay needs a fitted slope of `ln a_2` against `ln d` at most this.
    pub max_slope: f64,
    /// ... and a coefficient of determination at least this.
    pub min_r_squared: f64,
    /// Bounded below means `min a_2 / max a_2` at least this.
    pub min_ratio: f64,
    /// Indices `n` at which `a_n(T_d)` is checked to be nonincreasing in `d`.
    pub monotone_check_len: u64,
    /// Thresholds of the `n(ε, d)` evidence table.
    pub eps_grid: Vec<f64>,
}

impl Default for FitPolicy {
    fn default() -> Self {
        FitPolicy {
            max_slope: -0.1,
            min_r_squared: 0.9,
            min_ratio: 0.5,
            monotone_check_len: 16,
            eps_grid: vec![0.5, 0.25, 0.1],
        }
    }
}

/// Default sample dimensions `4, 8, …, 256`.
pub fn default_d_range() -> Vec<u32> {
    (2..=8).map(|k| 1u32 << k).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    StronglyPolynomial,
    NotPolynomial,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::StronglyPolynomial => "strongly-polynomial",
            Verdict::NotPolynomial => "not-polynomial",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionSample {
    pub d: u32,
    pub smoothness: f64,
    pub a2: f64,
    pub a2_bracket: Option<(f64, f64)>,
    pub surrogate: bool,
    /// `(ε, n(ε, d))`; `None` when the count exceeds the counting ceiling.
    pub complexity: Vec<(f64, Option<BigCount>)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TractabilityVerdict {
    pub verdict: Verdict,
    pub label: String,
    pub d_range: Vec<u32>,
    pub slope: f64,
    pub r_squared: f64,
    /// `min a_2 / max a_2`, using the lower end of any bracket.
    pub min_max_ratio: f64,
    pub samples: Vec<DimensionSample>,
    pub diagnostics: Vec<String>,
    pub policy: FitPolicy,
}

impl TractabilityVerdict {
    /// The verdict with the sampled dimensions it rests on.
    pub fn summary(&self) -> String {
        let range = match (self.d_range.first(), self.d_range.last()) {
            (Some(a), Some(b)) => format!("d in {a}..={b} ({} samples)", self.d_range.len()),
            _ => "no samples".to_string(),
        };
        format!("{} on {range}", self.verdict)
    }
}

/// Least squares fit `y = a + b x`; returns `(b, R²)`. `R² = 0` for constant `y`.
fn fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy <= 1e-300 { 0.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// Polynomial tractability verdict from `a_2(T_d)` over `d_range`.
///
/// `strongly-polynomial` needs a fitted power decay of `a_2`,
/// `not-polynomial` needs `a_2` bounded below, and a sample where
/// `a_n(T_d)` grows with `d` makes the result `inconclusive`.
pub fn classify(family: &ProblemFamily, d_range: &[u32], policy: &FitPolicy) -> Result<TractabilityVerdict> {
    let mut ds = d_range.to_vec();
    ds.sort_unstable();
    ds.dedup();
    if ds.len() < 4 {
        return Err(Error::domain(format!("classification needs at least 4 distinct dimensions, got {}", ds.len())));
    }
    if ds[0] == 0 {
        return Err(Error::domain("dimensions start at 1"));
    }
    let members = ds.par_iter().map(|&d| family.member(d)).collect::<Result<Vec<_>>>()?;
    let samples = ds
        .par_iter()
        .zip(&members)
        .map(|(&d, m)| DimensionSample {
            d,
            smoothness: m.smoothness,
            a2: m.spectrum.sigma2(),
            a2_bracket: m.a2_bracket,
            surrogate: m.surrogate,
            complexity: policy
                .eps_grid
                .iter()
                .map(|&eps| (eps, info_complexity(&m.spectrum, d, eps).ok()))
                .collect(),
        })
        .collect::<Vec<_>>();
    let mut diagnostics = family.notes.clone();
    for m in &members {
        if (m.spectrum.sigma1() - 1.0).abs() > 1e-12 {
            diagnostics.push(format!("`{}` is not norm one: σ(1) = {}", m.spectrum.label(), m.spectrum.sigma1()));
        }
    }
    let mut monotone = true;
    for (pair, ds) in members.windows(2).zip(ds.windows(2)) {
        if pair[0].surrogate || pair[1].surrogate {
            continue;
        }
        let (a, b) = (&pair[0].spectrum, &pair[1].spectrum);
        for n in 1..=policy.monotone_check_len {
            let (x, y) = (a.log_sigma(n)?, b.log_sigma(n)?);
            if a.tolerance().gt(y, x) {
                monotone = false;
                diagnostics.push(format!("a_{n}(T_d) increases from d={} to d={}", ds[0], ds[1]));
                break;
            }
        }
    }
    let xs: Vec<f64> = ds.iter().map(|&d| (d as f64).ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.a2.ln()).collect();
    let (slope, r_squared) = fit(&xs, &ys);
    let lowest = samples.iter().map(|s| s.a2_bracket.map_or(s.a2, |b| b.0)).fold(f64::INFINITY, f64::min);
    let highest = samples.iter().map(|s| s.a2).fold(0.0, f64::max);
    let min_max_ratio = lowest / highest;
    let verdict = if !monotone {
        Verdict::Inconclusive
    } else if slope <= policy.max_slope && r_squared >= policy.min_r_squared {
        Verdict::StronglyPolynomial
    } else if min_max_ratio >= policy.min_ratio {
        Verdict::NotPolynomial
    } else {
        diagnostics.push(format!(
            "a_2 neither fits a power decay (slope {slope:.4}, R² {r_squared:.4}) nor stays bounded below (ratio {min_max_ratio:.4})"
        ));
        Verdict::Inconclusive
    };
    Ok(TractabilityVerdict {
        verdict,
        label: family.label.clone(),
        d_range: ds,
        slope,
        r_squared,
        min_max_ratio,
        samples,
        diagnostics,
        policy: policy.clone(),
    })
}

/// `σ^(2)(2)` on `[a, b]` from the first nonzero frequency.
pub fn cube_h2_second_value(interval: (f64, f64)) -> Result<f64> {
    let roots = find_h2_frequencies(interval, 2)?;
    let w = roots
        .iter()
        .map(|r| r.omega)
        .find(|&w| w > 0.0)
        .ok_or_else(|| Error::Invariant("no nonzero frequency found".into()))?;
    Ok((1.0 + w * w + w.powi(4)).sqrt().recip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rearrange::tau_topk;
    use crate::spectra::dyadic_spectrum;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn counts() {
        let sp = dyadic_spectrum();
        assert_eq!(info_complexity(&sp, 2, 0.5).unwrap(), 5u64);
        assert_eq!(info_complexity(&sp, 2, 1.0).unwrap(), 1u64);
        assert_eq!(info_complexity(&sp, 2, 1.01).unwrap(), 0u64);
        assert!(info_complexity(&sp, 2, 0.0).is_err());
    }

    #[test]
    fn matches_topk() {
        let sp = torus_spectrum(TorusNormKind::new(TorusNorm::Hash, 1.0, 1.0, (0.0, TAU))).unwrap();
        let top = tau_topk(&TensorProduct::power(sp.clone(), 3), 200).unwrap();
        for eps in [0.5, 0.3, 0.25, 0.2, 0.1] {
            let n = info_complexity(&sp, 3, eps).unwrap();
            let want = top.iter().filter(|&&v| sp.tolerance().ge(v, Dd::from_f64(eps).ln())).count() as u64;
            assert!(want < 200);
            assert_eq!(n, want, "ε={eps}");
        }
    }

    #[test]
    fn torus_log_smoothness() {
        let f = ProblemFamily::torus(TorusNorm::Hash, 1.0, (0.0, PI), SmoothnessSchedule::CeilLog2);
        let v = classify(&f, &default_d_range(), &FitPolicy::default()).unwrap();
        assert_eq!(v.verdict, Verdict::StronglyPolynomial);
        assert!((v.slope + 3f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn torus_constant_smoothness() {
        let f = ProblemFamily::torus(TorusNorm::Hash, 1.0, (0.0, TAU), SmoothnessSchedule::Constant(2.0));
        let v = classify(&f, &default_d_range(), &FitPolicy::default()).unwrap();
        assert_eq!(v.verdict, Verdict::NotPolynomial);
    }

    #[test]
    fn torus_root_smoothness() {
        let f = ProblemFamily::torus(TorusNorm::Hash, 1.0, (0.0, TAU), SmoothnessSchedule::Power(0.5));
        let v = classify(&f, &default_d_range(), &FitPolicy::default()).unwrap();
        assert_eq!(v.verdict, Verdict::StronglyPolynomial, "{v:?}");
    }

    #[test]
    fn long_torus_natural_norm() {
        let f = ProblemFamily::torus(TorusNorm::Circ, 1.0, (0.0, 2.0 * TAU), SmoothnessSchedule::CeilLog2);
        let v = classify(&f, &default_d_range(), &FitPolicy::default()).unwrap();
        assert_eq!(v.verdict, Verdict::NotPolynomial);
        assert!(v.samples.iter().all(|s| s.a2 >= (1.0 - 0.25f64).sqrt()));
    }

    #[test]
    fn cube() {
        let f = ProblemFamily::cube((0.0, 1.0), SmoothnessSchedule::CeilLog2);
        let v = classify(&f, &default_d_range(), &FitPolicy::default()).unwrap();
        assert_eq!(v.verdict, Verdict::NotPolynomial);
        assert!(v.samples.iter().all(|s| s.a2_bracket.map_or(s.a2, |b| b.0) >= 0.27735));
        let w = cube_h2_second_value((0.0, 1.0)).unwrap();
        assert!((0.27735..=0.27795).contains(&w));
    }

    #[test]
    fn too_few_dimensions() {
        let f = ProblemFamily::torus(TorusNorm::Hash, 1.0, (0.0, TAU), SmoothnessSchedule::Constant(1.0));
        assert!(classify(&f, &[2, 4, 4, 8], &FitPolicy::default()).is_err());
    }
}
