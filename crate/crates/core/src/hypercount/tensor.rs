use super::BigCount;
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::spectra::UnivariateSpectrum;
use crate::ties::{Comparison, TieTolerance};
use rayon::prelude::*;

/// The factors `σ_1, …, σ_d` of a tensor product sequence
/// `σ_d(n) = σ_1(n_1) ⋯ σ_d(n_d)`.
#[derive(Clone, Debug)]
pub struct TensorProduct {
    factors: Vec<UnivariateSpectrum>,
    homogeneous: bool,
}

impl TensorProduct {
    /// `d`-th tensor power of one sequence.
    pub fn power(spectrum: UnivariateSpectrum, d: usize) -> Self {
        TensorProduct { factors: vec![spectrum; d], homogeneous: true }
    }

    /// Product of possibly different sequences. Identical factors are detected
    /// and use the symmetric algorithms.
    pub fn product(factors: Vec<UnivariateSpectrum>) -> Self {
        let homogeneous = factors.windows(2).all(|w| w[0].same_sequence(&w[1]));
        TensorProduct { factors, homogeneous }
    }

    pub fn d(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[UnivariateSpectrum] {
        &self.factors
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    /// Loosest tie tolerance among the factors.
    pub fn tolerance(&self) -> TieTolerance {
        self.factors
            .iter()
            .map(|f| f.tolerance())
            .fold(TieTolerance { rel: 0.0 }, |a, b| if b.rel > a.rel { b } else { a })
    }

    /// `ln τ(1) = Σ_j ln σ_j(1)`.
    pub fn log_top(&self) -> Dd {
        self.factors.iter().map(|f| f.log_sigma1()).sum()
    }

    /// Number of nonzero products, if finite.
    pub fn rank(&self) -> Option<BigCount> {
        let mut total = BigCount::ONE;
        for f in &self.factors {
            total = &total * &BigCount::from(f.rank()?);
        }
        Some(total)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.factors.is_empty() {
            return Err(Error::domain("a tensor product needs d >= 1 factors"));
        }
        Ok(())
    }
}

/// `#{n : σ_d(n) ⋈ t}` with `⋈` one of `>=`, `>`.
#[derive(Clone, Debug)]
pub struct CountQuery {
    pub product: TensorProduct,
    /// `ln t`
    pub threshold_log: Dd,
    pub comparison: Comparison,
}

#[derive(Clone, Debug)]
pub struct CountOptions {
    /// Counts above this fail with [`Error::CeilingExceeded`].
    pub ceiling: Option<BigCount>,
    /// Evaluate the split over the number of non-one coordinates on the rayon pool.
    pub parallel: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions { ceiling: Some(BigCount::from(2u64).pow(256)), parallel: true }
    }
}

/// `#{σ_d >= t}` and `#{σ_d > t}` from one pass.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CountPair {
    pub ge: BigCount,
    pub gt: BigCount,
}

impl CountPair {
    /// Size of the tie class at `t`; zero when `t` is not attained.
    pub fn tie_class_size(&self) -> BigCount {
        self.ge.checked_sub(&self.gt).expect("#{>} never exceeds #{>=}")
    }
}

/// Exact count of lattice points with `σ_d(n) ⋈ t`.
///
/// ```
/// use tensorpow::prelude::*;
/// let sp = custom_spectrum(&[1.0], Tail::Power { c: 1.0, s: 1.0 }).unwrap();
/// let q = CountQuery {
///     product: TensorProduct::power(sp, 2),
///     threshold_log: Dd::from_f64(0.25).ln(),
///     comparison: Comparison::AtLeast,
/// };
/// assert_eq!(tensor_count(&q).unwrap(), 8u64);
/// ```
pub fn tensor_count(query: &CountQuery) -> Result<BigCount> {
    let pair = tensor_count_pair(&query.product, query.threshold_log, &CountOptions::default())?;
    Ok(match query.comparison {
        Comparison::AtLeast => pair.ge,
        Comparison::Above => pair.gt,
    })
}

/// Both counts at threshold `ln t`.
pub fn tensor_count_pair(
    product: &TensorProduct,
    threshold_log: Dd,
    options: &CountOptions,
) -> Result<CountPair> {
    let counter = Counter::new(product, threshold_log, options.ceiling.clone(), None)?;
    let acc = counter.run(options.parallel)?;
    Ok(CountPair { ge: acc.ge, gt: acc.gt })
}

/// Whether `#{σ_d ⋈ t} >= n`, stopping as soon as `n` points are found.
pub fn count_at_least(
    product: &TensorProduct,
    threshold_log: Dd,
    comparison: Comparison,
    n: &BigCount,
) -> Result<bool> {
    let counter = Counter::new(product, threshold_log, None, Some((comparison, n.clone())))?;
    let acc = counter.run(false)?;
    Ok(match comparison {
        Comparison::AtLeast => acc.ge >= *n,
        Comparison::Above => acc.gt >= *n,
    })
}

#[derive(Default)]
struct Acc {
    ge: BigCount,
    gt: BigCount,
    stopped: bool,
}

impl Acc {
    fn merge(mut self, other: Acc) -> Acc {
        self.ge += &other.ge;
        self.gt += &other.gt;
        self.stopped |= other.stopped;
        self
    }
}

struct Counter<'a> {
    product: &'a TensorProduct,
    threshold: Dd,
    tol: TieTolerance,
    /// Pruning margin; generous compared with the tie tolerance.
    margin: Dd,
    ceiling: Option<BigCount>,
    stop: Option<(Comparison, BigCount)>,
    /// `suffix[j] = Σ_{i >= j} ln σ_i(1)`
    suffix: Vec<Dd>,
}

impl<'a> Counter<'a> {
    fn new(
        product: &'a TensorProduct,
        threshold: Dd,
        ceiling: Option<BigCount>,
        stop: Option<(Comparison, BigCount)>,
    ) -> Result<Self> {
        product.check()?;
        if !threshold.is_finite() {
            return Err(Error::domain("the threshold must be positive and finite"));
        }
        let tol = product.tolerance();
        let margin = Dd::from_f64(4.0 * tol.abs_at(threshold));
        let d = product.d();
        let mut suffix = vec![Dd::ZERO; d + 1];
        for j in (0..d).rev() {
            suffix[j] = suffix[j + 1] + product.factors[j].log_sigma1();
        }
        Ok(Counter { product, threshold, tol, margin, ceiling, stop, suffix })
    }

    #[inline]
    fn reachable(&self, best: Dd) -> bool {
        best + self.margin >= self.threshold
    }

    fn add(&self, acc: &mut Acc, value: Dd, weight: &BigCount) -> Result<()> {
        if self.tol.ge(value, self.threshold) {
            acc.ge += weight;
            if self.tol.gt(value, self.threshold) {
                acc.gt += weight;
            }
        }
        self.after_add(acc)
    }

    fn after_add(&self, acc: &mut Acc) -> Result<()> {
        if let Some(ceiling) = &self.ceiling {
            if acc.ge > *ceiling {
                let log2_ceiling = (ceiling.ln() / std::f64::consts::LN_2).round() as u64;
                return Err(Error::CeilingExceeded { log2_ceiling });
            }
        }
        if let Some((cmp, target)) = &self.stop {
            let reached = match cmp {
                Comparison::AtLeast => acc.ge >= *target,
                Comparison::Above => acc.gt >= *target,
            };
            if reached {
                acc.stopped = true;
            }
        }
        Ok(())
    }

    fn run(&self, parallel: bool) -> Result<Acc> {
        if self.product.is_homogeneous() {
            let d = self.product.d();
            let parallel = parallel && self.stop.is_none() && d > 1;
            if parallel {
                let parts: Vec<Result<Acc>> = (0..=d)
                    .into_par_iter()
                    .map(|l| {
                        let mut acc = Acc::default();
                        self.homogeneous_split(l, &mut acc).map(|_| acc)
                    })
                    .collect();
                let mut total = Acc::default();
                for p in parts {
                    total = total.merge(p?);
                }
                self.after_add(&mut total)?;
                Ok(total)
            } else {
                let mut total = Acc::default();
                for l in 0..=d {
                    self.homogeneous_split(l, &mut total)?;
                    if total.stopped {
                        break;
                    }
                }
                Ok(total)
            }
        } else {
            let mut acc = Acc::default();
            self.hetero(0, Dd::ZERO, &BigCount::ONE, &mut acc)?;
            Ok(acc)
        }
    }

    /// Points with exactly `l` coordinates outside level 0.
    fn homogeneous_split(&self, l: usize, acc: &mut Acc) -> Result<()> {
        let sp = &self.product.factors[0];
        let d = self.product.d();
        let partial = sp.log_sigma1().mul_f64((d - l) as f64);
        let w0 = BigCount::from(sp.level_size(0)).pow((d - l) as u32);
        let weight = &BigCount::binomial(d as u64, l as u64) * &w0;
        if l == 0 {
            return self.add(acc, partial, &weight);
        }
        if !sp.level_exists(1) {
            return Err(Error::BeyondPrefix { n: sp.level_start(1), len: sp.domain_end().unwrap_or(0) });
        }
        if !self.reachable(partial + sp.level_log(1)?.mul_f64(l as f64)) {
            return Ok(());
        }
        self.sorted_levels(sp, 0, l as u32, partial, &weight, acc)
    }

    /// `k` coordinates on levels `> prev`, enumerated as nondecreasing level
    /// runs weighted by their number of arrangements.
    fn sorted_levels(
        &self,
        sp: &UnivariateSpectrum,
        prev: u64,
        k: u32,
        partial: Dd,
        mult: &BigCount,
        acc: &mut Acc,
    ) -> Result<()> {
        if k == 1 {
            let start = sp.level_start(prev + 1);
            let (ge, gt) = self.leaf_counts(sp, start, partial)?;
            if ge > 0 {
                acc.ge += &(mult * ge);
                acc.gt += &(mult * gt);
                self.after_add(acc)?;
            }
            return Ok(());
        }
        let mut level = prev + 1;
        loop {
            if !sp.level_exists(level) {
                return Err(beyond(sp, level));
            }
            let v = sp.level_log(level)?;
            if !self.reachable(partial + v.mul_f64(k as f64)) {
                return Ok(());
            }
            if !sp.level_exists(level + 1) {
                return Err(beyond(sp, level + 1));
            }
            let next = sp.level_log(level + 1)?;
            let w = BigCount::from(sp.level_size(level));
            for r in (1..=k).rev() {
                let here = partial + v.mul_f64(r as f64);
                let best = if r < k { here + next.mul_f64((k - r) as f64) } else { here };
                if !self.reachable(best) {
                    break;
                }
                let m = &(mult * &BigCount::binomial(k as u64, r as u64)) * &w.pow(r);
                if r == k {
                    self.add(acc, here, &m)?;
                } else {
                    self.sorted_levels(sp, level, k - r, here, &m, acc)?;
                }
                if acc.stopped {
                    return Ok(());
                }
            }
            level += 1;
        }
    }

    /// Ordered search over coordinates for products of different sequences.
    fn hetero(&self, j: usize, partial: Dd, mult: &BigCount, acc: &mut Acc) -> Result<()> {
        let sp = &self.product.factors[j];
        let d = self.product.d();
        if j + 1 == d {
            let (ge, gt) = self.leaf_counts(sp, 1, partial)?;
            if ge > 0 {
                acc.ge += &(mult * ge);
                acc.gt += &(mult * gt);
                self.after_add(acc)?;
            }
            return Ok(());
        }
        let rest = self.suffix[j + 1];
        let mut level = 0;
        loop {
            if !sp.level_exists(level) {
                return Err(beyond(sp, level));
            }
            let v = sp.level_log(level)?;
            if !self.reachable(partial + v + rest) {
                return Ok(());
            }
            let m = mult * sp.level_size(level);
            self.hetero(j + 1, partial + v, &m, acc)?;
            if acc.stopped {
                return Ok(());
            }
            level += 1;
        }
    }

    /// Number of indices `n >= start` with `partial + ln σ(n)` at least / above the threshold.
    fn leaf_counts(&self, sp: &UnivariateSpectrum, start: u64, partial: Dd) -> Result<(u64, u64)> {
        let ge = |n: u64| -> Result<bool> { Ok(self.tol.ge(partial + sp.log_sigma(n)?, self.threshold)) };
        let last_ge = match last_true(sp, start, None, ge)? {
            None => return Ok((0, 0)),
            Some(n) => n,
        };
        let gt = |n: u64| -> Result<bool> { Ok(self.tol.gt(partial + sp.log_sigma(n)?, self.threshold)) };
        let last_gt = last_true(sp, start, Some(last_ge), gt)?;
        let count = |last: Option<u64>| last.map_or(0, |n| n - start + 1);
        Ok((count(Some(last_ge)), count(last_gt)))
    }
}

fn beyond(sp: &UnivariateSpectrum, level: u64) -> Error {
    let n = sp.level_start(level);
    match sp.domain_end() {
        Some(len) => Error::BeyondPrefix { n, len },
        None => Error::UnboundedTie(format!(
            "`{}` keeps values above the threshold beyond index {n}",
            sp.label()
        )),
    }
}

/// Largest `n >= start` (and `<= cap`) with `pred(n)`, for a predicate that
/// holds on an initial run of indices. Exponential then binary search.
pub(crate) fn last_true(
    sp: &UnivariateSpectrum,
    start: u64,
    cap: Option<u64>,
    mut pred: impl FnMut(u64) -> Result<bool>,
) -> Result<Option<u64>> {
    if !pred(start)? {
        return Ok(None);
    }
    const LIMIT: u64 = u64::MAX / 4;
    let end = sp.domain_end();
    let bound = cap.unwrap_or(LIMIT).min(end.unwrap_or(LIMIT));
    let mut lo = start;
    let mut step = 1u64;
    let hi = loop {
        if lo >= bound {
            if cap.is_some_and(|c| lo >= c) {
                return Ok(Some(lo));
            }
            if let Some(len) = end.filter(|&e| lo >= e) {
                // the run may continue past the known prefix
                return Err(Error::BeyondPrefix { n: len + 1, len });
            }
            return Err(Error::UnboundedTie(format!(
                "`{}` stays above the threshold up to index {LIMIT}",
                sp.label()
            )));
        }
        let probe = lo.saturating_add(step).min(bound);
        if pred(probe)? {
            lo = probe;
            step = step.saturating_mul(2);
        } else {
            break probe;
        }
    };
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{custom_spectrum, dyadic_spectrum, Tail};

    fn harmonic() -> UnivariateSpectrum {
        custom_spectrum(&[1.0], Tail::Power { c: 1.0, s: 1.0 }).unwrap()
    }

    fn count(tp: &TensorProduct, t: f64) -> CountPair {
        tensor_count_pair(tp, Dd::from_f64(t).ln(), &CountOptions::default()).unwrap()
    }

    #[test]
    fn harmonic_square() {
        let tp = TensorProduct::power(harmonic(), 2);
        let c = count(&tp, 0.25);
        assert_eq!(c.ge, 8u64);
        assert_eq!(c.gt, 5u64);
        assert_eq!(c.tie_class_size(), 3u64);
    }

    #[test]
    fn top_value_only() {
        for d in 1..6 {
            let tp = TensorProduct::power(harmonic(), d);
            assert_eq!(count(&tp, 1.0).ge, 1u64);
            assert_eq!(count(&tp, 1.0).gt, 0u64);
        }
    }

    #[test]
    fn dyadic_square() {
        let tp = TensorProduct::power(dyadic_spectrum(), 2);
        assert_eq!(count(&tp, 0.5).ge, 5u64);
    }

    #[test]
    fn early_exit() {
        let tp = TensorProduct::power(harmonic(), 3);
        let t = Dd::from_f64(1e-3).ln();
        let full = tensor_count_pair(&tp, t, &CountOptions::default()).unwrap().ge;
        assert!(count_at_least(&tp, t, Comparison::AtLeast, &full).unwrap());
        let more = &full + &BigCount::ONE;
        assert!(!count_at_least(&tp, t, Comparison::AtLeast, &more).unwrap());
    }

    #[test]
    fn ceiling_is_reported() {
        let tp = TensorProduct::power(harmonic(), 3);
        let opts = CountOptions { ceiling: Some(BigCount::from(100u64)), parallel: false };
        let err = tensor_count_pair(&tp, Dd::from_f64(1e-3).ln(), &opts).unwrap_err();
        assert!(matches!(err, Error::CeilingExceeded { .. }));
    }

    #[test]
    fn prefix_without_tail() {
        let sp = custom_spectrum(&[1.0, 0.5, 0.25], Tail::None).unwrap();
        let tp = TensorProduct::power(sp.clone(), 2);
        // (1,1), (1,2), (2,1)
        assert_eq!(count(&tp, 0.5).ge, 3u64);
        let err = tensor_count_pair(&tp, Dd::from_f64(0.2).ln(), &CountOptions::default());
        assert!(matches!(err, Err(Error::BeyondPrefix { .. })));
        let fr = custom_spectrum(&[1.0, 0.5, 0.25], Tail::FiniteRank).unwrap();
        assert_eq!(count(&TensorProduct::power(fr, 2), 1e-9).ge, 9u64);
    }

    #[test]
    fn heterogeneous_matches_power() {
        let a = harmonic();
        let b = custom_spectrum(&[1.0], Tail::Power { c: 1.0, s: 1.0 }).unwrap();
        let het = TensorProduct::product(vec![a.clone(), b]);
        assert!(!het.is_homogeneous());
        let hom = TensorProduct::power(a, 2);
        for t in [1.0, 0.5, 0.25, 0.1, 0.01, 1e-3] {
            assert_eq!(count(&het, t), count(&hom, t), "t={t}");
        }
    }
}
