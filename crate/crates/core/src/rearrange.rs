//! The nonincreasing rearrangement `τ` of a tensor product sequence.
//!
//! Three independent routes to the same values: [`tau_at`] (counting with
//! bisection and an exact snap), [`tau_topk`] (best-first search) and
//! [`tau_brute`] (sorting a finite box). Ties are kept as tie classes, so
//! `τ` is a value sequence and no tuple order is ever needed.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::hypercount::{
    count_at_least, last_true, tensor_count_pair, BigCount, CountOptions, TensorProduct,
};
use crate::spectra::UnivariateSpectrum;
use crate::ties::{Comparison, TieTolerance};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

/// Default memory budget of [`tau_topk`], in heap entries.
pub const DEFAULT_TOPK_BUDGET: u64 = 10_000_000;

/// Largest number of products [`tau_brute`] will sort.
pub const BRUTE_BOX_MAX: u64 = 100_000_000;

/// `τ(n)` with its counting certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauQueryResult {
    pub n: BigCount,
    /// `ln τ(n)`
    pub tau_log: Dd,
    pub tie_class_size: BigCount,
    /// `#{σ_d >= τ(n)}`
    pub count_ge: BigCount,
    /// `#{σ_d > τ(n)}`
    pub count_gt: BigCount,
}

impl TauQueryResult {
    pub fn tau(&self) -> f64 {
        self.tau_log.exp().to_f64()
    }

    /// `#{σ_d > τ(n)} < n <= #{σ_d >= τ(n)}`
    pub fn is_certified(&self) -> bool {
        self.count_gt < self.n
            && self.n <= self.count_ge
            && self.count_ge.checked_sub(&self.count_gt).as_ref() == Some(&self.tie_class_size)
    }
}

fn exact() -> CountOptions {
    CountOptions { ceiling: None, parallel: true }
}

fn certify(product: &TensorProduct, n: BigCount, tau_log: Dd) -> Result<TauQueryResult> {
    let pair = tensor_count_pair(product, tau_log, &exact())?;
    let result = TauQueryResult {
        n,
        tau_log,
        tie_class_size: pair.tie_class_size(),
        count_ge: pair.ge,
        count_gt: pair.gt,
    };
    if !result.is_certified() {
        return Err(Error::Invariant(format!(
            "τ({}) = exp({}) fails its certificate: #{{>}} = {}, #{{>=}} = {}",
            result.n, tau_log, result.count_gt, result.count_ge
        )));
    }
    Ok(result)
}

/// Exact `τ(n)`.
///
/// Brackets `ln τ(n)` between `ln τ(1)` and a value with at least `n` points
/// above it, bisects with early-exit counting until the bracket holds few
/// enough distinct values to list, then picks the tie class containing the
/// `n`-th point. The result is checked against `#{>} < n <= #{>=}`.
///
/// If `σ_d` is constant on its top `n` points (for instance `σ(2) = σ(1)` and
/// `n <= (1+v)^d`) the answer is `τ(1)` and no search happens.
///
/// ```
/// use tensorpow::prelude::*;
/// let sp = custom_spectrum(&[1.0], Tail::Power { c: 1.0, s: 1.0 }).unwrap();
/// let t = tau_at(&TensorProduct::power(sp, 2), 6u64).unwrap();
/// assert!((t.tau() - 0.25).abs() < 1e-15);
/// assert_eq!((t.count_ge, t.count_gt), (8u64.into(), 5u64.into()));
/// ```
pub fn tau_at(product: &TensorProduct, n: impl Into<BigCount>) -> Result<TauQueryResult> {
    product.check()?;
    let n = n.into();
    if n.is_zero() {
        return Err(Error::ZeroIndex);
    }
    if let Some(rank) = product.rank() {
        if n > rank {
            return Err(Error::BeyondRank { n: n.to_string(), rank: rank.to_string() });
        }
    }
    let top = product.log_top();
    if count_at_least(product, top, Comparison::AtLeast, &n)? {
        return certify(product, n, top);
    }
    let tol = product.tolerance();
    let mut lo = lower_bracket(product, &n, top)?;
    let mut hi = top;
    loop {
        let forced = (hi - lo).to_f64() <= 1e3 * tol.abs_at(hi);
        let limits = if forced { None } else { Some((WINDOW_LEAVES, WINDOW_NODES)) };
        match Window::collect(product, lo, hi, limits)? {
            Some(classes) => {
                let mut acc = tensor_count_pair(product, hi, &exact())?.ge;
                for (value, weight) in classes {
                    acc += &weight;
                    if acc >= n {
                        return certify(product, n, value);
                    }
                }
                return Err(Error::Invariant(format!(
                    "bracket [{lo}, {hi}) for τ({n}) holds only {acc} points"
                )));
            }
            None => {
                let mid = (lo + hi).mul_f64(0.5);
                if count_at_least(product, mid, Comparison::AtLeast, &n)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
    }
}

const WINDOW_LEAVES: usize = 2048;
const WINDOW_NODES: u64 = 1 << 16;

/// A log-value with at least `n` points at or above it.
fn lower_bracket(product: &TensorProduct, n: &BigCount, top: Dd) -> Result<Dd> {
    // the points (1, …, m, …, 1) with m <= n
    let mut best: Option<Dd> = None;
    if let Some(n64) = n.to_u64() {
        for sp in product.factors() {
            if sp.domain_end().is_some_and(|e| n64 > e) {
                continue;
            }
            let v = sp.log_sigma(n64)? + (top - sp.log_sigma1());
            if v.is_finite() && best.is_none_or(|b| v > b) {
                best = Some(v);
            }
        }
    }
    if let Some(lo) = best {
        if count_at_least(product, lo, Comparison::AtLeast, n)? {
            return Ok(lo);
        }
    }
    let mut step = 1.0;
    let mut short = 0.0;
    for _ in 0..64 {
        let lo = top - Dd::from_f64(step);
        match count_at_least(product, lo, Comparison::AtLeast, n) {
            Ok(true) => return Ok(lo),
            Ok(false) => short = step,
            // overshot past the index range; back off towards the last short step
            Err(Error::UnboundedTie(msg)) => return back_off(product, n, top, short, step, msg),
            Err(e) => return Err(e),
        }
        step *= 2.0;
    }
    Err(Error::domain(format!("no threshold with {n} points above it was found")))
}

/// Bisects `(short, over)` for a step that both reaches `n` and stays in range.
fn back_off(
    product: &TensorProduct,
    n: &BigCount,
    top: Dd,
    mut short: f64,
    mut over: f64,
    msg: String,
) -> Result<Dd> {
    for _ in 0..60 {
        let step = 0.5 * (short + over);
        let lo = top - Dd::from_f64(step);
        match count_at_least(product, lo, Comparison::AtLeast, n) {
            Ok(true) => return Ok(lo),
            Ok(false) => short = step,
            Err(Error::UnboundedTie(_)) => over = step,
            Err(e) => return Err(e),
        }
    }
    Err(Error::UnboundedTie(msg))
}

enum Halt {
    Full,
    Fail(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Fail(e)
    }
}

/// Distinct values in `[lo, hi)` with their multiplicities.
struct Window<'a> {
    product: &'a TensorProduct,
    lo: Dd,
    hi: Dd,
    tol: TieTolerance,
    margin: Dd,
    suffix: Vec<Dd>,
    limits: Option<(usize, u64)>,
    nodes: u64,
    leaves: Vec<(Dd, BigCount)>,
}

impl<'a> Window<'a> {
    /// Tie classes in descending order, or `None` when the limits are hit.
    fn collect(
        product: &'a TensorProduct,
        lo: Dd,
        hi: Dd,
        limits: Option<(usize, u64)>,
    ) -> Result<Option<Vec<(Dd, BigCount)>>> {
        let tol = product.tolerance();
        let d = product.d();
        let mut suffix = vec![Dd::ZERO; d + 1];
        for j in (0..d).rev() {
            suffix[j] = suffix[j + 1] + product.factors()[j].log_sigma1();
        }
        let mut w = Window {
            product,
            lo,
            hi,
            tol,
            margin: Dd::from_f64(4.0 * tol.abs_at(lo)),
            suffix,
            limits,
            nodes: 0,
            leaves: Vec::new(),
        };
        let outcome = if product.is_homogeneous() {
            (0..=d).try_for_each(|l| w.split(l))
        } else {
            w.hetero(0, Dd::ZERO, &BigCount::ONE)
        };
        match outcome {
            Err(Halt::Full) => return Ok(None),
            Err(Halt::Fail(e)) => return Err(e),
            Ok(()) => {}
        }
        w.leaves.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut classes: Vec<(Dd, BigCount)> = Vec::new();
        for (v, m) in w.leaves {
            match classes.last_mut() {
                Some((cv, cm)) if tol.eq(*cv, v) => *cm += &m,
                _ => classes.push((v, m)),
            }
        }
        Ok(Some(classes))
    }

    fn reachable(&self, best: Dd) -> bool {
        best + self.margin >= self.lo
    }

    fn tick(&mut self) -> Result<(), Halt> {
        self.nodes += 1;
        match self.limits {
            Some((_, nodes)) if self.nodes > nodes => Err(Halt::Full),
            _ => Ok(()),
        }
    }

    fn emit(&mut self, value: Dd, mult: BigCount) -> Result<(), Halt> {
        if self.tol.ge(value, self.lo) && !self.tol.ge(value, self.hi) {
            self.leaves.push((value, mult));
            if let Some((leaves, _)) = self.limits {
                if self.leaves.len() > leaves {
                    return Err(Halt::Full);
                }
            }
        }
        Ok(())
    }

    fn split(&mut self, l: usize) -> Result<(), Halt> {
        let sp = &self.product.factors()[0];
        let d = self.product.d();
        let partial = sp.log_sigma1().mul_f64((d - l) as f64);
        let w0 = BigCount::from(sp.level_size(0)).pow((d - l) as u32);
        let weight = &BigCount::binomial(d as u64, l as u64) * &w0;
        if l == 0 {
            return self.emit(partial, weight);
        }
        if !sp.level_exists(1) || !self.reachable(partial + sp.level_log(1)?.mul_f64(l as f64)) {
            return Ok(());
        }
        self.sorted(sp, 0, l as u32, partial, &weight)
    }

    fn sorted(
        &mut self,
        sp: &UnivariateSpectrum,
        prev: u64,
        k: u32,
        partial: Dd,
        mult: &BigCount,
    ) -> Result<(), Halt> {
        self.tick()?;
        if k == 1 {
            return self.leaf(sp, sp.level_start(prev + 1), partial, mult);
        }
        let mut level = prev + 1;
        while sp.level_exists(level) {
            let v = sp.level_log(level)?;
            if !self.reachable(partial + v.mul_f64(k as f64)) {
                break;
            }
            let next = if sp.level_exists(level + 1) { sp.level_log(level + 1)? } else { v };
            let w = BigCount::from(sp.level_size(level));
            for r in (1..=k).rev() {
                let here = partial + v.mul_f64(r as f64);
                let best = if r < k { here + next.mul_f64((k - r) as f64) } else { here };
                if !self.reachable(best) {
                    break;
                }
                let m = &(mult * &BigCount::binomial(k as u64, r as u64)) * &w.pow(r);
                if r == k {
                    self.emit(here, m)?;
                } else {
                    self.sorted(sp, level, k - r, here, &m)?;
                }
            }
            level += 1;
        }
        Ok(())
    }

    fn hetero(&mut self, j: usize, partial: Dd, mult: &BigCount) -> Result<(), Halt> {
        self.tick()?;
        let product = self.product;
        let sp = &product.factors()[j];
        if j + 1 == product.d() {
            return self.leaf(sp, 1, partial, mult);
        }
        let rest = self.suffix[j + 1];
        let mut level = 0;
        while sp.level_exists(level) {
            let v = sp.level_log(level)?;
            if !self.reachable(partial + v + rest) {
                break;
            }
            self.hetero(j + 1, partial + v, &(mult * sp.level_size(level)))?;
            level += 1;
        }
        Ok(())
    }

    /// Last coordinate: skip the indices at or above `hi`, then walk levels down to `lo`.
    fn leaf(
        &mut self,
        sp: &UnivariateSpectrum,
        start: u64,
        partial: Dd,
        mult: &BigCount,
    ) -> Result<(), Halt> {
        let (tol, hi) = (self.tol, self.hi);
        let above = last_true(sp, start, None, |n| Ok(tol.ge(partial + sp.log_sigma(n)?, hi)))?;
        let first = above.map_or(start, |m| m + 1);
        if sp.domain_end().is_some_and(|e| first > e) {
            return Ok(());
        }
        let mut level = sp.level_of(first);
        while sp.level_exists(level) {
            let v = partial + sp.level_log(level)?;
            if !self.tol.ge(v, self.lo) {
                break;
            }
            self.tick()?;
            self.emit(v, mult * sp.level_size(level))?;
            level += 1;
        }
        Ok(())
    }
}

#[derive(PartialEq)]
struct Node {
    value: Dd,
    index: Vec<u64>,
}

impl Eq for Node {}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value).then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn tuple_log(product: &TensorProduct, index: &[u64]) -> Result<Dd> {
    let mut v = Dd::ZERO;
    for (sp, &i) in product.factors().iter().zip(index) {
        v += sp.log_sigma(i)?;
    }
    Ok(v)
}

/// Number of distinct permutations of a sorted tuple.
fn arrangements(index: &[u64]) -> BigCount {
    let mut m = BigCount::factorial(index.len() as u64);
    let mut denom = BigCount::ONE;
    let mut run = 1u64;
    for w in index.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            denom = &denom * &BigCount::factorial(run);
            run = 1;
        }
    }
    denom = &denom * &BigCount::factorial(run);
    if denom != BigCount::ONE {
        let q = m.to_biguint() / denom.to_biguint();
        m = BigCount::from(q);
    }
    m
}

/// First `k` values of `τ` in log space, by best-first search with the
/// default budget [`DEFAULT_TOPK_BUDGET`].
///
/// Values past the rank of a finite-rank product are `-∞`.
///
/// ```
/// use tensorpow::prelude::*;
/// let tp = TensorProduct::power(dyadic_spectrum(), 2);
/// let top: Vec<f64> = tau_topk(&tp, 5).unwrap().iter().map(|v| v.exp().to_f64()).collect();
/// assert_eq!(top, [1.0, 0.5, 0.5, 0.5, 0.5]);
/// ```
pub fn tau_topk(product: &TensorProduct, k: u64) -> Result<Vec<Dd>> {
    tau_topk_with_budget(product, k, DEFAULT_TOPK_BUDGET)
}

/// [`tau_topk`] with an explicit bound on `k` and on the heap size.
///
/// Powers of one sequence walk sorted tuples only, each generated from a
/// unique parent, and emit every tuple once per distinct permutation.
/// Products of different sequences walk all tuples with a visited set.
pub fn tau_topk_with_budget(product: &TensorProduct, k: u64, budget: u64) -> Result<Vec<Dd>> {
    product.check()?;
    if k > budget {
        return Err(Error::BudgetExceeded { budget });
    }
    let d = product.d();
    let homogeneous = product.is_homogeneous();
    let mut out = Vec::with_capacity(k as usize);
    let mut heap = BinaryHeap::new();
    let mut seen = HashSet::new();
    let ones = vec![1u64; d];
    heap.push(Node { value: product.log_top(), index: ones.clone() });
    if !homogeneous {
        seen.insert(ones);
    }
    while (out.len() as u64) < k {
        let Some(Node { value, index }) = heap.pop() else { break };
        let copies = if homogeneous { arrangements(&index) } else { BigCount::ONE };
        let room = k - out.len() as u64;
        let copies = copies.to_u64().map_or(room, |c| c.min(room));
        out.extend(std::iter::repeat_n(value, copies as usize));
        if out.len() as u64 == k {
            break;
        }
        for j in 0..d {
            if homogeneous {
                // parent of a sorted tuple: decrement its last entry above one
                if index[j + 1..].iter().any(|&i| i != 1) || (j > 0 && index[j] + 1 > index[j - 1]) {
                    continue;
                }
            }
            let mut next = index.clone();
            next[j] += 1;
            if !homogeneous && !seen.insert(next.clone()) {
                continue;
            }
            let v = tuple_log(product, &next)?;
            if v.is_finite() {
                heap.push(Node { value: v, index: next });
            }
        }
        if heap.len() as u64 > budget {
            return Err(Error::BudgetExceeded { budget });
        }
    }
    out.resize(k as usize, Dd::NEG_INFINITY);
    Ok(out)
}

/// `τ(n)` by sorting all products over `{1, …, box_limit}^d`.
///
/// Only products strictly above `max_j σ_j(box_limit + 1) ∏_{i≠j} σ_i(1)` are
/// certainly complete inside the box; fewer than `n` of them is
/// [`Error::BoxTooSmall`].
///
/// ```
/// use tensorpow::prelude::*;
/// let sp = jacobi_spectrum(0.0, 0.0, 1.0).unwrap();
/// let t = tau_brute(&TensorProduct::power(sp, 2), 4, 50).unwrap();
/// assert!((t.tau() - 1.0 / 5.0).abs() < 1e-15);
/// ```
pub fn tau_brute(product: &TensorProduct, n: u64, box_limit: u64) -> Result<TauQueryResult> {
    product.check()?;
    if n == 0 {
        return Err(Error::ZeroIndex);
    }
    let d = product.d();
    if box_limit == 0
        || u32::try_from(d)
            .ok()
            .and_then(|d| box_limit.checked_pow(d))
            .is_none_or(|size| size > BRUTE_BOX_MAX)
    {
        return Err(Error::BoxTooLarge { limit: box_limit, d });
    }
    let top = product.log_top();
    let mut logs = Vec::with_capacity(d);
    let mut bound = Dd::NEG_INFINITY;
    for sp in product.factors() {
        let column = (1..=box_limit).map(|i| sp.log_sigma(i)).collect::<Result<Vec<_>>>()?;
        logs.push(column);
        let outside = match sp.domain_end() {
            Some(e) if box_limit >= e => Dd::NEG_INFINITY,
            _ => sp.log_sigma(box_limit + 1)?,
        };
        bound = bound.max(outside + (top - sp.log_sigma1()));
    }
    let tol = product.tolerance();
    let mut suffix = vec![Dd::ZERO; d + 1];
    for j in (0..d).rev() {
        suffix[j] = suffix[j + 1] + logs[j][0];
    }
    let mut kept = Vec::new();
    fn walk(
        logs: &[Vec<Dd>],
        suffix: &[Dd],
        j: usize,
        partial: Dd,
        bound: Dd,
        tol: TieTolerance,
        kept: &mut Vec<Dd>,
    ) {
        for &v in &logs[j] {
            let here = partial + v;
            if !tol.gt(here + suffix[j + 1], bound) {
                break;
            }
            if j + 1 == logs.len() {
                kept.push(here);
            } else {
                walk(logs, suffix, j + 1, here, bound, tol, kept);
            }
        }
    }
    walk(&logs, &suffix, 0, Dd::ZERO, bound, tol, &mut kept);
    if (kept.len() as u64) < n {
        return Err(Error::BoxTooSmall { limit: box_limit, kept: kept.len() as u64, needed: n });
    }
    kept.sort_by(|a, b| b.total_cmp(a));
    let tau_log = kept[(n - 1) as usize];
    let count_ge = kept.iter().filter(|&&v| tol.ge(v, tau_log)).count() as u64;
    let count_gt = kept.iter().filter(|&&v| tol.gt(v, tau_log)).count() as u64;
    Ok(TauQueryResult {
        n: n.into(),
        tau_log,
        tie_class_size: (count_ge - count_gt).into(),
        count_ge: count_ge.into(),
        count_gt: count_gt.into(),
    })
}
