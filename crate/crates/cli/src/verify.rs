//! Cross-oracle self check: independent algorithms must agree and every
//! guaranteed bound must hold.

use crate::output::Cell;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use tensorpow::bounds::{verify_bounds, DEFAULT_DELTAS};
use tensorpow::hypercount::{a2_coarse_bounds, a2_sandwich, a_count_int, tensor_count_pair, CountOptions};
use tensorpow::rearrange::{tau_at, tau_brute, tau_topk};
use tensorpow::spectra::{
    cube_h1_spectrum, custom_spectrum, dyadic_spectrum, jacobi_spectrum, torus_spectrum, Tail, TorusNorm,
    TorusNormKind, UnivariateSpectrum,
};
use tensorpow::ties::Precision;
use tensorpow::{BigCount, Error, Result, TensorProduct};

pub struct CheckRow {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub skipped: usize,
    pub detail: String,
}

impl CheckRow {
    pub fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Text(self.name.into()),
            Cell::Int(self.cases as u64),
            Cell::Int(self.failures as u64),
            Cell::Int(self.skipped as u64),
            Cell::Bool(self.failures == 0),
            Cell::Text(self.detail.clone()),
        ]
    }
}

pub const COLUMNS: [&str; 6] = ["check", "cases", "failures", "skipped", "pass", "detail"];

enum Outcome {
    Pass,
    Fail(String),
    Skip,
}

fn tally(name: &'static str, outcomes: Vec<Outcome>) -> CheckRow {
    let cases = outcomes.len();
    let mut failures = 0;
    let mut skipped = 0;
    let mut first = None;
    for o in outcomes {
        match o {
            Outcome::Pass => {}
            Outcome::Skip => skipped += 1,
            Outcome::Fail(msg) => {
                failures += 1;
                first.get_or_insert(msg);
            }
        }
    }
    CheckRow { name, cases, failures, skipped, detail: first.unwrap_or_default() }
}

fn outcome(r: Result<Option<String>>) -> Outcome {
    match r {
        Ok(None) => Outcome::Pass,
        Ok(Some(msg)) => Outcome::Fail(msg),
        Err(Error::BoxTooSmall { .. }) => Outcome::Skip,
        Err(e) => Outcome::Fail(e.to_string()),
    }
}

/// A random nonincreasing prefix with occasional exact ties and a power tail.
fn random_spectrum(rng: &mut ChaCha8Rng, min_s: f64, precision: Precision) -> UnivariateSpectrum {
    let len = rng.gen_range(2..=8);
    let mut values = vec![1.0f64];
    for _ in 1..len {
        let last = *values.last().unwrap();
        let next = if rng.gen_bool(0.25) { last } else { last * rng.gen_range(0.3..0.95) };
        values.push(next);
    }
    let s = rng.gen_range(min_s..min_s + 1.0);
    let last = *values.last().unwrap();
    let c = last * (len as f64).powf(s);
    custom_spectrum(&values, Tail::Power { c, s }).expect("valid by construction").with_precision(precision)
}

struct Case {
    product: TensorProduct,
    n: u64,
    box_limit: u64,
}

fn cases(seed: u64, count: usize, precision: Precision) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d = rng.gen_range(1..=3usize);
            let min_s = [1.0, 1.5, 2.5][d - 1];
            let product = if d > 1 && rng.gen_bool(0.3) {
                TensorProduct::product((0..d).map(|_| random_spectrum(&mut rng, min_s, precision)).collect())
            } else {
                TensorProduct::power(random_spectrum(&mut rng, min_s, precision), d)
            };
            let n = rng.gen_range(1..=150);
            let box_limit = [20_000, 2_000, 200][d - 1];
            Case { product, n, box_limit }
        })
        .collect()
}

fn rearrange_agreement(case: &Case) -> Result<Option<String>> {
    let tol = case.product.tolerance();
    let fast = tau_at(&case.product, case.n)?;
    let brute = tau_brute(&case.product, case.n, case.box_limit)?;
    let top = tau_topk(&case.product, case.n)?;
    let last = top[case.n as usize - 1];
    if !fast.is_certified() {
        return Ok(Some(format!("tau_at certificate broken at n={}", case.n)));
    }
    if !tol.eq(fast.tau_log, brute.tau_log) || !tol.eq(fast.tau_log, last) {
        return Ok(Some(format!(
            "n={} d={}: tau_at {} brute {} topk {}",
            case.n,
            case.product.d(),
            fast.tau(),
            brute.tau(),
            last.exp().to_f64()
        )));
    }
    if fast.tie_class_size != brute.tie_class_size {
        return Ok(Some(format!(
            "n={}: tie class {} vs brute {}",
            case.n, fast.tie_class_size, brute.tie_class_size
        )));
    }
    Ok(None)
}

fn permutation_invariance(case: &Case) -> Result<Option<String>> {
    let mut factors = case.product.factors().to_vec();
    factors.rotate_left(1);
    let rotated = TensorProduct::product(factors);
    let a = tau_at(&case.product, case.n)?;
    let b = tau_at(&rotated, case.n)?;
    let tol = case.product.tolerance();
    if !tol.eq(a.tau_log, b.tau_log) || a.count_ge != b.count_ge || a.count_gt != b.count_gt {
        return Ok(Some(format!("n={}: factor order changes τ", case.n)));
    }
    Ok(None)
}

fn tie_class_identity(case: &Case) -> Result<Option<String>> {
    let t = tau_at(&case.product, case.n)?;
    let pair = tensor_count_pair(&case.product, t.tau_log, &CountOptions::default())?;
    if pair.tie_class_size() != t.tie_class_size || pair.ge != t.count_ge {
        return Ok(Some(format!("n={}: #{{>=}} - #{{>}} != tie class", case.n)));
    }
    Ok(None)
}

fn recursion_identity(rng: &mut ChaCha8Rng) -> Option<String> {
    let n_min = rng.gen_range(1..=3u64);
    let l = rng.gen_range(1..=4u32);
    let r = rng.gen_range(1..=5_000u64);
    let lhs = a_count_int(n_min, r, l + 1);
    let top = r / n_min.pow(l);
    let rhs: BigCount = (n_min..=top.max(n_min - 1)).map(|k| a_count_int(n_min, r / k, l)).sum();
    (lhs != rhs).then(|| format!("A_{n_min}({r},{}) = {lhs}, recursion gives {rhs}", l + 1))
}

fn binomial_identity(rng: &mut ChaCha8Rng) -> Option<String> {
    let l = rng.gen_range(1..=6u32);
    let r = rng.gen_range(1..=10_000u64);
    let lhs = a_count_int(1, r, l);
    let rhs: BigCount = std::iter::once(BigCount::ONE)
        .chain((1..=l).map(|m| BigCount::binomial(l as u64, m as u64) * a_count_int(2, r, m)))
        .sum();
    (lhs != rhs).then(|| format!("A_1({r},{l}) = {lhs}, binomial sum gives {rhs}"))
}

fn bracket_check(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let l = rng.gen_range(2..=4u32);
    let r = 4u64.pow(l) + rng.gen_range(0..200_000u64);
    let exact = a_count_int(2, r, l).to_f64();
    let (lo, hi) = a2_sandwich(r as f64, l)?;
    let delta = rng.gen_range(0.1..2.0);
    let (clo, chi) = a2_coarse_bounds(r as f64, l, delta)?;
    if !(lo <= exact && exact <= hi && clo <= exact && exact <= chi) {
        return Ok(Some(format!("A_2({r},{l}) = {exact} outside [{lo}, {hi}] or [{clo}, {chi}]")));
    }
    Ok(None)
}

fn bounds_families(precision: Precision) -> Result<Vec<(UnivariateSpectrum, u32, u64)>> {
    let torus = |norm| torus_spectrum(TorusNormKind::new(norm, 1.0, 1.0, (0.0, 2.0 * PI)));
    Ok(vec![
        (torus(TorusNorm::Hash)?, 8, 256),
        (torus(TorusNorm::Circ)?, 4, 1024),
        (jacobi_spectrum(0.0, 0.0, 1.0)?, 6, 1024),
        (jacobi_spectrum(1.0, 0.5, 2.0)?, 4, 1024),
        (cube_h1_spectrum((0.0, 1.0))?, 5, 1024),
        (dyadic_spectrum(), 4, 1024),
    ]
    .into_iter()
    .map(|(sp, d, end)| (sp.with_precision(precision), d, end))
    .collect())
}

pub fn run(seed: u64, count: usize, precision: Precision) -> Result<Vec<CheckRow>> {
    let cases = cases(seed, count, precision);
    let mut rows = Vec::new();
    let agree: Vec<Outcome> = cases.par_iter().map(|c| outcome(rearrange_agreement(c))).collect();
    rows.push(tally("rearrange-agreement", agree));
    let perm: Vec<Outcome> =
        cases.par_iter().filter(|c| c.product.d() > 1).map(|c| outcome(permutation_invariance(c))).collect();
    rows.push(tally("permutation-invariance", perm));
    let ties: Vec<Outcome> = cases.par_iter().map(|c| outcome(tie_class_identity(c))).collect();
    rows.push(tally("tie-class-identity", ties));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let rec = (0..count * 10).map(|_| recursion_identity(&mut rng).map_or(Outcome::Pass, Outcome::Fail)).collect();
    rows.push(tally("a-count-recursion", rec));
    let bin = (0..count * 10).map(|_| binomial_identity(&mut rng).map_or(Outcome::Pass, Outcome::Fail)).collect();
    rows.push(tally("a-count-binomial", bin));
    let brk = (0..count * 10).map(|_| outcome(bracket_check(&mut rng))).collect();
    rows.push(tally("a2-brackets", brk));

    let bnd: Vec<Outcome> = bounds_families(precision)?
        .par_iter()
        .map(|(sp, d, end)| {
            outcome(verify_bounds(sp, *d, 2..=*end, &DEFAULT_DELTAS).map(|rep| {
                (!rep.all_pass()).then(|| {
                    format!("{} d={d}: {} violations (max {:.3e})", rep.label, rep.violations, rep.max_violation)
                })
            }))
        })
        .collect();
    rows.push(tally("preasymptotic-bounds", bnd));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let rows = run(7, 6, Precision::Dd).unwrap();
        for r in &rows {
            assert_eq!(r.failures, 0, "{}: {}", r.name, r.detail);
        }
    }
}
