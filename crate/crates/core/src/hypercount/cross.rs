use super::BigCount;
use crate::error::{Error, Result};
use lru::LruCache;
use std::cell::RefCell;
use std::num::NonZeroUsize;

const CACHE_SIZE: usize = 1 << 18;

thread_local! {
    static CACHE: RefCell<LruCache<(u64, u64, u32), BigCount>> =
        RefCell::new(LruCache::new(NonZeroUsize::new(CACHE_SIZE).unwrap()));
}

fn floor_arg(r: f64) -> Result<u64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain(format!("r must be a nonnegative number, got {r}")));
    }
    if r >= 2f64.powi(63) {
        return Err(Error::domain(format!("r = {r} exceeds the supported range 2^63")));
    }
    Ok(r.floor() as u64)
}

/// `n^l`, saturating.
fn sat_pow(n: u64, l: u32) -> u64 {
    n.checked_pow(l).unwrap_or(u64::MAX)
}

/// `A_N(r, l) = #{n ∈ {N, N+1, ...}^l : n_1 ⋯ n_l <= r}`.
///
/// Evaluated exactly through `A_N(r, l+1) = Σ_{k>=N} A_N(r/k, l)`, grouping the
/// `k` with equal `⌊r/k⌋`. Only `⌊r⌋` matters, which keys the memo table.
///
/// ```
/// use tensorpow::hypercount::a_count;
/// assert_eq!(a_count(2, 10.0, 1).unwrap(), 9u64);
/// assert_eq!(a_count(1, 4.0, 2).unwrap(), 8u64);
/// ```
pub fn a_count(n_min: u64, r: f64, l: u32) -> Result<BigCount> {
    if n_min == 0 {
        return Err(Error::domain("N must be at least 1"));
    }
    if l == 0 {
        return Err(Error::domain("l must be at least 1"));
    }
    Ok(a_count_int(n_min, floor_arg(r)?, l))
}

/// [`a_count`] for an integer bound.
pub fn a_count_int(n_min: u64, r: u64, l: u32) -> BigCount {
    if r < sat_pow(n_min, l) {
        return BigCount::ZERO;
    }
    if l == 1 {
        return BigCount::from(r - n_min + 1);
    }
    let key = (n_min, r, l);
    if let Some(hit) = CACHE.with(|c| c.borrow_mut().get(&key).cloned()) {
        return hit;
    }
    let mut total = BigCount::ZERO;
    // the other l-1 factors are at least N, so k <= r / N^(l-1)
    let k_max = r / sat_pow(n_min, l - 1);
    let mut k = n_min;
    while k <= k_max {
        let q = r / k;
        let k_end = (r / q).min(k_max);
        let inner = a_count_int(n_min, q, l - 1);
        if !inner.is_zero() {
            total += &(&inner * (k_end - k + 1));
        }
        k = k_end + 1;
    }
    CACHE.with(|c| c.borrow_mut().put(key, total.clone()));
    total
}

/// Lower and upper envelopes of `A_2(r, l)` valid for `l >= 2` and `r >= 4^l`:
///
/// `r((log(r/2^l))^(l-1)/(l-1)! - (log(r/2^l))^(l-2)/(l-2)!) <= A_2(r, l) <= r (log r)^(l-1)/(l-1)!`
///
/// The lower envelope is returned as is, even where it is negative.
pub fn a2_sandwich(r: f64, l: u32) -> Result<(f64, f64)> {
    if l < 2 {
        return Err(Error::domain("the sandwich needs l >= 2"));
    }
    let min_r = 4f64.powi(l as i32);
    if !(r >= min_r) || !r.is_finite() {
        return Err(Error::domain(format!("the sandwich needs r >= 4^{l} = {min_r}, got {r}")));
    }
    let fact = |m: u32| (1..=m).map(f64::from).product::<f64>();
    let x = (r / 2f64.powi(l as i32)).ln();
    let lower = r * (x.powi(l as i32 - 1) / fact(l - 1) - x.powi(l as i32 - 2) / fact(l - 2));
    let upper = r * r.ln().powi(l as i32 - 1) / fact(l - 1);
    Ok((lower, upper))
}

/// Coarse bounds `r/(3·2^(l-1)) <= A_2(r, l) <= r^(1+δ)/δ^(l-1)`.
///
/// The lower bound requires `r >= 2^l` and is `0` below that.
pub fn a2_coarse_bounds(r: f64, l: u32, delta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::domain(format!("delta must be positive, got {delta}")));
    }
    if l == 0 {
        return Err(Error::domain("l must be at least 1"));
    }
    if !(r >= 0.0) {
        return Err(Error::domain(format!("r must be nonnegative, got {r}")));
    }
    let upper = r.powf(1.0 + delta) / delta.powi(l as i32 - 1);
    let lower = if r >= 2f64.powi(l as i32) {
        r / (3.0 * 2f64.powi(l as i32 - 1))
    } else {
        0.0
    };
    Ok((lower, upper))
}
