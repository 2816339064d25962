use super::BigCount;
use crate::error::{Error, Result};

fn check_d(d: u32) -> Result<()> {
    if d == 0 {
        return Err(Error::domain("d must be at least 1"));
    }
    Ok(())
}

/// `#{n : τ(n) = 2^(-k)} = 2^k · C(k+d-1, d-1)` for the dyadic sequence.
///
/// ```
/// use tensorpow::hypercount::dyadic_level_count;
/// assert_eq!(dyadic_level_count(3, 3).unwrap(), 80u64);
/// ```
pub fn dyadic_level_count(k: u32, d: u32) -> Result<BigCount> {
    check_d(d)?;
    Ok(&BigCount::from(2u64).pow(k) * &BigCount::binomial(k as u64 + d as u64 - 1, d as u64 - 1))
}

/// `N(k, d) = Σ_{j<=k} 2^j C(j+d-1, d-1)`: the last index with `τ(n) = 2^(-k)`.
pub fn dyadic_cumulative(k: u32, d: u32) -> Result<BigCount> {
    check_d(d)?;
    let mut total = BigCount::ZERO;
    for j in 0..=k {
        total += dyadic_level_count(j, d)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        for d in 1..8 {
            assert_eq!(dyadic_level_count(0, d).unwrap(), 1u64);
        }
        assert_eq!(dyadic_level_count(1, 2).unwrap(), 4u64);
        assert_eq!(dyadic_cumulative(1, 2).unwrap(), 5u64);
        // d = 1: N(k, 1) = 2^(k+1) - 1
        assert_eq!(dyadic_cumulative(10, 1).unwrap(), 2047u64);
        assert!(dyadic_level_count(1, 0).is_err());
    }

    #[test]
    fn product_form_of_the_sum() {
        // N(k,d) = Σ_j 2^j (j+1)⋯(j+d-1)/(d-1)!
        for d in 1..6u64 {
            for k in 0..20u32 {
                let mut total = BigCount::ZERO;
                for j in 0..=k as u64 {
                    let mut prod = BigCount::ONE;
                    for i in 1..d {
                        prod = &prod * &BigCount::from(j + i);
                    }
                    let fact = BigCount::factorial(d - 1).to_u128().unwrap();
                    let term = prod.to_u128().unwrap() / fact;
                    total += &(&BigCount::from(2u64).pow(j as u32) * &BigCount::from(term));
                }
                assert_eq!(dyadic_cumulative(k, d as u32).unwrap(), total);
            }
        }
    }
}
