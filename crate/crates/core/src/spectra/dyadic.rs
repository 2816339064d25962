use super::{ilog2, Envelope, Family, SequenceSource, UnivariateSpectrum};
use crate::dd::Dd;
use crate::error::Result;
use std::sync::Arc;

#[derive(Debug)]
struct DyadicSource;

impl SequenceSource for DyadicSource {
    fn log_sigma(&self, n: u64) -> Result<Dd> {
        Ok(-Dd::LN_2.scale(ilog2(n)))
    }

    fn level_of(&self, n: u64) -> u64 {
        ilog2(n)
    }

    fn level_start(&self, level: u64) -> u64 {
        if level >= 64 {
            u64::MAX
        } else {
            1u64 << level
        }
    }
}

/// `σ(n) = 2^(-k)` for `2^k <= n < 2^(k+1)`.
///
/// ```
/// use tensorpow::spectra::dyadic_spectrum;
/// let sp = dyadic_spectrum();
/// assert_eq!(sp.sigma(3).unwrap(), 0.5);
/// assert_eq!(sp.sigma(7).unwrap(), 0.25);
/// ```
pub fn dyadic_spectrum() -> UnivariateSpectrum {
    UnivariateSpectrum::from_source(
        Arc::new(DyadicSource),
        Some(Envelope { c: 2.0, s: 1.0, certified: true }),
        Family::Dyadic,
        "dyadic",
    )
    .expect("dyadic spectrum is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::Multiplicity;

    #[test]
    fn blocks() {
        let sp = dyadic_spectrum();
        assert_eq!(sp.sigma(1).unwrap(), 1.0);
        assert_eq!(sp.sigma(4).unwrap(), 0.25);
        assert_eq!(sp.sigma(8).unwrap(), 0.125);
        assert_eq!(sp.tie_multiplicity(), Multiplicity::Finite(2));
        assert_eq!(sp.level_size(10), 1024);
        sp.check_prefix(1 << 16).unwrap();
    }
}
