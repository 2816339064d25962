use super::{Envelope, Family, SequenceSource, UnivariateSpectrum};
use crate::dd::Dd;
use crate::error::{Error, Result};
use std::sync::Arc;

#[derive(Debug)]
struct JacobiSource {
    inv_a: Dd,
    s: f64,
}

impl SequenceSource for JacobiSource {
    fn log_sigma(&self, n: u64) -> Result<Dd> {
        Ok(-(self.inv_a.scale(n - 1)).ln_1p().mul_f64(self.s))
    }
}

/// Spectrum `σ(n) = (1 + (n-1)/a)^(-s)` with `a = (α+β+1)/2`, arising from
/// Jacobi polynomial eigenbases on `[-1, 1]`.
///
/// ```
/// use tensorpow::spectra::jacobi_spectrum;
/// let sp = jacobi_spectrum(0.0, 0.0, 1.0).unwrap();
/// assert!((sp.sigma(3).unwrap() - 0.2).abs() < 1e-15);
/// ```
pub fn jacobi_spectrum(alpha: f64, beta: f64, s: f64) -> Result<UnivariateSpectrum> {
    if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::domain(format!("alpha and beta must exceed -1, got {alpha}, {beta}")));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("smoothness s must be positive, got {s}")));
    }
    let a = (Dd::from_f64(alpha) + Dd::from_f64(beta) + Dd::ONE).mul_f64(0.5);
    if !(a > Dd::ZERO) {
        return Err(Error::domain("a = (alpha+beta+1)/2 must be positive"));
    }
    // sup_{n>=2} n/(1 + (n-1)/a) = a n/(a - 1 + n): increasing in n iff a >= 1
    let af = a.to_f64();
    let base = if af >= 1.0 { af } else { 2.0 * af / (1.0 + af) };
    let envelope = Envelope { c: base.powf(s), s, certified: true };
    UnivariateSpectrum::from_source(
        Arc::new(JacobiSource { inv_a: a.recip(), s }),
        Some(envelope),
        Family::Jacobi { alpha, beta, s },
        format!("jacobi(alpha={alpha}, beta={beta}, s={s})"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let sp = jacobi_spectrum(0.0, 0.0, 1.0).unwrap();
        for n in 1..2000u64 {
            let want = Dd::ONE / Dd::from_u64(2 * n - 1);
            let got = sp.log_sigma(n).unwrap().exp();
            assert!(((got - want) / want).abs().to_f64() < 1e-28, "n={n}");
        }
        let sp = jacobi_spectrum(0.5, 0.5, 2.0).unwrap();
        assert!((sp.sigma(2).unwrap() - 0.25).abs() < 1e-16);
        assert_eq!(sp.sigma(1).unwrap(), 1.0);
        assert_eq!(sp.tie_multiplicity(), super::super::Multiplicity::Finite(1));
    }

    #[test]
    fn envelope_is_the_supremum() {
        for (alpha, beta, s) in [(0.0, 0.0, 1.0), (1.0, 2.0, 0.5), (-0.5, -0.4, 3.0), (4.0, 4.0, 2.0)] {
            let sp = jacobi_spectrum(alpha, beta, s).unwrap();
            sp.check_prefix(1_000_000).unwrap();
            let env = sp.envelope().unwrap();
            let best = (2..200_000u64)
                .map(|n| sp.sigma(n).unwrap() * (n as f64).powf(s))
                .fold(0.0, f64::max);
            assert!(best <= env.c * (1.0 + 1e-12));
            assert!(best >= env.c * 0.99, "{alpha} {beta}: {best} vs {}", env.c);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(jacobi_spectrum(-1.0, 0.0, 1.0).is_err());
        assert!(jacobi_spectrum(0.0, 0.0, 0.0).is_err());
        assert!(jacobi_spectrum(-0.75, -0.75, 1.0).is_err());
    }
}
