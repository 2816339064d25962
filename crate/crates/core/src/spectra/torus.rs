use super::{check_interval, Envelope, Family, SequenceSource, UnivariateSpectrum};
use crate::dd::Dd;
use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// The four families of weights `w_k` defining mixed Sobolev norms on the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TorusNorm {
    /// `w_k = (sum_{l=0}^{s} |ηk|^{2l})^{1/2}`, integer `s` or `s = inf`.
    Circ,
    /// `w_k = (1 + |ηk|^{2s})^{1/2}`
    Star,
    /// `w_k = (1 + |ηk|^2)^{s/2}`
    Plus,
    /// `w_k = (1 + |ηk|)^s`
    Hash,
}

impl TorusNorm {
    pub fn symbol(self) -> char {
        match self {
            TorusNorm::Circ => '∘',
            TorusNorm::Star => '*',
            TorusNorm::Plus => '+',
            TorusNorm::Hash => '#',
        }
    }
}

impl fmt::Display for TorusNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TorusNorm::Circ => "circ",
            TorusNorm::Star => "star",
            TorusNorm::Plus => "plus",
            TorusNorm::Hash => "hash",
        })
    }
}

impl FromStr for TorusNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circ" | "∘" | "o" => Ok(TorusNorm::Circ),
            "star" | "*" => Ok(TorusNorm::Star),
            "plus" | "+" => Ok(TorusNorm::Plus),
            "hash" | "#" => Ok(TorusNorm::Hash),
            other => Err(Error::domain(format!(
                "unknown torus norm `{other}` (expected circ, star, plus or hash)"
            ))),
        }
    }
}

/// Parameters of `H^{s,□,γ}_mix` on the torus over `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TorusNormKind {
    pub kind: TorusNorm,
    pub s: f64,
    pub gamma: f64,
    pub interval: (f64, f64),
}

impl TorusNormKind {
    pub fn new(kind: TorusNorm, s: f64, gamma: f64, interval: (f64, f64)) -> Self {
        TorusNormKind { kind, s, gamma, interval }
    }

    /// `η = 2π / (γ (b - a))`.
    pub fn eta(&self) -> Dd {
        let len = Dd::from_f64(self.interval.1) - Dd::from_f64(self.interval.0);
        Dd::TAU / (len * Dd::from_f64(self.gamma))
    }
}

#[derive(Debug)]
struct TorusSource {
    kind: TorusNorm,
    s: f64,
    /// `Some(m)` for the `∘` norm with integer `s = m`.
    circ_order: Option<u32>,
    eta: Dd,
    rank: Option<u64>,
}

impl TorusSource {
    fn log_weight(&self, k: u64) -> Dd {
        if k == 0 {
            return Dd::ZERO;
        }
        let x = self.eta.scale(k);
        let half = 0.5;
        match self.kind {
            TorusNorm::Hash => (Dd::ONE + x).ln().mul_f64(self.s),
            TorusNorm::Plus => (Dd::ONE + x.sqr()).ln().mul_f64(self.s * half),
            TorusNorm::Star => {
                let p = (x.ln().mul_f64(2.0).mul_f64(self.s)).exp();
                (Dd::ONE + p).ln().mul_f64(half)
            }
            TorusNorm::Circ => match self.circ_order {
                Some(m) => {
                    let y = x.sqr();
                    let mut acc = Dd::ONE;
                    for _ in 0..m {
                        acc = acc * y + Dd::ONE;
                    }
                    acc.ln().mul_f64(half)
                }
                None => {
                    // geometric series sum_l x^{2l} = 1 / (1 - x^2) for x < 1
                    let y = x.sqr();
                    if y >= Dd::ONE {
                        -Dd::NEG_INFINITY
                    } else {
                        -(Dd::ONE - y).ln().mul_f64(half)
                    }
                }
            },
        }
    }
}

impl SequenceSource for TorusSource {
    fn log_sigma(&self, n: u64) -> Result<Dd> {
        // |k_n| with k_n = (-1)^n floor(n/2)
        Ok(-self.log_weight(n / 2))
    }

    fn level_of(&self, n: u64) -> u64 {
        n / 2
    }

    fn level_start(&self, level: u64) -> u64 {
        if level == 0 {
            1
        } else {
            level.saturating_mul(2)
        }
    }

    fn rank(&self) -> Option<u64> {
        self.rank
    }
}

/// Spectrum of the embedding of `H^{s,□,γ}_mix` on the torus into `L_2`.
///
/// `σ(n) = w_{k_n}^{-1}` with `k_n = (-1)^n ⌊n/2⌋`. For the `∘` norm `s` must be
/// a positive integer or `f64::INFINITY`; the latter gives the finite-rank
/// `H^∞` case, nontrivial only when `η < 1`.
///
/// ```
/// use tensorpow::spectra::{torus_spectrum, TorusNorm, TorusNormKind};
/// let tau = std::f64::consts::TAU;
/// let sp = torus_spectrum(TorusNormKind::new(TorusNorm::Hash, 1.0, 1.0, (0.0, tau))).unwrap();
/// assert!((sp.sigma(2).unwrap() - 0.5).abs() < 1e-15);
/// assert_eq!(sp.log_sigma(4).unwrap(), sp.log_sigma(5).unwrap());
/// ```
pub fn torus_spectrum(norm: TorusNormKind) -> Result<UnivariateSpectrum> {
    let TorusNormKind { kind, s, gamma, interval: (a, b) } = norm;
    check_interval(a, b)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("gamma must be positive, got {gamma}")));
    }
    if !(s > 0.0) {
        return Err(Error::domain(format!("smoothness s must be positive, got {s}")));
    }
    let circ_order = match kind {
        TorusNorm::Circ if s.is_finite() => {
            if s.fract() != 0.0 || s > u32::MAX as f64 {
                return Err(Error::domain(format!(
                    "the circ norm needs an integer smoothness or inf, got {s}"
                )));
            }
            Some(s as u32)
        }
        TorusNorm::Circ => None,
        _ if !s.is_finite() => {
            return Err(Error::domain("infinite smoothness is only defined for the circ norm"))
        }
        _ => None,
    };
    let eta = norm.eta();
    let rank = match (kind, circ_order) {
        (TorusNorm::Circ, None) => {
            // |k| < 1/η
            let inv = Dd::ONE / eta;
            let mut kmax = inv.to_f64().floor() as u64;
            while kmax > 0 && eta.scale(kmax) >= Dd::ONE {
                kmax -= 1;
            }
            Some(2 * kmax + 1)
        }
        _ => None,
    };
    let source = TorusSource { kind, s, circ_order, eta, rank };
    let envelope = match rank {
        None => Some(Envelope {
            // w_k >= (η|k|)^s and |k_n| >= n/3 for n >= 2
            c: (3.0 / eta.to_f64()).powf(s),
            s,
            certified: true,
        }),
        Some(r) if r >= 2 => {
            let mut c: f64 = 0.0;
            for n in 2..=r {
                c = c.max(source.log_sigma(n)?.exp().to_f64() * n as f64);
            }
            Some(Envelope { c, s: 1.0, certified: true })
        }
        Some(_) => None,
    };
    let label = format!(
        "torus({}, s={}, gamma={}, [{}, {}])",
        kind.symbol(),
        s,
        gamma,
        a,
        b
    );
    UnivariateSpectrum::from_source(
        Arc::new(source),
        envelope,
        Family::Torus { norm: kind, s, gamma, a, b },
        label,
    )
}
