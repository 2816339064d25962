use super::{check_interval, Envelope, Family, SequenceSource, UnivariateSpectrum};
use crate::dd::Dd;
use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

#[derive(Debug)]
struct H1Source {
    /// `π / (b - a)`
    c: Dd,
}

impl SequenceSource for H1Source {
    fn log_sigma(&self, n: u64) -> Result<Dd> {
        let x = self.c.scale(n - 1);
        Ok(-(x.sqr()).ln_1p().mul_f64(0.5))
    }
}

/// `sup_{n >= 2} n σ(n)` for `σ(n) = (1 + c²(n-1)²)^(-1/2)`.
fn h1_envelope_constant(c: f64) -> f64 {
    let f = |n: f64| n / (1.0 + (c * (n - 1.0)).powi(2)).sqrt();
    // x σ(x) increases up to x* = 1 + 1/c² and decreases after it
    let peak = 1.0 + 1.0 / (c * c);
    [2.0, peak.floor(), peak.ceil()]
        .into_iter()
        .filter(|&n| n >= 2.0)
        .map(f)
        .fold(0.0, f64::max)
}

/// Singular values of `H^1(a, b) -> L_2(a, b)`: `σ(n) = (1 + ((n-1)π/(b-a))²)^(-1/2)`.
///
/// ```
/// use tensorpow::spectra::cube_h1_spectrum;
/// let sp = cube_h1_spectrum((0.0, 1.0)).unwrap();
/// let pi = std::f64::consts::PI;
/// assert!((sp.sigma(2).unwrap() - (1.0 + pi * pi).powf(-0.5)).abs() < 1e-15);
/// assert!(sp.envelope().unwrap().c <= 0.607);
/// ```
pub fn cube_h1_spectrum(interval: (f64, f64)) -> Result<UnivariateSpectrum> {
    let (a, b) = interval;
    check_interval(a, b)?;
    let len = Dd::from_f64(b) - Dd::from_f64(a);
    let c = Dd::PI / len;
    let envelope = Envelope { c: h1_envelope_constant(c.to_f64()), s: 1.0, certified: true };
    UnivariateSpectrum::from_source(
        Arc::new(H1Source { c }),
        Some(envelope),
        Family::CubeH1 { a, b },
        format!("cube-h1([{a}, {b}])"),
    )
}

/// Which transcendental equation a frequency solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    /// `ω̂³ cosh(ω̂l) sin(ωl) + ω³ sinh(ω̂l) cos(ωl) = 0`
    I1,
    /// `ω̂³ sinh(ω̂l) cos(ωl) - ω³ cosh(ω̂l) sin(ωl) = 0`
    I2,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::I1 => "I1",
            Branch::I2 => "I2",
        }
    }
}

/// A frequency `ω` of the `H^2` eigenbasis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrequencyRoot {
    pub omega: f64,
    pub branch: Branch,
    /// `|g(ω)|` for the equation divided by `ω̂³ cosh(ω̂l)`.
    pub residual: f64,
}

/// Defining equations divided by `ω̂³ cosh(ω̂l)`; bounded for every `ω`.
fn normalized(branch: Branch, l: f64, omega: f64) -> f64 {
    let hat = (1.0 + omega * omega).sqrt();
    let r3 = (omega / hat).powi(3);
    let t = (hat * l).tanh();
    let (s, c) = (omega * l).sin_cos();
    match branch {
        Branch::I1 => s + r3 * t * c,
        Branch::I2 => t * c - r3 * s,
    }
}

/// Residual of the raw equation relative to the size of its two terms.
pub fn relative_residual(branch: Branch, l: f64, omega: f64) -> f64 {
    let hat = (1.0 + omega * omega).sqrt();
    let r3 = (omega / hat).powi(3);
    let t = (hat * l).tanh();
    let (s, c) = (omega * l).sin_cos();
    let (p, q) = match branch {
        Branch::I1 => (s, r3 * t * c),
        Branch::I2 => (t * c, -r3 * s),
    };
    let scale = p.abs() + q.abs();
    if scale == 0.0 {
        0.0
    } else {
        (p + q).abs() / scale
    }
}

/// Bisects a sign change of `f` on `[lo, hi]` until the `f64` interval collapses.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if f(hi).abs() < flo.abs() {
        hi
    } else {
        lo
    }
}

#[derive(Debug)]
struct RootScanner {
    l: f64,
    step: f64,
    pos: f64,
    g1: f64,
    g2: f64,
    roots: Vec<FrequencyRoot>,
}

impl RootScanner {
    fn new(l: f64) -> Self {
        let step = (PI / (4.0 * l)).min(0.1);
        RootScanner {
            l,
            step,
            pos: 0.0,
            // g1 vanishes at 0 and is positive just above it
            g1: 1.0,
            g2: normalized(Branch::I2, l, 0.0),
            roots: vec![FrequencyRoot { omega: 0.0, branch: Branch::I1, residual: 0.0 }],
        }
    }

    fn extend_to(&mut self, count: usize) -> Result<()> {
        // same-branch roots are about π/l apart; a gap of many periods means
        // the scan lost track
        let max_gap = 8.0 * PI / self.l + 10.0;
        while self.roots.len() < count {
            let lo = self.pos;
            let hi = lo + self.step;
            let g1 = normalized(Branch::I1, self.l, hi);
            let g2 = normalized(Branch::I2, self.l, hi);
            let mut found: Vec<FrequencyRoot> = Vec::with_capacity(2);
            for (branch, before, after) in [(Branch::I1, self.g1, g1), (Branch::I2, self.g2, g2)] {
                if (before > 0.0) != (after > 0.0) || after == 0.0 {
                    let f = |w: f64| normalized(branch, self.l, w);
                    let omega = bisect(f, lo, hi);
                    if omega > 0.0 {
                        found.push(FrequencyRoot { omega, branch, residual: f(omega).abs() });
                    }
                }
            }
            found.sort_by(|a, b| a.omega.total_cmp(&b.omega));
            self.roots.extend(found);
            self.pos = hi;
            // a root sitting exactly on the grid point must not be counted twice
            self.g1 = if g1 == 0.0 { -self.g1 } else { g1 };
            self.g2 = if g2 == 0.0 { -self.g2 } else { g2 };
            let last = self.roots.last().map_or(0.0, |r| r.omega);
            if self.pos - last > max_gap {
                return Err(Error::RootBracket { from: last, to: self.pos, branch: "I1/I2" });
            }
        }
        Ok(())
    }
}

/// The `count` smallest elements of `I1 ∪ I2` for the interval `(a, b)`, ascending.
///
/// `ω = 0` is always the first root. Roots are located by scanning in steps of
/// `min(π/(4l), 0.1)`, `l` the radius of the interval, and bisected to `f64`
/// resolution.
///
/// ```
/// use tensorpow::spectra::{find_h2_frequencies, Branch};
/// let roots = find_h2_frequencies((0.0, 1.0), 2).unwrap();
/// assert_eq!(roots[0].omega, 0.0);
/// assert_eq!(roots[1].branch, Branch::I2);
/// let w = roots[1].omega;
/// let sigma2 = (1.0 + w * w + w.powi(4)).powf(-0.5);
/// assert!((0.27735..=0.27795).contains(&sigma2));
/// ```
pub fn find_h2_frequencies(interval: (f64, f64), count: usize) -> Result<Vec<FrequencyRoot>> {
    let (a, b) = interval;
    check_interval(a, b)?;
    if count == 0 {
        return Err(Error::domain("count must be at least 1"));
    }
    let mut scanner = RootScanner::new(0.5 * (b - a));
    scanner.extend_to(count)?;
    scanner.roots.truncate(count);
    Ok(scanner.roots)
}

#[derive(Debug)]
struct H2Source {
    scanner: RwLock<RootScanner>,
}

impl H2Source {
    fn omega(&self, m: usize) -> Result<f64> {
        {
            let guard = self.scanner.read().unwrap_or_else(|e| e.into_inner());
            if let Some(r) = guard.roots.get(m) {
                return Ok(r.omega);
            }
        }
        let mut guard = self.scanner.write().unwrap_or_else(|e| e.into_inner());
        guard.extend_to(m + 1)?;
        Ok(guard.roots[m].omega)
    }
}

impl SequenceSource for H2Source {
    fn log_sigma(&self, n: u64) -> Result<Dd> {
        let m = usize::try_from(n - 1).map_err(|_| Error::domain("index too large"))?;
        let w2 = Dd::from_f64(self.omega(m)?).sqr();
        Ok(-(w2 + w2.sqr()).ln_1p().mul_f64(0.5))
    }
}

/// Singular values of `H^2(a, b) -> L_2(a, b)`: `σ(n) = (1 + ω² + ω⁴)^(-1/2)`
/// with `ω = ω_{n-1}` the `n`-th smallest frequency. Roots are computed on
/// demand and cached; `prefix_len` of them are found up front.
///
/// The envelope is the `H^1` envelope with `s = 1`, valid because the `H^2`
/// singular values never exceed the `H^1` ones.
pub fn cube_h2_spectrum(interval: (f64, f64), prefix_len: usize) -> Result<UnivariateSpectrum> {
    let (a, b) = interval;
    check_interval(a, b)?;
    let mut scanner = RootScanner::new(0.5 * (b - a));
    scanner.extend_to(prefix_len.max(3))?;
    let c = PI / (b - a);
    let envelope = Envelope { c: h1_envelope_constant(c), s: 1.0, certified: true };
    UnivariateSpectrum::from_source(
        Arc::new(H2Source { scanner: RwLock::new(scanner) }),
        Some(envelope),
        Family::CubeH2 { a, b },
        format!("cube-h2([{a}, {b}])"),
    )
}
