//! Spectrum selection flags and the tractability family spec.

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use tensorpow::spectra::{
    cube_h1_spectrum, cube_h2_spectrum, custom_spectrum, dyadic_spectrum, jacobi_spectrum, torus_spectrum, Tail,
    TorusNorm, TorusNormKind, UnivariateSpectrum,
};
use tensorpow::ties::Precision;
use tensorpow::tractability::{ProblemFamily, SmoothnessSchedule};
use tensorpow::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    /// Torus with the norm given by --norm
    Torus,
    TorusCirc,
    TorusStar,
    TorusPlus,
    TorusHash,
    Jacobi,
    CubeH1,
    CubeH2,
    Dyadic,
    /// Explicit prefix from --values with a --tail rule
    Custom,
}

/// `a,b` with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval(pub f64, pub f64);

impl FromStr for Interval {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
        let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("bad interval end `{x}`: {e}"));
        Ok(Interval(parse(a)?, parse(b)?))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

/// `none`, `finite-rank` or `power:C,S`.
pub fn parse_tail(s: &str) -> std::result::Result<Tail, String> {
    match s.trim() {
        "none" => Ok(Tail::None),
        "finite-rank" => Ok(Tail::FiniteRank),
        other => {
            let rest = other
                .strip_prefix("power:")
                .ok_or_else(|| format!("unknown tail `{other}` (expected none, finite-rank or power:C,S)"))?;
            let Interval(c, s) = rest.parse().map_err(|_| format!("expected power:C,S, got `{other}`"))?;
            Ok(Tail::Power { c, s })
        }
    }
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// Torus norm for `--family torus`: circ, star, plus or hash
    #[arg(long)]
    pub norm: Option<String>,
    /// Smoothness (torus, Jacobi); `inf` is allowed for the circ norm
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Interval `a,b`; defaults to `0,2π` for the torus and `0,1` for the cube
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Option<Interval>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta: f64,
    /// Comma separated prefix σ(1), σ(2), … for `--family custom`
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    /// Tail after the custom prefix: none, finite-rank or power:C,S
    #[arg(long, default_value = "none", value_parser = parse_tail)]
    pub tail: Tail,
    /// Number of H² frequencies computed up front
    #[arg(long, default_value_t = 64)]
    pub h2_prefix: usize,
}

impl FamilyArgs {
    pub fn build(&self, precision: Precision) -> Result<UnivariateSpectrum> {
        let family = self.family.ok_or_else(|| Error::Domain("--family is required".into()))?;
        let torus = |norm: TorusNorm| {
            let Interval(a, b) = self.interval.unwrap_or(Interval(0.0, 2.0 * PI));
            torus_spectrum(TorusNormKind::new(norm, self.s, self.gamma, (a, b)))
        };
        let cube = self.interval.unwrap_or(Interval(0.0, 1.0));
        let sp = match family {
            FamilyName::Torus => {
                let norm = self.norm.as_deref().ok_or_else(|| Error::Domain("--family torus needs --norm".into()))?;
                torus(norm.parse()?)?
            }
            FamilyName::TorusCirc => torus(TorusNorm::Circ)?,
            FamilyName::TorusStar => torus(TorusNorm::Star)?,
            FamilyName::TorusPlus => torus(TorusNorm::Plus)?,
            FamilyName::TorusHash => torus(TorusNorm::Hash)?,
            FamilyName::Jacobi => jacobi_spectrum(self.alpha, self.beta, self.s)?,
            FamilyName::CubeH1 => cube_h1_spectrum((cube.0, cube.1))?,
            FamilyName::CubeH2 => cube_h2_spectrum((cube.0, cube.1), self.h2_prefix)?,
            FamilyName::Dyadic => dyadic_spectrum(),
            FamilyName::Custom => {
                if self.values.is_empty() {
                    return Err(Error::Domain("--family custom needs --values".into()));
                }
                custom_spectrum(&self.values, self.tail)?
            }
        };
        Ok(sp.with_precision(precision))
    }
}

/// JSON description of a problem family for `tract`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    Torus {
        norm: String,
        #[serde(default = "one")]
        gamma: f64,
        #[serde(default = "torus_interval")]
        interval: (f64, f64),
        schedule: SmoothnessSchedule,
    },
    Cube {
        #[serde(default = "unit_interval")]
        interval: (f64, f64),
        schedule: SmoothnessSchedule,
    },
    Jacobi {
        #[serde(default)]
        alpha: f64,
        #[serde(default)]
        beta: f64,
        schedule: SmoothnessSchedule,
    },
}

fn one() -> f64 {
    1.0
}

fn torus_interval() -> (f64, f64) {
    (0.0, 2.0 * PI)
}

fn unit_interval() -> (f64, f64) {
    (0.0, 1.0)
}

impl FamilySpec {
    /// Accepts inline JSON or `@path` to a JSON file.
    pub fn load(arg: &str) -> std::result::Result<Self, String> {
        let text = match arg.strip_prefix('@') {
            Some(path) => std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?,
            None => arg.to_string(),
        };
        serde_json::from_str(&text).map_err(|e| format!("bad family spec: {e}"))
    }

    pub fn build(&self, precision: Precision) -> Result<ProblemFamily> {
        let inner = match self {
            FamilySpec::Torus { norm, gamma, interval, schedule } => {
                ProblemFamily::torus(norm.parse()?, *gamma, *interval, *schedule)
            }
            FamilySpec::Cube { interval, schedule } => ProblemFamily::cube(*interval, *schedule),
            FamilySpec::Jacobi { alpha, beta, schedule } => ProblemFamily::jacobi(*alpha, *beta, *schedule),
        };
        let notes = inner.notes.clone();
        let label = inner.label.clone();
        let mut family = ProblemFamily::new(label, move |d| {
            let mut m = inner.member(d)?;
            m.spectrum = m.spectrum.with_precision(precision);
            Ok(m)
        });
        family.notes = notes;
        Ok(family)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tails() {
        assert_eq!(parse_tail("none").unwrap(), Tail::None);
        assert_eq!(parse_tail("power:1,2").unwrap(), Tail::Power { c: 1.0, s: 2.0 });
        assert!(parse_tail("power:1").is_err());
        assert!(parse_tail("linear").is_err());
    }

    #[test]
    fn family_spec_json() {
        let spec = FamilySpec::load(r#"{"family":"torus","norm":"hash","schedule":{"kind":"ceil-log2"}}"#).unwrap();
        let fam = spec.build(Precision::Dd).unwrap();
        assert_eq!(fam.member(8).unwrap().smoothness, 3.0);
        assert!(FamilySpec::load(r#"{"family":"torus","schedule":{"kind":"ceil-log2"}}"#).is_err());
        let cube = FamilySpec::load(r#"{"family":"cube","schedule":{"kind":"constant","value":1}}"#).unwrap();
        assert!(cube.build(Precision::Double).is_ok());
    }
}
