//! Exact nonincreasing rearrangements of tensor power sequences.
//!
//! Given univariate singular values `σ`, the `d`-th tensor power consists of
//! the products `σ(n_1)⋯σ(n_d)` over `n ∈ N^d`; sorted nonincreasingly they
//! form `τ`, the singular values of the tensor product operator. This crate
//! computes `τ` exactly through lattice point counting, evaluates closed-form
//! bounds against it, and classifies polynomial tractability.
//!
//! ```
//! use tensorpow::prelude::*;
//!
//! let sp = dyadic_spectrum();
//! let t = tau_at(&TensorProduct::power(sp, 3), 20u64).unwrap();
//! assert_eq!(t.tau(), 0.25);
//! ```

pub mod bounds;
pub mod dd;
pub mod error;
pub mod hypercount;
pub mod rearrange;
pub mod spectra;
pub mod ties;
pub mod tractability;

pub use dd::Dd;
pub use error::{Error, Result};
pub use hypercount::{BigCount, TensorProduct};

/// Crate version, recorded in every CLI report header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The types and functions most programs need.
pub mod prelude {
    pub use crate::bounds::{
        asym_constant, preasym_lower, preasym_upper, verify_bounds, PreasymptoticParams,
    };
    pub use crate::dd::Dd;
    pub use crate::error::{Error, Result};
    pub use crate::hypercount::{
        a_count, tensor_count, tensor_count_pair, BigCount, CountOptions, CountQuery,
        TensorProduct,
    };
    pub use crate::rearrange::{tau_at, tau_brute, tau_topk, TauQueryResult};
    pub use crate::spectra::{
        cube_h1_spectrum, cube_h2_spectrum, custom_spectrum, dyadic_spectrum, jacobi_spectrum,
        torus_spectrum, Tail, TorusNorm, TorusNormKind, UnivariateSpectrum,
    };
    pub use crate::ties::{Comparison, Precision};
    pub use crate::tractability::{classify, info_complexity, FitPolicy, ProblemFamily, SmoothnessSchedule};
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/rearrangement.md")]
    mod rearrangement {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/tractability.md")]
    mod tractability {}
    #[doc = include_str!("../../../book/src/precision.md")]
    mod precision {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
