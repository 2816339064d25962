use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameters outside the domain of an operation.
    #[error("invalid parameter: {0}")]
    Domain(String),

    #[error("index {n} lies beyond the explicit prefix of length {len} and no tail rule was given")]
    BeyondPrefix { n: u64, len: u64 },

    #[error("index 0 is not a valid spectrum index (indices start at 1)")]
    ZeroIndex,

    #[error("root bracketing failed: no sign change in [{from}, {to}] on branch {branch}")]
    RootBracket { from: f64, to: f64, branch: &'static str },

    #[error("count exceeds configured ceiling 2^{log2_ceiling}")]
    CeilingExceeded { log2_ceiling: u64 },

    #[error("enumeration budget of {budget} entries exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("box too small: {kept} values certified in {{1..{limit}}}^d, need {needed}")]
    BoxTooSmall { limit: u64, kept: u64, needed: u64 },

    #[error("box {limit}^{d} exceeds the enumeration limit of 1e8 points")]
    BoxTooLarge { limit: u64, d: usize },

    #[error("index {n} exceeds the total rank {rank} of a finite-rank tensor product")]
    BeyondRank { n: String, rank: String },

    /// The tie class at some threshold would be infinite.
    #[error("unbounded tie class: {0}")]
    UnboundedTie(String),

    /// A guaranteed property failed; this signals a bug.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Whether this error reports a broken internal guarantee rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}
