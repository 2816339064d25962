//! Exact lattice point counting under product constraints.

mod bigcount;
mod cross;
mod dyadic;
mod tensor;

pub use bigcount::BigCount;
pub use cross::{a2_coarse_bounds, a2_sandwich, a_count, a_count_int};
pub use dyadic::{dyadic_cumulative, dyadic_level_count};
pub(crate) use tensor::last_true;
pub use tensor::{
    count_at_least, tensor_count, tensor_count_pair, CountOptions, CountPair, CountQuery,
    TensorProduct,
};
