//! Carathéodory sums on the word tree and their critical values.

mod certificates;
pub(crate) mod carrier;
pub(crate) mod classes;
pub(crate) mod katok;
mod critical;
mod sums;
pub(crate) mod tree;

pub use sums::{
    cover_sum, fixed_order_cover_sum, log_fixed_order_sum, log_fixed_order_sums, modified_packing_sum, packing_sum, BoundKind,
    ModifiedPackingSum, SumResult, STABLE_REL,
};
pub use tree::BallMode;
pub use katok::{brute_force_fixed_order_katok, katok_cover_sum, KatokMode, DEFAULT_Q};
pub use critical::{critical_value, StageSchedule, SumKind};
