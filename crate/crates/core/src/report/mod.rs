pub mod ext_float;
mod records;

pub use records::{rate_curves, ResultFile, ResultRecord};
