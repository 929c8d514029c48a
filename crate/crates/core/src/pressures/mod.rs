//! The named pressures of sets and of measures, assembled from engine stages.

mod billingsley;
mod fit;
mod measure;
mod set;
mod variational;

pub use billingsley::{billingsley_check, measure_of_set, BillingsleyVerdict, Direction, DirectionCheck, Witness};
pub use measure::{caratheodory_measure_pressures, katok_measure_pressures, measure_local_pressures, MeasureSchedule, SampleBudget, HYPOTHESIS_RELAXED};
pub use set::{capacity_pressures, packing_pressure, pesin_pitskel_pressure, set_pressures, SetSchedule};
pub use variational::{variational_scan, Family, ScanBudget, VariationalResult, VariationalTarget};
