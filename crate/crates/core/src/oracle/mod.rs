//! Reference data without a circuit simulator: a saturating surrogate
//! device, the characterization sweep, and CSV exchange of reference
//! datasets so external measurements can be plugged in.

mod reference;
mod surrogate;

pub use reference::{characterize, load_reference_csv, save_reference_csv, ReferenceDataset};
pub use surrogate::{sat, surrogate_eval, SurrogateDevice};
