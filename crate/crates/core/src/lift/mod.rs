//! The staged constructions: marker sequences, block allocation,
//! genericization of quasi-generic points, lifting along joinings, and
//! oscillating ergodic averages.

pub mod allocation;
pub mod blocks;
pub mod genericize;
pub mod markers;
pub mod oscillation;
pub mod pair;
pub mod report;
pub mod schedule;

pub use allocation::{rational_allocation, Allocation, AllocationEntry};
pub use blocks::{classify_blocks, BlockClassification};
pub use genericize::{genericize, AgreementSet, GenericizeOutcome, GenericizeReport};
pub use markers::{marker_sequence, relative_generation_distance, MarkerSequence};
pub use oscillation::{oscillation_point, AffineCylinderFunction, OscillationOutcome, OscillationReport};
pub use pair::{build_lift_spec, lift_pair, plan_markers, LiftOutcome, LiftReport, StagePlan};
pub use report::ScaleDistance;
pub use schedule::{BlockGrowth, LiftSchedule, ScheduleConfig, Stage};
