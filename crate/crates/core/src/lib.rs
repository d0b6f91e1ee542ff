//! Generic points on mixing subshifts of finite type.
//!
//! The crate builds, at finite horizons, points whose empirical measures
//! approach a prescribed ergodic measure, and pairs `(x, y)` whose joint
//! statistics approach a prescribed joining. Supporting pieces: words and
//! SFTs ([`symbolic`]), cylinder distributions and the weak* metric
//! ([`measures`]), exact shadowing of specifications ([`specification`]),
//! the lifting constructions ([`lift`]) and normality experiments
//! ([`experiments`]).

pub mod error;
pub mod experiments;
pub mod lift;
pub mod measures;
pub mod rng;
pub mod specification;
pub mod symbolic;

pub use error::{Error, Result};
pub use measures::{
    cesaro_average, conditional_joint, empirical_measure, invariance_defect, measure_cylinder,
    shift_pushforward, weakstar_distance, CylinderDistribution, MetricConfig, TargetMeasure,
};
pub use specification::{shadow, spec_empirical, validate_gaps, GapSchedule, Segment, Specification};
pub use symbolic::{
    connect, connection_gap, validate_word, Alphabet, ConnectionGap, Sft, Symbol, Word,
};
