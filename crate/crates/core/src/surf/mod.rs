//! Box-filter scale-space blob detector over a reduced integral image.
//!
//! Pipeline: plan the word length, preprocess, integrate at `L_ii` bits,
//! evaluate one determinant map per scale, suppress non-maxima in 3x3x3
//! blocks within each octave and refine survivors with a quadratic fit.

pub mod detect;
pub mod interp;
pub mod layout;
pub mod nms;
pub mod output;
pub mod response;
pub mod schedule;

use thiserror::Error;

use crate::integral::IntegralError;
use crate::reduction::ReductionError;

pub use detect::{detect, pre_threshold_candidates, run_detector, DetectOptions, Detection};
pub use interp::{interpolate, InterestPoint, Reject};
pub use layout::{hessian_layout, HessianLayout, OffsetRect, WeightedRect};
pub use nms::{nms_3d, Candidate, Neighborhood};
pub use response::{response_map, ResponseMap};
pub use schedule::{filter_schedule, filter_schedule_by_octave, ScaleEntry};

/// Default detection threshold on the determinant response.
pub const DEFAULT_THRESHOLD: f64 = 50_000.0;
pub const DEFAULT_OCTAVES: u32 = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DetectError {
    #[error("invalid filter size {0}: must be 3 (mod 6)")]
    InvalidFilter(usize),
    #[error("octave count {0} outside 1..=4")]
    InvalidOctaves(u32),
    #[error("no filter fits a {width}x{height} image")]
    EmptySchedule { width: usize, height: usize },
    #[error("non-maximum suppression needs exactly 3 maps, got {0}")]
    Arity(usize),
    #[error("threshold must be finite and non-negative, got {0}")]
    InvalidThreshold(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Integral(#[from] IntegralError),
}
