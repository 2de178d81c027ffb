//! Quaternionic S-, F-, harmonic (Q) and polyanalytic (P2) functional calculi
//! for operators with commuting real components, realified as real matrices.

pub mod calculi;
pub mod contour;
pub mod error;
pub mod qlinalg;
pub mod quaternion;
pub mod slice;

pub use error::{Error, Result};
pub use quaternion::{Quaternion, SliceCoords};
