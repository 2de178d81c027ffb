//! Operators with commuting real components and their S-spectrum.

mod operator;
pub mod random;
mod spectrum;
mod tuple;

pub use operator::{QOperator, COND_CAP};
pub use spectrum::{s_spectrum, SSpectrum, Sphere, MERGE_TOL};
pub use tuple::{CommutingTuple, TupleJson, COMMUTATION_TOL};
