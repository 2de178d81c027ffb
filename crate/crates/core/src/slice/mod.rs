//! Slice hyperholomorphic functions, Fueter operators and Cauchy kernels.

mod descriptor;
pub mod diff;
mod function;
pub mod kernels;
mod stem;

pub use descriptor::{FunctionDescriptor, FunctionKind};
pub use diff::{apply_diff, apply_diff_fn, fueter_diagrams, DiffOp};
pub use function::{fueter_tf1, FunctionSide, HolomorphicStem, Side, SliceFunction, POLE_GUARD};
pub use stem::Stem;
