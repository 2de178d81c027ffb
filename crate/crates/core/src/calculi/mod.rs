//! Resolvent operators, the four calculi and the identity checks between them.

pub mod calculus;
pub mod resolvent;
pub mod suite;
pub mod verify;

pub use calculus::{
    a_abar, a_abar_inv, calculus_bounded, calculus_bounded_with, calculus_on_contour, calculus_unbounded,
    calculus_unbounded_with, transform_operator, CalculusKind, CalculusOutput, CalculusRequest, ContourParams, Mode,
    ALPHA_GUARD, DF_ALPHA_GATE, F_ALPHA_GATE,
};
pub use resolvent::{resolvent, ResolventFamily, ResolventKind, Resolvents, SPECTRUM_GUARD};
pub use suite::{run_suite, SuiteConfig, SuiteReport};
pub use verify::{verify_identity, IdentityName, Outcome, TrialContext};
