//! Exact construction of the Lebesgue integral over semirings of sets.
//!
//! The library works in exact rational arithmetic throughout. Step functions
//! over a semiring carry an exact integral; monotone limits of step functions
//! extend it with verified partial-integral ladders (possibly to +inf);
//! certified differences of monotone limits carry signed, finite-or-infinite
//! integrals; measurable sets and the induced measure, L1 with its norm and
//! convergence theorems, and product spaces with an exact Fubini evaluator
//! are built on top.
//!
//! Limits are never guessed. An integral is exact only when its defining
//! stream stabilizes a.e.; otherwise the library reports monotone lower
//! bounds plus optional caller-declared limits validated against every
//! computed partial.

// Errors carry witness cells and textual context by design; hot paths do
// not fail, so the large Err variants are acceptable.
#![allow(clippy::result_large_err, clippy::large_enum_variant)]

pub mod error;
pub mod format;
pub mod gen;
pub mod measurable;
pub mod monotone;
pub mod numeric;
pub mod product;
pub mod signed;
pub mod space;
pub mod step;
pub mod stream;

pub use error::{Error, Result};
pub use measurable::{MeasurableFunction, MeasurableSet};
pub use monotone::{EstimateStatus, EvalParams, IntegralEstimate, IntegralValue, MonotoneLimit};
pub use signed::{FiniteSide, L1Certificate, SignedLimit};
pub use numeric::{rat, ExtendedRational, Rational};
pub use space::{semiring_check, Cell, CheckReport, MeasureSpace, NullCover, Point};
pub use step::{markov_level_bound, vanishing_report, StepFunction, VanishingReport};
pub use stream::Stream;
