//! Exact finite-depth computation in full groups of measure-preserving
//! equivalence relations on `Y × 2^ℕ`.

pub mod checks;
pub mod error;
pub mod field;
pub mod freeness;
pub mod generators;
pub mod graphing;
pub mod measure;
pub mod perm;
pub mod rational;
pub mod report;
pub mod scenario;
mod text;

pub use checks::{Check, Context, Registry};
pub use error::{Error, Result};
pub use field::{involution_path, iota, signature_morphism, FieldElement};
pub use graphing::{full_group_membership, Graphing, PartialMap, Partition};
pub use measure::{BaseSpace, CondMeasure, DyadicSet, ProductSet, Word};
pub use perm::{finite_odometer, odometer_approx, tau, ErrorBudget, LevelPerm, Sign};
pub use rational::{Dyadic, Rational};
pub use report::{Record, Report};
pub use scenario::Scenario;
