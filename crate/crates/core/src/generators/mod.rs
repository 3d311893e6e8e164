//! Topological generators: word synthesis, the schedule and product `U`,
//! the rank construction and the cost-one perturbation.

pub mod cost_one;
pub mod density;
pub mod kappa;
pub mod property_ii;
pub mod rank;
pub mod schedule;

pub use cost_one::{cost_one_perturbation, CoprimeCertificate, CostOnePerturbation};
pub use density::{density_probe, CoverageReport, ProbeOptions};
pub use kappa::{kappa, synthesize, Kappa, WordTable};
pub use property_ii::{verify_property_ii, PropertyII};
pub use rank::{rank_generators, RankConstruction};
pub use schedule::{build_U, build_schedule, halving_epsilons, verify_a2, A2Check, BasisPlan, Schedule};
