//! Strategic behavior under generalized scoring rules.

pub mod experiment;
pub mod gsr;
pub mod ilp;
pub mod vo_solver;
pub mod vote_ops;

pub use experiment::{ScalingReport, SweepConfig, SweepRule, Thresholds, TrialRecord};
pub use gsr::{Alternative, Alternatives, GsRule, GsrError, LinearOrder, Preorder, Profile};
pub use num_rational::BigRational;
pub use vo_solver::{Method, SolveOptions, VoInstance, VoSolution, VoValue};
pub use vote_ops::{Behavior, BehaviorGoal, OperationSet, VoteDistribution, VoteOpsError};
