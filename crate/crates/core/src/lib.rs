//! Numerical exploration of correlations of bounded multiplicative
//! functions along deterministic and independent integer sequences:
//! logarithmic/Cesaro averages with convergence traces, pretentiousness
//! diagnostics, sign-pattern densities, finite-scale Furstenberg moments,
//! and exactly solvable dynamical oracles to check identities against.

pub mod averaging;
pub mod correlations;
pub mod ergodic;
pub mod error;
pub mod furstenberg;
pub mod multfun;
pub mod numeric;
pub mod pretentious;
pub mod report;
pub mod sequences;
pub mod sieve;

pub use averaging::{AverageKind, CheckpointSchedule, ConvergenceReport};
pub use correlations::{CorrelationResult, CorrelationSpec, ShiftSource};
pub use ergodic::{TorusRotation, TrigMonomial};
pub use error::{Error, Result};
pub use furstenberg::{EmpiricalSystem, IndicatorCorrespondence, MomentSpec};
pub use multfun::{DirichletCharacter, MultFnSpec, Sampler};
pub use numeric::{Fixed128, SignedFixed};
pub use pretentious::{AperiodicityScan, TwistMinimum, TwistSearchConfig};
pub use report::{ExperimentReport, Series};
pub use sequences::{Generator, IndependenceReport, SequenceFamily};
pub use sieve::{ArithmeticTable, SegmentedFactorSieve, SieveBudget, Window};

pub use num_complex::Complex64;
