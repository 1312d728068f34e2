//! Solvers for smooth strongly convex-concave saddle problems
//! min_x max_y r(x) + F(x,y) - h(y) built from accelerated methods with
//! inexact oracles, plus an instrumented testbed.

pub mod error;
pub mod experiment;
pub mod fgm;
pub mod inner_max;
pub mod mirror_prox;
pub mod objective;
pub mod problem;
pub mod report;
pub mod saddle;
pub mod sliding;
pub mod spectral;
pub mod tally;
pub mod testbed;

pub use error::{Result, SolverError};
pub use problem::{
    effective_smoothness, regularize, Component, Coupling, FeasibleSet, Matrix, SaddleProblem,
    SaddleSpec, SpectralData, Vector,
};
pub use report::{GapCertificate, HistoryRow, SolveReport};
pub use tally::{tally_merge, OracleKind, OracleTally};
