//! Quantum circuit simulation on tensor-product (matrix product) states.
//!
//! One- and two-qubit operators, generalized Toffoli gates and projective
//! measurements are applied directly to an [`MpsState`]. Whenever an operator
//! can change bonds beyond its own sites, the resulting network is
//! refactorized by a left-to-right reduced-density-matrix sweep
//! ([`compress`]) that keeps exactly the Schmidt rank at every cut (or a
//! capped rank in lossy mode).
//!
//! A dense state-vector backend ([`DenseState`]) implements the same operator
//! set and measurement rule and serves as a reference oracle.

pub mod backend;
pub mod circuit;
pub mod compress;
pub mod dense;
pub mod error;
pub mod exec;
pub mod gates;
pub mod grover;
mod linalg;
pub mod measurement;
pub mod mps;
pub mod scaling;

pub use backend::Backend;
pub use circuit::{parse, parse_report, render, Circuit, Op, ParseDiagnostic, ParseReport, Severity, FORMAT_VERSION};
pub use compress::{compress, compress_with, BondSpectrum, SumMechanics, SumOfMps};
pub use dense::DenseState;
pub use error::{SimError, SimResult};
pub use exec::{run_shot, run_shots, ShotResult, StepTrace};
pub use gates::{CkNotGate, GateLabel, GateOp, SingleQubitGate, SiteProjector, TwoQubitGate};
pub use grover::{
    analytic_solution_probability, analytic_trace, build_grover_circuit, optimal_iterations, run_grover, GroverSpec,
    IterationRecord, RunTrace,
};
pub use linalg::CMatrix;
pub use measurement::{measure_all, measure_qubit, seeded_rng, MeasurementRecord, SimRng};
pub use mps::{inner_product, BitString, EnvCache, MpsState, SiteTensor, TruncationPolicy, DEFAULT_DENSE_CAP};
pub use num_complex::Complex64;
pub use scaling::{bench_point, fit_sqrt_n_log_n, BenchRow, ScalingFit};
