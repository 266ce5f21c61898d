//! Quantum Fourier transform over odd cyclic groups, simulated classically.
//!
//! An input state on `Z_N` is copied `L` times into a register of size `M`,
//! transformed with a power-of-two FFT, and mapped onto an `N x (2 alpha + 1)`
//! grid whose trace over the second coordinate approximates `F_N |u>`.
//!
//! The simulation path is generic over [`numerics::Real`] (`f32` or `f64`).
//! Closed-form bounds and parameter selection are always `f64`.

pub mod bounds;
pub mod error;
pub mod numerics;
pub mod partition;
pub mod pipeline;
pub mod transforms;
pub mod verify;

pub use bounds::{choose_parameters, main_bound, minimal_exponents, qubit_count, qubit_estimate, tv_bound, BoundReport, Hypotheses, ParameterChoice};
pub use error::{Error, Result};
pub use numerics::{ComplexVec, Real, Seed};
pub use partition::{DeltaDecomposition, GroupParams, IntervalSet, VectorFamily};
pub use pipeline::{empirical_minimum, run_trials, EmpiricalChoice, OutputGrid, Simulator, TrialOptions, TrialResult, TrialSummary};
pub use transforms::{dft, fft_pow2, Radix2Plan, TransformDirection};
pub use verify::{check_lemma, sweep, CheckParams, CheckReport, CheckStatus, GridSpec, LemmaId, SweepReport};

pub type State = ComplexVec<f64>;
pub type State32 = ComplexVec<f32>;
pub type Grid = OutputGrid<f64>;
pub type Grid32 = OutputGrid<f32>;
pub type Simulator64 = Simulator<f64>;
pub type Simulator32 = Simulator<f32>;
