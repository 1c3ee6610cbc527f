//! Blind cooperative spectrum sensing with random-matrix eigenvalue detectors.
//!
//! `K` cooperating sensors each collect `N` samples of the same band. The
//! detectors in this crate look at the eigenvalues of the sample covariance
//! `(1/N)·Y·Yᴴ` of the stacked `K×N` observation matrix:
//!
//! * under noise only, the spectrum stays inside the Marchenko–Pastur support
//!   `[σ²(1−√α)², σ²(1+√α)²]` with `α = K/N`;
//! * a primary transmitter adds a rank-one spike that pushes the largest
//!   eigenvalue out of that support.
//!
//! The eigenvalue-ratio test compares `λ_max/λ_min` to `(1+√α)²/(1−√α)²` and
//! needs neither the noise variance nor the channel. The classical
//! energy detector with majority voting is provided as a baseline, and the
//! [`montecarlo`] module runs the convergence and detector-comparison studies.
//!
//! Modules, bottom-up:
//!
//! * [`linalg`]: complex matrices, Gram construction, Hermitian eigensolvers.
//! * [`rmt`]: closed-form random-matrix quantities.
//! * [`signal`]: seeded synthesis of H0/H1 observation matrices.
//! * [`detect`]: the decision procedures.
//! * [`montecarlo`]: experiment runner, summaries and CSV/manifest output.

// `!(x > 0.0)` is used on purpose so that NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detect;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod rmt;
pub mod signal;

pub use num_complex::Complex64;

pub use detect::{Decision, DetectorId, FusionDecision};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenSpectrum, HermitianMatrix};
pub use montecarlo::{ExperimentKind, ExperimentSpec, ExperimentSummary, TrialRecord};
pub use rmt::{MpSupport, SpikedModel};
pub use signal::{
    ChannelRealization, Fading, Hypothesis, NoiseKind, ObservationMatrix, SampleField,
    ScenarioConfig, SignalKind,
};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
