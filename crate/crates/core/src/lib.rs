//! Simulation engine for measurement-reversal ("self-fulfilling prophecy")
//! feedback control of finite-dimensional quantum systems.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod measurement;
pub mod noise;
pub mod presets;
pub mod protocol;
pub mod qubit;
pub mod rng;
pub mod spectrum;
pub mod state;

pub use config::{Experiment, SfpConfig};
pub use error::{Result, SfpError};
pub use harness::{run_ensemble, run_single, Ensemble, RunRecord};
pub use linalg::{CMatrix, CVector, C64};
pub use measurement::{MeasurementStrength, Povm, UnsharpObservable};
pub use protocol::{ConvergenceReport, ReversalFeedback};
pub use rng::{RandomStream, RunStreams};
pub use spectrum::{Spectrum, SpectrumEstimator};
pub use state::PureState;
