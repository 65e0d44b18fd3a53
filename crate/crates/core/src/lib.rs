//! Hybrid beamforming with a programmable unitary RF network.
//!
//! The analog stage is a cascade of fixed DFT mixers interleaved with
//! diagonal phase layers. It is programmed to contain the dominant channel
//! subspace, and a low-dimensional MMSE stage runs on the RF chains.
//! [`harness`] evaluates it against fully digital precoding and three
//! analog baselines on spherical-wave channels.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod network;
pub mod precoding;
pub mod programming;
pub mod quantization;
pub mod rng;
pub mod verify;

pub use baselines::{BaselineKind, BaselineResult};
pub use channel::{ChannelRealization, ScenarioConfig};
pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use harness::{Arch, SweepOutcome, SweepTable, TrialResult};
pub use linalg::ComplexMatrix;
pub use network::{MixerKind, NetworkSpec, PhaseConfig, Processor};
pub use num_complex::Complex64;
pub use precoding::PrecoderPair;
pub use programming::{OptimizerOptions, ProgrammingResult, RestartPool};
pub use quantization::QuantizationSpec;
