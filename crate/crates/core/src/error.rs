use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("{op}: dimension mismatch (expected {expected}, got {got})")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },

    #[error("RF efficiency is undefined for a zero digital precoder")]
    UndefinedEfficiency,

    #[error("analog stage is not semi-unitary (|F^H F - I|_F = {deviation:e})")]
    NotSemiUnitary { deviation: f64 },

    #[error("degenerate channel: sigma_min/sigma_max = {ratio:e}")]
    DegenerateChannel { ratio: f64 },

    #[error("effective channel is zero; MMSE precoder cannot be normalized")]
    ZeroPrecoder,

    #[error("invalid ordering: expected S <= r <= N and N >= 2 (N={n}, r={r}, S={s})")]
    InvalidOrdering { n: usize, r: usize, s: usize },

    #[error("amplitude infeasible: |c| = {magnitude} exceeds 2A = {bound}")]
    AmplitudeInfeasible { magnitude: f64, bound: f64 },

    #[error("target column {0} is zero")]
    ZeroTargetColumn(usize),

    #[error("matrix is rank deficient")]
    RankDeficient,

    #[error("restart pool is empty")]
    EmptyPool,

    #[error("stale layer partials: {0}")]
    StalePartials(String),

    #[error("phase {value} at layer {layer}, entry {entry} is not finite")]
    NonFinitePhase { layer: usize, entry: usize, value: f64 },

    #[error("phase configuration is not on the {bits}-bit grid")]
    OffGrid { bits: u32 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate channel persisted after {attempts} resampling attempts (trial {trial})")]
    ResampleExhausted { trial: u64, attempts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
