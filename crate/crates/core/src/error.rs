use thiserror::Error;

use crate::spin_algebra::SpinTensorSignature;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spin-tensor signature mismatch: expected {expected}, found {found}")]
    SignatureMismatch {
        expected: SpinTensorSignature,
        found: SpinTensorSignature,
    },
    #[error("spin-tensor data length {len} does not match signature {signature} (needs {expected})")]
    DataLength {
        signature: SpinTensorSignature,
        len: usize,
        expected: usize,
    },
    #[error("invalid physical constants: {0}")]
    InvalidConstants(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("metric is not Lorentzian at {point:?}: {reason}")]
    NonLorentzian { point: [f64; 4], reason: String },
    #[error("metric is singular at {point:?}")]
    SingularMetric { point: [f64; 4] },
    #[error("field grids do not match: {0}")]
    GridMismatch(String),
    #[error("direction index {0} out of range 0..4")]
    BadDirection(usize),
    #[error("slice is not spacelike: {0}")]
    NotSpacelike(String),
    #[error("slice time {time} lies outside the sampled interval [{start}, {end}]")]
    SliceOutOfRange { time: f64, start: f64, end: f64 },
    #[error("numerical instability at step {step} (t = {time}): norm grew by factor {growth:.3e}, limit {limit:.3e}")]
    Instability {
        step: usize,
        time: f64,
        growth: f64,
        limit: f64,
    },
    #[error("time step {dt} exceeds the stability bound {bound} (CFL number {cfl:.3} > {limit})")]
    CflViolation {
        dt: f64,
        bound: f64,
        cfl: f64,
        limit: f64,
    },
    #[error("mode {index} is linearly dependent on earlier modes (residual norm^2 {residual:.3e})")]
    RankDeficient { index: usize, residual: f64 },
    #[error("unknown mode index {index}; the space has {modes} modes")]
    UnknownMode { index: usize, modes: usize },
    #[error("mode count {0} exceeds the supported maximum")]
    TooManyModes(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
