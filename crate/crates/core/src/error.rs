//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Everything that can go wrong while building or running a simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cavity length must be positive, got {0}")]
    NonPositiveLength(f64),

    #[error("cutoff frequency {cutoff} lies below the first mode frequency {first_mode}")]
    CutoffBelowFirstMode { cutoff: f64, first_mode: f64 },

    #[error("atom {index} at position {position} is at or beyond a mirror (allowed open interval (0, {length}))")]
    AtomOutsideCavity {
        index: usize,
        position: f64,
        length: f64,
    },

    #[error("atom {index} has non-positive transition frequency {frequency}")]
    NonPositiveFrequency { index: usize, frequency: f64 },

    #[error("atom {index} has negative reduced coupling {coupling}")]
    NegativeCoupling { index: usize, coupling: f64 },

    #[error("no atom carries the initial excitation")]
    NoExcitedAtom,

    #[error(
        "{0} atoms carry the initial excitation; the single-excitation sector allows exactly one"
    )]
    MultipleExcitedAtoms(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFiniteMatrix { row: usize, col: usize },

    #[error("eigensolver failed to converge on a {dim}x{dim} matrix")]
    Eigensolver { dim: usize },

    #[error("requested times must be ascending and not precede the initial state time")]
    NonAscendingTimes,

    #[error("integrator step must be positive and finite, got {0}")]
    NonPositiveStep(f64),

    #[error(
        "Runge-Kutta norm drift {drift:.3e} at t = {time} exceeds the stability bound {bound:.0e}"
    )]
    RkUnstable { time: f64, drift: f64, bound: f64 },

    #[error("atom index {index} out of range for {count} atoms")]
    AtomIndexOutOfRange { index: usize, count: usize },

    #[error("fit window [{lo}, {hi}] selects fewer than two distinct samples")]
    DegenerateWindow { lo: f64, hi: f64 },

    #[error("population {value:.3e} at t = {time} is not positive; log-linear fit is undefined")]
    NonPositivePopulation { time: f64, value: f64 },

    #[error("degenerate input data: {0}")]
    DegenerateData(&'static str),

    #[error("fit did not converge within {iterations} iterations")]
    FitDiverged { iterations: usize },

    #[error("crystal needs an odd atom count so the emitter occupies the central slot, got {0}")]
    EvenCrystal(usize),

    #[error("crystal center {center} does not coincide with the emitter position {emitter}")]
    CenterMismatch { center: f64, emitter: f64 },

    #[error("crystal of {count} atoms with lattice constant {spacing} does not fit inside the cavity of length {length}")]
    CrystalOverflow {
        count: usize,
        spacing: f64,
        length: f64,
    },

    #[error("ensemble needs at least one configuration")]
    EmptyEnsemble,

    #[error("ensemble member (stream {stream}) failed: {source}")]
    EnsembleMember {
        stream: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("analyzer coupling ratio must be positive, got {0}: dark analyzers measure nothing")]
    DarkAnalyzers(f64),

    #[error("analyzer bank needs at least one atom")]
    EmptyAnalyzerBank,

    #[error("configuration contains no analyzer atoms")]
    NoAnalyzers,

    #[error("no analyzer signal yet: t = {time} precedes the time of flight {time_of_flight}")]
    NoAnalyzerSignal { time: f64, time_of_flight: f64 },

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("trace contains masked samples inside the requested window")]
    MaskedTraceWindow,
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to invalid
    /// input); callers use this to pick an exit status.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Eigensolver { .. }
            | Error::RkUnstable { .. }
            | Error::NonFiniteMatrix { .. }
            | Error::FitDiverged { .. } => true,
            Error::EnsembleMember { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
