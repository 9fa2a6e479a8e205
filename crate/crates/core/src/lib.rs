//! Group-pair event dynamics under recommender feedback.
//!
//! This crate models interaction streams on a population split into `K`
//! groups. Events carry unordered group-pair marks `(i, j)` with `i <= j`
//! laid out on a flat axis (within-group pairs first, then cross-group
//! pairs), and intensities follow a mutually exciting process with
//! exponential kernels whose excitation matrix may switch at scheduled
//! times — the footprint of a recommender changing its behavior.
//!
//! The pieces, bottom up:
//!
//! * [`pair`] — canonical group pairs and the flat index layout;
//! * [`linalg`] — the small dense-matrix kernel used throughout;
//! * [`params`] — validated process parameters and regime schedules;
//! * [`events`] — ordered event logs with exact-round-trip serialization;
//! * [`process`] — intensity evaluation and thinning-based simulation;
//! * [`estimation`] — windowed per-pair maximum likelihood;
//! * [`meanfield`] — stability diagnostics, the mean-intensity ODE, and
//!   exponential convergence-bound verification;
//! * [`bias`] — empirical / instantaneous / stationary within-group share
//!   measures and dyad-level parity gaps;
//! * [`netsim`] — an agent-based temporal-network simulator whose projected
//!   event logs feed the same analysis stack.
//!
//! Numeric code is generic over [`scalar::Scalar`] (implemented by `f32` and
//! `f64`); the `*64` aliases below fix the common double-precision choice.
//! The network simulator works in `f64` throughout, since its outputs are
//! driven by an `f64` random stream.

pub mod bias;
pub mod estimation;
pub mod events;
pub mod linalg;
pub mod meanfield;
pub mod netsim;
pub mod pair;
pub mod params;
pub mod process;
pub mod scalar;

pub use bias::{BiasError, BiasSeries, BiasSource, DyadPrediction};
pub use estimation::{DiagonalFit, EstimateError, FitStatus, MuMode, WindowedOptions};
pub use events::{Event, EventLog, EventLogError};
pub use linalg::{LinalgError, SquareMatrix};
pub use meanfield::{
    BoundVerification, IntervalBound, MeanFieldError, MeanFieldTrajectory, StabilityRegime,
    StabilityReport,
};
pub use pair::{pair_count, GroupPair, PairError};
pub use params::{HawkesParams, ParamsError, RegimeMode, RegimeSchedule, ScheduleError};
pub use process::{ExcitationState, ProcessError};
pub use scalar::Scalar;

/// Double-precision event log.
pub type EventLog64 = events::EventLog<f64>;
/// Double-precision process parameters.
pub type HawkesParams64 = params::HawkesParams<f64>;
/// Double-precision regime schedule.
pub type RegimeSchedule64 = params::RegimeSchedule<f64>;
/// Double-precision square matrix.
pub type SquareMatrix64 = linalg::SquareMatrix<f64>;
/// Double-precision windowed fit.
pub type DiagonalFit64 = estimation::DiagonalFit<f64>;
/// Double-precision mean-field trajectory.
pub type MeanFieldTrajectory64 = meanfield::MeanFieldTrajectory<f64>;
/// Double-precision stability diagnostics.
pub type StabilityReport64 = meanfield::StabilityReport<f64>;
/// Double-precision share series.
pub type BiasSeries64 = bias::BiasSeries<f64>;
