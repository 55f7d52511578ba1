//! Simulation and analysis toolkit for coded multi-user MIMO with
//! orthogonal AMP/VAMP (OAMP/VAMP) receivers.
//!
//! The crate covers the full loop of a link-level study:
//!
//! * [`channel`] — right-unitarily-invariant channel ensembles kept in
//!   SVD-factored form with an exactly known singular spectrum.
//! * [`constellation`] — discrete signaling priors and their scalar
//!   AWGN MMSE functions.
//! * [`detector`] — the iterative multi-user OAMP/VAMP receiver
//!   (orthogonalized LMMSE linear stage + MMSE/APP nonlinear stage).
//! * [`state_evolution`] — exact scalar dynamics of the receiver,
//!   transfer charts and fixed points.
//! * [`capacity`] — constrained sum capacity via the I-MMSE integral,
//!   its closed form, and the receiver's achievable rate.
//! * [`rate_allocation`] — group-asymmetric variance allocation and
//!   per-group rate targets.
//! * [`coding`] — LDPC construction, belief-propagation decoding and
//!   empirical MMSE transfer measurement.
//! * [`harness`] — seeded Monte-Carlo orchestration, configs and the
//!   CLI surface.
//!
//! All mutual-information quantities are computed and stored in nats;
//! display layers convert to bits.

pub mod capacity;
pub mod channel;
pub mod coding;
pub mod constellation;
pub mod detector;
pub mod harness;
pub mod quadrature;
pub mod rate_allocation;
pub mod state_evolution;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    InvalidDimension,

    #[error("condition number must be >= 1, got {0}")]
    InvalidConditionNumber(f64),

    #[error("singular resolvent: rho=0 with {zero_count} zero eigenvalues (keep rho > 0 when the channel is rank deficient)")]
    Singularity { zero_count: usize },

    #[error("degenerate channel: linear stage is uninformative (|v_s - omega_L| < {0:.1e})")]
    DegenerateChannel(f64),

    #[error("non-contracting configuration: prior MMSE {omega:.6e} >= input variance {v_r:.6e}")]
    NonContracting { omega: f64, v_r: f64 },

    #[error("argument {value} outside attainable range [{lo}, {hi})")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("no fixed point found in (0, {rho_hi}); nld curve entirely {relation} the ld curve")]
    NoFixedPoint { rho_hi: f64, relation: &'static str },

    #[error("fixed point is not unique: {0} crossings detected")]
    NonUniqueFixedPoint(usize),

    #[error("variance allocation infeasible: groups {binding:?} are clipped and the average constraint is unreachable")]
    InfeasibleAllocation { binding: Vec<usize> },

    #[error("bit stream length {length} is not a multiple of {unit}")]
    Framing { length: usize, unit: usize },

    #[error("code construction failed: {0}")]
    Construction(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("linear algebra backend error: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
