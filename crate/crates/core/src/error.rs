use thiserror::Error;

/// Errors raised by the discretization, the time integrator and the drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (e.g. ξ ∉ [0,1]).
    #[error("input out of domain: {0}")]
    InputDomain(String),

    /// Invalid or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A non-positive or non-finite water height was met.
    #[error("invalid state at dof {dof}: H = {h}, q = {q}")]
    State { dof: usize, h: f64, q: f64 },

    /// No admissible steady state exists at the given abscissa.
    #[error("no admissible steady state at x = {x}: {reason}")]
    Infeasible { x: f64, reason: String },

    /// The time integrator produced an invalid state.
    #[error("time step {step} failed at t = {time}: {source}")]
    StepFailure {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("cannot parse configuration: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
