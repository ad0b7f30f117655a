use thiserror::Error;

/// Errors raised by geometry, kernel, quadrature and oracle routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violates an API precondition (wrong space, wrong count, non-unit vector).
    #[error("usage error: {0}")]
    Usage(String),

    /// Two points coincide where a direction between them is required.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The points are at (or within 1e-9 of) the cut locus of each other.
    #[error("points at distance {distance} are on the cut locus (cut distance {cut})")]
    CutLocus { distance: f64, cut: f64 },

    /// A kernel was evaluated at a singular distance (d = 0).
    #[error("singular input: {0}")]
    Singular(String),

    /// An argument lies outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested (space, degree) combination has no implemented kernel.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// Invalid builtin parameters, scene contents or chain data.
    #[error("validation error: {0}")]
    Validation(String),

    /// The parametrization has rank below its dimension at the given parameter.
    #[error("degenerate chart at {parameter:?}: smallest singular value {sigma_min:e}")]
    DegenerateChart { parameter: Vec<f64>, sigma_min: f64 },

    /// The two submanifolds come closer than the disjointness threshold.
    #[error("submanifolds too close: sampled minimum distance {min_distance:e} < {threshold:e}")]
    Proximity { min_distance: f64, threshold: f64 },

    /// A chart map cannot represent the input (e.g. stereographic pole on the curve).
    #[error("chart error: {0}")]
    Chart(String),

    /// A topological oracle could not find a generic configuration.
    #[error("oracle failure: {0}")]
    OracleFailure(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
