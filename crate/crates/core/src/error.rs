use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation (e.g. `p <= 1`).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Adaptive quadrature of the primitive did not converge within budget.
    #[error("quadrature did not converge for F(k = {k}, t = {t})")]
    Quadrature { k: i64, t: f64 },

    #[error("usage error: {0}")]
    Usage(String),

    /// The mountain-pass path has no interior maximum above its endpoints.
    #[error("no mountain pass: {0}")]
    NoPass(String),

    /// The maximum of the path drifted onto an endpoint.
    #[error("mountain-pass path collapsed onto an endpoint; try a larger amplitude for the high endpoint")]
    PathCollapse,

    #[error("superlinearity too weak on |k| <= {h}: no threshold T found up to ln T = {ln_t_max}")]
    WeakSuperlinearity { h: i64, ln_t_max: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
