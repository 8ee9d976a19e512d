use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// A parameter set violated one of its invariants.
    #[error("invalid parameter `{key}`: {detail}")]
    InvalidParam { key: String, detail: String },

    /// The configuration file could not be read or parsed.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{what}: quadrature did not converge (value {value:e}, error estimate {err_estimate:e}, {evaluations} evaluations)")]
    Quadrature {
        what: &'static str,
        value: f64,
        err_estimate: f64,
        evaluations: usize,
    },

    /// A sampled deployment contained no base station at all.
    #[error("empty deployment: no base station inside the sampling region (trial {trial})")]
    EmptyDeployment { trial: u64 },

    #[error("sweep failed at density {bs_density:e}, M = {m_bs}: {source}")]
    Sweep {
        bs_density: f64,
        m_bs: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn param(key: &str, detail: impl Into<String>) -> Self {
        Error::InvalidParam {
            key: key.to_string(),
            detail: detail.into(),
        }
    }
}
