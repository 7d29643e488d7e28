use thiserror::Error;

/// Errors produced by the physics core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distribution has no positive weight")]
    EmptyDistribution,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("bin geometry mismatch: {0}")]
    Geometry(String),

    #[error("measure undefined: {0}")]
    UndefinedMeasure(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("dissipative channel is degenerate at gamma = 0 (nu diverges)")]
    DegenerateChannel,

    #[error(
        "momentum leakage {population:.3e} on the outer basis levels after period {period} \
         (n_max = {n_max}); enlarge the basis, e.g. n_max >= {suggested_n_max}"
    )]
    Leakage {
        period: usize,
        population: f64,
        n_max: usize,
        suggested_n_max: usize,
    },

    #[error("unsupported star-product order {0} (supported: 0, 1, 2)")]
    UnsupportedOrder(usize),

    #[error("field grids do not match")]
    GridMismatch,

    #[error("singular symbol: {0}")]
    Singular(String),

    #[error("stability limit violated: {0}")]
    Stability(String),

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
