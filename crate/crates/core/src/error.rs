use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {what} (estimated error {estimate:.3e})")]
    Quadrature { what: String, estimate: f64 },

    #[error("kernel inversion failed: {0}")]
    Inversion(String),

    /// The coupling spectrum makes the requested integral diverge.
    #[error("non-integrable spectrum: {0}")]
    DivergentSpectrum(String),

    #[error("spectral truncation: {fraction:.3e} of the spectral weight lies above nu_max = {nu_max}")]
    SpectralTruncation { fraction: f64, nu_max: f64 },

    #[error("inverse Laplace transform failed at t = {t}: {reason}")]
    Contour { t: f64, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("integration unstable: {0}")]
    Instability(String),

    #[error("invalid solver configuration: {0}")]
    SolverConfig(String),

    #[error("need at least {needed} realizations, got {got}")]
    InsufficientRealizations { needed: usize, got: usize },

    #[error("provenance mismatch: {0}")]
    ProvenanceMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("refusing to overwrite {}; pass --force to replace it", .0.display())]
    OutputExists(std::path::PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
