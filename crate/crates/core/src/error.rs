use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("photon number {n} exceeds cutoff {cutoff}")]
    CutoffExceeded { n: usize, cutoff: usize },

    #[error("truncation budget exceeded for {what}: measured {measured:.3e}, limit {limit:.3e}")]
    Truncation {
        what: &'static str,
        measured: f64,
        limit: f64,
    },

    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    #[error("degenerate transmittance (T = 0)")]
    DegenerateTransmittance,

    #[error("degenerate beam splitter: |T| = {t_abs:.3e}, |R| = {r_abs:.3e}")]
    DegenerateBeamSplitter { t_abs: f64, r_abs: f64 },

    /// Conditioning on an outcome whose probability is numerically zero.
    #[error("zero-probability outcome (probability {0:.3e})")]
    ZeroProbability(f64),

    #[error("state is not normalized (norm {0:.12})")]
    NotNormalized(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integration range too small: integrand tail {tail:.3e} at half-range {half_range}")]
    IntegrationRange { tail: f64, half_range: f64 },

    #[error("closed form disagrees with the two-mode oracle (relative difference {0:.3e})")]
    IllConditioned(f64),

    #[error("consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
