use thiserror::Error;

/// Errors produced by the solver and verification layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Nonzero solenoidal forcing sits on a mode where the symbol vanishes.
    #[error(
        "resonant forcing at temporal mode k = {k} (xi = 0): solenoidal forcing of size {magnitude:e} \
         cannot be absorbed in the zero-mean gauge"
    )]
    ResonantForcing { k: i64, magnitude: f64 },

    #[error(
        "modulation by {shift} moves occupied mode {k} outside the temporal range {min}..={max}; \
         increase n_time"
    )]
    ModeOverflow {
        shift: i64,
        k: i64,
        min: i64,
        max: i64,
    },

    /// Too much of the field lives outside the inscribed ball of the box.
    #[error(
        "support violation: fraction {fraction:e} of the L2 mass lies outside radius {radius} \
         (time slice {slice}); rotation would alias across periodic images"
    )]
    SupportViolation {
        fraction: f64,
        radius: f64,
        slice: usize,
    },

    #[error("temporal mode k = {k}: {source}")]
    Mode {
        k: i64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the root cause is a resonant forcing, looking through per-mode wrappers.
    pub fn is_resonant(&self) -> bool {
        match self {
            Error::ResonantForcing { .. } => true,
            Error::Mode { source, .. } => source.is_resonant(),
            _ => false,
        }
    }

    pub(crate) fn in_mode(self, k: i64) -> Error {
        Error::Mode {
            k,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
