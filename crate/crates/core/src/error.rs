use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("low-rank update core matrix is numerically singular")]
    SingularCore,

    #[error("eigensolver failed to converge")]
    EigenSolverFailed,

    #[error("iteration broke down: non-positive curvature {curvature:.3e} at step {iteration}")]
    BreakdownNonpositiveCurvature { iteration: usize, curvature: f64 },

    #[error("iteration did not reach tolerance {tol:.1e} in {max_it} iterations")]
    MaxIterations { tol: f64, max_it: usize },

    #[error("not enough iterations recorded to estimate the spectrum")]
    InsufficientData,

    #[error("oversampled region of subdomain {subdomain} at level {k} has no interior dofs")]
    EmptyRegion { subdomain: usize, k: usize },

    #[error("problem has {dofs} dofs, above the dense oracle limit of {limit}")]
    TooLargeForOracle { dofs: usize, limit: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
