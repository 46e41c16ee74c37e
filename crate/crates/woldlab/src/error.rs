use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum WoldlabError {
    #[error("gram matrix is singular or not positive definite")]
    GramSingular,

    #[error("operator is not left invertible (T*T singular on its admissible window)")]
    NotLeftInvertible,

    #[error("subspace is not contained in the requested ambient for complement")]
    NotNested,

    #[error("degree cap too small: no admissible window for this check")]
    CapTooSmall,

    #[error("hyper-range dimension still strictly decreasing after {0} iterations")]
    NoStabilization(usize),

    #[error("prerequisite failed: {0}")]
    PrerequisiteFailed(String),

    #[error("wandering subspace ker T1* ∩ ker T2* is trivial")]
    EmptyWanderingSubspace,

    #[error("monomial dictionary is rank deficient; wandering hypothesis violated numerically")]
    DictionaryRankDeficient,

    #[error("operator measure is not positive semidefinite (lambda_min = {0:.3e})")]
    NotPSD(f64),

    #[error("assembled model Gram is not positive semidefinite (lambda_min = {0:.3e})")]
    GramNotPSD(f64),

    #[error("evaluation point lies outside the open bidisc")]
    PointOutsideDisc,

    #[error("unknown gallery example `{0}`")]
    UnknownExample(String),

    #[error("measure kind not supported by this oracle")]
    UnsupportedMeasureKind,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, WoldlabError>;
