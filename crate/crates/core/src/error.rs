use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("pattern enumeration needs {required} pattern sets, cap is {cap}")]
    EnumerationOverflow { required: String, cap: usize },

    #[error("scheme {scheme} is only defined for {requirement} (got N={n}, K={k})")]
    Regime {
        scheme: &'static str,
        requirement: &'static str,
        n: usize,
        k: usize,
    },

    #[error("no pattern mix for demand {demand} fits memory {memory}")]
    Infeasible { demand: String, memory: String },

    #[error("verification failed: {0}")]
    VerificationFailure(String),

    #[error("element {value:#x} does not belong to GF(2^{degree})")]
    FieldMismatch { value: u128, degree: u32 },

    #[error("unsupported field degree {0}")]
    UnsupportedField(u32),

    #[error("field GF(2^{available}) too small, code length {required} needs m >= {required}")]
    FieldTooSmall { required: usize, available: u32 },

    #[error("linear system is singular")]
    SingularSystem,

    #[error("overdetermined linear system is inconsistent")]
    InconsistentSystem,

    #[error("combination rows have GF(2) rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },

    #[error("instance plan has no entry for demand {0}")]
    PlanMismatch(String),

    #[error("user {user} cannot resolve segment {segment}")]
    Unresolvable { user: usize, segment: String },

    #[error("redundancy identity violated: {0}")]
    IdentityViolation(String),

    #[error("W-sets overlap: {0}")]
    DisjointnessViolation(String),

    #[error("dependent transmissions within a W-set: {0}")]
    DependenceFound(String),

    #[error("decomposition mismatch: {0}")]
    MismatchFound(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
