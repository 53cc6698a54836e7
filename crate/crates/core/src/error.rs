use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Breakdown causes raised by the recurrence coefficient computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BreakdownKind {
    /// A coefficient determinant vanished although the polynomials may exist.
    Ghost,
    /// A functional value that measures existence of an orthogonal polynomial vanished.
    True,
    /// `C_k` vanished, so the normalization `A_k = 1 / C_k` is undefined.
    Normalization,
    /// A back-substitution divisor of the B13 system vanished.
    Divisor,
}

impl std::fmt::Display for BreakdownKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            BreakdownKind::Ghost => "ghost",
            BreakdownKind::True => "true",
            BreakdownKind::Normalization => "normalization",
            BreakdownKind::Divisor => "divisor",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular system: pivot {pivot} below tolerance")]
    SingularSystem { pivot: usize },

    #[error("rank deficient least-squares design at column {column}")]
    RankDeficient { column: usize },

    #[error("non-finite value produced")]
    NumericOverflow,

    #[error("moment index {required} required but only {available} available")]
    MomentRangeExceeded { required: usize, available: usize },

    #[error("orthogonal polynomial of degree {degree} does not exist")]
    NonexistentPolynomial { degree: usize },

    #[error("{kind} breakdown at degree {degree}")]
    Breakdown { kind: BreakdownKind, degree: usize },

    #[error("bootstrap breakdown at degree {degree}")]
    BootstrapBreakdown { degree: usize },

    #[error("restart budget of {max} exhausted")]
    RestartsExhausted { max: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn breakdown(kind: BreakdownKind, degree: usize) -> Self {
        Error::Breakdown { kind, degree }
    }

    /// The breakdown cause, if this error is one the restart policy can recover from.
    pub fn breakdown_kind(&self) -> Option<BreakdownKind> {
        match self {
            Error::Breakdown { kind, .. } => Some(*kind),
            Error::BootstrapBreakdown { .. } => Some(BreakdownKind::True),
            _ => None,
        }
    }
}
