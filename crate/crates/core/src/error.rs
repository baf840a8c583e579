use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Array shapes of a spec and a point (or two operands) disagree.
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    /// A required evaluator or data slot is absent.
    #[error("missing {0}")]
    Missing(&'static str),

    /// Operands are individually valid but cannot be combined.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("singular constraint system at t = {t}: rank {rank} < {expected} (q = {q:?}, v = {v:?})")]
    SingularConstraint {
        t: f64,
        rank: usize,
        expected: usize,
        q: Vec<f64>,
        v: Vec<f64>,
    },

    #[error("invalid parameter {name}: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("non-finite state after step {step} (t = {t})")]
    BlowUp { step: usize, t: f64 },

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("constraint-manifold sampling failed: {survived} of {requested} samples converged")]
    Sampling { survived: usize, requested: usize },

    #[error("unsupported symmetry ansatz: {0}")]
    Ansatz(String),
}

impl Error {
    pub(crate) fn dim(what: &'static str, expected: usize, found: usize) -> Self {
        Error::Dimension {
            what,
            expected,
            found,
        }
    }
}
