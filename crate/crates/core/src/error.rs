use alloc::string::String;
use alloc::vec::Vec;

/// Everything that can go wrong in the analysis pipeline.
///
/// `BoundViolated` is special: every inequality checked by this crate is a
/// theorem, so a violation points at an implementation defect (or a
/// defective statement of the inequality) rather than at the input.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("matrix is not row-stochastic: {0}")]
    NonStochastic(String),

    #[error("chain is not irreducible: {0}")]
    Disconnected(String),

    #[error("chain is not reversible: max detailed-balance violation {violation:e}")]
    NotReversible { violation: f64 },

    #[error("linear solve is numerically singular: {0}")]
    SingularSolve(String),

    #[error("eigensolver failed to converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("hitting-time routes disagree: {0}")]
    HittingMismatch(String),

    #[error("hitting times are not symmetric (max |E_x[T_y] - E_y[T_x]| = {asymmetry:e}); transitivity hint is wrong")]
    NotTransitiveEvidence { asymmetry: f64 },

    #[error("bound {id} violated: lhs {lhs:e} > rhs {rhs:e}")]
    BoundViolated { id: String, lhs: f64, rhs: f64 },

    #[error("outside the regime where {0} applies")]
    RegimeViolation(String),

    #[error("complement of the target set is not irreducible; components {components:?}")]
    DisconnectedComplement { components: Vec<Vec<usize>> },

    #[error("conditioning event has probability {probability:e}")]
    NullConditioning { probability: f64 },

    #[error("trial {trial} from start {start} (seed {seed}) ran past {limit:e}")]
    RunawayTrial {
        seed: u64,
        start: usize,
        trial: u64,
        limit: f64,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn bad_params(msg: impl Into<String>) -> Error {
    Error::BadParams(msg.into())
}
