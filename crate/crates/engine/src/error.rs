use std::fmt;

/// Errors produced by the engine.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Syntax error in a textual input, with a byte offset into the source.
    #[error("syntax error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// An operation that requires a limit ordinal was given something else.
    #[error("`{0}` is not a limit ordinal")]
    NotLimit(String),

    /// `index_above(lambda, beta)` requires `beta < lambda`.
    #[error("bound `{beta}` is not strictly below `{lambda}`")]
    BoundNotBelow { beta: String, lambda: String },

    /// A path set that is not prefix-closed or is missing the root.
    #[error("invalid tree: {0}")]
    InvalidTree(String),

    /// A formula used a predicate that the signature does not declare.
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    /// A variable occurred free where a sentence was required, or was
    /// rebound along a quantifier path.
    #[error("variable error: {0}")]
    Variable(String),

    /// A term of the wrong sort (e.g. a lower-case set variable).
    #[error("sort error: {0}")]
    Sort(String),

    /// The projection was asked for a signature smaller than the support.
    #[error("signature is smaller than the support: missing {0}")]
    SignatureTooSmall(String),

    /// A schema instantiation was given an index of the wrong kind.
    #[error("bad schema instantiation: {0}")]
    Schema(String),

    /// The profile solver refuses queries that are too wide to decide.
    #[error("query too wide for the profile solver: {0}")]
    TooWide(String),

    /// `closure_step` on a state that already reached its fixpoint.
    #[error("closure state is already at a fixpoint")]
    AlreadyAtFixpoint,

    /// An iteration budget ran out before a fixpoint or inconsistency.
    #[error("step budget of {0} exhausted before a fixpoint was reached")]
    BudgetExhausted(u32),

    /// Number variables colliding with the reserved set-code namespace.
    #[error("namespace collision: {0}")]
    NamespaceCollision(String),

    /// Anything else that is a malformed request rather than a bug.
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl fmt::Display) -> Self {
        Error::Parse {
            pos,
            msg: msg.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
