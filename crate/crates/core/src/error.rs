use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("invalid rational literal: {0}")]
    BadRational(String),

    #[error("root {0} is not a terminal")]
    RootNotTerminal(usize),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("nonpositive cost on edge ({0}, {1})")]
    NonpositiveCost(usize, usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("self loop at vertex {0}")]
    SelfLoop(usize),

    #[error("vertex id {0} out of range")]
    BadVertex(usize),

    #[error("unknown family: {0}")]
    UnknownFamily(String),

    #[error("invalid parameters for family {family}: {message}")]
    BadFamilyParams { family: String, message: String },

    #[error("unknown terminal {0}")]
    UnknownTerminal(usize),

    #[error("terminal set is not a subset of R")]
    NotTerminalSubset,

    #[error("terminal set is empty")]
    EmptyTerminalSet,

    #[error("needs at least {0} terminals")]
    TooFewTerminals(usize),

    #[error("segment budget exceeded: need {need} segments, budget {budget}")]
    SegmentBudget { need: usize, budget: usize },

    #[error("terminal bound exceeded: {0} terminals, cap {1}")]
    TerminalBound(usize, usize),

    #[error("size bound exceeded: {0}")]
    SizeBound(String),

    #[error("dual assignment has wrong kind for this operation")]
    WrongDualKind,

    #[error("vertex {0} is not reachable in the trace")]
    Unreachable(usize),

    #[error("path is inconsistent with the trace: {0}")]
    InconsistentPath(String),

    #[error("inconsistent contraction mappings: {0}")]
    InconsistentMapping(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Invalid(String),
}
