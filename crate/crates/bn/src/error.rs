use thiserror::Error;

pub type Result<T> = std::result::Result<T, BnError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BnError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("duplicate node `{0}`")]
    DuplicateNode(String),

    #[error("node `{0}` has zero cardinality")]
    ZeroCardinality(String),

    #[error("nodes `{0}` and `{1}` are connected by more than one edge")]
    DuplicateEdge(String, String),

    #[error("graph contains a cycle through `{0}`")]
    Cycle(String),

    #[error("node `{node}` cannot be dropped: {reason}")]
    NotDroppable { node: String, reason: String },

    #[error("variable index {0} out of range")]
    VariableOutOfRange(usize),

    #[error("value {value} out of range for `{node}` (cardinality {cardinality})")]
    ValueOutOfRange {
        node: String,
        value: usize,
        cardinality: usize,
    },

    #[error("query variable `{0}` is also given as evidence")]
    QueryInEvidence(String),

    #[error("variable `{0}` appears twice in the evidence")]
    DuplicateEvidence(String),

    #[error("data table has no column for node `{0}`")]
    MissingColumn(String),

    #[error("row has {found} values, table has {expected} columns")]
    RowWidth { expected: usize, found: usize },

    #[error("cannot fit a network to an empty table")]
    EmptyTable,

    #[error("invalid table for `{node}`: {reason}")]
    InvalidTable { node: String, reason: String },

    #[error("invalid factor: {0}")]
    InvalidFactor(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("elimination order does not cover the variables to eliminate")]
    BadOrder,

    #[error("joint of size {size} exceeds the brute-force cap of {cap}")]
    TooLarge { size: u128, cap: u128 },
}
