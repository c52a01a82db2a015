use std::path::PathBuf;

use crate::analysis::ReasonCode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("syntax error at offset {position}: expected {expected}")]
    Syntax { position: usize, expected: String },
    #[error("head variable {0} does not appear in any atom")]
    UnboundHeadVariable(String),
    #[error("head variable {0} is listed twice")]
    DuplicateHeadVariable(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("variable {0} is not a head variable")]
    NonFreeVariable(String),
    #[error("variable {0} is listed twice in the order")]
    DuplicateVariable(String),
    #[error("query uses more than {max} distinct variables")]
    TooManyVariables { max: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error on {path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{path}: line {line} has {found} cells, header has {expected}")]
    RaggedRow {
        path: PathBuf,
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("{0}: empty header row")]
    EmptyHeader(PathBuf),

    #[error("relation {0} is not in the instance")]
    MissingRelation(String),
    #[error("relation {relation} has arity {actual}, atom expects {expected}")]
    ArityMismatch {
        relation: String,
        expected: usize,
        actual: usize,
    },
    #[error("relation {relation} column {column} carries weight variable {variable} but holds a non-integer value")]
    NonNumericWeightColumn {
        relation: String,
        column: String,
        variable: String,
    },

    #[error("order is not routed to this algorithm: {0:?}")]
    NotRouted(Vec<ReasonCode>),
    #[error("position {k} out of range (answer count {count})")]
    OutOfRange { k: u128, count: u128 },
    #[error("answer count overflows 128 bits")]
    CountOverflow,
    #[error("rank {k} out of range for total weight {total}")]
    KOutOfRange { k: u128, total: u128 },
    #[error("join result exceeds the configured cap of {cap} answers")]
    ResultTooLarge { cap: u64 },
    #[error("strategy not applicable: {0}")]
    NotApplicable(String),
    #[error("the OFFSET/LIMIT dialect can address only one position")]
    MultiplePositionsWithOffsetDialect,
    #[error("config error: {0}")]
    Config(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Short machine-readable tag, used in JSON output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax_error",
            Error::UnboundHeadVariable(_) => "unbound_head_variable",
            Error::DuplicateHeadVariable(_) => "duplicate_head_variable",
            Error::UnknownVariable(_) => "unknown_variable",
            Error::NonFreeVariable(_) => "non_free_variable",
            Error::DuplicateVariable(_) => "duplicate_variable",
            Error::TooManyVariables { .. } => "too_many_variables",
            Error::Io { .. } => "io_error",
            Error::Csv { .. } => "csv_error",
            Error::RaggedRow { .. } => "ragged_row",
            Error::EmptyHeader(_) => "empty_header",
            Error::MissingRelation(_) => "missing_relation",
            Error::ArityMismatch { .. } => "arity_mismatch",
            Error::NonNumericWeightColumn { .. } => "non_numeric_weight_column",
            Error::NotRouted(_) => "not_routed",
            Error::OutOfRange { .. } => "out_of_range",
            Error::CountOverflow => "count_overflow",
            Error::KOutOfRange { .. } => "k_out_of_range",
            Error::ResultTooLarge { .. } => "result_too_large",
            Error::NotApplicable(_) => "not_applicable",
            Error::MultiplePositionsWithOffsetDialect => "multiple_positions_with_offset_dialect",
            Error::Config(_) => "config_error",
            Error::Internal(_) => "internal_error",
        }
    }
}

pub(crate) fn checked_mul(a: u128, b: u128) -> Result<u128> {
    a.checked_mul(b).ok_or(Error::CountOverflow)
}

pub(crate) fn checked_add(a: u128, b: u128) -> Result<u128> {
    a.checked_add(b).ok_or(Error::CountOverflow)
}
