use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cyclic factor of order {0} is not allowed (orders must be >= 2)")]
    InvalidOrder(u64),
    #[error("group has {size} elements, above the cap of {cap}")]
    GroupTooLarge { size: u128, cap: usize },
    #[error("operands live in different groups ({left} vs {right})")]
    GroupMismatch { left: String, right: String },
    #[error("operation needs a nonempty set")]
    EmptySet,
    #[error("operation needs a group of prime order, got {0}")]
    NotPrimeCyclic(String),
    #[error("dilation by {0} is not invertible in this group")]
    NonInvertibleDilation(i64),
    #[error("element {0} is outside the group")]
    ElementOutOfRange(usize),
    #[error("{msg}")]
    Parse { line: Option<usize>, msg: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),
    #[error("campaign would enumerate {count} instances, above the cap of {cap}")]
    CapExceeded { count: u128, cap: u128 },
    #[error("generator starved: {accepted} of {drawn} draws accepted in the last window")]
    Starvation { drawn: u64, accepted: u64 },
    #[error("unknown check `{name}`; registered checks: {known}")]
    UnknownCheck { name: String, known: String },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn parse_at(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line: Some(line),
            msg: format!("line {line}: {}", msg.into()),
        }
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse {
            line: None,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
