use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// An elementary function was evaluated outside its domain.
    #[error("{function} is undefined at {value}")]
    Domain { function: &'static str, value: f64 },
    /// A numerical procedure failed to meet its accuracy contract.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// A search range was too small to contain the requested results.
    #[error("range error: {0}")]
    Range(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! arg_err {
    ($($t:tt)*) => { $crate::Error::Argument(alloc::format!($($t)*)) };
}
macro_rules! num_err {
    ($($t:tt)*) => { $crate::Error::Numeric(alloc::format!($($t)*)) };
}
pub(crate) use arg_err;
pub(crate) use num_err;
