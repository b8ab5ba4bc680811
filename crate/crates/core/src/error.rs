use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A caller-supplied argument is outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Structured input (spectra, score rows, frame matrices) is malformed.
    #[error("format error: {0}")]
    Format(String),
    /// A value violates a numeric domain constraint (negative score, single-class ROC input).
    #[error("domain error: {0}")]
    Domain(String),
    /// Fewer labels than one voting window.
    #[error("short input: {len} labels for a window of {window}")]
    ShortInput { len: usize, window: usize },
}

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
