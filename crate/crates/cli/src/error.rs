use std::fmt;

/// Failure class; decides the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Training,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 1,
            ErrorKind::Data => 2,
            ErrorKind::Training => 3,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub stage: &'static str,
    pub source: Box<dyn std::error::Error + Send + Sync>,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.source)
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(self.source.as_ref())
    }
}

impl CliError {
    pub fn new(kind: ErrorKind, stage: &'static str, source: impl Into<Box<dyn std::error::Error + Send + Sync>>) -> Self {
        CliError {
            kind,
            stage,
            source: source.into(),
        }
    }

    pub fn config(stage: &'static str, message: impl Into<String>) -> Self {
        CliError::new(ErrorKind::Config, stage, message.into())
    }

    pub fn data(stage: &'static str, message: impl Into<String>) -> Self {
        CliError::new(ErrorKind::Data, stage, message.into())
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a kind and stage name to foreign errors.
pub trait Context<T> {
    fn ctx(self, kind: ErrorKind, stage: &'static str) -> CliResult<T>;
}

impl<T, E> Context<T> for std::result::Result<T, E>
where
    E: Into<Box<dyn std::error::Error + Send + Sync>>,
{
    fn ctx(self, kind: ErrorKind, stage: &'static str) -> CliResult<T> {
        self.map_err(|e| CliError::new(kind, stage, e))
    }
}
