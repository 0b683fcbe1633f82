use dyapack_core::Error;
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Numerical,
    Usage,
    Io,
    Pattern,
    Definiteness,
    Disconnected,
}

impl Class {
    pub fn exit_code(self) -> i32 {
        match self {
            Class::Numerical => 1,
            Class::Usage => 2,
            Class::Io => 3,
            Class::Pattern => 4,
            Class::Definiteness => 5,
            Class::Disconnected => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Class::Numerical => "numerical",
            Class::Usage => "usage",
            Class::Io => "io",
            Class::Pattern => "pattern-violation",
            Class::Definiteness => "definiteness",
            Class::Disconnected => "disconnected",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub class: Class,
    pub message: String,
    /// 0-based row sets of a disconnected input.
    pub components: Vec<Vec<usize>>,
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn new(class: Class, message: impl Into<String>) -> Self {
        Self { class, message: message.into(), components: Vec::new() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(Class::Usage, message)
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self::new(Class::Io, format!("{}: {err}", path.display()))
    }

    pub fn report(&self) {
        eprintln!("error[{}]: {}", self.class.name(), self.message);
        for (n, c) in self.components.iter().enumerate() {
            let rows: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
            eprintln!("  component {} ({} rows): {}", n + 1, c.len(), rows.join(" "));
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let class = match &e {
            Error::PatternViolation { .. } | Error::DimensionMismatch(_) => Class::Pattern,
            Error::Definiteness { .. } => Class::Definiteness,
            Error::Disconnected { .. } => Class::Disconnected,
            Error::Io(_) | Error::Parse { .. } => Class::Io,
            Error::Range { .. } | Error::InvalidParameter(_) => Class::Usage,
            _ => Class::Numerical,
        };
        let components = match &e {
            Error::Disconnected { components } => components.clone(),
            _ => Vec::new(),
        };
        Self { class, message: e.to_string(), components }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new(Class::Io, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(Class::Io, e.to_string())
    }
}
