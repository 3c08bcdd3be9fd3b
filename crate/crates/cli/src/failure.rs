use std::fmt;
use std::path::Path;

/// Command failure, split by exit code: bad inputs exit 1, everything else 2.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Failure::Validation(msg.into())
    }

    /// Prefix the message with where it came from.
    pub fn context(self, what: impl fmt::Display) -> Self {
        match self {
            Failure::Validation(m) => Failure::Validation(format!("{what}: {m}")),
            Failure::Runtime(m) => Failure::Runtime(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<multibox::Error> for Failure {
    fn from(e: multibox::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<toml::de::Error> for Failure {
    fn from(e: toml::de::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

pub type Outcome<T> = Result<T, Failure>;

pub fn read_text(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::from(e).context(path.display()))
}

pub fn read_bytes(path: &Path) -> Outcome<Vec<u8>> {
    std::fs::read(path).map_err(|e| Failure::from(e).context(path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Outcome<()> {
    std::fs::write(path, text).map_err(|e| Failure::from(e).context(path.display()))
}
