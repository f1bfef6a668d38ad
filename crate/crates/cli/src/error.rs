use std::fmt;

/// A problem with the user's inputs or configuration. Maps to exit code 2;
/// every other error maps to 1.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(message: impl Into<String>) -> anyhow::Error {
    Invalid(message.into()).into()
}

pub trait OrInvalid<T> {
    /// Marks an error as a validation failure.
    fn or_invalid(self) -> anyhow::Result<T>;
}

impl<T, E: fmt::Display> OrInvalid<T> for Result<T, E> {
    fn or_invalid(self) -> anyhow::Result<T> {
        self.map_err(|e| invalid(e.to_string()))
    }
}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.chain().any(|c| c.is::<Invalid>()) {
        2
    } else {
        1
    }
}
