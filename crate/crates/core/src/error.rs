use thiserror::Error;

/// Errors raised by parameter construction and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{name}` = {value} outside {bound}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("utility family mismatch: expected {expected}")]
    WrongFamily { expected: &'static str },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("horizon {horizon} exceeds enumeration limit {limit}")]
    HorizonTooLong { horizon: usize, limit: usize },

    #[error("parameter range error: {0}")]
    ParameterRange(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    bound: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::OutOfRange { name, value, bound })
    }
}
