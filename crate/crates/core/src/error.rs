use thiserror::Error;

/// Errors raised by the bound evaluators, verifiers and model systems.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A time parameter does not exceed the burn-in time `T_r`.
    #[error("schedule error: T = {t} must exceed T_r = {t_r}")]
    Schedule { t: f64, t_r: f64 },

    /// An exhaustive enumeration or simulation would exceed its budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// The caller violated the hypothesis of a lemma being checked. This is
    /// distinct from the lemma failing.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A least-squares fit had no spread in its abscissae.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A grid is too coarse for the requested erosion or dilation radius.
    #[error("grid resolution {cell} is too coarse for radius {radius} (need cell <= radius/8)")]
    Resolution { cell: f64, radius: f64 },

    /// Malformed textual input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
