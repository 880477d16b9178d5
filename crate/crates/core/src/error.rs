use thiserror::Error;

use crate::model::Mode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{mode} mode does not allow {what}")]
    ModeMismatch { mode: Mode, what: &'static str },

    /// A linear solve exceeded the condition bound; usually a degenerate
    /// parameter point such as an undamped, undriven level.
    #[error("singular generator (1-norm condition estimate {condition:.3e})")]
    SingularGenerator { condition: f64 },

    #[error("linear-response extraction of {coefficient} is not linear in the probe (relative discrepancy {discrepancy:.3e})")]
    LinearityFailure { coefficient: &'static str, discrepancy: f64 },

    #[error("degenerate denominator {name} (|value| = {magnitude:.3e})")]
    DegenerateDenominator { name: &'static str, magnitude: f64 },

    #[error("integrator step size underflow at t = {t} (h = {h:.3e})")]
    StepFailure { t: f64, h: f64 },

    #[error("projection window {window} is shorter than two beat periods ({required})")]
    WindowTooShort { window: f64, required: f64 },
}
