//! Error types shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The nonlinear parts of the two rate equations are not proportional,
    /// so the linear change of variables cannot remove them from `ξ̇`.
    #[error("nonlinear parts are not proportional: g != mu*f for any real mu; \
             the linear reduction requires g = mu*f (or f = 0)")]
    NotProportional,

    /// `f` carries constant or linear terms without the explicit opt-in.
    #[error("nonlinearity f(x,y) has constant/linear terms {0}; fold them into \
             the linear coefficients or opt in with allow_affine_f")]
    AffineTermsInF(String),

    #[error("no Newton iteration converged to a fixed point in the search box")]
    NoFixedPointFound,

    /// The transform determinant `α1β2 − α2β1` vanished.
    #[error("degenerate linear transform: alpha1*beta2 - alpha2*beta1 = 0")]
    DegenerateTransform,

    #[error("system not reducible: {0}")]
    NotReducible(String),

    /// Constant term of the reduced equation did not vanish, which signals
    /// an inconsistent fixed point.
    #[error("fixed point not shifted to origin: residual A00 = {residual:e} exceeds {tol:e}")]
    FixedPointNotShifted { residual: f64, tol: f64 },

    /// `−A10 ≤ 0`: no angular frequency, so averaging does not apply.
    #[error("system is not oscillatory: -A10 = {minus_a10} must be positive")]
    NotOscillatory { minus_a10: f64 },

    /// Radial polynomial is identically zero (center at first order).
    #[error("averaged radial polynomial is identically zero (center at first order)")]
    IdenticallyZero,

    #[error("integration step underflow at t = {t} (step {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("state became non-finite during integration at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("parameter {name} out of range: requires {constraint}")]
    ParameterOutOfRange { name: String, constraint: String },

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
