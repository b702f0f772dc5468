use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The closed-form generator amplitudes divide by `lambda` and by
    /// `gamma`; both vanish here. Use the direct integrator instead.
    #[error(
        "closed-form generator amplitudes are singular for lambda = {lambda}, omega = {omega} \
         ({regime}); use the direct integrator"
    )]
    DegenerateDamping {
        lambda: f64,
        omega: f64,
        regime: &'static str,
    },

    #[error("generator value at t = {t} is not real (relative imaginary residue {residue:e})")]
    NonRealResult { t: f64, residue: f64 },

    #[error("step {dt} too large: dt * rate = {product} exceeds {limit}")]
    StepTooLarge { dt: f64, product: f64, limit: f64 },

    #[error(
        "grid [{x_min}, {x_max}] does not contain the packet support [{lo}, {hi}]"
    )]
    GridTooNarrow {
        x_min: f64,
        x_max: f64,
        lo: f64,
        hi: f64,
    },

    #[error("tridiagonal solve failed at row {row}: pivot {pivot:e}")]
    SolveFailure { row: usize, pivot: f64 },

    #[error("field norm {norm:e} is too small to normalise")]
    ZeroNorm { norm: f64 },

    #[error("kernel requested at a caustic: omega * t = {omega_t} (|sin| = {sin_abs:e})")]
    Caustic { omega_t: f64, sin_abs: f64 },

    #[error("slice composition broke down after {slice} slices")]
    QuadratureOverflow { slice: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {value}"),
        })
    }
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite, got {value}"),
        })
    }
}
