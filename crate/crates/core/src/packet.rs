//! Closed-form breathing Gaussian density and its damped counterpart.

use std::f64::consts::PI;

use crate::classical::OscillatorParams;
use crate::error::{check_finite, check_positive, Result};

/// Initial centre and width-modulation parameter of a breathing packet.
/// `gamma_squeeze = 1` is the rigid coherent packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec {
    pub x0: f64,
    pub gamma_squeeze: f64,
}

impl PacketSpec {
    pub fn new(x0: f64, gamma_squeeze: f64) -> Result<Self> {
        check_finite("x0", x0)?;
        check_positive("gamma_squeeze", gamma_squeeze)?;
        Ok(Self { x0, gamma_squeeze })
    }

    pub fn coherent(x0: f64) -> Self {
        Self {
            x0,
            gamma_squeeze: 1.0,
        }
    }

    /// Largest width reached during a period.
    pub fn max_sigma(&self, params: &OscillatorParams) -> f64 {
        let g = self.gamma_squeeze;
        (params.hbar / (2.0 * g * params.mass * params.omega) * g.max(1.0).powi(2)).sqrt()
    }
}

/// `sigma^2 = hbar / (2 g m w) [cos^2(w t) + g^2 sin^2(w t)]`.
pub fn sigma_x(params: &OscillatorParams, spec: &PacketSpec, t: f64) -> f64 {
    let g = spec.gamma_squeeze;
    let (s, c) = (params.omega * t).sin_cos();
    (params.hbar / (2.0 * g * params.mass * params.omega) * (c * c + g * g * s * s)).sqrt()
}

pub fn center(params: &OscillatorParams, spec: &PacketSpec, t: f64) -> f64 {
    spec.x0 * (params.omega * t).cos()
}

/// Unit-mass Gaussian centred at `x0 cos(w t)` with width `sigma_x(t)`.
pub fn density_undamped(params: &OscillatorParams, spec: &PacketSpec, x: f64, t: f64) -> f64 {
    let sigma = sigma_x(params, spec, t);
    let d = x - center(params, spec, t);
    (-(d * d) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
}

/// `density_undamped * e^{-4 lambda t}`.
pub fn density_damped(params: &OscillatorParams, spec: &PacketSpec, x: f64, t: f64) -> f64 {
    density_undamped(params, spec, x, t) * (-4.0 * params.lambda * t).exp()
}
