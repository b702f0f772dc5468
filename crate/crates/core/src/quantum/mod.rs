//! Grid integration of the damped state equation
//!
//! `i hbar dpsi/dt = -(hbar^2 / 2m) psi'' + (m omega^2 x^2 / 2) psi - 2 i hbar lambda psi`
//!
//! on a uniform grid with `psi = 0` at both ends. The Hermitian part is
//! advanced with a Cayley (trapezoidal-type) propagator. The constant
//! anti-Hermitian term is either folded into the same linear systems
//! (`DampingMode::Coupled`) or applied afterwards as the exact scalar
//! `e^{-2 lambda dt}` (`DampingMode::Factored`). Both give norm decay
//! `e^{-4 lambda t}` with an undisturbed oscillation frequency.

mod tridiag;

pub use tridiag::TridiagonalLu;

use num_complex::Complex64;

use crate::classical::OscillatorParams;
use crate::packet::{sigma_x, PacketSpec};
use crate::error::{check_finite, check_positive, Error, Result};

/// Packet half-width, in standard deviations, that must fit inside the grid.
pub const CONTAINMENT_SIGMAS: f64 = 6.0;

/// Largest accepted `dt * omega`.
pub const DT_OMEGA_LIMIT: f64 = 0.1;

/// Default step as a fraction of the period.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 1000;

/// Uniform grid including both end points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        check_finite("x_min", x_min)?;
        check_finite("x_max", x_max)?;
        if x_min >= x_max {
            return Err(Error::InvalidParameter {
                name: "x_max",
                reason: format!("must exceed x_min ({x_min}), got {x_max}"),
            });
        }
        if n_points < 8 {
            return Err(Error::InvalidParameter {
                name: "n_points",
                reason: format!("must be at least 8, got {n_points}"),
            });
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// `[-8, 8]` with 1024 points.
    pub fn standard() -> Self {
        Self {
            x_min: -8.0,
            x_max: 8.0,
            n_points: 1024,
        }
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Same extent, twice the resolution.
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points - 1,
            ..*self
        }
    }

    /// Trapezoid weights.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_points {
            0.5 * self.dx()
        } else {
            self.dx()
        }
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        values
            .iter()
            .enumerate()
            .map(|(i, v)| self.weight(i) * v)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl WaveField {
    pub fn new(grid: Grid1D, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: format!("expected {} samples, got {}", grid.n_points, values.len()),
            });
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n_points],
            time: 0.0,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest end-point magnitude relative to the field maximum.
    pub fn boundary_ratio(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        let n = self.values.len();
        self.values[0].norm().max(self.values[n - 1].norm()) / m
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Max pointwise `|self - other|`.
    pub fn max_difference(&self, other: &WaveField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Ground-state width `sqrt(hbar / 2 m omega)` of `|psi|^2`.
pub fn ground_sigma(params: &OscillatorParams) -> f64 {
    (params.hbar / (2.0 * params.mass * params.omega)).sqrt()
}

/// Fails unless `[center - 6 sigma, center + 6 sigma]` lies inside the grid.
pub fn check_containment(grid: &Grid1D, center: f64, sigma: f64) -> Result<()> {
    let lo = center - CONTAINMENT_SIGMAS * sigma;
    let hi = center + CONTAINMENT_SIGMAS * sigma;
    if lo < grid.x_min || hi > grid.x_max {
        return Err(Error::GridTooNarrow {
            x_min: grid.x_min,
            x_max: grid.x_max,
            lo,
            hi,
        });
    }
    Ok(())
}

/// Oscillator ground state displaced to `x0`:
/// `(m w / pi hbar)^{1/4} exp(-m w (x - x0)^2 / 2 hbar)`.
pub fn init_ground_gaussian(params: &OscillatorParams, grid: &Grid1D, x0: f64) -> Result<WaveField> {
    init_packet(params, grid, &PacketSpec::coherent(x0))
}

/// Real Gaussian with the initial width of `spec`; under the Hermitian
/// evolution it breathes exactly as the closed-form packet does.
pub fn init_packet(params: &OscillatorParams, grid: &Grid1D, spec: &PacketSpec) -> Result<WaveField> {
    params.validate()?;
    let spec = PacketSpec::new(spec.x0, spec.gamma_squeeze)?;
    check_containment(grid, spec.x0, spec.max_sigma(params))?;
    let sigma = sigma_x(params, &spec, 0.0);
    let amp = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
    let values = grid
        .points()
        .into_iter()
        .map(|x| {
            let d = x - spec.x0;
            Complex64::new(amp * (-d * d / (4.0 * sigma * sigma)).exp(), 0.0)
        })
        .collect();
    Ok(WaveField {
        grid: *grid,
        values,
        time: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DampingMode {
    /// Damping term solved together with the Hermitian part.
    #[default]
    Coupled,
    /// Hermitian step followed by the exact factor `e^{-2 lambda dt}`.
    Factored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeScheme {
    /// Second order: `(1 + Z/2)^{-1} (1 - Z/2)`.
    CrankNicolson,
    /// Fourth order: diagonal Pade(2,2) of `e^{-Z}`, factored into two
    /// Cayley stages with complex conjugate weights.
    #[default]
    Cayley4,
}

impl TimeScheme {
    fn stage_weights(self) -> Vec<Complex64> {
        match self {
            TimeScheme::CrankNicolson => vec![Complex64::new(0.5, 0.0)],
            TimeScheme::Cayley4 => {
                let b = 1.0 / (4.0 * 3f64.sqrt());
                vec![Complex64::new(0.25, b), Complex64::new(0.25, -b)]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub damping_mode: DampingMode,
    pub scheme: TimeScheme,
}

impl EvolutionConfig {
    pub fn new(dt: f64, n_steps: usize, damping_mode: DampingMode) -> Self {
        Self {
            dt,
            n_steps,
            damping_mode,
            scheme: TimeScheme::default(),
        }
    }

    /// One period in steps of `T / 1000`.
    pub fn one_period(params: &OscillatorParams) -> Self {
        Self::new(
            params.period() / DEFAULT_STEPS_PER_PERIOD as f64,
            DEFAULT_STEPS_PER_PERIOD,
            DampingMode::default(),
        )
    }

    pub fn with_mode(self, damping_mode: DampingMode) -> Self {
        Self { damping_mode, ..self }
    }

    pub fn with_scheme(self, scheme: TimeScheme) -> Self {
        Self { scheme, ..self }
    }

    pub fn with_steps(self, n_steps: usize) -> Self {
        Self { n_steps, ..self }
    }

    pub fn validate(&self, params: &OscillatorParams) -> Result<()> {
        check_positive("dt", self.dt)?;
        let product = self.dt * params.omega;
        if product >= DT_OMEGA_LIMIT {
            return Err(Error::StepTooLarge {
                dt: self.dt,
                product,
                limit: DT_OMEGA_LIMIT,
            });
        }
        Ok(())
    }
}

struct Stage {
    weight: Complex64,
    lu: TridiagonalLu,
}

/// Pre-factorised single-step propagator for one grid and configuration.
pub struct Stepper {
    grid: Grid1D,
    dt: f64,
    z_diag: Vec<Complex64>,
    z_off: Complex64,
    stages: Vec<Stage>,
    post_factor: f64,
}

impl Stepper {
    pub fn new(grid: &Grid1D, params: &OscillatorParams, config: &EvolutionConfig) -> Result<Self> {
        params.validate()?;
        config.validate(params)?;
        let dx = grid.dx();
        let (m, hbar, w) = (params.mass, params.hbar, params.omega);
        let dt = config.dt;
        let kinetic = hbar * hbar / (m * dx * dx);
        let (coupled_rate, post_factor) = match config.damping_mode {
            DampingMode::Coupled => (2.0 * params.lambda, 1.0),
            DampingMode::Factored => (0.0, (-2.0 * params.lambda * dt).exp()),
        };
        let interior = grid.n_points - 2;
        // Z = dt (i H / hbar + 2 lambda) on interior nodes
        let z_diag: Vec<Complex64> = (1..=interior)
            .map(|i| {
                let x = grid.x(i);
                let h = kinetic + 0.5 * m * w * w * x * x;
                Complex64::new(coupled_rate * dt, dt * h / hbar)
            })
            .collect();
        let z_off = Complex64::new(0.0, -dt * 0.5 * kinetic / hbar);
        let stages = config
            .scheme
            .stage_weights()
            .into_iter()
            .map(|c| {
                let diag: Vec<Complex64> = z_diag.iter().map(|z| 1.0 + c * z).collect();
                let lu = TridiagonalLu::new(&diag, c * z_off)?;
                Ok(Stage { weight: c, lu })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: *grid,
            dt,
            z_diag,
            z_off,
            stages,
            post_factor,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances the interior in place by one step; end points are forced to zero.
    pub fn advance(&self, values: &mut [Complex64]) {
        assert_eq!(values.len(), self.grid.n_points);
        let n = self.z_diag.len();
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        for stage in &self.stages {
            let c = stage.weight;
            let off = c * self.z_off;
            let inner = &values[1..=n];
            for (i, r) in rhs.iter_mut().enumerate() {
                let left = if i > 0 { inner[i - 1] } else { Complex64::new(0.0, 0.0) };
                let right = if i + 1 < n { inner[i + 1] } else { Complex64::new(0.0, 0.0) };
                *r = (1.0 - c * self.z_diag[i]) * inner[i] - off * (left + right);
            }
            stage.lu.solve_in_place(&mut rhs);
            values[1..=n].copy_from_slice(&rhs);
        }
        values[0] = Complex64::new(0.0, 0.0);
        values[n + 1] = Complex64::new(0.0, 0.0);
        if self.post_factor != 1.0 {
            for v in values.iter_mut() {
                *v *= self.post_factor;
            }
        }
    }

    /// Runs `n_steps` steps from `field`, calling `observe` after each one.
    /// Time stamps are `start + k dt`.
    pub fn run<F>(&self, field: &WaveField, n_steps: usize, mut observe: F) -> WaveField
    where
        F: FnMut(usize, &WaveField),
    {
        let mut current = field.clone();
        let start = field.time;
        for k in 1..=n_steps {
            self.advance(&mut current.values);
            current.time = start + k as f64 * self.dt;
            observe(k, &current);
        }
        current
    }
}

/// Advances `field` by one step of `config.dt`.
pub fn step(field: &WaveField, params: &OscillatorParams, config: &EvolutionConfig) -> Result<WaveField> {
    let stepper = Stepper::new(&field.grid, params, config)?;
    Ok(stepper.run(field, 1, |_, _| {}))
}

/// `config.n_steps` steps with a snapshot every `sample_every` steps. The
/// input is the first snapshot and the final state is always included.
pub fn evolve(
    field: &WaveField,
    params: &OscillatorParams,
    config: &EvolutionConfig,
    sample_every: usize,
) -> Result<Vec<WaveField>> {
    let sample_every = sample_every.max(1);
    let stepper = Stepper::new(&field.grid, params, config)?;
    let mut snapshots = vec![field.clone()];
    let n = config.n_steps;
    stepper.run(field, n, |k, f| {
        if k % sample_every == 0 || k == n {
            snapshots.push(f.clone());
        }
    });
    Ok(snapshots)
}

/// Trapezoid-rule `int |psi|^2 dx`.
pub fn norm(field: &WaveField) -> f64 {
    let rho: Vec<f64> = field.values.iter().map(|v| v.norm_sqr()).collect();
    field.grid.integrate(&rho)
}

/// Lower limit below which a field is treated as empty.
pub const ZERO_NORM: f64 = 1e-300;

/// `<x>` normalised by the current (decayed) norm.
pub fn expectation_x(field: &WaveField) -> Result<f64> {
    let (n, m1, _) = moments(field);
    if n < ZERO_NORM {
        return Err(Error::ZeroNorm { norm: n });
    }
    Ok(m1 / n)
}

/// Position spread `sqrt(<x^2> - <x>^2)` normalised by the current norm.
pub fn width(field: &WaveField) -> Result<f64> {
    let (n, m1, m2) = moments(field);
    if n < ZERO_NORM {
        return Err(Error::ZeroNorm { norm: n });
    }
    let mean = m1 / n;
    Ok((m2 / n - mean * mean).max(0.0).sqrt())
}

fn moments(field: &WaveField) -> (f64, f64, f64) {
    let g = &field.grid;
    let mut out = (0.0, 0.0, 0.0);
    for (i, v) in field.values.iter().enumerate() {
        let w = g.weight(i) * v.norm_sqr();
        let x = g.x(i);
        out.0 += w;
        out.1 += w * x;
        out.2 += w * x * x;
    }
    out
}

/// `(x_i, |psi_i|^2)` without renormalisation.
pub fn density(field: &WaveField) -> Vec<(f64, f64)> {
    field
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| (field.grid.x(i), v.norm_sqr()))
        .collect()
}

/// `|<a|b>|` by the trapezoid rule.
pub fn overlap(a: &WaveField, b: &WaveField) -> f64 {
    let g = &a.grid;
    a.values
        .iter()
        .zip(&b.values)
        .enumerate()
        .map(|(i, (u, v))| u.conj() * v * g.weight(i))
        .sum::<Complex64>()
        .norm()
}

/// Location of the density maximum, refined by a parabola through the
/// three samples around the largest one.
pub fn peak_position(grid: &Grid1D, rho: &[f64]) -> f64 {
    let (imax, _) = rho
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &r)| if r > best.1 { (i, r) } else { best });
    if imax == 0 || imax + 1 >= rho.len() {
        return grid.x(imax);
    }
    let (a, b, c) = (rho[imax - 1], rho[imax], rho[imax + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    grid.x(imax) + shift.clamp(-0.5, 0.5) * grid.dx()
}

/// Period estimated from linearly interpolated zero crossings of a sampled
/// signal: twice the mean spacing between consecutive crossings.
pub fn zero_crossing_period(times: &[f64], values: &[f64]) -> Option<f64> {
    let crossings = zero_crossings(times, values);
    if crossings.len() < 2 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some(2.0 * span / (crossings.len() - 1) as f64)
}

pub fn zero_crossings(times: &[f64], values: &[f64]) -> Vec<f64> {
    times
        .windows(2)
        .zip(values.windows(2))
        .filter_map(|(t, v)| {
            if v[0] == 0.0 {
                Some(t[0])
            } else if v[0] * v[1] < 0.0 {
                Some(t[0] + (t[1] - t[0]) * v[0] / (v[0] - v[1]))
            } else {
                None
            }
        })
        .collect()
}
