//! Classical damped oscillator expressed through its generator potential.
//!
//! The measurable coordinate is recovered from the generator `q` as
//! `x = q'' - 2 lambda q' + omega^2 q`. The generator obeys a fourth-order
//! equation whose characteristic roots are `±(lambda ± gamma)` with
//! `gamma = sqrt(lambda^2 - omega^2)`; only the two decaying roots carry
//! physical motion.

use num_complex::Complex64;

use crate::error::{check_finite, check_positive, Error, Result};

/// Relative width of the band around `lambda == omega` that counts as
/// critical damping.
pub const CRITICAL_TOLERANCE: f64 = 1e-9;

/// Imaginary residue (relative to the mode magnitudes) above which a
/// generator value is rejected as non-real.
pub const REAL_RESIDUE_LIMIT: f64 = 1e-9;

/// Largest `dt * max(omega, lambda)` accepted by the direct integrator.
pub const ORACLE_STEP_LIMIT: f64 = 0.5;

/// Physical constants shared by every part of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub mass: f64,
    /// Damping factor (1/s). The equation of motion reads
    /// `x'' + 2 lambda x' + omega^2 x = 0`.
    pub lambda: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl OscillatorParams {
    pub fn new(mass: f64, lambda: f64, omega: f64, hbar: f64) -> Result<Self> {
        let p = Self {
            mass,
            lambda,
            omega,
            hbar,
        };
        p.validate()?;
        Ok(p)
    }

    /// Unit mass and unit hbar.
    pub fn natural(lambda: f64, omega: f64) -> Result<Self> {
        Self::new(1.0, lambda, omega, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("mass", self.mass)?;
        check_positive("omega", self.omega)?;
        check_positive("hbar", self.hbar)?;
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("must be non-negative and finite, got {}", self.lambda),
            });
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Underdamped => "underdamped",
            Regime::Critical => "critical",
            Regime::Overdamped => "overdamped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalGamma {
    pub value: Complex64,
    pub regime: Regime,
}

/// `gamma = sqrt(lambda^2 - omega^2)` on the principal complex branch.
pub fn classical_gamma(params: &OscillatorParams) -> ClassicalGamma {
    let (l, w) = (params.lambda, params.omega);
    // factored form keeps the near-critical difference accurate
    let disc = (l - w) * (l + w);
    let value = Complex64::new(disc, 0.0).sqrt();
    let regime = if (l - w).abs() < CRITICAL_TOLERANCE * w {
        Regime::Critical
    } else if l < w {
        Regime::Underdamped
    } else {
        Regime::Overdamped
    };
    ClassicalGamma { value, regime }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditions {
    pub x0: f64,
    pub v0: f64,
}

impl InitialConditions {
    pub fn new(x0: f64, v0: f64) -> Result<Self> {
        check_finite("x0", x0)?;
        check_finite("v0", v0)?;
        Ok(Self { x0, v0 })
    }
}

/// `q` and its first three time derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeneratorJet {
    pub q: f64,
    pub qdot: f64,
    pub qddot: f64,
    pub qdddot: f64,
}

impl GeneratorJet {
    pub fn new(q: f64, qdot: f64, qddot: f64, qdddot: f64) -> Self {
        Self {
            q,
            qdot,
            qddot,
            qdddot,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.qdot.is_finite() && self.qddot.is_finite() && self.qdddot.is_finite()
    }
}

/// Four-mode solution `q(t) = a1 e^{-(l+g)t} + a2 e^{-(l-g)t} + b1 e^{(l+g)t} + b2 e^{(l-g)t}`.
///
/// Amplitudes and rates are stored in the order `a1, a2, b1, b2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorTrajectory {
    pub amplitudes: [Complex64; 4],
    pub rates: [Complex64; 4],
    pub params: OscillatorParams,
}

impl GeneratorTrajectory {
    /// Trajectory with the exact characteristic rates for `params`.
    pub fn new(
        params: OscillatorParams,
        a1: Complex64,
        a2: Complex64,
        b1: Complex64,
        b2: Complex64,
    ) -> Self {
        Self {
            amplitudes: [a1, a2, b1, b2],
            rates: mode_rates(&params),
            params,
        }
    }

    pub fn zero(params: OscillatorParams) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self::new(params, z, z, z, z)
    }

    /// Replace the rates, e.g. to build a trajectory that is not a solution.
    pub fn with_rates(self, rates: [Complex64; 4]) -> Self {
        Self { rates, ..self }
    }

    pub fn a1(&self) -> Complex64 {
        self.amplitudes[0]
    }

    pub fn a2(&self) -> Complex64 {
        self.amplitudes[1]
    }

    pub fn b1(&self) -> Complex64 {
        self.amplitudes[2]
    }

    pub fn b2(&self) -> Complex64 {
        self.amplitudes[3]
    }

    /// Mode terms `a_i e^{r_i t}`.
    pub fn mode_values(&self, t: f64) -> [Complex64; 4] {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (o, (a, r)) in out.iter_mut().zip(self.amplitudes.iter().zip(&self.rates)) {
            *o = if *a == Complex64::new(0.0, 0.0) {
                *a
            } else {
                a * (r * t).exp()
            };
        }
        out
    }

    /// `k`-th time derivative of `q`, in the complex domain.
    pub fn derivative(&self, k: u32, t: f64) -> Complex64 {
        self.mode_values(t)
            .iter()
            .zip(&self.rates)
            .map(|(m, r)| m * r.powu(k))
            .sum()
    }

    /// `k`-th derivative of the reconstructed coordinate `x`, evaluated mode by mode.
    pub fn x_derivative(&self, k: u32, t: f64) -> Complex64 {
        let p = &self.params;
        self.mode_values(t)
            .iter()
            .zip(&self.rates)
            .map(|(m, r)| m * generator_symbol(p, *r) * r.powu(k))
            .sum()
    }
}

/// `r^2 - 2 lambda r + omega^2`: the map from generator modes to `x`.
pub fn generator_symbol(params: &OscillatorParams, r: Complex64) -> Complex64 {
    r * r - 2.0 * params.lambda * r + params.omega * params.omega
}

/// `r^2 + 2 lambda r + omega^2`: the damped equation of motion.
pub fn motion_symbol(params: &OscillatorParams, r: Complex64) -> Complex64 {
    r * r + 2.0 * params.lambda * r + params.omega * params.omega
}

/// Rates `-(l+g), -(l-g), +(l+g), +(l-g)`.
pub fn mode_rates(params: &OscillatorParams) -> [Complex64; 4] {
    let g = classical_gamma(params).value;
    let l = Complex64::new(params.lambda, 0.0);
    [-(l + g), -(l - g), l + g, l - g]
}

/// Fit the decaying modes to `x(0) = x0`, `x'(0) = v0`; the growing modes are set to zero.
pub fn fit_physical_amplitudes(
    params: &OscillatorParams,
    ic: &InitialConditions,
) -> Result<GeneratorTrajectory> {
    params.validate()?;
    let gamma = classical_gamma(params);
    if params.lambda == 0.0 || gamma.regime == Regime::Critical {
        return Err(Error::DegenerateDamping {
            lambda: params.lambda,
            omega: params.omega,
            regime: if params.lambda == 0.0 {
                "undamped"
            } else {
                gamma.regime.as_str()
            },
        });
    }
    let g = gamma.value;
    let l = params.lambda;
    let (x0, v0) = (ic.x0, ic.v0);
    let a1 = ((g - l) * x0 - v0) / (8.0 * g * l * (l + g));
    let a2 = ((g + l) * x0 + v0) / (8.0 * g * l * (l - g));
    let zero = Complex64::new(0.0, 0.0);
    Ok(GeneratorTrajectory::new(*params, a1, a2, zero, zero))
}

fn real_part(value: Complex64, scale: f64, t: f64) -> Result<f64> {
    let residue = if scale > 0.0 { value.im.abs() / scale } else { 0.0 };
    if residue > REAL_RESIDUE_LIMIT || !residue.is_finite() {
        return Err(Error::NonRealResult { t, residue });
    }
    Ok(value.re)
}

/// `q, q', q'', q'''` at `t`, differentiated analytically mode by mode.
pub fn eval_generator_jet(traj: &GeneratorTrajectory, t: f64) -> Result<GeneratorJet> {
    check_finite("t", t)?;
    let modes = traj.mode_values(t);
    let mut out = [0.0; 4];
    for (k, o) in out.iter_mut().enumerate() {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (m, r) in modes.iter().zip(&traj.rates) {
            let term = m * r.powu(k as u32);
            sum += term;
            scale += term.norm();
        }
        *o = real_part(sum, scale, t)?;
    }
    Ok(GeneratorJet::new(out[0], out[1], out[2], out[3]))
}

/// `x = q'' - 2 lambda q' + omega^2 q`.
pub fn reconstruct_x(traj: &GeneratorTrajectory, t: f64) -> Result<f64> {
    let jet = eval_generator_jet(traj, t)?;
    Ok(x_from_jet(&traj.params, &jet))
}

pub fn x_from_jet(params: &OscillatorParams, jet: &GeneratorJet) -> f64 {
    jet.qddot - 2.0 * params.lambda * jet.qdot + params.omega * params.omega * jet.q
}

/// `x` and its first two derivatives, evaluated mode by mode.
pub fn x_jet(traj: &GeneratorTrajectory, t: f64) -> Result<[f64; 3]> {
    let p = &traj.params;
    let modes = traj.mode_values(t);
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (m, r) in modes.iter().zip(&traj.rates) {
            let term = m * generator_symbol(p, *r) * r.powu(k as u32);
            sum += term;
            scale += term.norm();
        }
        *o = real_part(sum, scale, t)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSample {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

/// Classic fourth-order Runge-Kutta integration of `x'' + 2 lambda x' + omega^2 x = 0`.
///
/// The step is shrunk slightly so that `t_end` is hit exactly. Works in every
/// regime, including `lambda = 0` and critical damping.
pub fn integrate_x_oracle(
    params: &OscillatorParams,
    ic: &InitialConditions,
    t_end: f64,
    dt: f64,
) -> Result<Vec<OracleSample>> {
    params.validate()?;
    check_positive("t_end", t_end)?;
    check_positive("dt", dt)?;
    let rate = params.omega.max(params.lambda);
    if dt * rate > ORACLE_STEP_LIMIT {
        return Err(Error::StepTooLarge {
            dt,
            product: dt * rate,
            limit: ORACLE_STEP_LIMIT,
        });
    }
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let h = t_end / n as f64;
    let (l2, w2) = (2.0 * params.lambda, params.omega * params.omega);
    let accel = |x: f64, v: f64| -l2 * v - w2 * x;

    let mut out = Vec::with_capacity(n + 1);
    let (mut x, mut v) = (ic.x0, ic.v0);
    out.push(OracleSample { t: 0.0, x, v });
    for i in 1..=n {
        let (k1x, k1v) = (v, accel(x, v));
        let (k2x, k2v) = (v + 0.5 * h * k1v, accel(x + 0.5 * h * k1x, v + 0.5 * h * k1v));
        let (k3x, k3v) = (v + 0.5 * h * k2v, accel(x + 0.5 * h * k2x, v + 0.5 * h * k2v));
        let (k4x, k4v) = (v + h * k3v, accel(x + h * k3x, v + h * k3v));
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        out.push(OracleSample {
            t: i as f64 * h,
            x,
            v,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma_examples() {
        let g = classical_gamma(&OscillatorParams::natural(1.0, 1.0).unwrap());
        assert_eq!(g.regime, Regime::Critical);
        assert_eq!(g.value, c(0.0, 0.0));

        let g = classical_gamma(&OscillatorParams::natural(2.0, 1.0).unwrap());
        assert_eq!(g.regime, Regime::Overdamped);
        assert_relative_eq!(g.value.re, 3f64.sqrt(), max_relative = 1e-15);
        assert_eq!(g.value.im, 0.0);

        let g = classical_gamma(&OscillatorParams::natural(0.01, 1.0).unwrap());
        assert_eq!(g.regime, Regime::Underdamped);
        assert_eq!(g.value.re, 0.0);
        assert_relative_eq!(g.value.im, 0.999_949_998_749_937_5, max_relative = 1e-15);
    }

    #[test]
    fn gamma_squares_back() {
        for (l, w) in [(0.3, 2.0), (4.0, 0.5), (0.01, 1.0), (1.0 + 1e-6, 1.0)] {
            let p = OscillatorParams::natural(l, w).unwrap();
            let g = classical_gamma(&p).value;
            let d = l * l - w * w;
            assert!((g * g - d).norm() <= 1e-14 * (l * l + w * w));
        }
    }

    #[test]
    fn near_critical_band() {
        let w = 1.0;
        let inside = OscillatorParams::natural(w * (1.0 + 0.5e-9), w).unwrap();
        assert_eq!(classical_gamma(&inside).regime, Regime::Critical);
        let outside = OscillatorParams::natural(w * (1.0 + 1e-8), w).unwrap();
        assert_eq!(classical_gamma(&outside).regime, Regime::Overdamped);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(OscillatorParams::natural(-0.1, 1.0).is_err());
        assert!(OscillatorParams::natural(0.1, 0.0).is_err());
        assert!(OscillatorParams::new(0.0, 0.1, 1.0, 1.0).is_err());
        assert!(OscillatorParams::new(1.0, 0.1, 1.0, f64::NAN).is_err());
        assert!(OscillatorParams::natural(0.0, 1.0).is_ok());
    }

    #[test]
    fn zero_data_gives_zero_amplitudes() {
        let p = OscillatorParams::natural(0.3, 1.0).unwrap();
        let t = fit_physical_amplitudes(&p, &InitialConditions::new(0.0, 0.0).unwrap()).unwrap();
        assert!(t.amplitudes.iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn overdamped_amplitudes_match_hand_values() {
        let p = OscillatorParams::natural(2.0, 1.0).unwrap();
        let t = fit_physical_amplitudes(&p, &InitialConditions::new(1.0, 0.0).unwrap()).unwrap();
        // (sqrt3 - 2) / (16 sqrt3 (2 + sqrt3)) and (sqrt3 + 2) / (16 sqrt3 (2 - sqrt3))
        assert_relative_eq!(t.a1().re, -0.002_590_742_770_461_272, max_relative = 1e-13);
        assert_relative_eq!(t.a2().re, 0.502_590_742_770_461_3, max_relative = 1e-13);
        assert_eq!(t.a1().im, 0.0);
        assert_eq!(t.b1(), c(0.0, 0.0));
        assert_eq!(t.b2(), c(0.0, 0.0));
    }

    #[test]
    fn degenerate_damping_rejected() {
        let ic = InitialConditions::new(1.0, 0.0).unwrap();
        for w in [0.5, 1.0, 3.0] {
            let p = OscillatorParams::natural(0.0, w).unwrap();
            assert!(matches!(
                fit_physical_amplitudes(&p, &ic),
                Err(Error::DegenerateDamping { .. })
            ));
        }
        let p = OscillatorParams::natural(1.0, 1.0).unwrap();
        assert!(matches!(
            fit_physical_amplitudes(&p, &ic),
            Err(Error::DegenerateDamping { regime: "critical", .. })
        ));
    }

    #[test]
    fn zero_trajectory_jet() {
        let t = GeneratorTrajectory::zero(OscillatorParams::natural(0.2, 1.0).unwrap());
        for s in [0.0, 1.5, -3.0] {
            assert_eq!(eval_generator_jet(&t, s).unwrap(), GeneratorJet::default());
            assert_eq!(reconstruct_x(&t, s).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_mode_jet() {
        let p = OscillatorParams::natural(2.0, 1.0).unwrap();
        let z = c(0.0, 0.0);
        let t = GeneratorTrajectory::new(p, c(1.0, 0.0), z, z, z);
        let jet = eval_generator_jet(&t, 1.0).unwrap();
        assert_relative_eq!(jet.q, 0.023_943_681_567_577_81, max_relative = 1e-14);
        assert_relative_eq!(jet.qdot, -0.089_359_036_130_450_8, max_relative = 1e-14);
        let r = -(2.0 + 3f64.sqrt());
        assert_relative_eq!(jet.qddot, r * r * jet.q, max_relative = 1e-14);
        assert_relative_eq!(jet.qdddot, r * r * r * jet.q, max_relative = 1e-14);
    }

    #[test]
    fn inconsistent_amplitudes_are_not_real() {
        let p = OscillatorParams::natural(0.1, 1.0).unwrap();
        let z = c(0.0, 0.0);
        // a single underdamped mode is genuinely complex
        let t = GeneratorTrajectory::new(p, c(1.0, 0.0), z, z, z);
        assert!(matches!(
            eval_generator_jet(&t, 0.7),
            Err(Error::NonRealResult { .. })
        ));
        assert!(reconstruct_x(&t, 0.7).is_err());
    }

    #[test]
    fn overdamped_reconstruction() {
        let p = OscillatorParams::natural(2.0, 1.0).unwrap();
        let t = fit_physical_amplitudes(&p, &InitialConditions::new(1.0, 0.0).unwrap()).unwrap();
        assert_relative_eq!(reconstruct_x(&t, 0.0).unwrap(), 1.0, max_relative = 1e-13);
        // textbook: [(g+l) e^{-(l-g)t} + (g-l) e^{-(l+g)t}] x0 / (2g)
        let g = 3f64.sqrt();
        let l = 2.0;
        let expected = ((g + l) * (-(l - g)).exp() + (g - l) * (-(l + g)).exp()) / (2.0 * g);
        assert_relative_eq!(expected, 0.822_263_423_901_809_5, max_relative = 1e-14);
        assert_relative_eq!(reconstruct_x(&t, 1.0).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn underdamped_amplitudes_are_conjugate() {
        let p = OscillatorParams::natural(0.01, 1.0).unwrap();
        let t = fit_physical_amplitudes(&p, &InitialConditions::new(-1.0, 0.3).unwrap()).unwrap();
        assert_relative_eq!(t.a1().re, t.a2().re, max_relative = 1e-12);
        assert_relative_eq!(t.a1().im, -t.a2().im, max_relative = 1e-12);
    }

    #[test]
    fn oracle_undamped_half_period() {
        let p = OscillatorParams::natural(0.0, 1.0).unwrap();
        let ic = InitialConditions::new(1.0, 0.0).unwrap();
        let s = integrate_x_oracle(&p, &ic, std::f64::consts::PI, 1e-3).unwrap();
        let last = s.last().unwrap();
        assert_relative_eq!(last.t, std::f64::consts::PI, max_relative = 1e-15);
        assert!((last.x + 1.0).abs() < 1e-8);
    }

    #[test]
    fn oracle_critical() {
        let p = OscillatorParams::natural(1.0, 1.0).unwrap();
        let ic = InitialConditions::new(1.0, 0.0).unwrap();
        let s = integrate_x_oracle(&p, &ic, 10.0, 1e-3).unwrap();
        for smp in s.iter().step_by(97) {
            let exact = (1.0 + smp.t) * (-smp.t).exp();
            assert!((smp.x - exact).abs() < 1e-8, "t={} err={}", smp.t, smp.x - exact);
        }
    }

    #[test]
    fn oracle_rejects_large_step() {
        let p = OscillatorParams::natural(0.0, 10.0).unwrap();
        let ic = InitialConditions::new(1.0, 0.0).unwrap();
        assert!(matches!(
            integrate_x_oracle(&p, &ic, 1.0, 0.06),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn oracle_matches_closed_form_fig_parameters() {
        let p = OscillatorParams::natural(0.01, 1.0).unwrap();
        let ic = InitialConditions::new(-1.0, 0.0).unwrap();
        let traj = fit_physical_amplitudes(&p, &ic).unwrap();
        let s = integrate_x_oracle(&p, &ic, 20.0 * std::f64::consts::PI, 2e-3).unwrap();
        let worst = s
            .iter()
            .map(|smp| (reconstruct_x(&traj, smp.t).unwrap() - smp.x).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "worst {worst}");
    }

    fn regime_params() -> impl Strategy<Value = (f64, f64)> {
        (0.01f64..5.0, 0.1f64..5.0).prop_filter("away from critical", |(l, w)| {
            (l - w).abs() > 1e-3 * w
        })
    }

    proptest! {
        #[test]
        fn fitted_trajectory_hits_initial_data(
            (l, w) in regime_params(),
            x0 in -2.0f64..2.0,
            v0 in -2.0f64..2.0,
        ) {
            let p = OscillatorParams::natural(l, w).unwrap();
            let traj = fit_physical_amplitudes(&p, &InitialConditions::new(x0, v0).unwrap()).unwrap();
            prop_assert_eq!(traj.b1(), c(0.0, 0.0));
            prop_assert_eq!(traj.b2(), c(0.0, 0.0));
            let [x, v, _] = x_jet(&traj, 0.0).unwrap();
            let scale = x0.abs().max(v0.abs() / w).max(1e-300);
            prop_assert!((x - x0).abs() <= 1e-10 * scale.max(x0.abs()));
            prop_assert!((v - v0).abs() <= 1e-10 * (w * scale).max(v0.abs()));
            let x_lit = reconstruct_x(&traj, 0.0).unwrap();
            prop_assert!((x_lit - x0).abs() <= 1e-9 * scale);
        }

        #[test]
        fn fitted_trajectory_solves_motion(
            (l, w) in regime_params(),
            x0 in -2.0f64..2.0,
            v0 in -2.0f64..2.0,
            frac in 0.0f64..1.0,
        ) {
            let p = OscillatorParams::natural(l, w).unwrap();
            let traj = fit_physical_amplitudes(&p, &InitialConditions::new(x0, v0).unwrap()).unwrap();
            let t = frac * 10.0 / w.min(l.max(0.1));
            let [x, v, a] = x_jet(&traj, t).unwrap();
            let residual = a + 2.0 * l * v + w * w * x;
            let bound = 1e-9 * (w * w * x0.abs()).max(w * v0.abs()).max(1e-300);
            prop_assert!(residual.abs() < bound, "residual {residual} bound {bound}");
        }
    }
}
