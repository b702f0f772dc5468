//! Invariant checks shared by the `verify` command and the test suites.

use num_complex::Complex64;

use crate::classical::{
    eval_generator_jet, fit_physical_amplitudes, integrate_x_oracle, reconstruct_x, GeneratorTrajectory,
    InitialConditions, OscillatorParams,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hamiltonian::{
    canonical_from_jet, euler_lagrange_residual, hamiltonian_canonical, hamiltonian_potential_form,
    hamiltonian_scaled, potential_term_magnitude, scale_canonical, trajectory_hamiltonian,
};
use crate::quantum::{
    expectation_x, init_ground_gaussian, norm, overlap, zero_crossing_period, DampingMode, EvolutionConfig, Grid1D,
    Stepper, WaveField,
};

pub const H_ZERO_TOLERANCE: f64 = 1e-10;
pub const H_CONSTANCY_TOLERANCE: f64 = 1e-9;
pub const FORM_AGREEMENT_TOLERANCE: f64 = 1e-12;
pub const EULER_LAGRANGE_TOLERANCE: f64 = 1e-9;
pub const ORACLE_TOLERANCE: f64 = 1e-6;
pub const FACTORED_TOLERANCE: f64 = 1e-12;
pub const COUPLED_TOLERANCE: f64 = 1e-6;
pub const NORM_DECAY_TOLERANCE: f64 = 1e-3;
/// Fraction of the period.
pub const FREQUENCY_TOLERANCE: f64 = 1e-3;
pub const UNITARITY_TOLERANCE: f64 = 1e-10;
pub const FIDELITY_THRESHOLD: f64 = 0.999;

/// Damping values whose oscillation periods are compared with the undamped one.
pub const FREQUENCY_LAMBDAS: [f64; 3] = [0.0, 0.01, 0.05];

const TIME_SAMPLES: usize = 200;

/// Largest `|H'(t)| / (m w^2 (x0^2 + v0^2 / w^2))` on the physical trajectory
/// over `t in [0, min(10 / lambda, 50 / omega)]`.
///
/// `tamper` is added to the coefficient of `q''^2` to build a negative control.
pub fn physical_hamiltonian_deviation(
    params: &OscillatorParams,
    ic: &InitialConditions,
    tamper: f64,
) -> Result<f64> {
    let traj = fit_physical_amplitudes(params, ic)?;
    let horizon = (10.0 / params.lambda).min(50.0 / params.omega);
    let mw2 = params.mass * params.omega * params.omega;
    let scale = mw2 * (ic.x0 * ic.x0 + ic.v0 * ic.v0 / (params.omega * params.omega));
    let mut worst: f64 = 0.0;
    for k in 0..=TIME_SAMPLES {
        let t = horizon * k as f64 / TIME_SAMPLES as f64;
        let jet = eval_generator_jet(&traj, t)?;
        let h_potential = hamiltonian_potential_form(params, &jet) + tamper * jet.qddot * jet.qddot;
        let h_scaled = hamiltonian_scaled(&scale_canonical(params, &canonical_from_jet(params, &jet)), params);
        worst = worst.max((mw2 * h_potential).abs()).max(h_scaled.abs());
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// A fixed generic trajectory with all four modes excited; conjugate-paired
/// in the underdamped regime so that `q` stays real.
pub fn generic_trajectory(params: &OscillatorParams) -> GeneratorTrajectory {
    let c = Complex64::new;
    let traj = GeneratorTrajectory::new(*params, c(0.7, 0.0), c(0.7, 0.0), c(0.3, 0.0), c(0.3, 0.0));
    if params.lambda < params.omega {
        // rates a1/a2 (and b1/b2) are complex conjugates here
        GeneratorTrajectory::new(*params, c(0.7, 0.4), c(0.7, -0.4), c(-0.2, 0.3), c(-0.2, -0.3))
    } else {
        traj
    }
}

/// Energy drift of a trajectory over a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    /// Largest `|H(t) - H(0)| / |H(0)|` with `trajectory_hamiltonian`.
    pub relative: f64,
    /// The same with plain `f64` jets and `hamiltonian_potential_form`.
    pub relative_f64: f64,
    /// `f64::EPSILON * max_t sum|terms of H(t)| / |H(0)|`: the drift that
    /// rounding alone produces in the plain `f64` evaluation.
    pub floor: f64,
}

pub fn hamiltonian_drift(traj: &GeneratorTrajectory, t_max: f64) -> Result<Drift> {
    let params = &traj.params;
    let jet0 = eval_generator_jet(traj, 0.0)?;
    let h0 = trajectory_hamiltonian(traj, 0.0)?;
    let h0_f64 = hamiltonian_potential_form(params, &jet0);
    let mut terms = potential_term_magnitude(params, &jet0);
    let (mut worst, mut worst_f64): (f64, f64) = (0.0, 0.0);
    for k in 1..=TIME_SAMPLES {
        let t = t_max * k as f64 / TIME_SAMPLES as f64;
        let jet = eval_generator_jet(traj, t)?;
        worst = worst.max((trajectory_hamiltonian(traj, t)? - h0).abs());
        worst_f64 = worst_f64.max((hamiltonian_potential_form(params, &jet) - h0_f64).abs());
        terms = terms.max(potential_term_magnitude(params, &jet));
    }
    let scale = if h0 != 0.0 { h0.abs() } else { 1.0 };
    Ok(Drift {
        relative: worst / scale,
        relative_f64: worst_f64 / scale,
        floor: f64::EPSILON * terms / scale,
    })
}

/// Window `t <= 5 / lambda` for constancy checks (`50 / omega` when undamped).
pub fn constancy_horizon(params: &OscillatorParams) -> f64 {
    if params.lambda > 0.0 {
        5.0 / params.lambda
    } else {
        50.0 / params.omega
    }
}

/// Disagreement of the potential and canonical forms, and of the scaling law
/// `H' = m w^2 H`, on the jets of `traj` at sampled times, relative to the
/// larger of the two forms' summed term magnitudes.
pub fn form_agreement(traj: &GeneratorTrajectory, t_max: f64) -> Result<(f64, f64)> {
    let params = &traj.params;
    let mw2 = params.mass * params.omega * params.omega;
    let (mut forms, mut scaling): (f64, f64) = (0.0, 0.0);
    for k in 0..=TIME_SAMPLES {
        let t = t_max * k as f64 / TIME_SAMPLES as f64;
        let jet = eval_generator_jet(traj, t)?;
        let state = canonical_from_jet(params, &jet);
        let a = hamiltonian_potential_form(params, &jet);
        let b = hamiltonian_canonical(&state, params);
        let s = hamiltonian_scaled(&scale_canonical(params, &state), params);
        let mag = term_magnitude(params, &state).max(potential_term_magnitude(params, &jet));
        forms = forms.max((a - b).abs() / mag);
        scaling = scaling.max((s - mw2 * b).abs() / (mw2 * mag));
    }
    Ok((forms, scaling))
}

/// Sum of absolute values of the canonical Hamiltonian terms.
pub fn term_magnitude(params: &OscillatorParams, s: &crate::hamiltonian::CanonicalState) -> f64 {
    let w2 = params.omega * params.omega;
    let m = 0.5 * s.p2 * s.p2 + (w2 * s.p2 * s.q1).abs() + (s.p1 * s.q2).abs() + (2.0 * params.lambda * s.p2 * s.q2).abs();
    m.max(f64::MIN_POSITIVE)
}

pub fn euler_lagrange_max(traj: &GeneratorTrajectory, t_max: f64) -> f64 {
    (0..=TIME_SAMPLES)
        .map(|k| {
            let t = t_max * k as f64 / TIME_SAMPLES as f64;
            euler_lagrange_residual(&traj.params, traj, t).relative()
        })
        .fold(0.0, f64::max)
}

/// Step used for the direct integrator in the oracle comparison.
pub fn oracle_step(params: &OscillatorParams) -> f64 {
    5e-3 / params.omega.max(params.lambda)
}

/// `max |x_closed - x_oracle| / max(|x0|, |v0| / omega)` over `[0, 20 pi / omega]`.
pub fn oracle_deviation(params: &OscillatorParams, ic: &InitialConditions) -> Result<f64> {
    let traj = fit_physical_amplitudes(params, ic)?;
    let t_end = 20.0 * std::f64::consts::PI / params.omega;
    let samples = integrate_x_oracle(params, ic, t_end, oracle_step(params))?;
    let mut worst: f64 = 0.0;
    for s in &samples {
        worst = worst.max((reconstruct_x(&traj, s.t)? - s.x).abs());
    }
    let scale = ic.x0.abs().max(ic.v0.abs() / params.omega);
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// Observables recorded after every step of a grid run.
#[derive(Debug, Clone)]
pub struct ObservedRun {
    pub lambda: f64,
    pub mode: DampingMode,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub means: Vec<f64>,
    pub initial: WaveField,
    /// State after exactly one period, if the run reached it.
    pub at_period: Option<WaveField>,
    pub last: WaveField,
}

/// Evolves the ground Gaussian at `x0` for `n_steps` steps, recording norm and `<x>`.
pub fn observed_run(
    params: &OscillatorParams,
    grid: &Grid1D,
    x0: f64,
    config: &EvolutionConfig,
) -> Result<ObservedRun> {
    let initial = init_ground_gaussian(params, grid, x0)?;
    let stepper = Stepper::new(grid, params, config)?;
    let period_step = (params.period() / config.dt).round() as usize;
    let n = config.n_steps;
    let mut times = Vec::with_capacity(n + 1);
    let mut norms = Vec::with_capacity(n + 1);
    let mut means = Vec::with_capacity(n + 1);
    times.push(0.0);
    norms.push(norm(&initial));
    means.push(expectation_x(&initial)?);
    let mut at_period = None;
    let mut failure = None;
    let last = stepper.run(&initial, n, |k, f| {
        times.push(f.time);
        norms.push(norm(f));
        match expectation_x(f) {
            Ok(m) => means.push(m),
            Err(e) => {
                failure.get_or_insert(e);
                means.push(f64::NAN);
            }
        }
        if k == period_step {
            at_period = Some(f.clone());
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ObservedRun {
        lambda: params.lambda,
        mode: config.damping_mode,
        times,
        norms,
        means,
        initial,
        at_period,
        last,
    })
}

impl ObservedRun {
    /// `max |norm(t) / e^{-4 lambda t} - 1|` over the recorded steps.
    pub fn norm_decay_deviation(&self) -> f64 {
        let n0 = self.norms[0];
        self.times
            .iter()
            .zip(&self.norms)
            .map(|(t, n)| (n / (n0 * (-4.0 * self.lambda * t).exp()) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Deviation at the sample closest to `t`.
    pub fn norm_decay_at(&self, t: f64) -> f64 {
        let k = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        (self.norms[k] / (self.norms[0] * (-4.0 * self.lambda * self.times[k]).exp()) - 1.0).abs()
    }

    pub fn period(&self) -> Option<f64> {
        zero_crossing_period(&self.times, &self.means)
    }

    pub fn norm_drift(&self) -> f64 {
        let n0 = self.norms[0];
        self.norms.iter().map(|n| (n - n0).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub status: Status,
    pub note: String,
}

impl CheckResult {
    /// Passes when `measured < tolerance` (or `>` for lower bounds).
    fn upper(name: &'static str, measured: f64, tolerance: f64) -> Self {
        let status = if measured < tolerance { Status::Pass } else { Status::Fail };
        Self {
            name,
            measured,
            tolerance,
            status,
            note: String::new(),
        }
    }

    fn lower(name: &'static str, measured: f64, threshold: f64) -> Self {
        let status = if measured > threshold { Status::Pass } else { Status::Fail };
        Self {
            name,
            measured,
            tolerance: threshold,
            status,
            note: "lower bound".into(),
        }
    }

    fn skipped(name: &'static str, tolerance: f64, note: impl Into<String>) -> Self {
        Self {
            name,
            measured: f64::NAN,
            tolerance,
            status: Status::Skipped,
            note: note.into(),
        }
    }

    fn failed(name: &'static str, tolerance: f64, err: &Error) -> Self {
        Self {
            name,
            measured: f64::NAN,
            tolerance,
            status: Status::Fail,
            note: err.to_string(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySetup {
    pub params: OscillatorParams,
    pub ic: InitialConditions,
    pub grid: Grid1D,
    pub evolution: EvolutionConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VerifyOptions {
    /// Added to the `q''^2` coefficient of the Hamiltonian in the `H = 0` check.
    pub hamiltonian_tamper: f64,
    pub execution: Execution,
}

struct RunSpec {
    lambda: f64,
    mode: DampingMode,
    periods: usize,
}

pub fn run_suite(setup: &VerifySetup, options: &VerifyOptions) -> Result<Report> {
    let params = setup.params;
    params.validate()?;
    let ic = setup.ic;
    let exec = options.execution;
    let mut checks = Vec::new();

    let degenerate = fit_physical_amplitudes(&params, &ic).err();
    let skip_note = |e: &Error| format!("closed form unavailable: {e}");

    checks.push(match &degenerate {
        Some(e) => CheckResult::skipped("hamiltonian_zero", H_ZERO_TOLERANCE, skip_note(e)),
        None => match physical_hamiltonian_deviation(&params, &ic, options.hamiltonian_tamper) {
            Ok(v) => CheckResult::upper("hamiltonian_zero", v, H_ZERO_TOLERANCE),
            Err(e) => CheckResult::failed("hamiltonian_zero", H_ZERO_TOLERANCE, &e),
        },
    });

    let generic = generic_trajectory(&params);
    let horizon = constancy_horizon(&params);
    checks.push(match hamiltonian_drift(&generic, horizon) {
        Ok(d) => CheckResult::upper("hamiltonian_constancy", d.relative, H_CONSTANCY_TOLERANCE)
            .with_note(format!("plain f64 {:.3e}, rounding floor {:.3e}", d.relative_f64, d.floor)),
        Err(e) => CheckResult::failed("hamiltonian_constancy", H_CONSTANCY_TOLERANCE, &e),
    });
    match form_agreement(&generic, params.period()) {
        Ok((forms, scaling)) => {
            checks.push(CheckResult::upper("form_agreement", forms, FORM_AGREEMENT_TOLERANCE));
            checks.push(CheckResult::upper("scaling_law", scaling, FORM_AGREEMENT_TOLERANCE));
        }
        Err(e) => {
            checks.push(CheckResult::failed("form_agreement", FORM_AGREEMENT_TOLERANCE, &e));
            checks.push(CheckResult::failed("scaling_law", FORM_AGREEMENT_TOLERANCE, &e));
        }
    }
    let el_traj = fit_physical_amplitudes(&params, &ic).unwrap_or(generic);
    checks.push(CheckResult::upper(
        "euler_lagrange",
        euler_lagrange_max(&el_traj, horizon),
        EULER_LAGRANGE_TOLERANCE,
    ));
    checks.push(match &degenerate {
        Some(e) => CheckResult::skipped("classical_oracle", ORACLE_TOLERANCE, skip_note(e)),
        None => match oracle_deviation(&params, &ic) {
            Ok(v) => CheckResult::upper("classical_oracle", v, ORACLE_TOLERANCE),
            Err(e) => CheckResult::failed("classical_oracle", ORACLE_TOLERANCE, &e),
        },
    });

    // grid runs
    let damped = params.lambda > 0.0;
    let mut specs = vec![RunSpec {
        lambda: 0.0,
        mode: DampingMode::Coupled,
        periods: 2,
    }];
    if damped {
        specs.push(RunSpec {
            lambda: params.lambda,
            mode: DampingMode::Coupled,
            periods: 2,
        });
        specs.push(RunSpec {
            lambda: params.lambda,
            mode: DampingMode::Factored,
            periods: 1,
        });
        for &l in FREQUENCY_LAMBDAS.iter().filter(|&&l| l > 0.0 && l != params.lambda) {
            specs.push(RunSpec {
                lambda: l,
                mode: DampingMode::Coupled,
                periods: 2,
            });
        }
    }
    let period_steps = (params.period() / setup.evolution.dt).round() as usize;
    let runs = exec.map(&specs, |s| {
        let cfg = setup
            .evolution
            .with_mode(s.mode)
            .with_steps(s.periods * period_steps);
        observed_run(&params.with_lambda(s.lambda), &setup.grid, ic.x0, &cfg)
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let reference = &runs[0];
    let period_time = period_steps as f64 * setup.evolution.dt;

    checks.push(CheckResult::upper("unitarity", reference.norm_drift(), UNITARITY_TOLERANCE));
    let fidelity = match &reference.at_period {
        Some(f) => overlap(f, &reference.initial) / (norm(f) * norm(&reference.initial)).sqrt(),
        None => f64::NAN,
    };
    checks.push(CheckResult::lower("periodicity", fidelity, FIDELITY_THRESHOLD));

    if damped {
        let coupled = &runs[1];
        let factored = &runs[2];
        let decay = (-2.0 * params.lambda * period_time).exp();
        let product = reference
            .at_period
            .as_ref()
            .map(|f| f.scaled(decay));
        let (exact, mixed) = match (&product, &factored.at_period, &coupled.at_period) {
            (Some(p), Some(f), Some(c)) => (p.max_difference(f), p.max_difference(c)),
            _ => (f64::NAN, f64::NAN),
        };
        checks.push(CheckResult::upper("factorization_exact", exact, FACTORED_TOLERANCE));
        checks.push(CheckResult::upper("factorization_coupled", mixed, COUPLED_TOLERANCE));
        checks.push(
            CheckResult::upper(
                "norm_decay",
                coupled.norm_decay_deviation(),
                NORM_DECAY_TOLERANCE,
            )
            .with_note("coupled mode, t in [0, 2T]"),
        );
        let p0 = reference.period();
        let mut worst: f64 = 0.0;
        let mut missing = false;
        for r in runs.iter().filter(|r| r.mode == DampingMode::Coupled).skip(1) {
            match (p0, r.period()) {
                (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
                _ => missing = true,
            }
        }
        let tol = FREQUENCY_TOLERANCE * params.period();
        checks.push(if missing {
            CheckResult::upper("frequency_invariance", f64::INFINITY, tol).with_note("no zero crossings")
        } else {
            CheckResult::upper("frequency_invariance", worst, tol)
        });
    } else {
        let note = "undamped configuration";
        checks.push(CheckResult::skipped("factorization_exact", FACTORED_TOLERANCE, note));
        checks.push(CheckResult::skipped("factorization_coupled", COUPLED_TOLERANCE, note));
        checks.push(CheckResult::skipped("norm_decay", NORM_DECAY_TOLERANCE, note));
        checks.push(CheckResult::skipped(
            "frequency_invariance",
            FREQUENCY_TOLERANCE * params.period(),
            note,
        ));
    }

    Ok(Report { checks })
}
