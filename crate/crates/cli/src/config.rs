//! JSON run configuration.

use std::f64::consts::PI;
use std::path::PathBuf;

use damposc_core::classical::{InitialConditions, OscillatorParams};
use damposc_core::packet::PacketSpec;
use damposc_core::quantum::{check_containment, DampingMode, EvolutionConfig, Grid1D, TimeScheme};
use damposc_core::verify::oracle_step;
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_SLICES: [usize; 5] = [32, 64, 128, 256, 512];
pub const DEFAULT_OUTPUT_EVERY: usize = 10;
pub const SNAPSHOTS_PER_PERIOD: usize = 8;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mass: Option<f64>,
    lambda: Option<f64>,
    omega: Option<f64>,
    hbar: Option<f64>,
    x0: Option<f64>,
    v0: Option<f64>,
    gamma_squeeze: Option<f64>,
    grid: Option<RawGrid>,
    evolution: Option<RawEvolution>,
    classical: Option<RawClassical>,
    pathint: Option<RawPathint>,
    output: Option<RawOutput>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvolution {
    dt: Option<f64>,
    n_steps: Option<usize>,
    damping_mode: Option<RawDampingMode>,
    scheme: Option<RawScheme>,
    sample_every: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawDampingMode {
    Coupled,
    Factored,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawScheme {
    CrankNicolson,
    Cayley4,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClassical {
    t_end: Option<f64>,
    dt: Option<f64>,
    output_every: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPathint {
    omega_t: Option<f64>,
    slices: Option<Vec<usize>>,
    grid: Option<RawGrid>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSettings {
    pub t_end: f64,
    pub dt: f64,
    pub output_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathintSettings {
    pub omega_t: f64,
    pub slices: Vec<usize>,
    pub grid: Grid1D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: OscillatorParams,
    pub ic: InitialConditions,
    pub packet: PacketSpec,
    pub grid: Grid1D,
    pub evolution: EvolutionConfig,
    /// Steps between density snapshots.
    pub sample_every: usize,
    pub classical: ClassicalSettings,
    pub pathint: PathintSettings,
    pub output_dir: Option<PathBuf>,
}

fn invalid(path: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_string(),
        reason: reason.into(),
    }
}

/// Maps a core validation error onto the config field it came from.
fn field<T>(path: &str, r: damposc_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| invalid(path, e.to_string()))
}

fn grid_from(path: &str, raw: RawGrid) -> Result<Grid1D, CliError> {
    field(path, Grid1D::new(raw.x_min, raw.x_max, raw.n_points))
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        invalid(if path == "." { "$" } else { &path }, e.inner().to_string())
    })?;
    build(raw)
}

fn build(raw: RawConfig) -> Result<RunConfig, CliError> {
    let missing: Vec<&str> = [
        ("mass", raw.mass.is_none()),
        ("lambda", raw.lambda.is_none()),
        ("omega", raw.omega.is_none()),
        ("x0", raw.x0.is_none()),
        ("v0", raw.v0.is_none()),
    ]
    .into_iter()
    .filter_map(|(name, absent)| absent.then_some(name))
    .collect();
    if !missing.is_empty() {
        return Err(invalid("$", format!("missing required fields: {}", missing.join(", "))));
    }
    let (mass, lambda, omega, x0, v0) = (
        raw.mass.unwrap_or_default(),
        raw.lambda.unwrap_or_default(),
        raw.omega.unwrap_or_default(),
        raw.x0.unwrap_or_default(),
        raw.v0.unwrap_or_default(),
    );
    let hbar = raw.hbar.unwrap_or(1.0);

    let params = match OscillatorParams::new(mass, lambda, omega, hbar) {
        Ok(p) => p,
        Err(damposc_core::Error::InvalidParameter { name, reason }) => return Err(invalid(name, reason)),
        Err(e) => return Err(invalid("$", e.to_string())),
    };
    let ic = match InitialConditions::new(x0, v0) {
        Ok(ic) => ic,
        Err(damposc_core::Error::InvalidParameter { name, reason }) => return Err(invalid(name, reason)),
        Err(e) => return Err(invalid("$", e.to_string())),
    };
    let packet = field("gamma_squeeze", PacketSpec::new(x0, raw.gamma_squeeze.unwrap_or(1.0)))?;

    let grid = match raw.grid {
        Some(g) => grid_from("grid", g)?,
        None => Grid1D::standard(),
    };
    field("grid", check_containment(&grid, x0, packet.max_sigma(&params)))?;

    let ev = raw.evolution.unwrap_or_default();
    let period = params.period();
    let dt = ev.dt.unwrap_or(1e-3 * 2.0 * PI / omega);
    let mut evolution = EvolutionConfig::new(dt, 1, DampingMode::default());
    field("evolution.dt", evolution.validate(&params))?;
    let n_steps = ev.n_steps.unwrap_or_else(|| (period / dt).round().max(1.0) as usize);
    if n_steps == 0 {
        return Err(invalid("evolution.n_steps", "must be at least 1"));
    }
    evolution = evolution.with_steps(n_steps);
    if let Some(mode) = ev.damping_mode {
        evolution = evolution.with_mode(match mode {
            RawDampingMode::Coupled => DampingMode::Coupled,
            RawDampingMode::Factored => DampingMode::Factored,
        });
    }
    if let Some(scheme) = ev.scheme {
        evolution = evolution.with_scheme(match scheme {
            RawScheme::CrankNicolson => TimeScheme::CrankNicolson,
            RawScheme::Cayley4 => TimeScheme::Cayley4,
        });
    }
    let sample_every = ev
        .sample_every
        .unwrap_or_else(|| (period / SNAPSHOTS_PER_PERIOD as f64 / dt).round().max(1.0) as usize);
    if sample_every == 0 {
        return Err(invalid("evolution.sample_every", "must be at least 1"));
    }

    let cl = raw.classical.unwrap_or_default();
    let classical = ClassicalSettings {
        t_end: field(
            "classical.t_end",
            positive(cl.t_end.unwrap_or(20.0 * PI / omega)),
        )?,
        dt: field("classical.dt", positive(cl.dt.unwrap_or_else(|| oracle_step(&params))))?,
        output_every: cl.output_every.unwrap_or(DEFAULT_OUTPUT_EVERY),
    };
    if classical.output_every == 0 {
        return Err(invalid("classical.output_every", "must be at least 1"));
    }

    let pi = raw.pathint.unwrap_or_default();
    let slices = pi.slices.unwrap_or_else(|| DEFAULT_SLICES.to_vec());
    if slices.is_empty() || slices.contains(&0) {
        return Err(invalid("pathint.slices", "must be a non-empty list of positive counts"));
    }
    let pathint = PathintSettings {
        omega_t: field("pathint.omega_t", positive(pi.omega_t.unwrap_or(PI / 4.0)))?,
        slices,
        grid: match pi.grid {
            Some(g) => grid_from("pathint.grid", g)?,
            None => field("pathint.grid", Grid1D::new(-10.0, 10.0, 512))?,
        },
    };

    Ok(RunConfig {
        params,
        ic,
        packet,
        grid,
        evolution,
        sample_every,
        classical,
        pathint,
        output_dir: raw.output.and_then(|o| o.dir),
    })
}

fn positive(v: f64) -> damposc_core::Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(damposc_core::Error::InvalidParameter {
            name: "value",
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}
