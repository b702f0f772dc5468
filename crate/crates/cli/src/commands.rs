use std::path::Path;

use damposc_core::classical::{eval_generator_jet, fit_physical_amplitudes, integrate_x_oracle, reconstruct_x};
use damposc_core::packet::density_damped;
use damposc_core::propagator::kernel_convergence;
use damposc_core::quantum::{density, expectation_x, init_packet, norm, peak_position, width, Stepper, WaveField};
use damposc_core::verify::{run_suite, Report, Status, VerifyOptions, VerifySetup};
use damposc_core::Execution;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{ensure_dir, write_csv, write_text};
use crate::svg::{render, Curve};

pub const CLASSICAL_HEADER: [&str; 8] = ["t", "x_closed", "x_oracle", "abs_err", "q", "qdot", "qddot", "qdddot"];
pub const DENSITY_HEADER: [&str; 4] = ["t", "x", "rho_numeric", "rho_analytic"];
pub const OBSERVABLES_HEADER: [&str; 5] = ["t", "norm", "norm_over_decay", "mean_x", "sigma_numeric"];
pub const CONVERGENCE_HEADER: [&str; 2] = ["n_slices", "l2_error"];

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSummary {
    pub rows: usize,
    pub max_abs_err: f64,
}

pub fn cmd_classical(cfg: &RunConfig, out: &Path) -> Result<ClassicalSummary, CliError> {
    let traj = fit_physical_amplitudes(&cfg.params, &cfg.ic)?;
    let samples = integrate_x_oracle(&cfg.params, &cfg.ic, cfg.classical.t_end, cfg.classical.dt)?;
    let last = samples.len() - 1;
    let mut rows = Vec::new();
    let mut max_abs_err: f64 = 0.0;
    for (k, s) in samples.iter().enumerate() {
        let x = reconstruct_x(&traj, s.t)?;
        max_abs_err = max_abs_err.max((x - s.x).abs());
        if k % cfg.classical.output_every == 0 || k == last {
            let jet = eval_generator_jet(&traj, s.t)?;
            rows.push(vec![s.t, x, s.x, (x - s.x).abs(), jet.q, jet.qdot, jet.qddot, jet.qdddot]);
        }
    }
    ensure_dir(out)?;
    let n = rows.len();
    write_csv(&out.join("classical.csv"), &CLASSICAL_HEADER, rows)?;
    Ok(ClassicalSummary { rows: n, max_abs_err })
}

pub fn format_report(report: &Report) -> String {
    let mut s = String::new();
    for c in &report.checks {
        let measured = if c.measured.is_nan() {
            "-".to_string()
        } else {
            format!("{:.4e}", c.measured)
        };
        let line = format!(
            "{:<8} {:<22} measured {:>11}  tolerance {:.4e}",
            c.status.as_str(),
            c.name,
            measured,
            c.tolerance
        );
        s.push_str(line.trim_end());
        if !c.note.is_empty() {
            s.push_str("  (");
            s.push_str(&c.note);
            s.push(')');
        }
        s.push('\n');
    }
    let failed = report.checks.iter().filter(|c| c.status == Status::Fail).count();
    s.push_str(&format!("{} checks, {} failed\n", report.checks.len(), failed));
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub text: String,
    pub failed: usize,
}

/// Runs the invariant suite and writes `verify_report.txt`.
pub fn cmd_verify(cfg: &RunConfig, out: &Path, options: &VerifyOptions) -> Result<VerifyOutcome, CliError> {
    let setup = VerifySetup {
        params: cfg.params,
        ic: cfg.ic,
        grid: cfg.grid,
        evolution: cfg.evolution,
    };
    let report = run_suite(&setup, options)?;
    let text = format_report(&report);
    ensure_dir(out)?;
    write_text(&out.join("verify_report.txt"), &text)?;
    let failed = report.checks.iter().filter(|c| c.status == Status::Fail).count();
    Ok(VerifyOutcome { text, failed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSummary {
    pub t: f64,
    pub peak_x: f64,
    pub integral: f64,
    /// `max |rho_numeric - rho_analytic|`.
    pub overlay_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveSummary {
    pub snapshots: Vec<SnapshotSummary>,
    pub final_norm: f64,
}

struct Observation {
    t: f64,
    norm: f64,
    mean: f64,
    sigma: f64,
}

fn observe(f: &WaveField) -> Result<Observation, CliError> {
    Ok(Observation {
        t: f.time,
        norm: norm(f),
        mean: expectation_x(f)?,
        sigma: width(f)?,
    })
}

pub fn cmd_evolve(cfg: &RunConfig, out: &Path) -> Result<EvolveSummary, CliError> {
    let p = cfg.params;
    let initial = init_packet(&p, &cfg.grid, &cfg.packet)?;
    let stepper = Stepper::new(&cfg.grid, &p, &cfg.evolution)?;
    let n = cfg.evolution.n_steps;
    let mut snapshots = vec![initial.clone()];
    let mut observations = vec![observe(&initial)?];
    let mut failure = None;
    let last = stepper.run(&initial, n, |k, f| {
        if k % cfg.sample_every == 0 || k == n {
            snapshots.push(f.clone());
        }
        match observe(f) {
            Ok(o) => observations.push(o),
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let mut density_rows = Vec::new();
    let mut summaries = Vec::new();
    let mut curves = Vec::new();
    let period = p.period();
    for snap in &snapshots {
        let rho: Vec<(f64, f64)> = density(snap);
        let numeric: Vec<f64> = rho.iter().map(|r| r.1).collect();
        let xs: Vec<f64> = rho.iter().map(|r| r.0).collect();
        let analytic: Vec<f64> = xs.iter().map(|&x| density_damped(&p, &cfg.packet, x, snap.time)).collect();
        let overlay_error = numeric
            .iter()
            .zip(&analytic)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        for k in 0..xs.len() {
            density_rows.push(vec![snap.time, xs[k], numeric[k], analytic[k]]);
        }
        let summary = SnapshotSummary {
            t: snap.time,
            peak_x: peak_position(&cfg.grid, &numeric),
            integral: cfg.grid.integrate(&numeric),
            overlay_error,
        };
        curves.push(Curve {
            t: snap.time,
            label: format!("t = {:.3} T", snap.time / period),
            peak_x: summary.peak_x,
            integral: summary.integral,
            xs,
            numeric,
            analytic,
        });
        summaries.push(summary);
    }

    ensure_dir(out)?;
    write_csv(&out.join("density.csv"), &DENSITY_HEADER, density_rows)?;
    write_csv(
        &out.join("observables.csv"),
        &OBSERVABLES_HEADER,
        observations.iter().map(|o| {
            vec![
                o.t,
                o.norm,
                o.norm / (-4.0 * p.lambda * o.t).exp(),
                o.mean,
                o.sigma,
            ]
        }),
    )?;
    let reach = cfg.packet.x0.abs() + 6.0 * cfg.packet.max_sigma(&p);
    let title = format!(
        "density over time: m = {}, hbar = {}, omega = {}, lambda = {}, gamma_s = {}",
        p.mass, p.hbar, p.omega, p.lambda, cfg.packet.gamma_squeeze
    );
    let svg = render(
        &title,
        &curves,
        (-reach).max(cfg.grid.x_min),
        reach.min(cfg.grid.x_max),
    );
    write_text(&out.join("fig1.svg"), &svg)?;
    Ok(EvolveSummary {
        snapshots: summaries,
        final_norm: norm(&last),
    })
}

pub fn cmd_pathint(cfg: &RunConfig, out: &Path, exec: Execution) -> Result<Vec<(usize, f64)>, CliError> {
    let p = cfg.params.with_lambda(0.0);
    let pi = &cfg.pathint;
    let rows = kernel_convergence(&p, pi.omega_t / p.omega, &pi.slices, &pi.grid, exec)?;
    ensure_dir(out)?;
    let path = out.join("kernel_convergence.csv");
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(&path)?;
    w.write_record(CONVERGENCE_HEADER)?;
    for (n, e) in &rows {
        w.write_record([n.to_string(), crate::output::fmt_f64(*e)])?;
    }
    w.flush().map_err(|source| CliError::Write { path, source })?;
    Ok(rows)
}
