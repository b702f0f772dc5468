//! Harmonic-oscillator propagator: the closed-form kernel with its
//! half-period phase correction, and a time-sliced path integral that
//! converges to it.
//!
//! Damping never enters here. The damped solution is the undamped one times
//! `e^{-2 lambda t}`, applied by the caller.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::classical::OscillatorParams;
use crate::error::{check_positive, Error, Result};
use crate::exec::Execution;
use crate::quantum::{Grid1D, WaveField};

/// `|sin(omega t)|` at or below this is a caustic.
pub const CAUSTIC_TOLERANCE: f64 = 1e-9;

/// Half-width of the central window the kernel error is sampled from.
pub const SAMPLE_HALF_WIDTH: f64 = 1.0;

/// Samples per axis of the kernel error window.
pub const SAMPLES_PER_AXIS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub x_a: f64,
    pub x_b: f64,
    pub t: f64,
    pub value: Complex64,
}

/// Closed-form kernel `K(x_b, t; x_a, 0)`.
///
/// The prefactor uses `|sin(omega t)|`; each caustic passed adds a phase of
/// `-pi/2`.
pub fn harmonic_kernel(params: &OscillatorParams, x_a: f64, x_b: f64, t: f64) -> Result<Complex64> {
    check_positive("t", t)?;
    let wt = params.omega * t;
    let (s, c) = wt.sin_cos();
    if s.abs() <= CAUSTIC_TOLERANCE {
        return Err(Error::Caustic {
            omega_t: wt,
            sin_abs: s.abs(),
        });
    }
    let (m, w, hbar) = (params.mass, params.omega, params.hbar);
    let amplitude = (m * w / (2.0 * PI * hbar * s.abs())).sqrt();
    let action = m * w / (2.0 * hbar * s) * ((x_a * x_a + x_b * x_b) * c - 2.0 * x_a * x_b);
    let caustics = (wt / PI).floor();
    let phase = action - FRAC_PI_4 - FRAC_PI_2 * caustics;
    Ok(Complex64::from_polar(amplitude, phase))
}

/// Kernel of the form `N exp(i/hbar [A x_b^2 / 2 + B x_a^2 / 2 - C x_a x_b])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticKernel {
    pub prefactor: Complex64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub hbar: f64,
}

impl QuadraticKernel {
    pub fn eval(&self, x_a: f64, x_b: f64) -> Complex64 {
        let action = 0.5 * self.a * x_b * x_b + 0.5 * self.b * x_a * x_a - self.c * x_a * x_b;
        self.prefactor * Complex64::from_polar(1.0, action / self.hbar)
    }
}

/// Time-sliced path integral over `n_slices` short-time steps.
///
/// Each slice is the free-particle kernel over `eps = t / n` times
/// `e^{-i eps V(x_start) / hbar}` (first-order splitting). Every intermediate
/// integral is Gaussian, so the chain is composed exactly as a recurrence on
/// the quadratic coefficients; a Fresnel integral with negative curvature
/// contributes the `-pi/2` phase that builds up the caustic correction.
pub fn compose_slices(params: &OscillatorParams, t: f64, n_slices: usize) -> Result<QuadraticKernel> {
    check_positive("t", t)?;
    if n_slices == 0 {
        return Err(Error::InvalidParameter {
            name: "n_slices",
            reason: "must be at least 1".into(),
        });
    }
    let (m, w, hbar) = (params.mass, params.omega, params.hbar);
    let eps = t / n_slices as f64;
    let mu = m / eps;
    let potential = eps * m * w * w;
    let mut prefactor = Complex64::from_polar((mu / (2.0 * PI * hbar)).sqrt(), -FRAC_PI_4);
    let (mut a, mut b, mut c) = (mu, mu - potential, mu);
    for slice in 1..n_slices {
        // curvature of the intermediate coordinate
        let k = mu - potential + a;
        if !(k.is_finite() && k.abs() > f64::EPSILON * mu) {
            return Err(Error::QuadratureOverflow { slice });
        }
        let fresnel_phase = if k > 0.0 { 0.0 } else { -FRAC_PI_2 };
        prefactor *= Complex64::from_polar((mu / k.abs()).sqrt(), fresnel_phase);
        let (na, nb, nc) = (mu - mu * mu / k, b - c * c / k, mu * c / k);
        a = na;
        b = nb;
        c = nc;
    }
    if !(prefactor.is_finite() && a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::QuadratureOverflow { slice: n_slices });
    }
    Ok(QuadraticKernel {
        prefactor,
        a,
        b,
        c,
        hbar,
    })
}

pub fn sliced_kernel(params: &OscillatorParams, x_a: f64, x_b: f64, t: f64, n_slices: usize) -> Result<Complex64> {
    Ok(compose_slices(params, t, n_slices)?.eval(x_a, x_b))
}

/// Grid nodes inside `[-SAMPLE_HALF_WIDTH, SAMPLE_HALF_WIDTH]`, thinned to
/// `SAMPLES_PER_AXIS` evenly spaced picks.
pub fn sample_nodes(grid: &Grid1D) -> Vec<f64> {
    let inside: Vec<f64> = grid
        .points()
        .into_iter()
        .filter(|x| x.abs() <= SAMPLE_HALF_WIDTH)
        .collect();
    if inside.len() <= SAMPLES_PER_AXIS {
        return inside;
    }
    let last = inside.len() - 1;
    (0..SAMPLES_PER_AXIS)
        .map(|k| inside[k * last / (SAMPLES_PER_AXIS - 1)])
        .collect()
}

/// Relative L2 error of the sliced kernel against the closed form over the
/// `sample_nodes(grid)` square.
pub fn kernel_l2_error(
    params: &OscillatorParams,
    t: f64,
    n_slices: usize,
    grid: &Grid1D,
) -> Result<f64> {
    let sliced = compose_slices(params, t, n_slices)?;
    let nodes = sample_nodes(grid);
    let mut err = 0.0;
    let mut reference = 0.0;
    for &x_a in &nodes {
        for &x_b in &nodes {
            let exact = harmonic_kernel(params, x_a, x_b, t)?;
            err += (sliced.eval(x_a, x_b) - exact).norm_sqr();
            reference += exact.norm_sqr();
        }
    }
    Ok((err / reference).sqrt())
}

/// `(n_slices, error)` for each requested slice count.
pub fn kernel_convergence(
    params: &OscillatorParams,
    t: f64,
    slices: &[usize],
    grid: &Grid1D,
    exec: Execution,
) -> Result<Vec<(usize, f64)>> {
    harmonic_kernel(params, 0.0, 0.0, t)?;
    exec.map(slices, |&n| kernel_l2_error(params, t, n, grid).map(|e| (n, e)))
        .into_iter()
        .collect()
}

/// `psi(x_b) = int K(x_b, x_a) psi(x_a) dx_a` by the trapezoid rule on the field's grid.
pub fn propagate_on_grid<K>(field: &WaveField, dt: f64, kernel: K, exec: Execution) -> Result<WaveField>
where
    K: Fn(f64, f64) -> Result<Complex64> + Sync + Send,
{
    let g = field.grid;
    let rows = exec.map_range(g.n_points, |j| {
        let x_b = g.x(j);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, psi) in field.values.iter().enumerate() {
            if *psi != Complex64::new(0.0, 0.0) {
                acc += kernel(g.x(i), x_b)? * psi * g.weight(i);
            }
        }
        Ok(acc)
    });
    let values = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(WaveField {
        grid: g,
        values,
        time: field.time + dt,
    })
}

/// Propagates `field` through the closed-form kernel over `t`.
pub fn propagate_harmonic(params: &OscillatorParams, field: &WaveField, t: f64, exec: Execution) -> Result<WaveField> {
    harmonic_kernel(params, 0.0, 0.0, t)?;
    propagate_on_grid(field, t, |x_a, x_b| harmonic_kernel(params, x_a, x_b, t), exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{density, init_ground_gaussian, peak_position};

    fn unit() -> OscillatorParams {
        OscillatorParams::natural(0.0, 1.0).unwrap()
    }

    #[test]
    fn caustic_rejected() {
        let p = unit();
        assert!(matches!(harmonic_kernel(&p, 0.1, 0.2, PI), Err(Error::Caustic { .. })));
        assert!(matches!(harmonic_kernel(&p, 0.1, 0.2, 2.0 * PI), Err(Error::Caustic { .. })));
        assert!(harmonic_kernel(&p, 0.1, 0.2, 0.5 * PI).is_ok());
    }

    #[test]
    fn short_time_limit_is_free_particle() {
        let p = unit();
        let (xa, xb) = (0.3, 0.31);
        for t in [1e-2, 1e-3] {
            let k = harmonic_kernel(&p, xa, xb, t).unwrap();
            let free = Complex64::from_polar(
                (1.0 / (2.0 * PI * t)).sqrt(),
                (xb - xa) * (xb - xa) / (2.0 * t) - FRAC_PI_4,
            );
            // relative gap is dominated by the potential phase ~ t x^2 / 2
            assert!((k / free - 1.0).norm() < t, "t={t}");
        }
    }

    #[test]
    fn kernel_symmetric() {
        let p = OscillatorParams::new(1.7, 0.0, 0.8, 0.9).unwrap();
        for t in [0.4, 2.3, 5.0, 9.1] {
            let a = harmonic_kernel(&p, -0.7, 1.3, t).unwrap();
            let b = harmonic_kernel(&p, 1.3, -0.7, t).unwrap();
            assert!((a - b).norm() < 1e-14 * a.norm());
        }
    }

    #[test]
    fn single_slice_matches_short_time_kernel() {
        let p = unit();
        let x = 0.4;
        let err = |t: f64| {
            let a = sliced_kernel(&p, x, x, t, 1).unwrap();
            let b = harmonic_kernel(&p, x, x, t).unwrap();
            (a / b - 1.0).norm()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        assert!(e1 < 1e-4);
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn sliced_kernel_symmetric_limit() {
        let p = unit();
        let t = 0.9;
        let a = sliced_kernel(&p, 0.3, -0.5, t, 4096).unwrap();
        let b = harmonic_kernel(&p, 0.3, -0.5, t).unwrap();
        assert!((a - b).norm() < 1e-3 * b.norm());
    }

    #[test]
    fn sliced_kernel_crosses_caustic() {
        // the accumulated Fresnel phases reproduce the closed-form correction
        let p = unit();
        let t = 1.3 * PI;
        let a = sliced_kernel(&p, 0.2, -0.4, t, 8192).unwrap();
        let b = harmonic_kernel(&p, 0.2, -0.4, t).unwrap();
        assert!((a - b).norm() < 5e-3 * b.norm(), "{a} vs {b}");
    }

    #[test]
    fn zero_slices_rejected() {
        assert!(compose_slices(&unit(), 1.0, 0).is_err());
    }

    #[test]
    fn sample_nodes_come_from_grid() {
        let g = Grid1D::new(-10.0, 10.0, 512).unwrap();
        let nodes = sample_nodes(&g);
        assert_eq!(nodes.len(), 8);
        let pts = g.points();
        assert!(nodes.iter().all(|n| pts.contains(n) && n.abs() <= 1.0));
    }

    #[test]
    fn quarter_period_packet_lands_on_origin_half_period_on_mirror() {
        let p = unit();
        let g = Grid1D::new(-10.0, 10.0, 1024).unwrap();
        let f = init_ground_gaussian(&p, &g, -1.0).unwrap();
        let exec = Execution::default();
        let rho = |w: &WaveField| density(w).into_iter().map(|(_, r)| r).collect::<Vec<_>>();
        let quarter = propagate_harmonic(&p, &f, 0.5 * PI, exec).unwrap();
        assert!(peak_position(&g, &rho(&quarter)).abs() < 2.0 * g.dx());
        // the kernel chirp must stay resolved by the grid, so keep clear of pi
        let t = 0.9 * PI;
        let half = propagate_harmonic(&p, &f, t, exec).unwrap();
        assert!((peak_position(&g, &rho(&half)) + t.cos()).abs() < 2.0 * g.dx());
    }

    #[test]
    fn semigroup_through_packets() {
        let p = unit();
        let g = Grid1D::new(-10.0, 10.0, 1024).unwrap();
        let f = init_ground_gaussian(&p, &g, -1.0).unwrap();
        let exec = Execution::default();
        for (t1, t2) in [(0.3 * PI, 0.3 * PI), (0.7 * PI, 0.7 * PI)] {
            let two = propagate_harmonic(&p, &propagate_harmonic(&p, &f, t1, exec).unwrap(), t2, exec).unwrap();
            let one = propagate_harmonic(&p, &f, t1 + t2, exec).unwrap();
            let diff = two.max_difference(&one);
            assert!(diff < 1e-8 * one.max_abs(), "t1={t1}: {diff}");
        }
    }
}
