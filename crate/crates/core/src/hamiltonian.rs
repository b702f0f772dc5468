//! Canonical frame of the squared-generator Lagrangian
//! `L = (q'' - 2 lambda q' + omega^2 q)^2 / 2`.
//!
//! With `q1 = q`, `q2 = q'` the momenta are
//! `p1 = 4 lambda^2 q' - q''' - omega^2 q' - 2 lambda omega^2 q` and
//! `p2 = q'' - 2 lambda q' + omega^2 q`. The Hamiltonian is conserved on every
//! generator solution and vanishes on the decaying (physical) ones.

use num_complex::Complex64;
use twofloat::TwoFloat;

use crate::classical::{
    generator_symbol, mode_rates, motion_symbol, GeneratorJet, GeneratorTrajectory, OscillatorParams, REAL_RESIDUE_LIMIT,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CanonicalState {
    pub q1: f64,
    pub q2: f64,
    pub p1: f64,
    pub p2: f64,
}

/// Unit-restored canonical pair: `Q = omega q`, `P = m omega p`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScaledCanonicalState {
    /// `Q1` (m s)
    pub q1: f64,
    /// `Q2` (m)
    pub q2: f64,
    /// `P1` (kg m / s^2)
    pub p1: f64,
    /// `P2` (kg m / s)
    pub p2: f64,
}

pub fn canonical_from_jet(params: &OscillatorParams, jet: &GeneratorJet) -> CanonicalState {
    let (l, w2) = (params.lambda, params.omega * params.omega);
    CanonicalState {
        q1: jet.q,
        q2: jet.qdot,
        p1: 4.0 * l * l * jet.qdot - jet.qdddot - w2 * jet.qdot - 2.0 * l * w2 * jet.q,
        p2: jet.qddot - 2.0 * l * jet.qdot + w2 * jet.q,
    }
}

pub fn scale_canonical(params: &OscillatorParams, state: &CanonicalState) -> ScaledCanonicalState {
    let w = params.omega;
    let mw = params.mass * w;
    ScaledCanonicalState {
        q1: w * state.q1,
        q2: w * state.q2,
        p1: mw * state.p1,
        p2: mw * state.p2,
    }
}

pub fn unscale_canonical(params: &OscillatorParams, state: &ScaledCanonicalState) -> CanonicalState {
    let w = params.omega;
    let mw = params.mass * w;
    CanonicalState {
        q1: state.q1 / w,
        q2: state.q2 / w,
        p1: state.p1 / mw,
        p2: state.p2 / mw,
    }
}

/// `H = 2 l^2 q'^2 - q''' q' - w^2 q'^2 + q''^2 / 2 - w^4 q^2 / 2`.
pub fn hamiltonian_potential_form(params: &OscillatorParams, jet: &GeneratorJet) -> f64 {
    let (l, w2) = (params.lambda, params.omega * params.omega);
    let GeneratorJet {
        q,
        qdot,
        qddot,
        qdddot,
    } = *jet;
    2.0 * l * l * qdot * qdot - qdddot * qdot - w2 * qdot * qdot + 0.5 * qddot * qddot
        - 0.5 * w2 * w2 * q * q
}

/// Sum of the absolute values of the potential-form terms; `f64::EPSILON`
/// times this bounds the rounding error of `hamiltonian_potential_form`.
pub fn potential_term_magnitude(params: &OscillatorParams, jet: &GeneratorJet) -> f64 {
    let (l, w2) = (params.lambda, params.omega * params.omega);
    let GeneratorJet {
        q,
        qdot,
        qddot,
        qdddot,
    } = *jet;
    (2.0 * l * l + w2) * qdot * qdot + (qdddot * qdot).abs() + 0.5 * qddot * qddot + 0.5 * w2 * w2 * q * q
}

/// `H = p2^2 / 2 - w^2 p2 q1 + p1 q2 + 2 l p2 q2`.
pub fn hamiltonian_canonical(state: &CanonicalState, params: &OscillatorParams) -> f64 {
    let CanonicalState { q1, q2, p1, p2 } = *state;
    let (l, w2) = (params.lambda, params.omega * params.omega);
    0.5 * p2 * p2 - w2 * p2 * q1 + p1 * q2 + 2.0 * l * p2 * q2
}

/// `H' = P2^2 / 2m - w^2 P2 Q1 + P1 Q2 + 2 l P2 Q2`, in joules.
pub fn hamiltonian_scaled(state: &ScaledCanonicalState, params: &OscillatorParams) -> f64 {
    let ScaledCanonicalState { q1, q2, p1, p2 } = *state;
    let (l, w2) = (params.lambda, params.omega * params.omega);
    0.5 * p2 * p2 / params.mass - w2 * p2 * q1 + p1 * q2 + 2.0 * l * p2 * q2
}

/// Complex number in double-double arithmetic.
#[derive(Debug, Clone, Copy)]
struct Cdd {
    re: TwoFloat,
    im: TwoFloat,
}

impl Cdd {
    fn new(re: TwoFloat, im: TwoFloat) -> Self {
        Self { re, im }
    }

    fn from_c64(z: Complex64) -> Self {
        Self::new(TwoFloat::from(z.re), TwoFloat::from(z.im))
    }

    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }

    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

/// The four characteristic rates in double-double precision, same order as
/// `mode_rates`.
fn rates_dd(params: &OscillatorParams) -> [Cdd; 4] {
    let (l, w) = (TwoFloat::from(params.lambda), TwoFloat::from(params.omega));
    let d = (l - w) * (l + w);
    let zero = TwoFloat::from(0.0);
    let g = if d >= zero {
        Cdd::new(d.sqrt(), zero)
    } else {
        Cdd::new(zero, (-d).sqrt())
    };
    let lam = Cdd::new(l, zero);
    let neg = |z: Cdd| Cdd::new(-z.re, -z.im);
    let sum = lam.add(g);
    let diff = lam.add(neg(g));
    [neg(sum), neg(diff), sum, diff]
}

/// `H` along `traj` at `t` with the jet and the Hamiltonian accumulated in
/// double-double arithmetic.
///
/// With growing modes present the terms of `H` exceed `|H|` by up to
/// `e^{2 (lambda + |gamma|) t}`; their pairwise cancellation is exact in real
/// arithmetic but leaves `eps * terms` behind in plain `f64`. The mode values
/// themselves stay `f64`: their rounding only scales products that vanish.
pub fn trajectory_hamiltonian(traj: &GeneratorTrajectory, t: f64) -> Result<f64> {
    let p = &traj.params;
    let rates = if traj.rates == mode_rates(p) {
        rates_dd(p)
    } else {
        traj.rates.map(Cdd::from_c64)
    };
    let modes = traj.mode_values(t).map(Cdd::from_c64);
    let zero = TwoFloat::from(0.0);
    let mut jet = [zero; 4];
    for (k, out) in jet.iter_mut().enumerate() {
        let mut sum = Cdd::new(zero, zero);
        let mut scale = 0.0;
        for (m, r) in modes.iter().zip(&rates) {
            let mut term = *m;
            for _ in 0..k {
                term = term.mul(*r);
            }
            scale += f64::from(term.re).hypot(f64::from(term.im));
            sum = sum.add(term);
        }
        let residue = if scale > 0.0 { f64::from(sum.im).abs() / scale } else { 0.0 };
        if residue > REAL_RESIDUE_LIMIT || !residue.is_finite() {
            return Err(Error::NonRealResult { t, residue });
        }
        *out = sum.re;
    }
    let [q, qd, qdd, qddd] = jet;
    let (l, w) = (TwoFloat::from(p.lambda), TwoFloat::from(p.omega));
    let w2 = w * w;
    let h = TwoFloat::from(2.0) * l * l * qd * qd - qddd * qd - w2 * qd * qd + qdd * qdd / 2.0 - w2 * w2 * q * q / 2.0;
    Ok(f64::from(h))
}

/// Magnitude of the fourth-order Euler-Lagrange residual together with the
/// summed magnitude of its individual terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.value.abs() / self.scale
        } else {
            self.value.abs()
        }
    }
}

/// Euler-Lagrange expression of the squared-generator Lagrangian at `t`.
///
/// It factorises as `(D^2 + 2 l D + w^2)(D^2 - 2 l D + w^2) q`, i.e. the damped
/// equation of motion applied to `x`, and is evaluated mode by mode.
pub fn euler_lagrange_residual(params: &OscillatorParams, traj: &GeneratorTrajectory, t: f64) -> Residual {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    let l = params.lambda;
    let w2 = params.omega * params.omega;
    for (m, r) in traj.mode_values(t).iter().zip(&traj.rates) {
        sum += m * generator_symbol(params, *r) * motion_symbol(params, *r);
        let rn = r.norm();
        let bound = rn * rn + 2.0 * l * rn + w2;
        scale += m.norm() * bound * bound;
    }
    Residual {
        value: sum.norm(),
        scale,
    }
}
