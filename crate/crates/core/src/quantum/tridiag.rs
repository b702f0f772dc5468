//! Thomas factorisation for symmetric tridiagonal systems with a constant
//! off-diagonal, as produced by a second-difference stencil on a uniform grid.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Pivots smaller than this fraction of the row magnitude are treated as a breakdown.
const PIVOT_FLOOR: f64 = 1e-12;

/// Forward-elimination coefficients of `tridiag(off, diag, off)`, computed once
/// and reused for every right-hand side.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    off: Complex64,
    inv_pivot: Vec<Complex64>,
    upper: Vec<Complex64>,
}

impl TridiagonalLu {
    pub fn new(diag: &[Complex64], off: Complex64) -> Result<Self> {
        let n = diag.len();
        let mut inv_pivot = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        let mut prev_upper = Complex64::new(0.0, 0.0);
        for (row, d) in diag.iter().enumerate() {
            let pivot = d - off * prev_upper;
            let floor = PIVOT_FLOOR * (d.norm() + off.norm());
            if pivot.norm() <= floor || !pivot.is_finite() {
                return Err(Error::SolveFailure {
                    row,
                    pivot: pivot.norm(),
                });
            }
            let inv = pivot.inv();
            prev_upper = off * inv;
            inv_pivot.push(inv);
            upper.push(prev_upper);
        }
        Ok(Self {
            off,
            inv_pivot,
            upper,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [Complex64]) {
        assert_eq!(rhs.len(), self.len(), "right-hand side length mismatch");
        let mut prev = Complex64::new(0.0, 0.0);
        for (r, inv) in rhs.iter_mut().zip(&self.inv_pivot) {
            *r = (*r - self.off * prev) * inv;
            prev = *r;
        }
        let mut next = Complex64::new(0.0, 0.0);
        for (r, u) in rhs.iter_mut().zip(&self.upper).rev() {
            *r -= u * next;
            next = *r;
        }
    }
}
