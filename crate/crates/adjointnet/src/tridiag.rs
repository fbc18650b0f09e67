//! Tridiagonal systems and the Thomas direct solve.
//!
//! The 1D two-point-flux Jacobian is tridiagonal, so every Newton step and
//! every adjoint sweep reduces to one O(n) elimination. The transposed solve
//! swaps the off-diagonals and reuses the same routine.

use crate::error::{AdjointNetError, Result};

/// Tridiagonal matrix stored as three bands.
///
/// `sub[i]` couples row `i+1` to column `i`, `sup[i]` couples row `i` to
/// column `i+1`; both have length `n - 1`.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "tridiagonal system needs at least one unknown");
        Tridiagonal {
            sub: vec![0.0; n - 1],
            diag: vec![0.0; n],
            sup: vec![0.0; n - 1],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Thomas elimination. Returns `x` with `A x = rhs`.
    ///
    /// Errors with `AdjointFailure` on a vanishing pivot, which for our
    /// Jacobians signals a degenerate forward state rather than roundoff.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        assert_eq!(rhs.len(), n, "rhs length must match system size");

        let mut c = vec![0.0; n]; // modified superdiagonal
        let mut d = vec![0.0; n]; // modified rhs

        let mut pivot = self.diag[0];
        if pivot == 0.0 {
            return Err(AdjointNetError::AdjointFailure(
                "zero pivot in tridiagonal solve (row 0)".into(),
            ));
        }
        if n > 1 {
            c[0] = self.sup[0] / pivot;
        }
        d[0] = rhs[0] / pivot;

        for i in 1..n {
            pivot = self.diag[i] - self.sub[i - 1] * c[i - 1];
            if pivot == 0.0 {
                return Err(AdjointNetError::AdjointFailure(format!(
                    "zero pivot in tridiagonal solve (row {i})"
                )));
            }
            if i < n - 1 {
                c[i] = self.sup[i] / pivot;
            }
            d[i] = (rhs[i] - self.sub[i - 1] * d[i - 1]) / pivot;
        }

        // back substitution in place
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }

    /// Solves `A^T x = rhs` by swapping the bands.
    pub fn solve_transposed(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let transposed = Tridiagonal {
            sub: self.sup.clone(),
            diag: self.diag.clone(),
            sup: self.sub.clone(),
        };
        transposed.solve(rhs)
    }

    /// `A x`, used by finite-difference checks on the Jacobian.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.sub[i - 1] * x[i - 1];
            }
            if i < n - 1 {
                v += self.sup[i] * x[i + 1];
            }
            y[i] = v;
        }
        y
    }
}
