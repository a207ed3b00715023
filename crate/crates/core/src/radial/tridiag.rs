//! Symmetric tridiagonal systems.

use crate::error::{EmiError, Result};

/// `A x = b` with `A` tridiagonal: `lower[i] = A[i][i-1]`, `upper[i] = A[i][i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Adds the two-point coupling `c (x_i − x_j)²/2` between adjacent unknowns.
    pub fn couple(&mut self, i: usize, j: usize, c: f64) {
        debug_assert_eq!(i.abs_diff(j), 1);
        self.diag[i] += c;
        self.diag[j] += c;
        if j == i + 1 {
            self.upper[i] -= c;
            self.lower[j] -= c;
        } else {
            self.lower[i] -= c;
            self.upper[j] -= c;
        }
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.upper[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// `|b − A x| / (|b| + |A||x|)`, row-wise maximum.
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let mut y = self.diag[i] * x[i];
            let mut scale = (self.diag[i] * x[i]).abs() + self.rhs[i].abs();
            if i > 0 {
                y += self.lower[i] * x[i - 1];
                scale += (self.lower[i] * x[i - 1]).abs();
            }
            if i + 1 < n {
                y += self.upper[i] * x[i + 1];
                scale += (self.upper[i] * x[i + 1]).abs();
            }
            if scale > 0.0 {
                worst = worst.max((self.rhs[i] - y).abs() / scale);
            }
        }
        worst
    }

    fn thomas(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = self.diag[i] - self.lower[i] * c[i - 1];
            }
            if !(pivot.abs() > 1e-300) || !pivot.is_finite() {
                return Err(EmiError::Singular(format!("zero pivot in row {i}")));
            }
            c[i] = if i + 1 < n { self.upper[i] / pivot } else { 0.0 };
            d[i] = (rhs[i] - if i > 0 { self.lower[i] * d[i - 1] } else { 0.0 }) / pivot;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }

    /// Direct solve with one refinement sweep; fails if the relative
    /// residual stays above `tol`.
    pub fn solve(&self, tol: f64) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Ok(Vec::new());
        }
        let mut x = self.thomas(&self.rhs)?;
        let mut res = self.relative_residual(&x);
        if res > tol {
            let ax = self.apply(&x);
            let r: Vec<f64> = self.rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
            let dx = self.thomas(&r)?;
            for (xi, di) in x.iter_mut().zip(dx) {
                *xi += di;
            }
            res = self.relative_residual(&x);
        }
        if res > tol || !res.is_finite() {
            return Err(EmiError::LinearSolve {
                residual: res,
                iterations: 2,
            });
        }
        Ok(x)
    }
}
