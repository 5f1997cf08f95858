//! Dense Hermitian linear algebra: eigenvalues via nalgebra, plus a Cholesky
//! factorization with explicit pivot checks and a diagonal jitter ladder.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Jitter multipliers tried in order; each is scaled by `trace / n`.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-14, 1e-12, 1e-10];

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
/// Only the lower triangle is trusted; the input is symmetrized first.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = hermitian_part(a);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    hermitian_eigen(a).0
}

/// (A + A*)/2
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// max |A − A*| entry
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn real_trace(a: &CMatrix) -> f64 {
    (0..a.nrows()).map(|i| a[(i, i)].re).sum()
}

/// Lower-triangular factor `L` with `A + jitter·I = L L*`.
#[derive(Debug, Clone)]
pub struct HermitianCholesky {
    l: CMatrix,
    jitter: f64,
}

impl HermitianCholesky {
    /// Plain factorization; `None` when a pivot is not safely positive.
    pub fn factor(a: &CMatrix) -> Option<Self> {
        Self::factor_shifted(a, 0.0)
    }

    fn factor_shifted(a: &CMatrix, jitter: f64) -> Option<Self> {
        let n = a.nrows();
        let max_diag = (0..n).map(|i| a[(i, i)].re.abs()).fold(0.0, f64::max) + jitter;
        let floor = n as f64 * f64::EPSILON * max_diag;
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re + jitter;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !d.is_finite() || d <= floor {
                return None;
            }
            let djj = d.sqrt();
            l[(j, j)] = Complex64::new(djj, 0.0);
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        Some(Self { l, jitter })
    }

    /// Escalates the diagonal shift through [`JITTER_LADDER`]·trace/n until
    /// the factorization succeeds.
    pub fn factor_with_ladder(a: &CMatrix) -> Result<Self> {
        let n = a.nrows();
        if n == 0 {
            return Ok(Self {
                l: CMatrix::zeros(0, 0),
                jitter: 0.0,
            });
        }
        let unit = real_trace(a).abs() / n as f64;
        for step in JITTER_LADDER {
            if let Some(f) = Self::factor_shifted(a, step * unit) {
                return Ok(f);
            }
        }
        let eig = hermitian_eigenvalues(a);
        let (lo, hi) = (eig[0], eig[n - 1]);
        let condition_estimate = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        Err(Error::Conditioning {
            message: format!(
                "Cholesky factorization of a {n}×{n} Hermitian matrix failed after jitter up to {:.1e}",
                JITTER_LADDER[JITTER_LADDER.len() - 1] * unit
            ),
            condition_estimate,
        })
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// `L⁻¹ b`
    pub fn forward(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for (k, yk) in y.iter().enumerate().take(i) {
                s -= self.l[(i, k)] * yk;
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// `(L L*)⁻¹ b`
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        let mut x = self.forward(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for (k, xk) in x.iter().enumerate().skip(i + 1) {
                s -= self.l[(k, i)].conj() * xk;
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }
}

pub fn mat_vec(a: &CMatrix, x: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

/// `x* y`
pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
