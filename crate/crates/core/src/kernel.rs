//! Kernels, Gram matrices and the positive-semidefiniteness audits.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{format_complex, parse_complex};
use crate::linalg::{hermitian_defect, hermitian_eigenvalues, real_trace, CMatrix};
use crate::numeric::is_finite;

/// Relative tolerance on the smallest Gram eigenvalue, scaled by max(trace, 1).
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Absolute tolerance on the entrywise Hermitian defect.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
/// Slack allowed on the diagonal and in the Cauchy–Schwarz ratio.
pub const DIAGONAL_TOLERANCE: f64 = 1e-12;
pub const CAUCHY_SCHWARZ_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelProvenance {
    ClosedForm,
    Integrated,
    Mixture,
    Expansion,
}

type EvalFn = dyn Fn(&[f64], &[f64]) -> Result<Complex64> + Send + Sync;

/// A complex-valued positive-definite function on `ℝ^domain_dim × ℝ^domain_dim`.
#[derive(Clone)]
pub struct Kernel {
    eval: Arc<EvalFn>,
    domain_dim: usize,
    provenance: KernelProvenance,
    label: String,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("label", &self.label)
            .field("domain_dim", &self.domain_dim)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl Kernel {
    /// Kernel from a fallible evaluation function.
    pub fn new<F>(domain_dim: usize, provenance: KernelProvenance, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            domain_dim,
            provenance,
            label: label.into(),
        }
    }

    /// Kernel from an infallible evaluation function.
    pub fn from_fn<F>(domain_dim: usize, provenance: KernelProvenance, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(domain_dim, provenance, label, move |x, y| Ok(f(x, y)))
    }

    /// K(x, y). Fails on dimension mismatch or a non-finite value.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<Complex64> {
        if x.len() != self.domain_dim || y.len() != self.domain_dim {
            return Err(Error::Argument(format!(
                "kernel {:?} expects points of dimension {}, got {} and {}",
                self.label,
                self.domain_dim,
                x.len(),
                y.len()
            )));
        }
        let v = (self.eval)(x, y)?;
        if !is_finite(v) {
            return Err(Error::Evaluation(format!(
                "kernel {:?} is {v} at x = {x:?}, y = {y:?}",
                self.label
            )));
        }
        Ok(v)
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn provenance(&self) -> KernelProvenance {
        self.provenance
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// `(K(x_i, x_j))_{ij}` with spectral diagnostics.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    entries: CMatrix,
    points: Vec<Vec<f64>>,
    min_eigenvalue: f64,
    trace: f64,
    hermitian_defect: f64,
}

impl GramMatrix {
    /// Wraps an already assembled matrix. The defect is measured on the
    /// entries as given; eigenvalues on their Hermitian part.
    pub fn from_entries(entries: CMatrix, points: Vec<Vec<f64>>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::Argument(format!(
                "Gram matrix must be square and nonempty, got {}×{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if points.len() != n {
            return Err(Error::Argument(format!("{} points for a {n}×{n} matrix", points.len())));
        }
        let hermitian_defect = hermitian_defect(&entries);
        let min_eigenvalue = if n == 1 {
            entries[(0, 0)].re
        } else {
            hermitian_eigenvalues(&entries)[0]
        };
        let trace = real_trace(&entries);
        Ok(Self {
            entries,
            points,
            min_eigenvalue,
            trace,
            hermitian_defect,
        })
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.hermitian_defect
    }

    /// CSV: a header of point indices, then one row per matrix row with
    /// `re+imj` entries at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.size();
        let mut out = (0..n).map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        out.push('\n');
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format_complex(self.entries[(i, j)])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses the CSV written by [`GramMatrix::to_csv`]; returns the entries.
    pub fn entries_from_csv(csv: &str) -> Result<CMatrix> {
        let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty Gram CSV".into()))?;
        let n = header.split(',').count();
        for (j, h) in header.split(',').enumerate() {
            if h.trim().parse::<usize>().ok() != Some(j) {
                return Err(Error::Parse(format!("header column {j} is {h:?}, expected {j}")));
            }
        }
        let mut m = CMatrix::zeros(n, n);
        let mut rows = 0;
        for (i, line) in lines.enumerate() {
            if i >= n {
                return Err(Error::Parse(format!("more than {n} data rows")));
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != n {
                return Err(Error::Parse(format!("row {i} has {} cells, expected {n}", cells.len())));
            }
            for (j, cell) in cells.iter().enumerate() {
                m[(i, j)] = parse_complex(cell)?;
            }
            rows += 1;
        }
        if rows != n {
            return Err(Error::Parse(format!("{rows} data rows, expected {n}")));
        }
        Ok(m)
    }
}

/// Assembles `K(points[i], points[j])`; rows are evaluated in parallel.
pub fn gram(kernel: &Kernel, points: &[Vec<f64>]) -> Result<GramMatrix> {
    if points.is_empty() {
        return Err(Error::Argument("gram needs at least one point".into()));
    }
    for (i, p) in points.iter().enumerate() {
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::Argument(format!("point {i} has a non-finite coordinate")));
        }
    }
    let n = points.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    kernel.evaluate(&points[i], &points[j]).map_err(|e| match e {
                        Error::Evaluation(msg) => Error::Evaluation(format!("Gram entry ({i}, {j}): {msg}")),
                        other => other,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let entries = CMatrix::from_fn(n, n, |i, j| rows[i][j]);
    GramMatrix::from_entries(entries, points.to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdReport {
    pub passed: bool,
    pub min_eigenvalue: f64,
    pub hermitian_defect: f64,
}

/// Never fails; `passed` iff min eigenvalue ≥ −1e-10·max(trace, 1) and the
/// Hermitian defect is ≤ 1e-12.
pub fn psd_check(gram: &GramMatrix) -> PsdReport {
    let floor = -PSD_TOLERANCE * gram.trace.max(1.0);
    PsdReport {
        passed: gram.min_eigenvalue >= floor && gram.hermitian_defect <= HERMITIAN_TOLERANCE,
        min_eigenvalue: gram.min_eigenvalue,
        hermitian_defect: gram.hermitian_defect,
    }
}

/// Worst `|K(x,y)|² / (K(x,x) K(y,y))` over the pairs, with 0/0 → 0.
pub fn cauchy_schwarz_audit(kernel: &Kernel, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Argument("cauchy_schwarz_audit needs at least one pair".into()));
    }
    let diag = |p: &[f64]| -> Result<f64> {
        let d = kernel.evaluate(p, p)?.re;
        if d < -DIAGONAL_TOLERANCE {
            return Err(Error::invariant(
                format!("kernel {:?} has negative diagonal {d} at {p:?}", kernel.label),
                None,
            ));
        }
        Ok(d.max(0.0))
    };
    let mut worst: f64 = 0.0;
    for (x, y) in pairs {
        let num = kernel.evaluate(x, y)?.norm_sqr();
        let den = diag(x)? * diag(y)?;
        let ratio = if den > 0.0 {
            num / den
        } else if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(ratio);
    }
    Ok(worst)
}
