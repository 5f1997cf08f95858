//! Kramer sampling: orthogonality of the node representers and the
//! generalized cardinal series `g(x) = Σ g(y_n) K(x, y_n) / K(y_n, y_n)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{gram, GramMatrix, Kernel};
use crate::linalg::CMatrix;
use crate::numeric::{is_finite, ComplexSum};
use crate::synthesis::TransformKernelSpec;

/// Off-diagonal Gram mass, relative to the largest diagonal entry, below
/// which node representers count as orthogonal.
pub const ORTHO_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct OrthogonalityReport {
    pub max_offdiag_ratio: f64,
    pub gram: GramMatrix,
}

fn offdiag_ratio(g: &CMatrix) -> f64 {
    let n = g.nrows();
    let max_diag = (0..n).map(|i| g[(i, i)].re).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.max(g[(i, j)].norm());
            }
        }
    }
    worst / max_diag
}

fn degenerate(node: &[f64]) -> Error {
    Error::Domain(format!(
        "degenerate sampling node {node:?}: its representer has zero norm"
    ))
}

/// Gram of `ω ↦ k(y_n, ω)` in `L²(Ω, μ)`, integrated from the sections.
pub fn orthogonality_check(spec: &TransformKernelSpec, nodes: &[Vec<f64>]) -> Result<OrthogonalityReport> {
    if nodes.is_empty() {
        return Err(Error::Argument("orthogonality check needs at least one node".into()));
    }
    let sections = nodes.par_iter().map(|y| spec.sections(y)).collect::<Result<Vec<_>>>()?;
    let weights = spec.measure().weights();
    let n = nodes.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = ComplexSum::new();
                    for ((a, b), w) in sections[i].iter().zip(&sections[j]).zip(weights) {
                        acc.add(a * b.conj() * *w);
                    }
                    acc.value()
                })
                .collect()
        })
        .collect();
    let entries = CMatrix::from_fn(n, n, |i, j| rows[i][j]);
    for (i, y) in nodes.iter().enumerate() {
        if entries[(i, i)].re <= 0.0 {
            return Err(degenerate(y));
        }
    }
    let max_offdiag_ratio = offdiag_ratio(&entries);
    Ok(OrthogonalityReport {
        max_offdiag_ratio,
        gram: GramMatrix::from_entries(entries, nodes.to_vec())?,
    })
}

/// Sampling nodes with the kernel used in the cardinal series.
#[derive(Debug, Clone)]
pub struct SamplingScheme {
    nodes: Vec<Vec<f64>>,
    kernel: Kernel,
    transform: Option<TransformKernelSpec>,
    diag: Vec<f64>,
    max_offdiag_ratio: f64,
}

impl SamplingScheme {
    /// Checks orthogonality through the transform when one is given and
    /// through the Gram of `kernel` otherwise.
    pub fn new(kernel: Kernel, nodes: Vec<Vec<f64>>, transform: Option<TransformKernelSpec>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Argument("sampling scheme needs at least one node".into()));
        }
        let diag = nodes
            .iter()
            .map(|y| {
                let d = kernel.evaluate(y, y)?.re;
                if d > 0.0 {
                    Ok(d)
                } else {
                    Err(degenerate(y))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let max_offdiag_ratio = match &transform {
            Some(t) => orthogonality_check(t, &nodes)?.max_offdiag_ratio,
            None => offdiag_ratio(gram(&kernel, &nodes)?.entries()),
        };
        Ok(Self {
            nodes,
            kernel,
            transform,
            diag,
            max_offdiag_ratio,
        })
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn transform(&self) -> Option<&TransformKernelSpec> {
        self.transform.as_ref()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn max_offdiag_ratio(&self) -> f64 {
        self.max_offdiag_ratio
    }

    /// Set when the node representers are not orthogonal within
    /// [`ORTHO_TOLERANCE`]; reconstruction still works but is not exact at nodes.
    pub fn non_orthogonal(&self) -> bool {
        self.max_offdiag_ratio > ORTHO_TOLERANCE
    }

    pub fn sample<F>(&self, g: F) -> Vec<Complex64>
    where
        F: Fn(&[f64]) -> Complex64,
    {
        self.nodes.iter().map(|y| g(y)).collect()
    }
}

/// `Σ_n samples[n] K(x, y_n) / K(y_n, y_n)`.
pub fn kramer_reconstruct(scheme: &SamplingScheme, samples: &[Complex64], x: &[f64]) -> Result<Complex64> {
    if samples.len() != scheme.nodes.len() {
        return Err(Error::Argument(format!(
            "{} samples for {} nodes",
            samples.len(),
            scheme.nodes.len()
        )));
    }
    if let Some(n) = samples.iter().position(|s| !is_finite(*s)) {
        return Err(Error::Argument(format!("sample {n} is not finite")));
    }
    let mut acc = ComplexSum::new();
    for ((y, s), d) in scheme.nodes.iter().zip(samples).zip(&scheme.diag) {
        acc.add(s * scheme.kernel.evaluate(x, y)? / *d);
    }
    Ok(acc.value())
}

/// Reconstruction at every grid point, in parallel.
pub fn kramer_reconstruct_grid(
    scheme: &SamplingScheme,
    samples: &[Complex64],
    grid: &[Vec<f64>],
) -> Result<Vec<Complex64>> {
    grid.par_iter()
        .map(|x| kramer_reconstruct(scheme, samples, x))
        .collect()
}

/// `|reconstruction − g|` over the grid, where the samples are `g(y_n)`.
pub fn reconstruction_error_profile<F>(scheme: &SamplingScheme, target: F, grid: &[Vec<f64>]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let samples = scheme.sample(&target);
    let rec = kramer_reconstruct_grid(scheme, &samples, grid)?;
    Ok(rec.iter().zip(grid).map(|(r, x)| (r - target(x)).norm()).collect())
}
