//! Tikhonov-regularized fitting in the pre-image space `L²(Ω, μ)`.
//!
//! Minimizers have the form `a*(ω) = Σ_i α_i conj(k(x_i, ω))` and the
//! coefficients solve `H(H + γI)α = Hy` with `H = (K(x_i, x_j))_{ij}`.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{to_json_vec, JsonComplex};
use crate::kernel::{gram, GramMatrix};
use crate::linalg::{dot, hermitian_eigen, hermitian_part, mat_vec, norm, CMatrix, HermitianCholesky};
use crate::numeric::{is_finite, CompensatedSum, ComplexSum};
use crate::synthesis::{integrate_transform_kernel, TransformKernelSpec};

/// Eigenvalues below this multiple of `N·ε·λ_max` count as zero when H is singular.
const SINGULAR_FACTOR: f64 = 10.0;
const REFINEMENT_STEPS: usize = 2;

#[derive(Debug, Clone)]
pub struct InverseProblem {
    transform: TransformKernelSpec,
    sample_points: Vec<Vec<f64>>,
    data: Vec<Complex64>,
    gamma: f64,
    gram: OnceLock<GramMatrix>,
}

impl InverseProblem {
    pub fn new(
        transform: TransformKernelSpec,
        sample_points: Vec<Vec<f64>>,
        data: Vec<Complex64>,
        gamma: f64,
    ) -> Result<Self> {
        if sample_points.is_empty() {
            return Err(Error::Argument(
                "inverse problem needs at least one sample point".into(),
            ));
        }
        if sample_points.len() != data.len() {
            return Err(Error::Argument(format!(
                "{} sample points but {} data values",
                sample_points.len(),
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|y| !is_finite(*y)) {
            return Err(Error::Argument(format!("data value {i} is not finite")));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::Argument(format!(
                "gamma = {gamma} must be finite and nonnegative"
            )));
        }
        if let Some(x) = sample_points.iter().find(|x| x.len() != transform.domain_dim()) {
            return Err(Error::Argument(format!(
                "sample point {x:?} does not have dimension {}",
                transform.domain_dim()
            )));
        }
        Ok(Self {
            transform,
            sample_points,
            data,
            gamma,
            gram: OnceLock::new(),
        })
    }

    pub fn transform(&self) -> &TransformKernelSpec {
        &self.transform
    }

    pub fn sample_points(&self) -> &[Vec<f64>] {
        &self.sample_points
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `H`, assembled on first use from the integrated kernel and made
    /// exactly Hermitian.
    pub fn gram(&self) -> Result<&GramMatrix> {
        if let Some(g) = self.gram.get() {
            return Ok(g);
        }
        let kernel = integrate_transform_kernel(&self.transform);
        let raw = gram(&kernel, &self.sample_points)?;
        let g = GramMatrix::from_entries(hermitian_part(raw.entries()), self.sample_points.clone())?;
        Ok(self.gram.get_or_init(|| g))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SolveMethod {
    /// `(H + γI + jitter·I)α = y` by Cholesky.
    Cholesky { jitter: f64 },
    /// Pseudo-inverse of a singular `H` (only for `γ = 0`).
    MinimumNorm { rank: usize },
}

#[derive(Debug, Clone)]
pub struct InverseSolution {
    pub alpha: Vec<Complex64>,
    pub gram: GramMatrix,
    pub normal_residual: f64,
    pub fitted: Vec<Complex64>,
    pub objective: f64,
    pub method: SolveMethod,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionJson {
    pub alpha: Vec<JsonComplex>,
    pub normal_residual: f64,
    pub objective: f64,
    pub fitted: Vec<JsonComplex>,
}

impl InverseSolution {
    pub fn to_json(&self) -> SolutionJson {
        SolutionJson {
            alpha: to_json_vec(&self.alpha),
            normal_residual: self.normal_residual,
            objective: self.objective,
            fitted: to_json_vec(&self.fitted),
        }
    }
}

fn shifted(h: &CMatrix, gamma: f64) -> CMatrix {
    let mut a = h.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += gamma;
    }
    a
}

fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}

/// `‖H(H + γI)α − Hy‖ / max(‖Hy‖, ε)`
pub fn normal_residual(h: &CMatrix, gamma: f64, alpha: &[Complex64], y: &[Complex64]) -> f64 {
    let lhs = mat_vec(h, &mat_vec(&shifted(h, gamma), alpha));
    let hy = mat_vec(h, y);
    norm(&sub(&lhs, &hy)) / norm(&hy).max(f64::EPSILON)
}

fn minimum_norm(h: &CMatrix, y: &[Complex64]) -> (Vec<Complex64>, usize) {
    let (values, vectors) = hermitian_eigen(h);
    let n = values.len();
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = SINGULAR_FACTOR * n as f64 * f64::EPSILON * top;
    let mut alpha = vec![Complex64::new(0.0, 0.0); n];
    let mut rank = 0;
    for (k, &lam) in values.iter().enumerate() {
        if lam <= cut {
            continue;
        }
        rank += 1;
        let v = vectors.column(k);
        let coef: Complex64 = (0..n).map(|i| v[i].conj() * y[i]).sum::<Complex64>() / lam;
        for i in 0..n {
            alpha[i] += v[i] * coef;
        }
    }
    (alpha, rank)
}

pub fn solve_tikhonov(problem: &InverseProblem) -> Result<InverseSolution> {
    let gram = problem.gram()?.clone();
    let h = gram.entries();
    let y = problem.data();
    let gamma = problem.gamma();
    let n = y.len();
    let top = gram.trace().max(0.0);
    let singular = gamma == 0.0 && gram.min_eigenvalue() <= SINGULAR_FACTOR * n as f64 * f64::EPSILON * top;

    let (alpha, method) = if singular {
        let (alpha, rank) = minimum_norm(h, y);
        (alpha, SolveMethod::MinimumNorm { rank })
    } else {
        let a = shifted(h, gamma);
        let chol = HermitianCholesky::factor_with_ladder(&a)?;
        let mut alpha = chol.solve(y);
        for _ in 0..REFINEMENT_STEPS {
            let r = sub(y, &mat_vec(&a, &alpha));
            let d = chol.solve(&r);
            alpha = alpha.iter().zip(&d).map(|(p, q)| p + q).collect();
        }
        (alpha, SolveMethod::Cholesky { jitter: chol.jitter() })
    };
    let fitted = mat_vec(h, &alpha);
    let normal_residual = normal_residual(h, gamma, &alpha, y);
    let objective = fit_objective(y, &fitted, gamma, &alpha);
    Ok(InverseSolution {
        alpha,
        gram,
        normal_residual,
        fitted,
        objective,
        method,
    })
}

/// `Σ|y_i − fitted_i|² + γ α*Hα`, with `Hα = fitted`.
fn fit_objective(y: &[Complex64], fitted: &[Complex64], gamma: f64, alpha: &[Complex64]) -> f64 {
    let mut misfit = CompensatedSum::new();
    for (a, b) in y.iter().zip(fitted) {
        misfit.add((a - b).norm_sqr());
    }
    misfit.value() + gamma * dot(alpha, fitted).re
}

/// The loss as the expanded quadratic form
/// `α*H*Hα − α*H*y − y*Hα + y*y + γ α*Hα`.
pub fn objective_audit(problem: &InverseProblem, alpha: &[Complex64]) -> Result<f64> {
    if alpha.len() != problem.len() {
        return Err(Error::Argument(format!(
            "{} coefficients for {} data values",
            alpha.len(),
            problem.len()
        )));
    }
    let h = problem.gram()?.entries();
    let y = problem.data();
    // H is Hermitian, so H*Hα = H(Hα) and α*H*y = (Hα)*y
    let ha = mat_vec(h, alpha);
    let mut acc = ComplexSum::new();
    acc.add(dot(&ha, &ha));
    acc.add(-dot(&ha, y));
    acc.add(-dot(y, &ha));
    acc.add(dot(y, y));
    acc.add(dot(alpha, &ha) * problem.gamma());
    Ok(acc.value().re)
}

/// `a*(ω) = Σ_i α_i conj(k(x_i, ω))`.
#[derive(Debug, Clone)]
pub struct Preimage {
    alpha: Vec<Complex64>,
    points: Vec<Vec<f64>>,
    transform: TransformKernelSpec,
}

impl Preimage {
    pub fn evaluate(&self, w: &[f64]) -> Complex64 {
        let mut acc = ComplexSum::new();
        for (a, x) in self.alpha.iter().zip(&self.points) {
            acc.add(a * self.transform.k(x, w).conj());
        }
        acc.value()
    }

    /// `‖a*‖²` in `L²(Ω, μ)` by quadrature.
    pub fn l2_norm_sq(&self) -> Result<f64> {
        self.transform.measure().integrate_real(|w| self.evaluate(w).norm_sqr())
    }
}

pub fn preimage(solution: &InverseSolution, problem: &InverseProblem) -> Preimage {
    Preimage {
        alpha: solution.alpha.clone(),
        points: problem.sample_points().to_vec(),
        transform: problem.transform().clone(),
    }
}

/// `(S a)(x) = ∫ a(ω) k(x, ω) dμ(ω)`.
pub fn forward_apply<F>(spec: &TransformKernelSpec, a: F, x: &[f64]) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Complex64,
{
    if x.len() != spec.domain_dim() {
        return Err(Error::Argument(format!(
            "point {x:?} does not have dimension {}",
            spec.domain_dim()
        )));
    }
    spec.measure().integrate(|w| a(w) * spec.k(x, w))
}
