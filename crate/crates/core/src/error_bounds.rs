//! Power function of an observation set under an auxiliary kernel `G` on
//! the parameter space, and the resulting pointwise bound on the image error.

use std::cell::RefCell;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inverse::forward_apply;
use crate::io::format_real;
use crate::kernel::{gram, psd_check, GramMatrix, Kernel};
use crate::linalg::{dot, mat_vec, HermitianCholesky};
use crate::measure::ParamMeasure;
use crate::numeric::ComplexSum;
use crate::synthesis::TransformKernelSpec;

/// Negative squared power values above this are rounding and clamp to zero.
pub const POWER_CLAMP: f64 = 1e-10;
/// Relative slack of the bound check.
pub const BOUND_SLACK: f64 = 1e-9;

/// `G`, the observation nodes `W` and the measure for `L²` norms.
#[derive(Debug, Clone)]
pub struct PreimageModel {
    g: Kernel,
    w: Vec<Vec<f64>>,
    gram_w: Option<GramMatrix>,
    chol: Option<HermitianCholesky>,
    mu: ParamMeasure,
}

impl PreimageModel {
    pub fn new(g: Kernel, w: Vec<Vec<f64>>, mu: ParamMeasure) -> Result<Self> {
        if mu.dim() != g.domain_dim() {
            return Err(Error::Argument(format!(
                "measure dimension {} does not match kernel dimension {}",
                mu.dim(),
                g.domain_dim()
            )));
        }
        for i in 0..w.len() {
            if let Some(j) = (0..i).find(|&j| w[j] == w[i]) {
                return Err(Error::Argument(format!(
                    "observation nodes {j} and {i} coincide at {:?}",
                    w[i]
                )));
            }
        }
        let (gram_w, chol) = if w.is_empty() {
            (None, None)
        } else {
            let gm = gram(&g, &w)?;
            let rep = psd_check(&gm);
            if !rep.passed {
                return Err(Error::invariant(
                    "Gram matrix of G on W is not positive semidefinite",
                    serde_json::to_value(rep).ok(),
                ));
            }
            let chol = HermitianCholesky::factor_with_ladder(gm.entries())?;
            (Some(gm), Some(chol))
        };
        Ok(Self { g, w, gram_w, chol, mu })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.g
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.w
    }

    pub fn gram_w(&self) -> Option<&GramMatrix> {
        self.gram_w.as_ref()
    }

    pub fn measure(&self) -> &ParamMeasure {
        &self.mu
    }

    /// `(G(ω, w_j))_j`
    fn column(&self, om: &[f64]) -> Result<Vec<Complex64>> {
        self.w.iter().map(|wj| self.g.evaluate(om, wj)).collect()
    }

    /// `P_W(ω)² = G(ω, ω) − g* G_W⁻¹ g`, before clamping.
    pub fn power_sq(&self, om: &[f64]) -> Result<f64> {
        let diag = self.g.evaluate(om, om)?.re;
        let Some(chol) = &self.chol else {
            return Ok(diag);
        };
        let z = chol.forward(&self.column(om)?);
        Ok(diag - dot(&z, &z).re)
    }
}

/// `P_W(ω)`, with squared values in `[-1e-10, 0)` clamped to zero.
pub fn power_function(model: &PreimageModel, om: &[f64]) -> Result<f64> {
    let p2 = model.power_sq(om)?;
    if p2 < -POWER_CLAMP {
        return Err(Error::NumericalFailure(format!(
            "squared power function is {p2:e} at ω = {om:?}"
        )));
    }
    Ok(p2.max(0.0).sqrt())
}

/// `Σ_j c_j G(ω, z_j)`.
#[derive(Debug, Clone)]
pub struct Representer {
    g: Kernel,
    centers: Vec<Vec<f64>>,
    coeffs: Vec<Complex64>,
}

impl Representer {
    pub fn new(g: Kernel, centers: Vec<Vec<f64>>, coeffs: Vec<Complex64>) -> Result<Self> {
        if centers.len() != coeffs.len() {
            return Err(Error::Argument(format!(
                "{} centers but {} coefficients",
                centers.len(),
                coeffs.len()
            )));
        }
        Ok(Self { g, centers, coeffs })
    }

    pub fn evaluate(&self, om: &[f64]) -> Result<Complex64> {
        let mut acc = ComplexSum::new();
        for (c, z) in self.coeffs.iter().zip(&self.centers) {
            acc.add(c * self.g.evaluate(om, z)?);
        }
        Ok(acc.value())
    }

    /// `‖a‖_G = √(c* G_Z c)`.
    pub fn g_norm(&self) -> Result<f64> {
        if self.centers.is_empty() {
            return Ok(0.0);
        }
        let gz = gram(&self.g, &self.centers)?;
        let q = dot(&self.coeffs, &mat_vec(gz.entries(), &self.coeffs)).re;
        Ok(q.max(0.0).sqrt())
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
}

/// The function in the span of `G(·, w_j)` matching `values` on `W`.
pub fn min_norm_interpolant(model: &PreimageModel, values: &[Complex64]) -> Result<Representer> {
    if values.len() != model.w.len() {
        return Err(Error::Argument(format!(
            "{} values for {} observation nodes",
            values.len(),
            model.w.len()
        )));
    }
    let beta = match &model.chol {
        Some(chol) => chol.solve(values),
        None => Vec::new(),
    };
    Representer::new(model.g.clone(), model.w.clone(), beta)
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerReport {
    /// Quadrature nodes of `μ` at which the power function is tabulated.
    pub grid: Vec<Vec<f64>>,
    pub power_values: Vec<f64>,
    pub power_l2: f64,
    pub a_norm: f64,
    pub kx_l2: f64,
    pub bound: f64,
    pub observed: f64,
    /// `observed / bound`, with `0/0 = 0`.
    pub ratio: f64,
}

impl PowerReport {
    /// `omega,power` rows, one per grid node; `omega_i` columns when `dim Ω > 1`.
    pub fn power_csv(&self) -> String {
        let dim = self.grid.first().map_or(1, Vec::len);
        let mut out = String::new();
        let cols: Vec<String> = (0..dim)
            .map(|i| {
                if dim == 1 {
                    "omega".to_string()
                } else {
                    format!("omega_{i}")
                }
            })
            .collect();
        out.push_str(&cols.join(","));
        out.push_str(",power\n");
        for (w, p) in self.grid.iter().zip(&self.power_values) {
            let row: Vec<String> = w.iter().map(|v| format_real(*v)).collect();
            out.push_str(&row.join(","));
            out.push(',');
            out.push_str(&format_real(*p));
            out.push('\n');
        }
        out
    }
}

/// `‖d‖` in `L²(Ω, μ)` for `d(ω) = √G(ω, ω)`.
pub fn diagonal_l2(model: &PreimageModel) -> Result<f64> {
    let err = RefCell::new(None);
    let v = model.mu.integrate_real(|om| match model.g.evaluate(om, om) {
        Ok(z) => z.re,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            0.0
        }
    })?;
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(v.max(0.0).sqrt()),
    }
}

/// Assembles the three factors of
/// `|S(a)(x) − S(a_W)(x)| ≤ ‖a‖_G ‖P_W‖ ‖k(x, ·)‖` and checks the inequality.
pub fn pointwise_bound(
    model: &PreimageModel,
    transform: &TransformKernelSpec,
    a: &Representer,
    x: &[f64],
) -> Result<PowerReport> {
    if transform.measure() != model.measure() {
        return Err(Error::Argument(
            "the transform and the preimage model must share one measure".into(),
        ));
    }
    let grid: Vec<Vec<f64>> = model.mu.nodes().map(<[f64]>::to_vec).collect();
    let power_values = grid
        .iter()
        .map(|om| power_function(model, om))
        .collect::<Result<Vec<_>>>()?;
    let mut p2 = crate::numeric::CompensatedSum::new();
    for (p, w) in power_values.iter().zip(model.mu.weights()) {
        p2.add(w * p * p);
    }
    let power_l2 = p2.value().sqrt();
    let a_norm = a.g_norm()?;
    let kx_l2 = transform.l2_norm_sq(x)?.max(0.0).sqrt();
    let bound = a_norm * power_l2 * kx_l2;

    let values = model.w.iter().map(|w| a.evaluate(w)).collect::<Result<Vec<_>>>()?;
    let a_w = min_norm_interpolant(model, &values)?;
    let eval_err = RefCell::new(None);
    let diff = |om: &[f64]| match (a.evaluate(om), a_w.evaluate(om)) {
        (Ok(p), Ok(q)) => p - q,
        (Err(e), _) | (_, Err(e)) => {
            eval_err.borrow_mut().get_or_insert(e);
            Complex64::new(0.0, 0.0)
        }
    };
    let observed = forward_apply(transform, diff, x)?.norm();
    if let Some(e) = eval_err.into_inner() {
        return Err(e);
    }
    let ratio = if bound == 0.0 && observed == 0.0 {
        0.0
    } else {
        observed / bound
    };
    let report = PowerReport {
        grid,
        power_values,
        power_l2,
        a_norm,
        kx_l2,
        bound,
        observed,
        ratio,
    };
    if observed > bound * (1.0 + BOUND_SLACK) {
        return Err(Error::invariant(
            format!("observed error {observed:e} exceeds the bound {bound:e}"),
            serde_json::to_value(&report).ok(),
        ));
    }
    Ok(report)
}

/// `(‖a‖_{L²(μ)}, ‖a‖_G ‖d‖_{L²(μ)})` for the embedding estimate.
pub fn embedding_check(model: &PreimageModel, a: &Representer) -> Result<(f64, f64)> {
    let vals = model.mu.nodes().map(|om| a.evaluate(om)).collect::<Result<Vec<_>>>()?;
    let l2 = model
        .mu
        .weights()
        .iter()
        .zip(&vals)
        .map(|(w, v)| w * v.norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok((l2, a.g_norm()? * diagonal_l2(model)?))
}
