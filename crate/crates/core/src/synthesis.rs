//! Kernel synthesis: transform kernels, mixtures over a parameter measure,
//! truncated expansions and the radial scale mixtures.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::bessel::schoenberg_basis;
use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelProvenance};
use crate::measure::ParamMeasure;
use crate::numeric::{euclidean_distance, is_finite, sinc_pi, CompensatedSum, ComplexSum};

/// Truncation radius of the default Sobolev discretization.
pub const SOBOLEV_DEFAULT_RADIUS: f64 = 50.0;
/// Node count of the default Sobolev discretization.
pub const SOBOLEV_DEFAULT_NODES: usize = 2000;

type TransformFn = dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync;

/// An integral-transform kernel `k(x, ω)` together with the measure on `Ω`.
#[derive(Clone)]
pub struct TransformKernelSpec {
    k: Arc<TransformFn>,
    measure: ParamMeasure,
    domain_dim: usize,
    label: String,
}

impl fmt::Debug for TransformKernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformKernelSpec")
            .field("label", &self.label)
            .field("domain_dim", &self.domain_dim)
            .field("atoms", &self.measure.len())
            .finish()
    }
}

impl TransformKernelSpec {
    pub fn new<F>(domain_dim: usize, measure: ParamMeasure, label: impl Into<String>, k: F) -> Result<Self>
    where
        F: Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    {
        if domain_dim == 0 {
            return Err(Error::Argument("domain dimension must be positive".into()));
        }
        Ok(Self {
            k: Arc::new(k),
            measure,
            domain_dim,
            label: label.into(),
        })
    }

    /// `k(x, ω) = exp(2πi x·ω)`; requires `dim Ω = dim X`.
    pub fn fourier(measure: ParamMeasure) -> Result<Self> {
        let dim = measure.dim();
        Self::new(dim, measure, "fourier", |x, w| {
            let phase: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
            Complex64::from_polar(1.0, 2.0 * PI * phase)
        })
    }

    /// Fourier transform restricted to `[-b, b]` with `nodes` Gauss–Legendre points.
    pub fn paley_wiener(half_bandwidth: f64, nodes: usize) -> Result<Self> {
        check_bandwidth(half_bandwidth)?;
        let m = ParamMeasure::gauss_legendre(-half_bandwidth, half_bandwidth, nodes)?;
        Ok(Self::fourier(m)?.with_label(format!("paley_wiener_transform(b={half_bandwidth})")))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn k(&self, x: &[f64], w: &[f64]) -> Complex64 {
        (self.k)(x, w)
    }

    pub fn measure(&self) -> &ParamMeasure {
        &self.measure
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.domain_dim {
            return Err(Error::Argument(format!(
                "transform {:?} expects points of dimension {}, got {}",
                self.label,
                self.domain_dim,
                x.len()
            )));
        }
        Ok(())
    }

    /// `(k(x, ω_j))_j` over the atoms of the measure.
    pub fn sections(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        self.check_point(x)?;
        self.measure
            .nodes()
            .enumerate()
            .map(|(j, w)| {
                let v = self.k(x, w);
                if is_finite(v) {
                    Ok(v)
                } else {
                    Err(Error::Evaluation(format!(
                        "k(x, ω) is {v} at node {j} ({w:?}) for x = {x:?}"
                    )))
                }
            })
            .collect()
    }

    /// `‖k(x, ·)‖²` in `L²(Ω, μ)`.
    pub fn l2_norm_sq(&self, x: &[f64]) -> Result<f64> {
        let s = self.sections(x)?;
        let mut acc = CompensatedSum::new();
        for (v, w) in s.iter().zip(self.measure.weights()) {
            acc.add(w * v.norm_sqr());
        }
        Ok(acc.value())
    }

    /// Integrability hypothesis checked at the given points.
    pub fn check_points(&self, points: &[Vec<f64>]) -> Result<()> {
        for x in points {
            let n = self.l2_norm_sq(x)?;
            if !n.is_finite() {
                return Err(Error::Domain(format!("‖k(x, ·)‖² is not finite at x = {x:?}")));
            }
        }
        Ok(())
    }
}

/// `K(x, y) = ∫ k(x, ω) conj(k(y, ω)) dμ(ω)`.
pub fn integrate_transform_kernel(spec: &TransformKernelSpec) -> Kernel {
    let spec = spec.clone();
    let label = format!("integrated({})", spec.label);
    Kernel::new(spec.domain_dim, KernelProvenance::Integrated, label, move |x, y| {
        let mut acc = ComplexSum::new();
        for (j, (w, &mass)) in spec.measure.nodes().zip(spec.measure.weights()).enumerate() {
            let v = spec.k(x, w) * spec.k(y, w).conj();
            if !is_finite(v) {
                return Err(Error::Evaluation(format!(
                    "transform integrand is {v} at node {j} ({w:?}) for the pair x = {x:?}, y = {y:?}"
                )));
            }
            acc.add(v * mass);
        }
        Ok(acc.value())
    })
}

type FamilyFn = dyn Fn(&[f64]) -> Result<Kernel> + Send + Sync;

/// A family `ω ↦ K_ω` of kernels and a measure on the parameters.
#[derive(Clone)]
pub struct KernelFamilySpec {
    base: Arc<FamilyFn>,
    measure: ParamMeasure,
    domain_dim: usize,
}

impl KernelFamilySpec {
    pub fn new<F>(domain_dim: usize, measure: ParamMeasure, base: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Kernel> + Send + Sync + 'static,
    {
        Self {
            base: Arc::new(base),
            measure,
            domain_dim,
        }
    }

    /// The counting measure weighted by `weights` over an explicit kernel list.
    pub fn from_kernels(kernels: Vec<Kernel>, weights: &[f64]) -> Result<Self> {
        let Some(first) = kernels.first() else {
            return Err(Error::Argument("kernel list is empty".into()));
        };
        let domain_dim = first.domain_dim();
        let index: Vec<Vec<f64>> = (0..kernels.len()).map(|i| vec![i as f64]).collect();
        let measure = ParamMeasure::from_atoms(&index, weights)?;
        Ok(Self::new(domain_dim, measure, move |w| {
            Ok(kernels[w[0] as usize].clone())
        }))
    }

    pub fn measure(&self) -> &ParamMeasure {
        &self.measure
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    /// Integrability hypothesis at the given points: every diagonal value is finite.
    pub fn check_points(&self, points: &[Vec<f64>]) -> Result<()> {
        let kernel = integrate_kernel_family(self)?;
        for x in points {
            kernel.evaluate(x, x)?;
        }
        Ok(())
    }
}

/// `K(x, y) = Σ_j w_j K_{ω_j}(x, y)`.
pub fn integrate_kernel_family(spec: &KernelFamilySpec) -> Result<Kernel> {
    let mut members = Vec::with_capacity(spec.measure.len());
    for (j, (w, &mass)) in spec.measure.nodes().zip(spec.measure.weights()).enumerate() {
        let k = (spec.base)(w)?;
        if k.domain_dim() != spec.domain_dim {
            return Err(Error::Argument(format!(
                "family member at node {j} ({w:?}) has domain dimension {}, expected {}",
                k.domain_dim(),
                spec.domain_dim
            )));
        }
        members.push((mass, k));
    }
    let label = format!("mixture({} atoms)", members.len());
    Ok(Kernel::new(
        spec.domain_dim,
        KernelProvenance::Mixture,
        label,
        move |x, y| {
            let mut acc = ComplexSum::new();
            for (j, (mass, k)) in members.iter().enumerate() {
                let v = k
                    .evaluate(x, y)
                    .map_err(|e| Error::Evaluation(format!("family member {j} at x = {x:?}, y = {y:?}: {e}")))?;
                acc.add(v * *mass);
            }
            Ok(acc.value())
        },
    ))
}

type BasisFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// Truncated expansion `Σ_{n≤N} λ_n φ_n(x) conj(φ_n(y))`.
#[derive(Clone)]
pub struct ExpansionSpec {
    basis: Vec<Arc<BasisFn>>,
    weights: Vec<f64>,
    truncation: usize,
    domain_dim: usize,
}

impl ExpansionSpec {
    pub fn new(domain_dim: usize, basis: Vec<Arc<BasisFn>>, weights: Vec<f64>, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::Argument("expansion truncation must be positive".into()));
        }
        if basis.len() < truncation || weights.len() < truncation {
            return Err(Error::Argument(format!(
                "truncation {truncation} exceeds {} basis functions / {} weights",
                basis.len(),
                weights.len()
            )));
        }
        if let Some((n, w)) = weights[..truncation]
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::Domain(format!(
                "expansion weight λ_{} = {w} must be finite and positive",
                n + 1
            )));
        }
        Ok(Self {
            basis,
            weights,
            truncation,
            domain_dim,
        })
    }

    /// `1, √2 cos(πx), √2 cos(2πx), …` on `[0, 1]`.
    pub fn cosine(weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        let basis = (0..n).map(|k| cosine_basis(k)).collect();
        Self::new(1, basis, weights, n)
    }

    /// `exp(2πi k x)` for `k = 0, 1, …`.
    pub fn fourier(weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        let basis = (0..n)
            .map(|k| {
                let f: Arc<BasisFn> = Arc::new(move |x: &[f64]| Complex64::from_polar(1.0, 2.0 * PI * k as f64 * x[0]));
                f
            })
            .collect();
        Self::new(1, basis, weights, n)
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Same basis and weights with a different truncation `N`.
    pub fn truncated(self, truncation: usize) -> Result<Self> {
        Self::new(self.domain_dim, self.basis, self.weights, truncation)
    }
}

fn cosine_basis(k: usize) -> Arc<BasisFn> {
    if k == 0 {
        Arc::new(|_: &[f64]| Complex64::new(1.0, 0.0))
    } else {
        Arc::new(move |x: &[f64]| Complex64::new(2f64.sqrt() * (k as f64 * PI * x[0]).cos(), 0.0))
    }
}

pub fn expansion_kernel(spec: &ExpansionSpec) -> Kernel {
    let spec = spec.clone();
    let label = format!("expansion(N={})", spec.truncation);
    Kernel::new(spec.domain_dim, KernelProvenance::Expansion, label, move |x, y| {
        let mut acc = ComplexSum::new();
        for n in 0..spec.truncation {
            let (a, b) = ((spec.basis[n])(x), (spec.basis[n])(y));
            if !is_finite(a) || !is_finite(b) {
                return Err(Error::Evaluation(format!(
                    "basis function φ_{} is not finite at x = {x:?} or y = {y:?}",
                    n + 1
                )));
            }
            acc.add(a * b.conj() * spec.weights[n]);
        }
        Ok(acc.value())
    })
}

fn check_bandwidth(b: f64) -> Result<()> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::Domain(format!("half bandwidth {b} must be finite and positive")));
    }
    Ok(())
}

/// `K(x, y) = sin(2πb(x−y)) / (π(x−y))`, so `b = 1/2` gives `sinc(π(x−y))`.
pub fn paley_wiener_kernel(half_bandwidth: f64) -> Result<Kernel> {
    check_bandwidth(half_bandwidth)?;
    let b = half_bandwidth;
    Ok(Kernel::from_fn(
        1,
        KernelProvenance::ClosedForm,
        format!("paley_wiener(b={b})"),
        move |x, y| Complex64::new(2.0 * b * sinc_pi(2.0 * b * (x[0] - y[0])), 0.0),
    ))
}

/// Transform pair behind the Sobolev kernel: `k(x, ω) = exp(2πi x·ω)` under
/// `(1 + ‖ω‖²)^{-m} dω` restricted to `[-R, R]^d`.
pub fn sobolev_transform(m: u32, d: usize, radius: f64, nodes_per_dim: usize) -> Result<TransformKernelSpec> {
    if d == 0 || m == 0 {
        return Err(Error::Argument(
            "sobolev order m and dimension d must be positive".into(),
        ));
    }
    if d >= 2 * m as usize {
        return Err(Error::Domain(format!(
            "sobolev kernel needs d < 2m for integrability, got d = {d}, m = {m}"
        )));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Domain(format!(
            "truncation radius {radius} must be finite and positive"
        )));
    }
    let measure = ParamMeasure::truncated(radius, nodes_per_dim, d)?
        .weighted_transform(|w| sobolev_density(m, w.iter().map(|v| v * v).sum()))?;
    Ok(TransformKernelSpec::fourier(measure)?.with_label(format!("sobolev_transform(m={m}, d={d})")))
}

fn sobolev_density(m: u32, r2: f64) -> f64 {
    (1.0 + r2).powi(-(m as i32))
}

/// `K(x, y) = ∫ (1 + ‖ω‖²)^{-m} exp(2πi (x−y)·ω) dω`.
///
/// The integral over `[-R, R]^d` uses tensor Gauss–Legendre. For `d = 1` the
/// two tails `|ω| > R` are added analytically; for `d > 1` the truncation
/// error is left in place and shrinks like `R^{d-2m}`.
pub fn sobolev_kernel(m: u32, d: usize, radius: f64, nodes_per_dim: usize) -> Result<Kernel> {
    let spec = sobolev_transform(m, d, radius, nodes_per_dim)?;
    let measure = spec.measure().clone();
    let label = format!("sobolev(m={m}, d={d}, R={radius}, n={nodes_per_dim})");
    Ok(Kernel::new(d, KernelProvenance::Integrated, label, move |x, y| {
        let delta: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let mut v = measure.integrate(|w| {
            let phase: f64 = delta.iter().zip(w).map(|(a, b)| a * b).sum();
            Complex64::from_polar(1.0, 2.0 * PI * phase)
        })?;
        if d == 1 {
            v += sobolev_tail(m, radius, 2.0 * PI * delta[0].abs());
        }
        Ok(v)
    }))
}

/// `2 ∫_R^∞ (1+ω²)^{-m} cos(aω) dω`.
///
/// On `[R, R₂]` with `R₂ = max(R, 2/a)` the integrand oscillates less than
/// two radians and is integrated on a logarithmic grid. Beyond `R₂` the
/// contour turns to `R₂ + it`, where `exp(iaω)` decays like `exp(-at)`.
fn sobolev_tail(m: u32, radius: f64, a: f64) -> f64 {
    const PANEL_NODES: usize = 24;
    let g = |w: Complex64| (Complex64::new(1.0, 0.0) + w * w).powi(-(m as i32));
    let gl = gl_unit(PANEL_NODES);
    if a == 0.0 {
        // ω = R/t on t ∈ (0, 1]
        let mut acc = CompensatedSum::new();
        for &(t, w) in &gl {
            let om = radius / t;
            acc.add(w * g(Complex64::new(om, 0.0)).re * radius / (t * t));
        }
        return 2.0 * acc.value();
    }
    let r2 = radius.max(2.0 / a);
    let mut acc = CompensatedSum::new();
    // ω = R e^s on s ∈ [0, ln(R₂/R)], in panels of unit length
    let span = (r2 / radius).ln();
    let panels = span.ceil() as usize;
    for p in 0..panels {
        let lo = p as f64;
        let hi = (lo + 1.0).min(span);
        for &(t, w) in &gl {
            let s = lo + (hi - lo) * t;
            let om = radius * s.exp();
            acc.add((hi - lo) * w * om * g(Complex64::new(om, 0.0)).re * (a * om).cos());
        }
    }
    let middle = acc.value();
    // ∫_{R₂}^∞ g(ω) e^{iaω} dω = (i/a) e^{iaR₂} ∫_0^∞ g(R₂ + is/a) e^{-s} ds
    let mut contour = ComplexSum::new();
    let upper = 40.0;
    for p in 0..4 {
        let (lo, hi) = (p as f64 * upper / 4.0, (p + 1) as f64 * upper / 4.0);
        for &(t, w) in &gl {
            let s = lo + (hi - lo) * t;
            contour.add(g(Complex64::new(r2, s / a)) * ((hi - lo) * w * (-s).exp()));
        }
    }
    let far = Complex64::new(0.0, 1.0 / a) * Complex64::from_polar(1.0, a * r2) * contour.value();
    2.0 * (middle + far.re)
}

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
fn gl_unit(n: usize) -> Vec<(f64, f64)> {
    let m = ParamMeasure::gauss_legendre(0.0, 1.0, n).expect("valid rule");
    m.nodes().map(|w| w[0]).zip(m.weights().iter().copied()).collect()
}

type ProfileFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A radial profile `ψ: [0, ∞) → ℝ`.
#[derive(Clone)]
pub struct RadialProfile {
    f: Arc<ProfileFn>,
    provenance: KernelProvenance,
    label: String,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile").field("label", &self.label).finish()
    }
}

impl RadialProfile {
    pub fn new<F>(label: impl Into<String>, provenance: KernelProvenance, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            provenance,
            label: label.into(),
        }
    }

    pub fn evaluate(&self, delta: f64) -> Result<f64> {
        if delta.is_nan() || delta < 0.0 {
            return Err(Error::Domain(format!(
                "radial profile {:?} evaluated at δ = {delta}; δ must be nonnegative",
                self.label
            )));
        }
        Ok((self.f)(delta))
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

fn scalar_scales(measure: &ParamMeasure) -> Result<Vec<(f64, f64)>> {
    if measure.dim() != 1 {
        return Err(Error::Argument(format!(
            "scale measure must be one-dimensional, got dimension {}",
            measure.dim()
        )));
    }
    Ok(measure
        .nodes()
        .map(|w| w[0])
        .zip(measure.weights().iter().copied())
        .collect())
}

/// `ψ(δ) = ∫ Ω_d(ωδ) dμ(ω)`.
pub fn schoenberg_rbf(d: usize, scale_measure: &ParamMeasure) -> Result<RadialProfile> {
    if d == 0 {
        return Err(Error::Argument("schoenberg dimension must be positive".into()));
    }
    let atoms = scalar_scales(scale_measure)?;
    Ok(RadialProfile::new(
        format!("schoenberg(d={d}, {} atoms)", atoms.len()),
        KernelProvenance::Mixture,
        move |delta| {
            let mut acc = CompensatedSum::new();
            for &(om, w) in &atoms {
                acc.add(w * schoenberg_basis(d, om * delta));
            }
            acc.value()
        },
    ))
}

/// `ψ(δ) = ∫ exp(-(ωδ)²) dμ(ω)`.
pub fn gaussian_scale_mixture(scale_measure: &ParamMeasure) -> Result<RadialProfile> {
    let atoms = scalar_scales(scale_measure)?;
    Ok(RadialProfile::new(
        format!("gaussian_mixture({} atoms)", atoms.len()),
        KernelProvenance::Mixture,
        move |delta| {
            let mut acc = CompensatedSum::new();
            for &(om, w) in &atoms {
                let z = om * delta;
                acc.add(w * (-z * z).exp());
            }
            acc.value()
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
}

/// `K(x, y) = ψ(‖x − y‖)`.
pub fn radial_to_kernel(profile: &RadialProfile, metric: Metric, domain_dim: usize) -> Kernel {
    let profile = profile.clone();
    let label = format!("radial({})", profile.label);
    Kernel::from_fn(domain_dim, profile.provenance, label, move |x, y| {
        let r = match metric {
            Metric::Euclidean => euclidean_distance(x, y),
        };
        Complex64::new((profile.f)(r), 0.0)
    })
}
