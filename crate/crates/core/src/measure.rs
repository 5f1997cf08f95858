//! Discrete measures on a parameter space.
//!
//! Every measure is a finite set of atoms `(node, weight)`. Continuous
//! measures are represented by quadrature rules; improper integrals over the
//! real line are truncated to `[-R, R]` with an explicit radius.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, is_finite, ComplexSum};

/// Default node count for bounded intervals.
pub const DEFAULT_INTERVAL_NODES: usize = 64;
/// Default node count for truncations of the real line.
pub const DEFAULT_TRUNCATION_NODES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ExplicitAtoms,
    GaussLegendre,
    Trapezoid,
    TruncatedDomain,
}

/// Atomic measure: nodes (fixed dimension, stored flat) with nonnegative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamMeasure {
    coords: Vec<f64>,
    dim: usize,
    weights: Vec<f64>,
    provenance: Provenance,
    total_mass: f64,
}

impl ParamMeasure {
    fn build(coords: Vec<f64>, dim: usize, weights: Vec<f64>, provenance: Provenance) -> Self {
        let total_mass = compensated_sum(weights.iter().copied());
        Self {
            coords,
            dim,
            weights,
            provenance,
            total_mass,
        }
    }

    /// Measure with exactly the given atoms, in the given order.
    pub fn from_atoms(nodes: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::Argument(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        let dim = nodes.first().map_or(1, Vec::len);
        if dim == 0 {
            return Err(Error::Argument("parameter points must have dimension ≥ 1".into()));
        }
        let mut coords = Vec::with_capacity(nodes.len() * dim);
        for (j, node) in nodes.iter().enumerate() {
            if node.len() != dim {
                return Err(Error::Argument(format!(
                    "node {j} has dimension {} but node 0 has dimension {dim}",
                    node.len()
                )));
            }
            if node.iter().any(|c| !c.is_finite()) {
                return Err(Error::Domain(format!("node {j} has a non-finite coordinate")));
            }
            coords.extend_from_slice(node);
        }
        for (j, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::Domain(format!("weight {j} is not finite")));
            }
            if w < 0.0 {
                return Err(Error::Domain(format!("weight {j} is negative ({w})")));
            }
        }
        Ok(Self::build(coords, dim, weights.to_vec(), Provenance::ExplicitAtoms))
    }

    /// Atoms on the real line.
    pub fn from_scalar_atoms(nodes: &[f64], weights: &[f64]) -> Result<Self> {
        let nodes: Vec<Vec<f64>> = nodes.iter().map(|&w| vec![w]).collect();
        Self::from_atoms(&nodes, weights)
    }

    /// n-point Gauss–Legendre rule on `[a, b]`.
    pub fn gauss_legendre(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::Domain(format!("gauss_legendre needs a < b, got [{a}, {b}]")));
        }
        if n == 0 {
            return Err(Error::Argument("gauss_legendre needs n ≥ 1".into()));
        }
        let (t, w) = legendre_rule(n);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let coords = t.iter().map(|&t| mid + half * t).collect();
        let weights = w.iter().map(|&w| half * w).collect();
        Ok(Self::build(coords, 1, weights, Provenance::GaussLegendre))
    }

    /// Composite trapezoid rule with n ≥ 2 equispaced nodes on `[a, b]`.
    pub fn trapezoid(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::Domain(format!("trapezoid needs a < b, got [{a}, {b}]")));
        }
        if n < 2 {
            return Err(Error::Argument("trapezoid needs n ≥ 2".into()));
        }
        let h = (b - a) / (n - 1) as f64;
        let coords = (0..n).map(|j| if j == n - 1 { b } else { a + h * j as f64 }).collect();
        let weights = (0..n).map(|j| if j == 0 || j == n - 1 { 0.5 * h } else { h }).collect();
        Ok(Self::build(coords, 1, weights, Provenance::Trapezoid))
    }

    /// Lebesgue measure on `[-radius, radius]^dim` discretized by a tensor
    /// Gauss–Legendre rule with `nodes_per_dim` points per axis.
    pub fn truncated(radius: f64, nodes_per_dim: usize, dim: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Domain(format!(
                "truncation radius must be positive, got {radius}"
            )));
        }
        if dim == 0 {
            return Err(Error::Argument("dimension must be ≥ 1".into()));
        }
        let axis = Self::gauss_legendre(-radius, radius, nodes_per_dim)?;
        let mut m = axis.clone();
        for _ in 1..dim {
            m = m.tensor(&axis);
        }
        m.provenance = Provenance::TruncatedDomain;
        Ok(m)
    }

    /// Product measure; nodes are concatenated coordinates.
    pub fn tensor(&self, other: &ParamMeasure) -> ParamMeasure {
        let dim = self.dim + other.dim;
        let mut coords = Vec::with_capacity(self.len() * other.len() * dim);
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for i in 0..self.len() {
            for j in 0..other.len() {
                coords.extend_from_slice(self.node(i));
                coords.extend_from_slice(other.node(j));
                weights.push(self.weights[i] * other.weights[j]);
            }
        }
        Self::build(coords, dim, weights, self.provenance)
    }

    /// Same nodes, each weight multiplied by `density(node)`.
    pub fn weighted_transform<F>(&self, density: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut weights = Vec::with_capacity(self.len());
        for (j, (node, &w)) in self.nodes().zip(&self.weights).enumerate() {
            let d = density(node);
            if !d.is_finite() || d < 0.0 {
                return Err(Error::Domain(format!(
                    "density is {d} at node {j} ({node:?}); it must be finite and nonnegative"
                )));
            }
            weights.push(w * d);
        }
        Ok(Self::build(self.coords.clone(), self.dim, weights, self.provenance))
    }

    /// `Σ_j w_j f(ω_j)` with compensated summation.
    pub fn integrate<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let mut acc = ComplexSum::new();
        for (j, (node, &w)) in self.nodes().zip(&self.weights).enumerate() {
            let v = f(node);
            if !is_finite(v) {
                return Err(Error::Evaluation(format!("integrand is {v} at node {j} ({node:?})")));
            }
            acc.add(v * w);
        }
        Ok(acc.value())
    }

    pub fn integrate_real<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        self.integrate(|w| Complex64::new(f(w), 0.0)).map(|z| z.re)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self, j: usize) -> &[f64] {
        &self.coords[j * self.dim..(j + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1], ascending.
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for iter in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) || iter == 99 {
                dp = legendre_with_derivative(n, x).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeRepr {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
struct MeasureRepr {
    nodes: Vec<NodeRepr>,
    weights: Vec<f64>,
    #[serde(default = "explicit")]
    provenance: Provenance,
}

fn explicit() -> Provenance {
    Provenance::ExplicitAtoms
}

impl Serialize for ParamMeasure {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let nodes = self
            .nodes()
            .map(|n| {
                if self.dim == 1 {
                    NodeRepr::Scalar(n[0])
                } else {
                    NodeRepr::Vector(n.to_vec())
                }
            })
            .collect();
        MeasureRepr {
            nodes,
            weights: self.weights.clone(),
            provenance: self.provenance,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ParamMeasure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MeasureRepr::deserialize(deserializer)?;
        let nodes: Vec<Vec<f64>> = repr
            .nodes
            .into_iter()
            .map(|n| match n {
                NodeRepr::Scalar(v) => vec![v],
                NodeRepr::Vector(v) => v,
            })
            .collect();
        let mut m = ParamMeasure::from_atoms(&nodes, &repr.weights).map_err(D::Error::custom)?;
        m.provenance = repr.provenance;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dirac_measure() {
        let m = ParamMeasure::from_scalar_atoms(&[0.7], &[1.0]).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.node(0), &[0.7]);
        assert_eq!(m.total_mass(), 1.0);
        let v = m.integrate(|w| Complex64::new(w[0] * 3.0, 1.0)).unwrap();
        assert_eq!(v, Complex64::new(0.7 * 3.0, 1.0));
    }

    #[test]
    fn zero_weights_give_zero_measure() {
        let m = ParamMeasure::from_scalar_atoms(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(m.total_mass(), 0.0);
        assert_eq!(
            m.integrate(|w| Complex64::new(w[0], -w[0])).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn two_atom_mass() {
        let m = ParamMeasure::from_scalar_atoms(&[0.5, 2.0], &[0.5, 0.5]).unwrap();
        assert_eq!(m.total_mass(), 1.0);
        assert_eq!(m.provenance(), Provenance::ExplicitAtoms);
    }

    #[test]
    fn from_atoms_rejects_bad_input() {
        assert!(matches!(
            ParamMeasure::from_scalar_atoms(&[1.0, 2.0], &[1.0]),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            ParamMeasure::from_scalar_atoms(&[1.0], &[-0.1]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            ParamMeasure::from_atoms(&[vec![1.0], vec![1.0, 2.0]], &[1.0, 1.0]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn gauss_legendre_one_and_two_points() {
        let m = ParamMeasure::gauss_legendre(-1.0, 1.0, 1).unwrap();
        assert_eq!(m.node(0), &[0.0]);
        assert!((m.weights()[0] - 2.0).abs() < 1e-15);

        // Two-point conditions: w0 + w1 = 2, w0 x0 + w1 x1 = 0,
        // w0 x0² + w1 x1² = 2/3, w0 x0³ + w1 x1³ = 0  ⇒  x = ±1/√3, w = 1.
        let m = ParamMeasure::gauss_legendre(-1.0, 1.0, 2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((m.node(0)[0] + r).abs() < 1e-15);
        assert!((m.node(1)[0] - r).abs() < 1e-15);
        assert!((m.weights()[0] - 1.0).abs() < 1e-15);
        assert!((m.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_square() {
        let m = ParamMeasure::gauss_legendre(0.0, 1.0, 16).unwrap();
        let v = m.integrate_real(|w| w[0] * w[0]).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_nodes_interior_and_mass() {
        for &(a, b, n) in &[(-3.0, 5.0, 7), (0.0, 1.0, 64), (-50.0, 50.0, 2000)] {
            let m = ParamMeasure::gauss_legendre(a, b, n).unwrap();
            assert!(m.nodes().all(|w| w[0] > a && w[0] < b));
            assert!(m.weights().iter().all(|&w| w > 0.0));
            assert!(((m.total_mass() - (b - a)) / (b - a)).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn gauss_legendre_rejects_empty_interval() {
        assert!(matches!(
            ParamMeasure::gauss_legendre(1.0, 1.0, 4),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            ParamMeasure::gauss_legendre(2.0, 1.0, 4),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        // ∫_{-1}^{2} ω^k dω = (2^{k+1} - (-1)^{k+1}) / (k + 1)
        for n in [1usize, 2, 3, 5, 8, 13, 20] {
            let m = ParamMeasure::gauss_legendre(-1.0, 2.0, n).unwrap();
            for k in 0..(2 * n) as i32 {
                let exact = (2f64.powi(k + 1) - (-1f64).powi(k + 1)) / (k + 1) as f64;
                let v = m.integrate_real(|w| w[0].powi(k)).unwrap();
                assert!(((v - exact) / exact).abs() < 1e-12, "n={n} k={k}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn fourier_integral_of_unit_interval_vanishes_at_one() {
        let m = ParamMeasure::gauss_legendre(-0.5, 0.5, 64).unwrap();
        let v = m.integrate(|w| Complex64::from_polar(1.0, 2.0 * PI * w[0])).unwrap();
        assert!(v.norm() < 1e-12, "{v}");
    }

    #[test]
    fn weighted_transform_cases() {
        let base = ParamMeasure::gauss_legendre(-1.0, 1.0, 8).unwrap();
        assert_eq!(base.weighted_transform(|_| 1.0).unwrap(), base);
        assert_eq!(base.weighted_transform(|_| 0.0).unwrap().total_mass(), 0.0);
        assert!(matches!(base.weighted_transform(|_| -1.0), Err(Error::Domain(_))));
        assert!(matches!(base.weighted_transform(|_| f64::NAN), Err(Error::Domain(_))));

        let wide = ParamMeasure::gauss_legendre(-10.0, 10.0, 200).unwrap();
        let lorentz = wide.weighted_transform(|w| 1.0 / (1.0 + w[0] * w[0])).unwrap();
        assert!((lorentz.total_mass() - 2.0 * 10f64.atan()).abs() < 1e-6);
    }

    #[test]
    fn integrate_reports_node_of_non_finite_value() {
        let m = ParamMeasure::from_scalar_atoms(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
        let err = m.integrate(|w| Complex64::new(1.0 / w[0], 0.0)).unwrap_err();
        match err {
            Error::Evaluation(msg) => assert!(msg.contains("node 0"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_tensor_grid() {
        let m = ParamMeasure::truncated(2.0, 5, 2).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.len(), 25);
        assert_eq!(m.provenance(), Provenance::TruncatedDomain);
        assert!((m.total_mass() - 16.0).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_mass() {
        let m = ParamMeasure::trapezoid(0.0, 2.0, 5).unwrap();
        assert_eq!(m.weights(), &[0.25, 0.5, 0.5, 0.5, 0.25]);
        assert_eq!(m.node(4), &[2.0]);
    }

    #[test]
    fn json_layout() {
        let m = ParamMeasure::from_scalar_atoms(&[0.5, 2.0], &[0.25, 0.75]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"nodes":[0.5,2.0],"weights":[0.25,0.75],"provenance":"explicit_atoms"}"#
        );
        let m2 = ParamMeasure::from_atoms(&[vec![0.0, 1.0]], &[2.0]).unwrap();
        let s2 = serde_json::to_string(&m2).unwrap();
        assert_eq!(
            s2,
            r#"{"nodes":[[0.0,1.0]],"weights":[2.0],"provenance":"explicit_atoms"}"#
        );
    }

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(
            nodes in proptest::collection::vec(-1e6f64..1e6, 1..20),
            seed_w in proptest::collection::vec(0f64..1e3, 20),
        ) {
            let weights = &seed_w[..nodes.len()];
            let m = ParamMeasure::gauss_legendre(-1.0, 3.0, nodes.len()).unwrap()
                .weighted_transform(|w| (w[0] * 1.7).exp()).unwrap();
            let back: ParamMeasure = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
            prop_assert_eq!(&back, &m);
            let atoms = ParamMeasure::from_scalar_atoms(&nodes, weights).unwrap();
            let back: ParamMeasure = serde_json::from_str(&serde_json::to_string(&atoms).unwrap()).unwrap();
            prop_assert_eq!(back, atoms);
        }

        #[test]
        fn integrate_is_linear(
            vals in proptest::collection::vec((-10f64..10.0, -10f64..10.0, -10f64..10.0, -10f64..10.0), 1..40),
            alpha in -5f64..5.0,
            beta in -5f64..5.0,
        ) {
            let n = vals.len();
            let m = ParamMeasure::gauss_legendre(0.0, n as f64, n).unwrap();
            let idx = |w: &[f64]| (w[0].floor() as usize).min(n - 1);
            let f = |w: &[f64]| { let v = vals[idx(w)]; Complex64::new(v.0, v.1) };
            let g = |w: &[f64]| { let v = vals[idx(w)]; Complex64::new(v.2, v.3) };
            let lhs = m.integrate(|w| f(w) * alpha + g(w) * beta).unwrap();
            let rhs = m.integrate(f).unwrap() * alpha + m.integrate(g).unwrap() * beta;
            let scale = lhs.norm().max(rhs.norm()).max(1.0);
            prop_assert!((lhs - rhs).norm() / scale < 1e-13);
        }

        #[test]
        fn sub_unit_density_never_increases_mass(
            n in 1usize..50,
            a in -5f64..0.0,
            len in 0.1f64..10.0,
            c in 0f64..3.0,
        ) {
            let m = ParamMeasure::gauss_legendre(a, a + len, n).unwrap();
            let t = m.weighted_transform(|w| (-c * w[0] * w[0]).exp()).unwrap();
            prop_assert!(t.total_mass() <= m.total_mass());
        }
    }
}
