//! JSON input formats: kernel specs, measure specs and the per-command
//! problem files read by the command-line driver.

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::{from_json_vec, JsonComplex};
use crate::kernel::Kernel;
use crate::measure::{ParamMeasure, DEFAULT_INTERVAL_NODES};
use crate::synthesis::{
    expansion_kernel, gaussian_scale_mixture, integrate_transform_kernel, paley_wiener_kernel, radial_to_kernel,
    schoenberg_rbf, sobolev_kernel, sobolev_transform, ExpansionSpec, Metric, TransformKernelSpec,
    SOBOLEV_DEFAULT_NODES, SOBOLEV_DEFAULT_RADIUS,
};

pub const KNOWN_FAMILIES: [&str; 6] = [
    "paley_wiener",
    "sobolev",
    "gaussian_mixture",
    "schoenberg",
    "expansion",
    "transform_quadrature",
];

pub const KNOWN_MEASURES: [&str; 4] = ["gauss_legendre", "trapezoid", "truncated", "atoms"];

fn from_value<T: DeserializeOwned>(v: &Value, what: &str) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

/// Parses a document, keeping serde's line/column in the error.
pub fn parse_document(text: &str) -> Result<Value> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Interval {
    a: f64,
    b: f64,
    #[serde(default = "default_interval_nodes")]
    n: usize,
}

fn default_interval_nodes() -> usize {
    DEFAULT_INTERVAL_NODES
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Truncation {
    radius: f64,
    nodes_per_dim: usize,
    #[serde(default = "one")]
    dim: usize,
}

fn one() -> usize {
    1
}

/// `{"gauss_legendre": {a, b, n}}`, `{"trapezoid": {a, b, n}}`,
/// `{"truncated": {radius, nodes_per_dim, dim}}`, or explicit
/// `{"nodes": [...], "weights": [...]}`.
pub fn parse_measure(v: &Value) -> Result<ParamMeasure> {
    let Some(obj) = v.as_object() else {
        return Err(Error::Parse("measure spec must be a JSON object".into()));
    };
    if obj.contains_key("nodes") || obj.contains_key("weights") {
        return from_value(v, "explicit measure");
    }
    if obj.len() != 1 {
        return Err(Error::Parse(format!(
            "measure spec must have exactly one of the keys {}",
            KNOWN_MEASURES.join(", ")
        )));
    }
    let (key, body) = obj.iter().next().expect("one key");
    match key.as_str() {
        "gauss_legendre" => {
            let i: Interval = from_value(body, "gauss_legendre")?;
            ParamMeasure::gauss_legendre(i.a, i.b, i.n)
        }
        "trapezoid" => {
            let i: Interval = from_value(body, "trapezoid")?;
            ParamMeasure::trapezoid(i.a, i.b, i.n)
        }
        "truncated" => {
            let t: Truncation = from_value(body, "truncated")?;
            ParamMeasure::truncated(t.radius, t.nodes_per_dim, t.dim)
        }
        "atoms" => from_value(body, "atoms"),
        other => Err(Error::Parse(format!(
            "unknown measure kind {other:?}; known kinds: {}",
            KNOWN_MEASURES.join(", ")
        ))),
    }
}

/// A kernel together with its transform pair when the family has one.
#[derive(Debug, Clone)]
pub struct BuiltKernel {
    pub family: String,
    pub kernel: Kernel,
    pub transform: Option<TransformKernelSpec>,
}

impl BuiltKernel {
    pub fn require_transform(&self) -> Result<&TransformKernelSpec> {
        self.transform.as_ref().ok_or_else(|| {
            Error::Argument(format!(
                "kernel family {:?} has no transform pair; use paley_wiener, sobolev or transform_quadrature",
                self.family
            ))
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PaleyWienerSpec {
    #[serde(default = "half")]
    half_bandwidth: f64,
    #[serde(default = "default_interval_nodes")]
    transform_nodes: usize,
}

fn half() -> f64 {
    0.5
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SobolevSpec {
    m: u32,
    d: usize,
    truncation_radius: Option<f64>,
    nodes_per_dim: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureSpec {
    measure: Value,
    #[serde(default = "one")]
    domain_dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SchoenbergSpec {
    d: usize,
    measure: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpansionJson {
    basis: String,
    weights: Vec<f64>,
    truncation: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransformQuadratureSpec {
    #[serde(default = "fourier_name")]
    transform: String,
    measure: Value,
}

fn fourier_name() -> String {
    "fourier".into()
}

/// Builds a kernel from `{"type": family, ...}`.
pub fn parse_kernel(v: &Value) -> Result<BuiltKernel> {
    let mut body = v
        .as_object()
        .cloned()
        .ok_or_else(|| Error::Parse("kernel spec must be a JSON object".into()))?;
    let family = match body.remove("type") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(Error::Parse("kernel spec field \"type\" must be a string".into())),
        None => return Err(Error::Parse("kernel spec is missing the field \"type\"".into())),
    };
    let body = Value::Object(body);
    let (kernel, transform) = match family.as_str() {
        "paley_wiener" => {
            let s: PaleyWienerSpec = from_value(&body, "paley_wiener")?;
            let t = TransformKernelSpec::paley_wiener(s.half_bandwidth, s.transform_nodes)?;
            (paley_wiener_kernel(s.half_bandwidth)?, Some(t))
        }
        "sobolev" => {
            let s: SobolevSpec = from_value(&body, "sobolev")?;
            let (radius, nodes) = match (s.truncation_radius, s.nodes_per_dim) {
                (Some(r), Some(n)) => (r, n),
                (r, n) if s.m == 1 && s.d == 1 => {
                    (r.unwrap_or(SOBOLEV_DEFAULT_RADIUS), n.unwrap_or(SOBOLEV_DEFAULT_NODES))
                }
                _ => {
                    return Err(Error::Argument(format!(
                        "sobolev (m = {}, d = {}) needs truncation_radius and nodes_per_dim; defaults exist only for m = d = 1",
                        s.m, s.d
                    )))
                }
            };
            let t = sobolev_transform(s.m, s.d, radius, nodes)?;
            (sobolev_kernel(s.m, s.d, radius, nodes)?, Some(t))
        }
        "gaussian_mixture" => {
            let s: MixtureSpec = from_value(&body, "gaussian_mixture")?;
            let p = gaussian_scale_mixture(&parse_measure(&s.measure)?)?;
            (radial_to_kernel(&p, Metric::Euclidean, s.domain_dim), None)
        }
        "schoenberg" => {
            let s: SchoenbergSpec = from_value(&body, "schoenberg")?;
            let p = schoenberg_rbf(s.d, &parse_measure(&s.measure)?)?;
            (radial_to_kernel(&p, Metric::Euclidean, s.d), None)
        }
        "expansion" => {
            let s: ExpansionJson = from_value(&body, "expansion")?;
            let mut spec = match s.basis.as_str() {
                "cosine" => ExpansionSpec::cosine(s.weights)?,
                "fourier" => ExpansionSpec::fourier(s.weights)?,
                other => {
                    return Err(Error::Parse(format!(
                        "unknown expansion basis {other:?}; known bases: cosine, fourier"
                    )))
                }
            };
            if let Some(n) = s.truncation {
                spec = spec.truncated(n)?;
            }
            (expansion_kernel(&spec), None)
        }
        "transform_quadrature" => {
            let s: TransformQuadratureSpec = from_value(&body, "transform_quadrature")?;
            if s.transform != "fourier" {
                return Err(Error::Parse(format!(
                    "unknown transform {:?}; known transforms: fourier",
                    s.transform
                )));
            }
            let t = TransformKernelSpec::fourier(parse_measure(&s.measure)?)?;
            (integrate_transform_kernel(&t), Some(t))
        }
        other => {
            return Err(Error::UnknownFamily {
                name: other.to_string(),
                known: KNOWN_FAMILIES.join(", "),
            })
        }
    };
    Ok(BuiltKernel {
        family,
        kernel,
        transform,
    })
}

/// Points as `[[x, y], ...]`, or `[x, ...]` for one-dimensional domains.
pub fn parse_points(v: &Value, dim: usize) -> Result<Vec<Vec<f64>>> {
    let points: Vec<Vec<f64>> = match v {
        Value::Array(items) if items.iter().all(Value::is_number) => {
            items.iter().map(|x| vec![x.as_f64().expect("number")]).collect()
        }
        _ => from_value(v, "points")?,
    };
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::Argument(format!("point {p:?} does not have dimension {dim}")));
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.n == 0 || !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::Argument("grid needs n ≥ 1 and finite endpoints".into()));
        }
        if self.n == 1 {
            return Ok(vec![self.lo]);
        }
        let h = (self.hi - self.lo) / (self.n - 1) as f64;
        Ok((0..self.n).map(|i| self.lo + h * i as f64).collect())
    }
}

pub const DEFAULT_BUILD_GRID: GridSpec = GridSpec {
    lo: -2.0,
    hi: 2.0,
    n: 41,
};

fn field<'a>(doc: &'a Value, name: &str) -> Result<&'a Value> {
    doc.get(name)
        .ok_or_else(|| Error::Parse(format!("missing field {name:?}")))
}

/// `build-kernel`: a kernel spec, optionally wrapped as `{"kernel": ..., "grid": ...}`.
pub fn parse_build(doc: &Value) -> Result<(BuiltKernel, GridSpec)> {
    if doc.get("kernel").is_some() {
        let grid = match doc.get("grid") {
            Some(g) => from_value(g, "grid")?,
            None => DEFAULT_BUILD_GRID,
        };
        Ok((parse_kernel(field(doc, "kernel")?)?, grid))
    } else {
        Ok((parse_kernel(doc)?, DEFAULT_BUILD_GRID))
    }
}

/// `gram`: `{"kernel": ..., "points": ...}`.
pub fn parse_gram(doc: &Value) -> Result<(BuiltKernel, Vec<Vec<f64>>)> {
    let k = parse_kernel(field(doc, "kernel")?)?;
    let pts = parse_points(field(doc, "points")?, k.kernel.domain_dim())?;
    Ok((k, pts))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    /// `sinc(π(x − shift))`
    ShiftedSinc { shift: f64 },
    /// `K(x, center)` for the scheme's own kernel.
    KernelSection { center: Vec<f64> },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRange {
    pub start: i64,
    pub end: i64,
    #[serde(default = "unit_step")]
    pub step: f64,
}

fn unit_step() -> f64 {
    1.0
}

pub struct SampleSpec {
    pub kernel: BuiltKernel,
    pub nodes: Vec<Vec<f64>>,
    pub target: TargetSpec,
    pub grid: Vec<Vec<f64>>,
}

/// `sample-reconstruct`: `{"kernel", "nodes" | "node_range", "target", "grid"}`.
pub fn parse_sample(doc: &Value) -> Result<SampleSpec> {
    let kernel = parse_kernel(field(doc, "kernel")?)?;
    let dim = kernel.kernel.domain_dim();
    let nodes = match (doc.get("nodes"), doc.get("node_range")) {
        (Some(v), None) => parse_points(v, dim)?,
        (None, Some(r)) => {
            let r: NodeRange = from_value(r, "node_range")?;
            if dim != 1 || r.end < r.start {
                return Err(Error::Argument(
                    "node_range needs a one-dimensional kernel and start ≤ end".into(),
                ));
            }
            (r.start..=r.end).map(|i| vec![i as f64 * r.step]).collect()
        }
        _ => return Err(Error::Parse("give exactly one of \"nodes\" and \"node_range\"".into())),
    };
    let target: TargetSpec = from_value(field(doc, "target")?, "target")?;
    if let TargetSpec::ShiftedSinc { .. } = target {
        if dim != 1 {
            return Err(Error::Argument("shifted_sinc targets are one-dimensional".into()));
        }
    }
    let grid = match doc.get("grid") {
        Some(g) if g.get("lo").is_some() => {
            if dim != 1 {
                return Err(Error::Argument("interval grids are one-dimensional".into()));
            }
            let g: GridSpec = from_value(g, "grid")?;
            g.values()?.into_iter().map(|x| vec![x]).collect()
        }
        Some(g) => parse_points(g, dim)?,
        None => return Err(Error::Parse("missing field \"grid\"".into())),
    };
    Ok(SampleSpec {
        kernel,
        nodes,
        target,
        grid,
    })
}

pub struct InverseSpec {
    pub kernel: BuiltKernel,
    pub sample_points: Vec<Vec<f64>>,
    pub data: Vec<num_complex::Complex64>,
    pub gamma: f64,
}

/// `solve-inverse`: `{"kernel_spec", "sample_points", "data", "gamma"}`.
pub fn parse_inverse(doc: &Value) -> Result<InverseSpec> {
    let kernel = parse_kernel(field(doc, "kernel_spec")?)?;
    let sample_points = parse_points(field(doc, "sample_points")?, kernel.kernel.domain_dim())?;
    let data: Vec<JsonComplex> = from_value(field(doc, "data")?, "data")?;
    let gamma: f64 = from_value(field(doc, "gamma")?, "gamma")?;
    Ok(InverseSpec {
        kernel,
        sample_points,
        data: from_json_vec(&data),
        gamma,
    })
}

pub struct BoundSpec {
    pub g: BuiltKernel,
    pub measure: ParamMeasure,
    pub observation_nodes: Vec<Vec<f64>>,
    pub centers: Vec<Vec<f64>>,
    pub coeffs: Vec<num_complex::Complex64>,
    pub x: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RepresenterJson {
    centers: Value,
    coeffs: Vec<JsonComplex>,
}

/// `error-bound`: `{"g_kernel", "measure", "observation_nodes", "representer": {"centers", "coeffs"}, "x"}`.
/// The transform is `exp(2πi x·ω)` under `measure`.
pub fn parse_bound(doc: &Value) -> Result<BoundSpec> {
    let g = parse_kernel(field(doc, "g_kernel")?)?;
    let measure = parse_measure(field(doc, "measure")?)?;
    let dim = g.kernel.domain_dim();
    let observation_nodes = parse_points(field(doc, "observation_nodes")?, dim)?;
    let rep: RepresenterJson = from_value(field(doc, "representer")?, "representer")?;
    let centers = parse_points(&rep.centers, dim)?;
    let x = match field(doc, "x")? {
        Value::Number(n) => vec![n.as_f64().expect("number")],
        other => from_value(other, "x")?,
    };
    Ok(BoundSpec {
        g,
        measure,
        observation_nodes,
        centers,
        coeffs: from_json_vec(&rep.coeffs),
        x,
    })
}
