//! Seeded invariant suites behind the `audit` command. Output depends only
//! on the seed: no timings, no thread-count dependence.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::error_bounds::{min_norm_interpolant, pointwise_bound, power_function, PreimageModel, Representer};
use crate::inverse::{objective_audit, preimage, solve_tikhonov, InverseProblem};
use crate::kernel::{cauchy_schwarz_audit, gram, psd_check, Kernel, PSD_TOLERANCE};
use crate::linalg::{dot, mat_vec, norm};
use crate::measure::ParamMeasure;
use crate::sampling::{kramer_reconstruct, reconstruction_error_profile, SamplingScheme};
use crate::synthesis::{
    expansion_kernel, gaussian_scale_mixture, integrate_kernel_family, integrate_transform_kernel, paley_wiener_kernel,
    radial_to_kernel, schoenberg_rbf, sobolev_kernel, ExpansionSpec, KernelFamilySpec, Metric, TransformKernelSpec,
    SOBOLEV_DEFAULT_NODES, SOBOLEV_DEFAULT_RADIUS,
};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the audited quantity.
    pub value: f64,
    /// The check passes when `value <= threshold`.
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditSummary {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

struct Suite {
    name: &'static str,
    checks: Vec<Check>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checks: Vec::new(),
        }
    }

    fn at_most(&mut self, name: &str, value: f64, threshold: f64) {
        self.checks.push(Check {
            name: name.to_string(),
            // NaN fails
            passed: value <= threshold,
            value,
            threshold,
        });
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name.to_string(),
            passed: self.checks.iter().all(|c| c.passed),
            checks: self.checks,
        }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn sinc_pi(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

fn measure_suite(seed: u64) -> Result<SuiteResult> {
    let mut s = Suite::new("measure");
    let mut rng = rng_for(seed, 1);
    let n = 8;
    let m = ParamMeasure::gauss_legendre(-1.0, 2.0, n)?;
    let mut worst: f64 = 0.0;
    for k in 0..2 * n as i32 {
        let exact = (2f64.powi(k + 1) - (-1f64).powi(k + 1)) / (k + 1) as f64;
        let q = m.integrate_real(|w| w[0].powi(k))?;
        worst = worst.max((q - exact).abs() / exact.abs().max(1.0));
    }
    s.at_most("gauss_legendre_polynomial_exactness", worst, 1e-13);
    let unit = ParamMeasure::gauss_legendre(-0.5, 0.5, 64)?;
    s.at_most("unit_interval_mass", (unit.total_mass() - 1.0).abs(), 1e-14);

    let mut mismatches = 0.0;
    for _ in 0..20 {
        let len = rng.random_range(1..8);
        let nodes: Vec<Vec<f64>> = (0..len)
            .map(|_| vec![rng.random_range(-1e3..1e3), rng.random::<f64>()])
            .collect();
        let weights: Vec<f64> = (0..len).map(|_| rng.random::<f64>() * 10.0).collect();
        let m = ParamMeasure::from_atoms(&nodes, &weights)?;
        let back: ParamMeasure = serde_json::from_str(&serde_json::to_string(&m)?)?;
        if back != m {
            mismatches += 1.0;
        }
    }
    s.at_most("json_round_trip_mismatches", mismatches, 0.0);
    Ok(s.finish())
}

/// One instance of every built-in family, with its domain dimension.
pub fn builtin_kernels() -> Result<Vec<Kernel>> {
    let scales = ParamMeasure::gauss_legendre(0.5, 3.0, 8)?;
    Ok(vec![
        paley_wiener_kernel(0.5)?,
        sobolev_kernel(1, 1, SOBOLEV_DEFAULT_RADIUS, SOBOLEV_DEFAULT_NODES)?,
        radial_to_kernel(&gaussian_scale_mixture(&scales)?, Metric::Euclidean, 2),
        radial_to_kernel(&schoenberg_rbf(3, &scales)?, Metric::Euclidean, 3),
        expansion_kernel(&ExpansionSpec::cosine(vec![1.0, 0.5, 0.25, 0.125, 0.0625])?),
        integrate_transform_kernel(&TransformKernelSpec::paley_wiener(0.5, 64)?),
    ])
}

fn kernel_suite(seed: u64) -> Result<SuiteResult> {
    let mut s = Suite::new("kernel_core");
    let mut rng = rng_for(seed, 2);
    for k in builtin_kernels()? {
        let mut worst_psd = f64::NEG_INFINITY;
        let mut worst_cs: f64 = 0.0;
        for _ in 0..5 {
            let n = rng.random_range(2..=20);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..k.domain_dim()).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let g = gram(&k, &pts)?;
            let rep = psd_check(&g);
            // scaled so that the check reads value ≤ 1
            worst_psd = worst_psd.max(-rep.min_eigenvalue / (PSD_TOLERANCE * g.trace().max(1.0)));
            let pairs: Vec<_> = pts.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
            worst_cs = worst_cs.max(cauchy_schwarz_audit(&k, &pairs)?);
        }
        s.at_most(&format!("psd[{}]", k.label()), worst_psd, 1.0);
        s.at_most(&format!("cauchy_schwarz[{}]", k.label()), worst_cs, 1.0 + 1e-10);
    }
    Ok(s.finish())
}

fn synthesis_suite(seed: u64) -> Result<SuiteResult> {
    let mut s = Suite::new("kernel_synthesis");
    let mut rng = rng_for(seed, 3);
    let pw = integrate_transform_kernel(&TransformKernelSpec::paley_wiener(0.5, 64)?);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (x, y) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        worst = worst.max((pw.evaluate(&[x], &[y])? - sinc_pi(x - y)).norm());
    }
    s.at_most("paley_wiener_quadrature_vs_sinc", worst, 1e-10);

    let unit = ParamMeasure::from_scalar_atoms(&[1.0], &[1.0])?;
    let (p1, p3) = (schoenberg_rbf(1, &unit)?, schoenberg_rbf(3, &unit)?);
    let (mut e1, mut e3): (f64, f64) = (0.0, 0.0);
    for i in 0..1000 {
        let z = 20.0 * i as f64 / 999.0;
        e1 = e1.max((p1.evaluate(z)? - z.cos()).abs());
        let sz = if z == 0.0 { 1.0 } else { z.sin() / z };
        e3 = e3.max((p3.evaluate(z)? - sz).abs());
    }
    s.at_most("schoenberg_d1_vs_cos", e1, 1e-12);
    s.at_most("schoenberg_d3_vs_sinc", e3, 1e-12);

    let sob = sobolev_kernel(1, 1, SOBOLEV_DEFAULT_RADIUS, SOBOLEV_DEFAULT_NODES)?;
    let mut worst: f64 = 0.0;
    for i in 0..=60 {
        let d = 3.0 * i as f64 / 60.0;
        worst = worst.max((sob.evaluate(&[d], &[0.0])?.re - PI * (-2.0 * PI * d).exp()).abs());
    }
    s.at_most("sobolev_vs_lorentzian_pair", worst, 1e-3);

    let k1 = paley_wiener_kernel(0.5)?;
    let k2 = radial_to_kernel(&gaussian_scale_mixture(&unit)?, Metric::Euclidean, 1);
    let sum = integrate_kernel_family(&KernelFamilySpec::from_kernels(
        vec![k1.clone(), k2.clone()],
        &[1.0, 1.0],
    )?)?;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (x, y) = ([rng.random_range(-3.0..3.0)], [rng.random_range(-3.0..3.0)]);
        let e = k1.evaluate(&x, &y)? + k2.evaluate(&x, &y)?;
        worst = worst.max((sum.evaluate(&x, &y)? - e).norm() / e.norm().max(f64::MIN_POSITIVE));
    }
    s.at_most("aronszajn_sum_relative", worst, 1e-15);
    Ok(s.finish())
}

fn sampling_suite(seed: u64) -> Result<SuiteResult> {
    let mut s = Suite::new("sampling");
    let mut rng = rng_for(seed, 4);
    let k = paley_wiener_kernel(0.5)?;
    let g = |x: &[f64]| Complex64::new(sinc_pi(x[0] - 0.3), 0.0);
    let grid: Vec<Vec<f64>> = (0..=20).map(|i| vec![-1.0 + 0.1 * i as f64]).collect();
    let mut maxima = Vec::new();
    for n in [25i64, 200] {
        let nodes = (-n..=n).map(|i| vec![i as f64]).collect();
        let scheme = SamplingScheme::new(k.clone(), nodes, None)?;
        let errs = reconstruction_error_profile(&scheme, g, &grid)?;
        maxima.push(errs.into_iter().fold(0.0, f64::max));
    }
    s.at_most("shifted_sinc_max_error_n200", maxima[1], 5e-3);
    s.at_most("error_ratio_n200_over_n25", maxima[1] / maxima[0], 1.0 - f64::EPSILON);

    let nodes: Vec<Vec<f64>> = (-10..=10).map(|i| vec![i as f64]).collect();
    let scheme = SamplingScheme::new(k, nodes, Some(TransformKernelSpec::paley_wiener(0.5, 64)?))?;
    s.at_most("integer_nodes_offdiag_ratio", scheme.max_offdiag_ratio(), 1e-10);
    let samples: Vec<Complex64> = (0..21)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut worst: f64 = 0.0;
    for (y, v) in scheme.nodes().iter().zip(&samples) {
        worst = worst.max((kramer_reconstruct(&scheme, &samples, y)? - v).norm());
    }
    s.at_most("node_exactness", worst, 1e-12);
    Ok(s.finish())
}

/// Jittered integer grid, Paley–Wiener transform, complex data.
pub fn random_inverse_problem(rng: &mut ChaCha8Rng, n: usize, gamma: f64) -> Result<InverseProblem> {
    let transform = TransformKernelSpec::paley_wiener(0.5, 128)?;
    let pts = (0..n)
        .map(|i| vec![i as f64 - (n as f64 - 1.0) / 2.0 + rng.random_range(-0.3..0.3)])
        .collect();
    let y = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    InverseProblem::new(transform, pts, y, gamma)
}

fn inverse_suite(seed: u64) -> Result<SuiteResult> {
    let mut s = Suite::new("inverse_solver");
    let mut rng = rng_for(seed, 5);
    let (mut resid, mut descent, mut pre, mut fit): (f64, f64, f64, f64) = (0.0, f64::NEG_INFINITY, 0.0, 0.0);
    for trial in 0..20 {
        let gamma = [0.0, 1e-3, 1e-1, 1.0][trial % 4];
        let n = rng.random_range(1..=20);
        let p = random_inverse_problem(&mut rng, n, gamma)?;
        let sol = solve_tikhonov(&p)?;
        resid = resid.max(sol.normal_residual);
        let best = objective_audit(&p, &sol.alpha)?;
        let scale = 1e-2 * norm(&sol.alpha) + 1e-6;
        for _ in 0..20 {
            let dir: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let t = rng.random_range(0.0..1.0) * scale / norm(&dir);
            let cand: Vec<Complex64> = sol.alpha.iter().zip(&dir).map(|(a, d)| a + d * t).collect();
            descent = descent.max(best - objective_audit(&p, &cand)?);
        }
        let h = sol.gram.entries();
        let form = dot(&sol.alpha, &mat_vec(h, &sol.alpha)).re;
        let quad = preimage(&sol, &p).l2_norm_sq()?;
        if form > 0.0 {
            pre = pre.max((quad - form).abs() / form);
        }
        let direct = mat_vec(h, &sol.alpha);
        for (a, b) in direct.iter().zip(&sol.fitted) {
            fit = fit.max((a - b).norm());
        }
    }
    s.at_most("normal_residual", resid, 1e-10);
    s.at_most("objective_decrease_under_perturbation", descent, 0.0);
    s.at_most("preimage_norm_vs_quadratic_form", pre, 1e-10);
    s.at_most("fitted_vs_gram_times_alpha", fit, 1e-12);
    Ok(s.finish())
}

/// `exp(-(u − v)²)` on one-dimensional parameters.
pub fn unit_gaussian() -> Result<Kernel> {
    let unit = ParamMeasure::from_scalar_atoms(&[1.0], &[1.0])?;
    Ok(radial_to_kernel(&gaussian_scale_mixture(&unit)?, Metric::Euclidean, 1))
}

fn bound_suite(seed: u64) -> Result<SuiteResult> {
    let mut s = Suite::new("error_bounds");
    let mut rng = rng_for(seed, 6);
    let g = unit_gaussian()?;
    let mu = ParamMeasure::gauss_legendre(0.0, 1.0, 64)?;
    let t = TransformKernelSpec::fourier(mu.clone())?;
    let (mut ratio, mut norm_gap): (f64, f64) = (0.0, f64::NEG_INFINITY);
    for _ in 0..40 {
        let w: Vec<Vec<f64>> = (0..rng.random_range(0..=5))
            .map(|_| vec![rng.random_range(0.0..1.0)])
            .collect();
        let model = PreimageModel::new(g.clone(), w, mu.clone())?;
        let nc = rng.random_range(1..=4);
        let centers = (0..nc).map(|_| vec![rng.random_range(0.0..1.0)]).collect();
        let coeffs = (0..nc)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let a = Representer::new(g.clone(), centers, coeffs)?;
        let rep = pointwise_bound(&model, &t, &a, &[rng.random_range(-2.0..2.0)])?;
        ratio = ratio.max(rep.ratio);
        let vals = model
            .nodes()
            .iter()
            .map(|w| a.evaluate(w))
            .collect::<Result<Vec<_>>>()?;
        norm_gap = norm_gap.max(min_norm_interpolant(&model, &vals)?.g_norm()? - a.g_norm()?);
    }
    s.at_most("observed_over_bound", ratio, 1.0 + 1e-9);
    s.at_most("interpolant_norm_excess", norm_gap, 1e-10);

    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let small: Vec<Vec<f64>> = (0..rng.random_range(0..4))
            .map(|_| vec![rng.random_range(0.0..1.0)])
            .collect();
        let mut big = small.clone();
        big.extend((0..rng.random_range(1..3)).map(|_| vec![rng.random_range(0.0..1.0)]));
        let ms = PreimageModel::new(g.clone(), small, mu.clone())?;
        let mb = PreimageModel::new(g.clone(), big, mu.clone())?;
        for i in 0..=20 {
            let om = [i as f64 / 20.0];
            worst = worst.max(power_function(&mb, &om)? - power_function(&ms, &om)?);
        }
    }
    s.at_most("nested_power_increase", worst, 1e-12);
    Ok(s.finish())
}

/// Runs every suite. A suite that errors out is reported as failed.
pub fn run_audit(seed: u64) -> AuditSummary {
    type SuiteFn = fn(u64) -> Result<SuiteResult>;
    let suites: [(&str, SuiteFn); 6] = [
        ("measure", measure_suite),
        ("kernel_core", kernel_suite),
        ("kernel_synthesis", synthesis_suite),
        ("sampling", sampling_suite),
        ("inverse_solver", inverse_suite),
        ("error_bounds", bound_suite),
    ];
    let results: Vec<SuiteResult> = suites
        .iter()
        .map(|(name, f)| {
            f(seed).unwrap_or_else(|e| SuiteResult {
                name: name.to_string(),
                passed: false,
                checks: vec![Check {
                    name: format!("error: {e}"),
                    passed: false,
                    value: f64::NAN,
                    threshold: 0.0,
                }],
            })
        })
        .collect();
    AuditSummary {
        seed,
        passed: results.iter().all(|r| r.passed),
        suites: results,
    }
}
