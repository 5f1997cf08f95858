//! Randomized invariants across modules.

use kernelforge::error_bounds::{embedding_check, min_norm_interpolant, power_function, PreimageModel, Representer};
use kernelforge::inverse::{objective_audit, preimage, solve_tikhonov, InverseProblem};
use kernelforge::linalg::{dot, mat_vec};
use kernelforge::sampling::{orthogonality_check, SamplingScheme};
use kernelforge::synthesis::{
    gaussian_scale_mixture, integrate_transform_kernel, paley_wiener_kernel, radial_to_kernel, Metric,
    TransformKernelSpec,
};
use kernelforge::{cauchy_schwarz_audit, gram, psd_check, Complex64, Kernel, ParamMeasure};
use proptest::prelude::*;

fn gauss(dim: usize) -> Kernel {
    let unit = ParamMeasure::from_scalar_atoms(&[1.0], &[1.0]).unwrap();
    radial_to_kernel(&gaussian_scale_mixture(&unit).unwrap(), Metric::Euclidean, dim)
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

/// Points on a jittered integer grid, so Paley–Wiener Grams stay well conditioned.
fn grid_points(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.3..0.3f64, 1..=max).prop_map(|jitter| {
        let n = jitter.len() as f64;
        jitter
            .iter()
            .enumerate()
            .map(|(i, j)| i as f64 - (n - 1.0) / 2.0 + j)
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_permutation_equivariant(
        pts in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 2), 1..12),
        seed in any::<u64>(),
    ) {
        let k = gauss(2);
        let n = pts.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| pts[i].clone()).collect();
        let g = gram(&k, &pts).unwrap();
        let gp = gram(&k, &permuted).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(gp.entries()[(i, j)], g.entries()[(perm[i], perm[j])]);
            }
        }
    }

    #[test]
    fn cauchy_schwarz_holds(pairs in prop::collection::vec((-4.0..4.0f64, -4.0..4.0f64), 1..40)) {
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = pairs.into_iter().map(|(x, y)| (vec![x], vec![y])).collect();
        for k in [paley_wiener_kernel(0.5).unwrap(), gauss(1)] {
            prop_assert!(cauchy_schwarz_audit(&k, &pairs).unwrap() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn weighted_transform_with_small_density_keeps_mass(n in 1usize..40, c in 0.0..1.0f64) {
        let m = ParamMeasure::gauss_legendre(-2.0, 3.0, n).unwrap();
        let t = m.weighted_transform(|w| c * (-w[0] * w[0]).exp()).unwrap();
        prop_assert!(t.total_mass() <= m.total_mass());
    }

    #[test]
    fn orthogonality_ratio_matches_kernel_gram(nodes in grid_points(10)) {
        let spec = TransformKernelSpec::paley_wiener(0.5, 64).unwrap();
        let pts: Vec<Vec<f64>> = nodes.iter().map(|&x| vec![x]).collect();
        let rep = orthogonality_check(&spec, &pts).unwrap();
        let g = gram(&integrate_transform_kernel(&spec), &pts).unwrap();
        let n = pts.len();
        let max_diag = (0..n).map(|i| g.entries()[(i, i)].re).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(g.entries()[(i, j)].norm());
                }
            }
        }
        prop_assert!((rep.max_offdiag_ratio - worst / max_diag).abs() <= 1e-12);
        let scheme = SamplingScheme::new(paley_wiener_kernel(0.5).unwrap(), pts, Some(spec)).unwrap();
        prop_assert!((scheme.max_offdiag_ratio() - rep.max_offdiag_ratio).abs() <= 1e-12);
    }

    #[test]
    fn tikhonov_is_stationary_and_consistent(
        pts in grid_points(12),
        gamma_idx in 0usize..4,
        data in prop::collection::vec(complex(), 12),
    ) {
        let gamma = [0.0, 1e-3, 1e-1, 1.0][gamma_idx];
        let n = pts.len();
        let p = InverseProblem::new(
            TransformKernelSpec::paley_wiener(0.5, 96).unwrap(),
            pts.iter().map(|&x| vec![x]).collect(),
            data[..n].to_vec(),
            gamma,
        ).unwrap();
        let sol = solve_tikhonov(&p).unwrap();
        prop_assert!(sol.normal_residual <= 1e-10);
        let h = sol.gram.entries();
        for (a, b) in mat_vec(h, &sol.alpha).iter().zip(&sol.fitted) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
        let form = dot(&sol.alpha, &sol.fitted).re;
        let quad = preimage(&sol, &p).l2_norm_sq().unwrap();
        prop_assert!((quad - form).abs() <= 1e-10 * form.max(f64::MIN_POSITIVE));
        let zero = vec![Complex64::new(0.0, 0.0); n];
        prop_assert!(objective_audit(&p, &sol.alpha).unwrap() <= objective_audit(&p, &zero).unwrap());
    }

    #[test]
    fn interpolant_norm_and_embedding(
        w in prop::collection::vec(0.0..1.0f64, 0..6),
        centers in prop::collection::vec((0.0..1.0f64, complex()), 1..5),
    ) {
        let mut w = w;
        w.sort_by(f64::total_cmp);
        w.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let g = gauss(1);
        let mu = ParamMeasure::gauss_legendre(0.0, 1.0, 48).unwrap();
        let model = PreimageModel::new(g.clone(), w.iter().map(|&v| vec![v]).collect(), mu).unwrap();
        let a = Representer::new(
            g,
            centers.iter().map(|(c, _)| vec![*c]).collect(),
            centers.iter().map(|(_, v)| *v).collect(),
        ).unwrap();
        let values: Vec<Complex64> = w.iter().map(|&v| a.evaluate(&[v]).unwrap()).collect();
        let a_w = min_norm_interpolant(&model, &values).unwrap();
        prop_assert!(a_w.g_norm().unwrap() <= a.g_norm().unwrap() + 1e-10);
        for (&v, y) in w.iter().zip(&values) {
            prop_assert!((a_w.evaluate(&[v]).unwrap() - y).norm() <= 1e-6 * (1.0 + y.norm()));
        }
        let (l2, bound) = embedding_check(&model, &a).unwrap();
        prop_assert!(l2 <= bound + 1e-10);
    }

    #[test]
    fn power_shrinks_when_nodes_are_added(
        small in prop::collection::vec(0.0..1.0f64, 0..4),
        extra in prop::collection::vec(0.0..1.0f64, 1..3),
    ) {
        let mut big = small.clone();
        big.extend(extra);
        big.sort_by(f64::total_cmp);
        big.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let mut small: Vec<f64> = small.into_iter().filter(|s| big.contains(s)).collect();
        small.sort_by(f64::total_cmp);
        small.dedup();
        let g = gauss(1);
        let mu = ParamMeasure::gauss_legendre(0.0, 1.0, 16).unwrap();
        let ms = PreimageModel::new(g.clone(), small.iter().map(|&v| vec![v]).collect(), mu.clone()).unwrap();
        let mb = PreimageModel::new(g, big.iter().map(|&v| vec![v]).collect(), mu).unwrap();
        for i in 0..=40 {
            let om = [i as f64 / 40.0];
            prop_assert!(power_function(&mb, &om).unwrap() <= power_function(&ms, &om).unwrap() + 1e-12);
        }
    }

    #[test]
    fn synthesized_grams_are_psd(pts in prop::collection::vec(-3.0..3.0f64, 1..30)) {
        let pts: Vec<Vec<f64>> = pts.into_iter().map(|x| vec![x]).collect();
        let spec = TransformKernelSpec::paley_wiener(0.5, 64).unwrap();
        for k in [integrate_transform_kernel(&spec), gauss(1)] {
            prop_assert!(psd_check(&gram(&k, &pts).unwrap()).passed);
        }
    }
}
