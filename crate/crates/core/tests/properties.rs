use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nctrunc::ergo::{self, ScalarFunction, TauSource};
use nctrunc::expr::{compile_str, parse};
use nctrunc::integrals;
use nctrunc::models::SpectralModel;
use nctrunc::oracle::MatrixOracle;
use nctrunc::seq::{cesaro, log_cesaro_gap, normalized_log_mean, SummabilitySeries};
use nctrunc::trunc;

fn nc_torus(theta: f64) -> SpectralModel {
    SpectralModel::nc_torus(2, vec![vec![0.0, theta], vec![-theta, 0.0]]).unwrap()
}

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        (-3i32..=3, -3i32..=3).prop_map(|(a, b)| format!("u({a}, {b})")),
        (-8i32..=8).prop_map(|c| format!("{}", c as f64 / 4.0)),
        Just("id".to_string()),
        Just("angular(x1^2 - 2*x1*x2 + 0.5)".to_string()),
        Just("bracket(-1)".to_string()),
    ]
}

fn expr_source() -> impl Strategy<Value = String> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} + {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * ({b})")),
            inner.clone().prop_map(|a| format!("adj({a})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner, 0u32..4).prop_map(|(a, p)| format!("pow({a}, {p})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parser_round_trips(src in expr_source()) {
        let e = parse(&src).unwrap();
        let printed = e.to_string();
        prop_assert_eq!(parse(&printed).unwrap(), e);
        prop_assert!(nctrunc::expr::compile(&parse(&src).unwrap(), &nc_torus(0.3)).is_ok());
    }

    #[test]
    fn cesaro_and_log_mean_fix_constants(c in -10.0f64..10.0, n in 1usize..3000) {
        let x = SummabilitySeries::from_fn(n, |_| c).unwrap();
        prop_assert!((cesaro(&x).values()[n].re - c).abs() <= 1e-12 * c.abs().max(1.0));
        prop_assert!((normalized_log_mean(&x).values()[n].re - c).abs() <= 1e-12 * c.abs().max(1.0));
    }

    #[test]
    fn means_are_regular(c in -3.0f64..3.0, seed in any::<u64>()) {
        // x_k = c + O(k^{-1/2}): Cesàro error ≤ 2√n/n, log-mean error ≤ ζ(3/2)/H_n.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise: Vec<f64> = (0..=10_000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = SummabilitySeries::from_fn(10_000, |k| c + noise[k] / (k as f64 + 1.0).sqrt()).unwrap();
        prop_assert!((cesaro(&x).values()[10_000].re - c).abs() <= 2.0 / 100.0);
        prop_assert!((normalized_log_mean(&x).values()[10_000].re - c).abs() <= 2.62 / 9.78);
    }
}

#[test]
fn alternating_sequence_has_the_harmonic_bias() {
    // Σ_{j≤m} 1/(2j+1) = H_{2m+2} - H_{m+1}/2, so (M(x)_n - 1/2)·H_{n+1} → (ln 2)/2 for x = 1,0,1,0,….
    let n = 100_000;
    let x = SummabilitySeries::from_fn(n, |k| (k % 2 == 0) as u8 as f64).unwrap();
    let h = |m: usize| (1..=m).map(|k| 1.0 / k as f64).sum::<f64>();
    let m = normalized_log_mean(&x).values()[n].re;
    let exact = (h(n + 2) - h(n / 2 + 1) / 2.0) / h(n + 1);
    assert_relative_eq!(m, exact, epsilon = 1e-12);
    assert!(((m - 0.5) * h(n + 1) - std::f64::consts::LN_2 / 2.0).abs() < 1e-4);
    let mc = normalized_log_mean(&cesaro(&x)).values()[n].re;
    // C(x)_k - 1/2 = 1/(2(k+1)) on even k, so here the bias tends to (1/2)Σ_j (2j+1)^{-2} = π²/16.
    assert!(((mc - 0.5) * h(n + 1) - std::f64::consts::PI.powi(2) / 16.0).abs() < 1e-4, "{mc}");
}

#[test]
fn log_cesaro_gap_shrinks_for_bounded_random_sequences() {
    let mut shrinking = 0;
    let mut early = Vec::new();
    let mut late = Vec::new();
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = SummabilitySeries::from_real((0..=10_000).map(|_| rng.random_range(-1.0..1.0))).unwrap();
        let (a, b) = (log_cesaro_gap(&x, 100).unwrap(), log_cesaro_gap(&x, 10_000).unwrap());
        if b <= a {
            shrinking += 1;
        }
        early.push(a);
        late.push(b);
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    assert!(shrinking >= 95, "{shrinking} of 100");
    assert!(median(&mut late) < median(&mut early));
}

#[test]
fn functional_calculus_matches_matrix_products() {
    let model = nc_torus(0.45);
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m1, m2) = (rng.random_range(-2..=2), rng.random_range(-2..=2));
        let w: f64 = rng.random_range(-1.0..1.0);
        let a = compile_str(&format!("u({m1}, {m2}) + adj(u({m1}, {m2})) + {w}*angular(x1*x2)"), &model).unwrap();
        let t = trunc::truncate(&model, &a, 6.0).unwrap();
        let deg = rng.random_range(0..=4usize);
        let c: Vec<f64> = (0..=deg).map(|_| rng.random_range(-1.0..1.0)).collect();
        let poly = |x: f64| c.iter().rev().fold(0.0, |acc, ci| acc * x + ci);
        let f = trunc::matrix_function(&t, &poly).unwrap();
        let mut power = trunc::truncate(&model, &MatrixOracle::identity(), 6.0).unwrap();
        let n = t.size();
        let mut direct = faer::Mat::<Complex64>::zeros(n, n);
        for ci in &c {
            direct += faer::Scale(Complex64::new(*ci, 0.0)) * &power.matrix;
            power = power.matmul(&t).unwrap();
        }
        let scale = direct.norm_max().max(1.0);
        let err = (&f.matrix.matrix - &direct).norm_max() / scale;
        assert!(err < 1e-9, "seed {seed}: {err}");
    }
}

#[test]
fn estimators_are_positive_normalized_and_linear() {
    let models = [SpectralModel::circle(), SpectralModel::toeplitz(), nc_torus(0.7)];
    let ops = [
        ("mult(0.5, 1, 1)", "mult(0, 0, 1)"),
        ("toeplitz(0.5, 1, 1)", "toeplitz(0, 0, 1)"),
        ("u(1, 0) + 0.5", "u(0, 1)"),
    ];
    for (model, (sa, sb)) in models.iter().zip(ops) {
        let ladder = [20.0, 40.0, 80.0];
        let horizons = [1_000, 5_000];
        let heat = [1e-2, 1e-3];
        let id = MatrixOracle::identity();
        assert_relative_eq!(integrals::truncated_integral(model, &id, &ladder).unwrap().value.re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(integrals::log_mean_diagonal(model, &id, &horizons).unwrap().value.re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(integrals::heat_integral(model, &id, &heat).unwrap().value.re, 1.0, epsilon = 1e-12);

        let a = compile_str(sa, model).unwrap();
        let b = compile_str(sb, model).unwrap();
        let positive = a.adjoint().compose(&a);
        for v in [
            integrals::truncated_integral(model, &positive, &ladder).unwrap().values,
            integrals::log_mean_diagonal(model, &positive, &horizons).unwrap().values,
            integrals::heat_integral(model, &positive, &heat).unwrap().values,
        ] {
            assert!(v.iter().all(|z| z.re >= -1e-12 && z.im.abs() < 1e-12), "{v:?}");
        }

        let z = Complex64::new(2.0, -0.5);
        let combo = a.add(&b.scale(z));
        let lin = |f: &dyn Fn(&MatrixOracle) -> Complex64| (f(&combo) - f(&a) - z * f(&b)).norm();
        assert!(lin(&|o| integrals::truncated_integral(model, o, &ladder).unwrap().value) < 1e-12);
        assert!(lin(&|o| integrals::log_mean_diagonal(model, o, &horizons).unwrap().value) < 1e-12);
        assert!(lin(&|o| integrals::heat_integral(model, o, &heat).unwrap().value) < 1e-12);
    }
}

#[test]
fn truncations_are_compatible_with_projections() {
    for (model, src) in [
        (SpectralModel::circle(), "mult(0, 1, 2) * mult(1, 0, 0, 1)"),
        (nc_torus(0.2), "u(1, 1) + angular(x1^2)"),
        (SpectralModel::toeplitz(), "toeplitz(0, 1, 1)"),
    ] {
        let a = compile_str(src, &model).unwrap();
        let small = trunc::truncate(&model, &a, 5.0).unwrap();
        let big = trunc::truncate(&model, &a, 9.0).unwrap();
        for i in 0..small.size() {
            assert_eq!(small.modes[i].label, big.modes[i].label);
            for j in 0..small.size() {
                assert!((small.get(i, j) - big.get(i, j)).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn time_average_is_a_contraction() {
    let model = nc_torus(0.3);
    let a = compile_str("u(1, 0) + adj(u(2, 1)) + angular(x1)", &model).unwrap();
    let base = trunc::truncate(&model, &a, 10.0).unwrap();
    for t in [0.1, 1.0, 10.0, 100.0] {
        let avg = trunc::time_average(&model, &a, t, 10.0).unwrap();
        assert!(avg.hs_norm() <= base.hs_norm() * (1.0 + 1e-12));
        for i in 0..avg.size() {
            assert!((avg.get(i, i) - base.get(i, i)).norm() < 1e-15);
        }
    }
}

#[test]
fn widom_cross_term_matches_truncated_products() {
    // Tr(P A (1-P) B P) = Tr(P A B P) - Tr(P A P B P).
    for (model, sa, sb) in [
        (SpectralModel::circle(), "mult(0, 1, 2)", "mult(1, 0, 0, 3)"),
        (nc_torus(0.6), "u(1, 0) + u(0, 2)", "adj(u(1, 1))"),
        (SpectralModel::toeplitz(), "toeplitz(0, 1, 1)", "toeplitz(0, 0, 1)"),
    ] {
        let a = compile_str(sa, &model).unwrap();
        let b = compile_str(sb, &model).unwrap();
        for lambda in [4.0, 7.5, 12.0] {
            let cross = trunc::widom_cross_term(&model, &a, &b, lambda).unwrap();
            let ab = trunc::truncate(&model, &a.compose(&b), lambda).unwrap().trace();
            let pa = trunc::truncate(&model, &a, lambda).unwrap();
            let pb = trunc::truncate(&model, &b, lambda).unwrap();
            let inside = pa.matmul(&pb).unwrap().trace();
            assert!((cross - (ab - inside)).norm() < 1e-10, "{sa}, {sb} at {lambda}");
        }
    }
}

fn szego_gap(model: &SpectralModel, src: &str, p: u32, ladder: &[f64], rhs: TauSource) -> (Vec<f64>, Complex64) {
    let a = compile_str(src, model).unwrap();
    let r = ergo::szego_functional_with(model, &a, &ScalarFunction::monomial(p), ladder, rhs).unwrap();
    (r.lhs.values.iter().map(|z| z.re).collect(), r.rhs)
}

#[test]
fn szego_limit_agrees_with_tau_for_low_powers() {
    let cases = [
        (SpectralModel::circle(), "mult(0, 1, 1)", TauSource::LogMean, [100.0, 200.0, 400.0]),
        (SpectralModel::toeplitz(), "toeplitz(0.25, 1, 1)", TauSource::Truncated, [200.0, 400.0, 800.0]),
    ];
    for (model, src, rhs, ladder) in cases {
        for p in 1..=4 {
            let (lhs, tau) = szego_gap(&model, src, p, &ladder, rhs);
            let gap = (lhs[2] - tau.re).abs();
            assert!(gap < 0.03 * tau.re.abs() || gap < 1e-2, "{src} p={p}: {lhs:?} vs {tau}");
        }
    }
}

#[test]
fn szego_boundary_defect_on_the_torus_decays_like_one_over_lambda() {
    // The dense cap stops at λ ≈ 25 on the 2-torus, where the p = 2, 4 defects are still 3-6%.
    // The defect is a boundary term, gap·λ stable, and the extrapolated limit is τ(f(A)).
    let model = nc_torus(0.7);
    let src = "u(1, 0) + adj(u(1, 0))";
    for p in 1..=4 {
        let (lhs, tau) = szego_gap(&model, src, p, &[10.0, 14.0, 20.0], TauSource::LogMean);
        if p % 2 == 1 {
            assert!(lhs.iter().all(|v| (v - tau.re).abs() < 1e-2), "p={p}: {lhs:?}");
            continue;
        }
        let scaled: Vec<f64> = [10.0, 14.0, 20.0].iter().zip(&lhs).map(|(l, v)| l * (tau.re - v)).collect();
        assert!(scaled.iter().all(|g| (g / scaled[0] - 1.0).abs() < 0.05), "p={p}: {scaled:?}");
        let extrapolated = 2.0 * lhs[2] - lhs[0];
        assert!((extrapolated / tau.re - 1.0).abs() < 0.03, "p={p}: {extrapolated} vs {tau}");
    }
}

#[test]
fn chebyshev_bounds_the_density_of_bad_indices() {
    let model = SpectralModel::flat_torus(2).unwrap();
    let a = compile_str("angular(x1*x2)", &model).unwrap();
    let (_, diag) = integrals::diagonal_prefix(&model, &a, 20_000).unwrap();
    let tau = Complex64::new(0.0, 0.0);
    let var = diag.iter().map(|z| (z - tau).norm_sqr()).sum::<f64>() / diag.len() as f64;
    for eps in [0.3, 0.5, 0.8] {
        let d = ergo::extract_density_one(&diag, tau, &[eps]).unwrap();
        assert!(1.0 - d.density <= var / (eps * eps) + 1e-12, "eps {eps}: {} vs {var}", d.density);
    }
}

#[test]
fn dixmier_diagonal_of_the_resolvent_tracks_the_weyl_constant() {
    let id = MatrixOracle::identity();
    for (model, ladder) in [
        (SpectralModel::circle(), [250.0, 500.0, 1000.0]),
        (SpectralModel::toeplitz(), [250.0, 500.0, 1000.0]),
    ] {
        let c = integrals::weyl_fit(&model, &ladder).unwrap().constant;
        // Half-line bias is about 1.2/ln n, inside 10% only from n ≈ 10^6.
        let v = integrals::dixmier_diagonal(&model, &id, None, &[10_000, 100_000, 1_000_000]).unwrap().value.re;
        assert!((v / c - 1.0).abs() < 0.1, "{}: {v} vs {c}", model.name());
    }
    // The flat 2-torus converges like 2π(1 - ln(2π)/ln n), too slowly for a 10% band.
    let torus = SpectralModel::flat_torus(2).unwrap();
    let r = integrals::dixmier_diagonal(&torus, &id, None, &[1_000, 10_000, 100_000]).unwrap();
    let two_pi = 2.0 * std::f64::consts::PI;
    for (n, v) in r.ladder.iter().zip(&r.values) {
        let model = two_pi * (1.0 - two_pi.ln() / n.ln());
        assert!((v.re / model - 1.0).abs() < 0.05, "n={n}: {} vs {model}", v.re);
    }
}

#[test]
fn qe_statistics_separate_constant_and_oscillating_diagonals() {
    let toe = SpectralModel::toeplitz();
    let a = compile_str("toeplitz(0.25, 1, 1)", &toe).unwrap();
    let q = ergo::qe_statistics(&toe, &a, &[64.0, 256.0, 1024.0], TauSource::LogMean).unwrap();
    assert!(q.variance.iter().all(|&v| v == 0.0));
    let circle = SpectralModel::circle();
    let e = compile_str("mult(0, 1, 1)", &circle).unwrap();
    let q = ergo::qe_statistics(&circle, &e, &[64.0, 256.0, 1024.0], TauSource::LogMean).unwrap();
    assert!(q.variance.iter().all(|&v| v < 1e-20));
}
