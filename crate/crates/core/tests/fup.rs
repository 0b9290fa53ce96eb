use std::f64::consts::{FRAC_PI_2, PI};

use hyperlab::fup::sphere::{
    cantor_arc, geodesic_distance, measure_c2, sphere_porosity_check, Atlas, CapUnion,
    GnomonicChart,
};
use hyperlab::fup::{
    beta_fit, dense_norm, log_phase, log_phase_hessian_formula, masked_norm, mixed_hessian_det,
    Core, GridFunction, MaskedOperator, PowerOptions, SemiclassicalDft,
};
use hyperlab::porosity::{
    cantor_generate, scale_ladder, BoxSet, CantorSpec, PorosityKind, Verdict,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn mask(n: usize, m: usize, bits: &[bool]) -> BoxSet {
    BoxSet::from_mask(n, m, bits.to_vec()).unwrap()
}

#[test]
fn three_adic_cantor_norms_decay_with_a_positive_exponent() {
    let mut samples = Vec::new();
    for k in 3..=6 {
        let x = cantor_generate(&CantorSpec::middle_third(k), 1).unwrap();
        let e = masked_norm(&x, &x, &PowerOptions::default()).unwrap();
        assert!(e.agrees(1e-6));
        samples.push((1.0 / x.m() as f64, e.norm));
    }
    assert!(samples.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-9));
    let fit = beta_fit(&samples).unwrap();
    assert!(fit.beta > 0.0 && fit.beta < 0.5, "β = {}", fit.beta);
}

#[test]
fn band_charts_on_the_two_sphere_agree() {
    let charts = (0..5)
        .map(|i| {
            let t = i as f64 * PI / 8.0;
            GnomonicChart::new(&[t.cos(), t.sin(), 0.0]).unwrap()
        })
        .collect();
    let atlas = Atlas { charts };
    let omega = CapUnion::along_circle(3, &cantor_arc(0.0, FRAC_PI_2, 2), 0.02);
    let scales = scale_ladder(0.3, 0.6).unwrap();
    let check =
        |kind, nu| sphere_porosity_check(&omega, &atlas, nu, 2.0, kind, &scales, 256, 8).unwrap();
    let all = |r: &hyperlab::fup::sphere::SphereReport, v| r.charts.iter().all(|c| c.verdict == v);
    assert!(all(
        &check(PorosityKind::Ball, 0.6),
        Verdict::CertifiedPorous
    ));
    assert!(all(
        &check(PorosityKind::Ball, 2.0),
        Verdict::CounterexampleFound
    ));
    // a thin band is far from line porous along its own direction
    assert!(all(
        &check(PorosityKind::Line, 0.6),
        Verdict::CounterexampleFound
    ));
    let line = check(PorosityKind::Line, 0.3);
    assert!(line
        .charts
        .iter()
        .all(|c| c.verdict != Verdict::CounterexampleFound));
    assert!(line
        .charts
        .iter()
        .any(|c| c.verdict == Verdict::CertifiedPorous));
}

#[test]
fn rotating_set_and_chart_together_keeps_verdicts() {
    let arcs = cantor_arc(0.0, PI, 3);
    let scales = scale_ladder(0.2, 0.5).unwrap();
    let phi = 0.7;
    let rotated: Vec<(f64, f64)> = arcs.iter().map(|&(a, b)| (a + phi, b + phi)).collect();
    let (omega, omega_r) = (
        CapUnion::along_circle(2, &arcs, 0.002),
        CapUnion::along_circle(2, &rotated, 0.002),
    );
    for t in [0.3, 1.2, 2.5] {
        let chart = |s: f64| Atlas {
            charts: vec![GnomonicChart::new(&[s.cos(), s.sin()]).unwrap()],
        };
        for nu in [0.3, 0.6, 1.0, 2.0] {
            let a = sphere_porosity_check(
                &omega,
                &chart(t),
                nu,
                2.0,
                PorosityKind::Ball,
                &scales,
                1024,
                0,
            )
            .unwrap();
            let b = sphere_porosity_check(
                &omega_r,
                &chart(t + phi),
                nu,
                2.0,
                PorosityKind::Ball,
                &scales,
                1024,
                0,
            )
            .unwrap();
            let conflict = |x: Verdict, y: Verdict| {
                matches!(
                    (x, y),
                    (Verdict::CertifiedPorous, Verdict::CounterexampleFound)
                        | (Verdict::CounterexampleFound, Verdict::CertifiedPorous)
                )
            };
            assert!(!conflict(a.verdict, b.verdict), "t={t} ν={nu}");
        }
    }
}

#[test]
fn measured_chart_constant_sits_below_two() {
    for center in [vec![1.0, 0.0], vec![0.0, 0.6, 0.8]] {
        let chart = GnomonicChart::new(&center).unwrap();
        let (c2, upper) = measure_c2(&chart, 2000, 3);
        assert!((1.0..=2.0).contains(&c2), "{c2}");
        assert!(upper <= 1.0 + 1e-12, "{upper}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dft_is_unitary(a in 0u32..=4, b in 0u32..=3, n in 1usize..=2, seed in any::<u64>()) {
        let size = 2usize.pow(a) * 3usize.pow(b);
        prop_assume!(size.pow(n as u32) <= 4096);
        let dft = SemiclassicalDft::new(size, n).unwrap();
        let len = size.pow(n as u32);
        let mut rng = proptest::test_runner::TestRng::from_seed(
            proptest::test_runner::RngAlgorithm::ChaCha,
            &{ let mut s = [0u8; 32]; s[..8].copy_from_slice(&seed.to_le_bytes()); s },
        );
        let v: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let f = GridFunction::new(n, size, v.clone()).unwrap();
        let g = dft.apply_grid(&f).unwrap();
        prop_assert!((g.l2_norm() - f.l2_norm()).abs() < 1e-12 * f.l2_norm().max(1.0));
        let back = dft.adjoint(g.values());
        let err = back.iter().zip(&v).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn fast_apply_matches_the_entries(u in complex_vec(27)) {
        let dft = SemiclassicalDft::new(27, 1).unwrap();
        let fast = dft.apply(&u);
        for (r, value) in fast.iter().enumerate() {
            let direct: Complex64 = (0..27).map(|c| dft.entry(r, c) * u[c]).sum();
            prop_assert!((direct - value).norm() < 1e-12);
        }
    }

    #[test]
    fn smaller_masks_have_smaller_norms(
        a in proptest::collection::vec(any::<bool>(), 81),
        b in proptest::collection::vec(any::<bool>(), 81),
        keep in proptest::collection::vec(any::<bool>(), 81),
    ) {
        prop_assume!(a.iter().any(|&x| x) && b.iter().any(|&x| x));
        let sub: Vec<bool> = b.iter().zip(&keep).map(|(x, y)| *x && *y).collect();
        prop_assume!(sub.iter().any(|&x| x));
        let dft = SemiclassicalDft::new(81, 1).unwrap();
        let (ma, mb, ms) = (mask(1, 81, &a), mask(1, 81, &b), mask(1, 81, &sub));
        let big = dense_norm(&MaskedOperator::from_sets(&dft, &ma, &mb).unwrap());
        let small = dense_norm(&MaskedOperator::from_sets(&dft, &ma, &ms).unwrap());
        prop_assert!(small <= big + 1e-12);
        prop_assert!(big <= 1.0 + 1e-12);
    }

    #[test]
    fn a_single_column_has_norm_sqrt_of_row_fraction(
        rows in proptest::collection::vec(any::<bool>(), 81),
        col in 0usize..81,
    ) {
        let count = rows.iter().filter(|&&x| x).count();
        prop_assume!(count > 0);
        let mut plus = BoxSet::empty(1, 81).unwrap();
        plus.set_cell(&[col], true);
        let e = masked_norm(&mask(1, 81, &rows), &plus, &PowerOptions::default()).unwrap();
        prop_assert!((e.norm - (count as f64 / 81.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn masked_adjoint_is_consistent(
        left in proptest::collection::vec(any::<bool>(), 81),
        right in proptest::collection::vec(any::<bool>(), 81),
        u in complex_vec(81),
        v in complex_vec(81),
    ) {
        let dft = SemiclassicalDft::new(9, 2).unwrap();
        let op = MaskedOperator::from_sets(&dft, &mask(2, 9, &left), &mask(2, 9, &right)).unwrap();
        let (u, v) = (&u[..op.cols()], &v[..op.rows()]);
        let lhs = dot(&op.apply(u), v);
        let rhs = dot(u, &op.adjoint(v));
        prop_assert!((lhs - rhs).norm() < 1e-12);
        let norm = dense_norm(&op);
        prop_assert!(l2(&op.apply(u)) <= (norm + 1e-12) * l2(u));
    }

    #[test]
    fn gnomonic_projection_is_bi_lipschitz(
        c in proptest::collection::vec(-1.0f64..1.0, 3),
        p in proptest::collection::vec(-0.45f64..0.45, 2),
        q in proptest::collection::vec(-0.45f64..0.45, 2),
    ) {
        prop_assume!(c.iter().map(|v| v * v).sum::<f64>() > 0.01);
        let chart = GnomonicChart::new(&c).unwrap();
        let r = GnomonicChart::image_radius();
        let inside = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() <= r * r;
        prop_assume!(inside(&p) && inside(&q));
        let (a, b) = (chart.unproject(&p), chart.unproject(&q));
        prop_assert!(chart.contains(&a) && chart.contains(&b));
        let back = chart.project(&a).unwrap();
        prop_assert!(back.iter().zip(&p).all(|(x, y)| (x - y).abs() < 1e-12));
        let e = p.iter().zip(&q).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        prop_assume!(e > 1e-9);
        let s = geodesic_distance(&a, &b);
        prop_assert!(s <= e * (1.0 + 1e-12));
        prop_assert!(e <= 2.0 * s);
    }

    #[test]
    fn log_phase_hessian_matches_closed_form(
        w in prop_oneof![Just(0.125), Just(1.0), Just(8.0)],
        dim in 1usize..=2,
        a in proptest::collection::vec(-1.0f64..1.0, 3),
        b in proptest::collection::vec(-1.0f64..1.0, 3),
    ) {
        let unit = |v: &[f64]| {
            let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / r).collect::<Vec<f64>>()
        };
        prop_assume!(a[..=dim].iter().map(|x| x * x).sum::<f64>() > 0.01);
        prop_assume!(b[..=dim].iter().map(|x| x * x).sum::<f64>() > 0.01);
        let (y, yp) = (unit(&a[..=dim]), unit(&b[..=dim]));
        prop_assume!(geodesic_distance(&y, &yp) > 0.2);
        let phi = log_phase(w);
        let fd = mixed_hessian_det(&phi, &y, &yp, 1e-4).unwrap();
        let exact = log_phase_hessian_formula(w, &y, &yp);
        prop_assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1e-3), "{fd} vs {exact}");
        prop_assert!(exact != 0.0);
    }
}
