use hyperlab::lorentz::{
    exp_flow, exp_general, flip_reflection, frame, geodesic_flow, horospherical, is_group_element,
    kan_decompose, labelled, minkowski_inner, normalizer_decompose, normalizer_member,
    random_group_element, random_standard_element, standard_subgroup_member, GroupElement, Label,
    LorentzVector, NormalizerKind,
};
use hyperlab::stable::{
    boundary_map, expansion_rate, kappa, stable_unstable_basis, theta_translation_residual, Bundle,
    PhasePoint,
};
use hyperlab::Sign;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn element(n: usize, seed: u64) -> GroupElement {
    random_group_element(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn sign(b: bool) -> Sign {
    if b {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

fn vec_diff(a: &LorentzVector, b: &LorentzVector) -> f64 {
    a.max_abs_diff(b)
}

#[test]
fn exponentials_agree_on_every_frame_generator() {
    for n in 1..=4 {
        for y in frame(n).unwrap() {
            for t in [-1.3, 0.4, 2.0] {
                let a = exp_flow(&y, t).unwrap();
                let b = exp_general(&y, t).unwrap();
                let scale = a.matrix().amax();
                assert!(
                    (a.matrix() - b.matrix()).amax() <= 1e-13 * scale,
                    "{:?} t={t}",
                    y.label()
                );
            }
        }
    }
}

#[test]
fn horospherical_matches_the_series() {
    let n = 3;
    let s = [0.3, -1.1, 0.7];
    for sg in [Sign::Plus, Sign::Minus] {
        let closed = horospherical(sg, &s).unwrap();
        let mut m = DMatrix::zeros(n + 2, n + 2);
        for (i, &si) in s.iter().enumerate() {
            m += labelled(Label::U(i + 1, sg), n).unwrap().matrix() * si;
        }
        assert!((closed.matrix() - m.exp()).amax() < 1e-12);
    }
}

#[test]
fn stable_vectors_contract_and_unstable_expand() {
    let p = PhasePoint::from_frame(&element(3, 11));
    for t in [0.5, 1.0, 3.0] {
        for v in stable_unstable_basis(&p, Bundle::Stable).unwrap() {
            assert!((expansion_rate(&p, &v, t).unwrap() - (-t).exp()).abs() < 1e-12);
        }
        for v in stable_unstable_basis(&p, Bundle::Unstable).unwrap() {
            assert!((expansion_rate(&p, &v, t).unwrap() / t.exp() - 1.0).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn products_and_inverses_stay_in_the_group(n in 1usize..=5, s1 in any::<u64>(), s2 in any::<u64>()) {
        let (g, h) = (element(n, s1), element(n, s2));
        let gh = g.mul(&h);
        let scale = gh.matrix().amax().powi(2);
        prop_assert!(is_group_element(gh.matrix(), 1e-10 * scale));
        let id = g.mul(&g.inverse());
        prop_assert!((id.matrix() - DMatrix::identity(n + 2, n + 2)).amax() < 1e-10 * g.matrix().amax().powi(2));
    }

    #[test]
    fn the_form_is_invariant(n in 1usize..=4, seed in any::<u64>(), u in proptest::collection::vec(-2.0f64..2.0, 6), v in proptest::collection::vec(-2.0f64..2.0, 6)) {
        let g = element(n, seed);
        let u = LorentzVector::new(u[..n + 2].to_vec()).unwrap();
        let v = LorentzVector::new(v[..n + 2].to_vec()).unwrap();
        let before = minkowski_inner(&u, &v).unwrap();
        let after = minkowski_inner(&g.act(&u), &g.act(&v)).unwrap();
        prop_assert!((before - after).abs() < 1e-10 * g.matrix().amax().powi(2) * 16.0);
    }

    #[test]
    fn kan_reconstructs(n in 1usize..=4, seed in any::<u64>(), plus in any::<bool>()) {
        let g = element(n, seed);
        let f = kan_decompose(&g, sign(plus)).unwrap();
        let scale = g.matrix().amax();
        prop_assert!((f.product().matrix() - g.matrix()).amax() < 1e-10 * scale * scale);
        prop_assert!((f.k.matrix()[(0, 0)] - 1.0).abs() < 1e-9 * scale);
        let a = exp_flow(&labelled(Label::X, n).unwrap(), f.t).unwrap();
        prop_assert!((a.matrix() - f.a.matrix()).amax() < 1e-12 * a.matrix().amax());
        let b = horospherical(f.sign, &f.s).unwrap();
        prop_assert!((b.matrix() - f.b.matrix()).amax() < 1e-12 * b.matrix().amax());
    }

    #[test]
    fn flows_add(n in 1usize..=3, seed in any::<u64>(), s in -1.5f64..1.5, t in -1.5f64..1.5) {
        let g = element(n, seed);
        let x = labelled(Label::X, n).unwrap();
        let lhs = exp_flow(&x, s).unwrap().mul(&exp_flow(&x, t).unwrap());
        let rhs = exp_flow(&x, s + t).unwrap();
        prop_assert!((lhs.matrix() - rhs.matrix()).amax() < 1e-12 * rhs.matrix().amax());

        let (x0, xi0) = (g.column(0), g.column(1));
        let tol = 1e-9 * g.matrix().amax().powi(2);
        let (x1, xi1) = geodesic_flow(&x0, &xi0, s, tol).unwrap();
        let (x2, xi2) = geodesic_flow(&x1, &xi1, t, tol * 10.0).unwrap();
        let (x3, xi3) = geodesic_flow(&x0, &xi0, s + t, tol).unwrap();
        let scale = x3.coords().amax().max(xi3.coords().amax());
        prop_assert!(vec_diff(&x2, &x3) < 1e-12 * scale * g.matrix().amax());
        prop_assert!(vec_diff(&xi2, &xi3) < 1e-12 * scale * g.matrix().amax());

        // the geodesic flow is right multiplication by exp(tX)
        let moved = g.mul(&exp_flow(&x, s).unwrap());
        prop_assert!(vec_diff(&moved.column(0), &x1) < 1e-12 * moved.matrix().amax() * g.matrix().amax());
    }

    #[test]
    fn boundary_points_ignore_flow_and_scaling(n in 1usize..=3, seed in any::<u64>(), t in -2.0f64..2.0, w in 0.1f64..10.0) {
        let p = PhasePoint::from_frame(&element(n, seed));
        let plus = boundary_map(&p, Sign::Plus).unwrap();
        let minus = boundary_map(&p, Sign::Minus).unwrap();
        prop_assert!((plus.norm() - 1.0).abs() < 1e-12);
        prop_assert!((&plus - &minus).norm() > 1e-6);
        let q = p.flow(t).with_energy(w);
        for (s, b) in [(Sign::Plus, &plus), (Sign::Minus, &minus)] {
            prop_assert!((boundary_map(&q, s).unwrap() - b).norm() < 1e-8);
        }
    }

    #[test]
    fn theta_is_a_translation(n in 1usize..=3, seed in any::<u64>(), t in -1.0f64..1.0, plus in any::<bool>()) {
        let p = PhasePoint::from_frame(&element(n, seed));
        prop_assert!(theta_translation_residual(&p, sign(plus), t).unwrap() < 1e-8);
    }

    #[test]
    fn kappa_separates_points(n in 1usize..=3, s1 in any::<u64>(), s2 in any::<u64>(), w in 0.5f64..4.0, plus in any::<bool>()) {
        let p = PhasePoint::from_frame(&element(n, s1));
        let q = PhasePoint::from_frame(&element(n, s2)).with_energy(w);
        let gap = vec_diff(p.x(), q.x()).max(vec_diff(p.xi(), q.xi()));
        prop_assume!(gap > 1e-6);
        let (a, b) = (kappa(&p, sign(plus)).unwrap(), kappa(&q, sign(plus)).unwrap());
        let d = (a.w - b.w).abs()
            .max((a.theta - b.theta).abs())
            .max((&a.y - &b.y).amax())
            .max((&a.eta - &b.eta).amax());
        prop_assert!(d > 1e-12, "κ collapses two points {gap}");
    }

    #[test]
    fn normalizer_elements_split(n in 2usize..=4, l in 2usize..=4, seed in any::<u64>(), angle in -3.0f64..3.0, flip in any::<bool>()) {
        prop_assume!(l <= n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_standard_element(l, n, &mut rng).unwrap();
        prop_assert!(standard_subgroup_member(&w, l));
        let mut k = if l + 1 < n + 1 {
            exp_flow(&labelled(Label::R(l + 1, n + 1), n).unwrap(), angle).unwrap().into_matrix()
        } else {
            DMatrix::identity(n + 2, n + 2)
        };
        if flip {
            // det −1 on both blocks keeps the product in the identity component
            k = flip_reflection(l, n) * k * flip_reflection(n + 1, n);
        }
        let g = w.mul(&GroupElement::new(k, 1e-12).unwrap());
        prop_assert!(normalizer_member(&g, l));
        prop_assert_eq!(standard_subgroup_member(&g, l), !flip && l == n);
        let (w2, k2, kind) = normalizer_decompose(&g, l).unwrap();
        prop_assert_eq!(kind == NormalizerKind::Flipped, flip);
        prop_assert!(standard_subgroup_member(&w2, l));
        prop_assert!(w2.mul(&k2).distance(&g) < 1e-10 * g.matrix().amax().powi(2));
        prop_assert!((k2.matrix()[(0, 0)] - 1.0).abs() < 1e-12);
    }
}
