use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::algebra::labelled;
use super::{
    exp_flow, horospherical, is_group_element, GroupElement, Label, LorentzVector, TOL_GROUP,
    TOL_RECON,
};
use crate::{Error, Result, Sign};

/// Factors of `g = k·a·b` with `k ∈ K`, `a = exp(tX) ∈ A`, `b ∈ N^±`.
///
/// `b = exp(Σ sᵢ U_i^±)`; in the horospherical matrix display the parameter
/// vector is `v = −s`.
#[derive(Debug, Clone, PartialEq)]
pub struct KanFactors {
    pub k: GroupElement,
    pub a: GroupElement,
    pub b: GroupElement,
    pub t: f64,
    pub s: Vec<f64>,
    pub sign: Sign,
}

impl KanFactors {
    pub fn product(&self) -> GroupElement {
        self.k.mul(&self.a).mul(&self.b)
    }
}

fn scaled_tol(tol: f64, g: &DMatrix<f64>) -> f64 {
    let s = g.amax().max(1.0);
    tol * s * s
}

/// KAN decomposition for the horospherical group `N^sign`.
///
/// `N^±` fixes the null vector `ω = (1, ±1, 0, …)`, and `a` scales it by
/// `e^{±t}` while `k` preserves the time coordinate, which gives `t`. The
/// `N`-parameter is read off `g⁻¹e⃗₀ = b⁻¹a⁻¹e⃗₀`; then `k = g(ab)⁻¹` is
/// checked to fix `e⃗₀`.
pub fn kan_decompose(g: &GroupElement, sign: Sign) -> Result<KanFactors> {
    if !is_group_element(g.matrix(), scaled_tol(TOL_GROUP, g.matrix())) {
        return Err(Error::NotGroupElement("input to kan_decompose".into()));
    }
    let n = g.n();
    let sg = sign.value();
    let mut omega = LorentzVector::zeros(n);
    omega = omega.add(&LorentzVector::basis(0, n));
    omega = omega.add(&LorentzVector::basis(1, n).scaled(sg));
    let scale = g.act(&omega).coords()[0];
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Decomposition(
            "lightcone scaling is not positive".into(),
        ));
    }
    let t = sg * scale.ln();
    let ginv = g.inverse();
    let decay = (-sg * t).exp();
    let s: Vec<f64> = (0..n).map(|i| ginv.matrix()[(i + 2, 0)] * decay).collect();
    let x = labelled(Label::X, n)?;
    let a = exp_flow(&x, t)?;
    let b = horospherical(sign, &s)?;
    let b_inv = horospherical(sign, &s.iter().map(|v| -v).collect::<Vec<_>>())?;
    let a_inv = exp_flow(&x, -t)?;
    let k = g.mul(&b_inv).mul(&a_inv);
    let tol = scaled_tol(TOL_RECON, g.matrix());
    let e0 = LorentzVector::basis(0, n);
    if k.act(&e0).max_abs_diff(&e0) > tol || !k.certify(tol) {
        return Err(Error::Decomposition(
            "compact factor does not certify in K".into(),
        ));
    }
    let out = KanFactors {
        k,
        a,
        b,
        t,
        s,
        sign,
    };
    if out.product().distance(g) > tol {
        return Err(Error::Decomposition(
            "reconstruction error too large".into(),
        ));
    }
    Ok(out)
}

fn block(m: &DMatrix<f64>, r0: usize, c0: usize, rows: usize, cols: usize) -> DMatrix<f64> {
    m.view((r0, c0), (rows, cols)).into_owned()
}

fn off_blocks_vanish(m: &DMatrix<f64>, l: usize, tol: f64) -> bool {
    let size = m.nrows();
    let rest = size - (l + 1);
    block(m, 0, l + 1, l + 1, rest).amax() <= tol && block(m, l + 1, 0, rest, l + 1).amax() <= tol
}

fn is_orthogonal(q: &DMatrix<f64>, tol: f64) -> bool {
    let k = q.nrows();
    (q.transpose() * q - DMatrix::identity(k, k)).amax() <= tol
}

fn lorentz_residual(b: &DMatrix<f64>) -> f64 {
    let mut j = DMatrix::identity(b.nrows(), b.nrows());
    j[(0, 0)] = -1.0;
    (b.transpose() * &j * b - &j).amax()
}

/// Membership in the standard subgroup `W_l = SO₀(1,l)` embedded in the upper
/// left `(l+1)×(l+1)` block.
pub fn standard_subgroup_member(g: &GroupElement, l: usize) -> bool {
    standard_member_within(g, l, TOL_GROUP)
}

fn standard_member_within(g: &GroupElement, l: usize, tol: f64) -> bool {
    let n = g.n();
    if !(2..=n + 1).contains(&l) {
        return false;
    }
    let m = g.matrix();
    let size = n + 2;
    let rest = size - (l + 1);
    is_group_element(&block(m, 0, 0, l + 1, l + 1), tol)
        && off_blocks_vanish(m, l, tol)
        && (block(m, l + 1, l + 1, rest, rest) - DMatrix::identity(rest, rest)).amax() <= tol
}

/// Membership in `N_G(W_l) = S(O₀(1,l) × O(n−l+1))` by block structure.
pub fn normalizer_member(g: &GroupElement, l: usize) -> bool {
    let n = g.n();
    if !(2..=n).contains(&l) {
        return false;
    }
    let m = g.matrix();
    let rest = n + 1 - l;
    let b1 = block(m, 0, 0, l + 1, l + 1);
    let q = block(m, l + 1, l + 1, rest, rest);
    off_blocks_vanish(m, l, TOL_GROUP)
        && lorentz_residual(&b1) <= TOL_GROUP
        && b1[(0, 0)] > 0.0
        && is_orthogonal(&q, TOL_GROUP)
        && (b1.determinant() * q.determinant() - 1.0).abs() <= TOL_GROUP
}

/// A random element of `W_l` embedded in dimension `n`.
pub fn random_standard_element<R: Rng + ?Sized>(
    l: usize,
    n: usize,
    rng: &mut R,
) -> Result<GroupElement> {
    if !(2..=n + 1).contains(&l) {
        return Err(Error::IndexOutOfRange(format!("l={l} for n={n}")));
    }
    let mut labels = vec![Label::X];
    for k in 2..=l {
        labels.push(Label::A(k));
    }
    for i in 1..=l {
        for j in i + 1..=l {
            labels.push(Label::R(i, j));
        }
    }
    let mut g = GroupElement::identity(n);
    for _ in 0..5 {
        let label = labels[rng.random_range(0..labels.len())];
        g = g.mul(&exp_flow(
            &labelled(label, n)?,
            rng.random_range(-1.0..=1.0),
        )?);
    }
    Ok(g)
}

/// Membership in the normaliser tested by conjugating `samples` random
/// elements of `W_l` (fixed seed).
pub fn normalizer_member_by_conjugation(g: &GroupElement, l: usize, samples: usize) -> bool {
    let n = g.n();
    if !(2..=n).contains(&l) || !g.certify(scaled_tol(TOL_GROUP, g.matrix())) {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + l as u64);
    let ginv = g.inverse();
    (0..samples).all(|_| {
        let w = random_standard_element(l, n, &mut rng).expect("valid l");
        let c = g.mul(&w).mul(&ginv);
        // entries of the conjugate grow like |g|²|w|, and so does rounding
        let tol = scaled_tol(TOL_GROUP, g.matrix()) * w.matrix().amax().max(1.0);
        standard_member_within(&c, l, tol)
    })
}

/// The reflection `k_l`: identity except `−1` at diagonal index `l`.
pub fn flip_reflection(l: usize, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::identity(n + 2, n + 2);
    m[(l, l)] = -1.0;
    m
}

/// Which case of the normaliser decomposition applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizerKind {
    /// `k` centralises `W_l`.
    Centralizing,
    /// `k = k_l·k₀` with `det k₀ = −1`.
    Flipped,
}

/// Writes `g ∈ N_G(W_l)` as `g = w·k` with `w ∈ W_l`, `k ∈ K₀`.
pub fn normalizer_decompose(
    g: &GroupElement,
    l: usize,
) -> Result<(GroupElement, GroupElement, NormalizerKind)> {
    if !normalizer_member(g, l) {
        return Err(Error::Decomposition(format!(
            "element is not in the normaliser of W_{l}"
        )));
    }
    let n = g.n();
    let size = n + 2;
    let m = g.matrix();
    let mut w = DMatrix::identity(size, size);
    let mut k = DMatrix::identity(size, size);
    w.view_mut((0, 0), (l + 1, l + 1))
        .copy_from(&block(m, 0, 0, l + 1, l + 1));
    let rest = n + 1 - l;
    k.view_mut((l + 1, l + 1), (rest, rest))
        .copy_from(&block(m, l + 1, l + 1, rest, rest));
    let kind = if block(m, 0, 0, l + 1, l + 1).determinant() > 0.0 {
        NormalizerKind::Centralizing
    } else {
        let kl = flip_reflection(l, n);
        w = &w * &kl;
        k = &kl * &k;
        NormalizerKind::Flipped
    };
    let w = GroupElement::from_trusted(w);
    let k = GroupElement::from_trusted(k);
    if w.mul(&k).distance(g) > scaled_tol(TOL_RECON, m) {
        return Err(Error::Decomposition(
            "reconstruction error too large".into(),
        ));
    }
    Ok((w, k, kind))
}

fn in_k0(k: &GroupElement, tol: f64) -> bool {
    let m = k.matrix();
    let size = m.nrows();
    let id = DMatrix::<f64>::identity(size, size);
    k.certify(tol)
        && (block(m, 0, 0, size, 2) - block(&id, 0, 0, size, 2)).amax() <= tol
        && (block(m, 0, 0, 2, size) - block(&id, 0, 0, 2, size)).amax() <= tol
}

/// Membership in `K_U = S(O(1) × O(n−1))` inside `K₀` by block structure.
pub fn ku_member(k: &GroupElement) -> bool {
    let tol = TOL_GROUP;
    if !in_k0(k, tol) {
        return false;
    }
    let m = k.matrix();
    let n = k.n();
    let eps = m[(2, 2)];
    if (eps.abs() - 1.0).abs() > tol {
        return false;
    }
    let cross = (3..n + 2).all(|j| m[(2, j)].abs() <= tol && m[(j, 2)].abs() <= tol);
    if !cross {
        return false;
    }
    let q = block(m, 3, 3, n - 1, n - 1);
    let det_q = if n == 1 { 1.0 } else { q.determinant() };
    is_orthogonal(&q, tol) && (eps.signum() * det_q - 1.0).abs() <= tol
}

/// Membership in `K_U` tested on the Lie algebra: `k ∈ K₀` and conjugation
/// by `k` keeps `U₁^±` inside its own span.
pub fn ku_member_by_conjugation(k: &GroupElement) -> bool {
    let tol = TOL_GROUP;
    if !in_k0(k, tol) {
        return false;
    }
    let n = k.n();
    let kinv = k.inverse();
    [Sign::Plus, Sign::Minus].iter().all(|&s| {
        let u = labelled(Label::U(1, s), n).expect("U1 exists for n >= 1");
        let c = k.matrix() * u.matrix() * kinv.matrix();
        let coef = c.dot(u.matrix()) / u.matrix().dot(u.matrix());
        (c - u.matrix() * coef).amax() <= tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::{random_group_element, GeneratorKind};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn kan_identity() {
        for sign in [Sign::Plus, Sign::Minus] {
            let f = kan_decompose(&GroupElement::identity(3), sign).unwrap();
            assert!(f.k.distance(&GroupElement::identity(3)) < 1e-15);
            assert_eq!(f.t, 0.0);
            assert!(f.s.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn kan_of_a_element() {
        let x = labelled(Label::X, 2).unwrap();
        let g = exp_flow(&x, 1.3).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let f = kan_decompose(&g, sign).unwrap();
            assert!((f.t - 1.3).abs() < 1e-14);
            assert!(f.s.iter().all(|v| v.abs() < 1e-14));
            assert!(f.a.distance(&g) < 1e-14);
        }
    }

    #[test]
    fn kan_random_round_trip() {
        let mut r = rng(11);
        for n in 1..=5 {
            for _ in 0..40 {
                let g = random_group_element(n, &mut r).unwrap();
                for sign in [Sign::Plus, Sign::Minus] {
                    let f = kan_decompose(&g, sign).unwrap();
                    assert!(f.product().distance(&g) <= 1e-10);
                    let e0 = LorentzVector::basis(0, n);
                    assert!(f.k.act(&e0).max_abs_diff(&e0) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn kan_recovers_known_factors() {
        let n = 3;
        let x = labelled(Label::X, n).unwrap();
        let k = exp_flow(&labelled(Label::R(2, 4), n).unwrap(), 0.8).unwrap();
        let a = exp_flow(&x, -0.6).unwrap();
        let b = horospherical(Sign::Minus, &[0.3, -0.2, 1.1]).unwrap();
        let g = k.mul(&a).mul(&b);
        let f = kan_decompose(&g, Sign::Minus).unwrap();
        assert!((f.t + 0.6).abs() < 1e-12);
        for (got, want) in f.s.iter().zip([0.3, -0.2, 1.1]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(f.k.distance(&k) < 1e-12);
    }

    #[test]
    fn standard_subgroup_examples() {
        let x = labelled(Label::X, 3).unwrap();
        let g = exp_flow(&x, 0.9).unwrap();
        for l in 2..=4 {
            assert!(standard_subgroup_member(&g, l));
        }
        let u2 = crate::lorentz::generator(GeneratorKind::Uplus, 2, 0, 3).unwrap();
        assert!(!standard_subgroup_member(&exp_flow(&u2, 0.5).unwrap(), 2));
        let mut r = rng(5);
        let w = random_standard_element(2, 4, &mut r).unwrap();
        assert!(standard_subgroup_member(&w, 2));
        assert!(!standard_subgroup_member(&w, 1));
    }

    #[test]
    fn normalizer_examples() {
        let n = 4;
        let l = 2;
        let mut r = rng(9);
        let w = random_standard_element(l, n, &mut r).unwrap();
        assert!(normalizer_member(&w, l));
        assert!(normalizer_member_by_conjugation(&w, l, 20));
        let k0 = exp_flow(&labelled(Label::R(3, 5), n).unwrap(), 0.4).unwrap();
        assert!(normalizer_member(&k0, l));
        assert!(normalizer_member_by_conjugation(&k0, l, 20));
        let u = exp_flow(&labelled(Label::U(l, Sign::Plus), n).unwrap(), 0.5).unwrap();
        assert!(!normalizer_member(&u, l));
        assert!(!normalizer_member_by_conjugation(&u, l, 20));
    }

    #[test]
    fn normalizer_decompositions() {
        let n = 4;
        let l = 2;
        let mut r = rng(1);
        let w = random_standard_element(l, n, &mut r).unwrap();
        let (w1, k1, kind) = normalizer_decompose(&w, l).unwrap();
        assert_eq!(kind, NormalizerKind::Centralizing);
        assert!(w1.distance(&w) < 1e-14);
        assert!(k1.distance(&GroupElement::identity(n)) < 1e-14);

        let k0 = exp_flow(&labelled(Label::R(4, 5), n).unwrap(), 1.1).unwrap();
        let (w2, k2, kind) = normalizer_decompose(&k0, l).unwrap();
        assert_eq!(kind, NormalizerKind::Centralizing);
        assert!(w2.distance(&GroupElement::identity(n)) < 1e-14);
        assert!(k2.distance(&k0) < 1e-14);

        // w·k_l·k₀ with det k₀ = −1 on the lower block.
        let mut low = flip_reflection(l + 1, n);
        low = &low
            * exp_flow(&labelled(Label::R(3, 5), n).unwrap(), 0.7)
                .unwrap()
                .matrix();
        let g = GroupElement::new(w.matrix() * flip_reflection(l, n) * low, 1e-10).unwrap();
        let (w3, k3, kind) = normalizer_decompose(&g, l).unwrap();
        assert_eq!(kind, NormalizerKind::Flipped);
        assert!(w3.mul(&k3).distance(&g) < 1e-10);
        assert!(standard_subgroup_member(&w3, l));
        assert!(in_k0(&k3, 1e-10));
    }

    #[test]
    fn normalizer_decompose_rejects_non_members() {
        let u = exp_flow(&labelled(Label::U(2, Sign::Plus), 3).unwrap(), 0.5).unwrap();
        assert!(normalizer_decompose(&u, 2).is_err());
    }

    #[test]
    fn ku_examples() {
        let n = 3;
        let id = GroupElement::identity(n);
        assert!(ku_member(&id) && ku_member_by_conjugation(&id));
        let mix = exp_flow(&labelled(Label::R(2, 3), n).unwrap(), 0.3).unwrap();
        assert!(!ku_member(&mix) && !ku_member_by_conjugation(&mix));
        // diag(1, 1, −1, Q) with det Q = −1.
        let mut m = DMatrix::identity(n + 2, n + 2);
        m[(2, 2)] = -1.0;
        m[(4, 4)] = -1.0;
        let k = GroupElement::new(m, 1e-12).unwrap();
        assert!(ku_member(&k) && ku_member_by_conjugation(&k));
        let inside = exp_flow(&labelled(Label::R(3, 4), n).unwrap(), 0.9).unwrap();
        assert!(ku_member(&inside) && ku_member_by_conjugation(&inside));
        let boost = exp_flow(&labelled(Label::X, n).unwrap(), 0.2).unwrap();
        assert!(!ku_member(&boost) && !ku_member_by_conjugation(&boost));
    }
}
