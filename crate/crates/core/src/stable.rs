//! Tangent geometry of the unit cotangent bundle `S*ℍ^{n+1}`: stable and
//! unstable subspaces, the boundary maps `B±`, the Poisson kernel and the
//! symplectomorphisms `κ±` together with finite-difference checks of their
//! properties.
//!
//! Covectors are identified with tangent vectors through the Minkowski
//! metric, so a [`PhasePoint`] is a pair of Minkowski vectors.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::lorentz::{minkowski_inner, pi_k0, GroupElement, LorentzVector};
use crate::{Error, Result, Sign};

/// Default tolerance for the phase-space constraints.
pub const TOL_PHASE: f64 = 1e-9;

/// A point `(x, ξ)` of `T*ℍ^{n+1} ∖ 0` in the hyperboloid model.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    x: LorentzVector,
    xi: LorentzVector,
}

/// A tangent vector `(v_x, v_ξ)` at a [`PhasePoint`].
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPair {
    pub v_x: LorentzVector,
    pub v_xi: LorentzVector,
}

/// Image `(w, y, θ, η)` of `κ±`.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaPoint {
    pub w: f64,
    pub y: DVector<f64>,
    pub theta: f64,
    pub eta: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bundle {
    Stable,
    Unstable,
}

impl PhasePoint {
    /// Checks `⟨x,x⟩ = −1`, `x₀ > 0`, `⟨x,ξ⟩ = 0`, `⟨ξ,ξ⟩ > 0` within `tol`.
    pub fn new(x: LorentzVector, xi: LorentzVector, tol: f64) -> Result<Self> {
        let xx = minkowski_inner(&x, &x)?;
        let xs = minkowski_inner(&x, &xi)?;
        let ss = minkowski_inner(&xi, &xi)?;
        if !x.is_finite() || !xi.is_finite() {
            return Err(Error::NonFinite("phase point".into()));
        }
        if (xx + 1.0).abs() > tol || x.coords()[0] <= 0.0 {
            return Err(Error::NotOnHyperboloid);
        }
        if xs.abs() > tol * ss.abs().sqrt().max(1.0) {
            return Err(Error::InvalidPhasePoint(format!("<x,xi> = {xs:e}")));
        }
        if ss <= tol {
            return Err(Error::Degenerate("zero energy".into()));
        }
        Ok(Self { x, xi })
    }

    /// The unit cotangent vector `π_{K₀}(g)`.
    pub fn from_frame(g: &GroupElement) -> Self {
        let (x, xi) = pi_k0(g);
        Self { x, xi }
    }

    /// The basepoint `(e⃗₀, e⃗₁)`.
    pub fn basepoint(n: usize) -> Self {
        Self {
            x: LorentzVector::basis(0, n),
            xi: LorentzVector::basis(1, n),
        }
    }

    pub(crate) fn from_parts_unchecked(x: LorentzVector, xi: LorentzVector) -> Self {
        Self { x, xi }
    }

    pub fn x(&self) -> &LorentzVector {
        &self.x
    }

    pub fn xi(&self) -> &LorentzVector {
        &self.xi
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    /// `p(x,ξ) = |ξ|_g`.
    pub fn energy(&self) -> f64 {
        self.xi.norm_sq().sqrt()
    }

    pub fn with_energy(&self, w: f64) -> Self {
        Self {
            x: self.x.clone(),
            xi: self.xi.scaled(w / self.energy()),
        }
    }

    /// The geodesic flow, extended homogeneously in `ξ`.
    pub fn flow(&self, t: f64) -> Self {
        let w = self.energy();
        let (c, s) = (t.cosh(), t.sinh());
        let x = self.x.combine(c, &self.xi, s / w);
        let xi = self.x.combine(w * s, &self.xi, c);
        Self { x, xi }
    }

    /// The generator `X` of the flow at this point.
    pub fn flow_direction(&self) -> TangentPair {
        let w = self.energy();
        TangentPair {
            v_x: self.xi.scaled(1.0 / w),
            v_xi: self.x.scaled(w),
        }
    }

    /// The dilation field `ξ∂_ξ`.
    pub fn dilation_direction(&self) -> TangentPair {
        TangentPair {
            v_x: LorentzVector::zeros(self.n()),
            v_xi: self.xi.clone(),
        }
    }

    /// Projects a nearby pair back onto the constraints `⟨x,x⟩ = −1`,
    /// `⟨x,ξ⟩ = 0`.
    pub fn retract(x: &LorentzVector, xi: &LorentzVector) -> Self {
        let x = x.scaled(1.0 / (-x.norm_sq()).sqrt());
        let xi = xi.add(&x.scaled(minkowski_inner(xi, &x).expect("same dimension")));
        Self { x, xi }
    }

    fn displaced(&self, v: &TangentPair, s: f64) -> Self {
        Self::retract(
            &self.x.combine(1.0, &v.v_x, s),
            &self.xi.combine(1.0, &v.v_xi, s),
        )
    }
}

impl TangentPair {
    /// Max residual of the three linearised constraints at `p`.
    pub fn constraint_residual(&self, p: &PhasePoint) -> f64 {
        let a = minkowski_inner(p.x(), &self.v_x).unwrap_or(f64::INFINITY);
        let b = minkowski_inner(p.x(), &self.v_xi).unwrap_or(f64::INFINITY)
            + minkowski_inner(p.xi(), &self.v_x).unwrap_or(f64::INFINITY);
        let c = minkowski_inner(p.xi(), &self.v_xi).unwrap_or(f64::INFINITY);
        a.abs().max(b.abs()).max(c.abs())
    }

    fn stacked(&self) -> DVector<f64> {
        let m = self.v_x.coords().len();
        DVector::from_fn(2 * m, |i, _| {
            if i < m {
                self.v_x.coords()[i]
            } else {
                self.v_xi.coords()[i - m]
            }
        })
    }
}

impl fmt::Display for KappaPoint {
    /// `w theta y[0..n] eta[0..n]` with 17 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = vec![format!("{:.16e}", self.w), format!("{:.16e}", self.theta)];
        parts.extend(self.y.iter().map(|v| format!("{v:.16e}")));
        parts.extend(self.eta.iter().map(|v| format!("{v:.16e}")));
        f.write_str(&parts.join(" "))
    }
}

/// `(x₁,…,x_{n+1})/(1+x₀)`.
pub fn hyperboloid_to_ball(x: &LorentzVector) -> Result<DVector<f64>> {
    if (x.norm_sq() + 1.0).abs() > TOL_PHASE * x.coords()[0].abs().max(1.0).powi(2)
        || x.coords()[0] <= 0.0
    {
        return Err(Error::NotOnHyperboloid);
    }
    Ok(x.spatial() / (1.0 + x.coords()[0]))
}

/// Inverse of [`hyperboloid_to_ball`].
pub fn ball_to_hyperboloid(z: &DVector<f64>) -> Result<LorentzVector> {
    let r = z.norm_squared();
    if r >= 1.0 {
        return Err(Error::InvalidParameter(
            "point outside the unit ball".into(),
        ));
    }
    let d = 1.0 - r;
    let mut coords = vec![(1.0 + r) / d];
    coords.extend(z.iter().map(|v| 2.0 * v / d));
    LorentzVector::new(coords)
}

/// `B±(x,ξ)`: the endpoint on the unit sphere of the geodesic as `t → ±∞`,
/// i.e. the normalised spatial part of the null vector `x ± ξ/|ξ|_g`.
pub fn boundary_map(p: &PhasePoint, sign: Sign) -> Result<DVector<f64>> {
    let w = p.energy();
    if !(w > 0.0) {
        return Err(Error::Degenerate("zero energy".into()));
    }
    let v = p.x.combine(1.0, &p.xi, sign.value() / w).spatial();
    Ok(&v / v.norm())
}

/// Orthonormal basis of `E_s` or `E_u` at `p`: vectors `(v, ∓|ξ|_g v)` with
/// `v` Minkowski-orthonormal to `x` and `ξ`.
pub fn stable_unstable_basis(p: &PhasePoint, which: Bundle) -> Result<Vec<TangentPair>> {
    let n = p.n();
    let w = p.energy();
    let xi_hat = p.xi.scaled(1.0 / w);
    let mut found: Vec<LorentzVector> = Vec::with_capacity(n);
    let mut candidates: Vec<LorentzVector> =
        (0..n + 2).map(|i| LorentzVector::basis(i, n)).collect();
    while found.len() < n && !candidates.is_empty() {
        let projected: Vec<LorentzVector> = candidates
            .iter()
            .map(|c| {
                let mut v = c.add(&p.x.scaled(minkowski_inner(c, &p.x).unwrap()));
                v = v.sub(&xi_hat.scaled(minkowski_inner(&v, &xi_hat).unwrap()));
                for f in &found {
                    v = v.sub(&f.scaled(minkowski_inner(&v, f).unwrap()));
                }
                v
            })
            .collect();
        let (best, norm) = projected
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm_sq()))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        if norm <= 1e-12 {
            break;
        }
        found.push(projected[best].scaled(1.0 / norm.sqrt()));
        candidates.remove(best);
    }
    if found.len() < n {
        return Err(Error::Degenerate("rank deficiency in E_s/E_u".into()));
    }
    let sgn = match which {
        Bundle::Stable => -1.0,
        Bundle::Unstable => 1.0,
    };
    Ok(found
        .into_iter()
        .map(|v| TangentPair {
            v_xi: v.scaled(sgn * w),
            v_x: v,
        })
        .collect())
}

/// The linearised flow `dφ_t` applied to `v` at `p`.
pub fn flow_differential(p: &PhasePoint, v: &TangentPair, t: f64) -> TangentPair {
    let w = p.energy();
    let (c, s) = (t.cosh(), t.sinh());
    TangentPair {
        v_x: v.v_x.combine(c, &v.v_xi, s / w),
        v_xi: v.v_x.combine(w * s, &v.v_xi, c),
    }
}

/// `|dφ_t v|_g / |v|_g`, measured on the base component.
pub fn expansion_rate(p: &PhasePoint, v: &TangentPair, t: f64) -> Result<f64> {
    let w = p.energy();
    let unstable = v.v_x.combine(0.5, &v.v_xi, 0.5 / w);
    let stable = v.v_x.combine(0.5, &v.v_xi, -0.5 / w);
    let (nu, ns) = (
        unstable.norm_sq().max(0.0).sqrt(),
        stable.norm_sq().max(0.0).sqrt(),
    );
    let tol = 1e-9;
    let orth = minkowski_inner(&v.v_x, p.x())?.abs() + minkowski_inner(&v.v_x, p.xi())?.abs() / w;
    let scale = nu.max(ns);
    if scale == 0.0 || orth > tol * scale || (nu > tol * scale && ns > tol * scale) {
        return Err(Error::InvalidParameter(
            "vector lies in neither E_s nor E_u".into(),
        ));
    }
    let moved = flow_differential(p, v, t);
    Ok((moved.v_x.norm_sq().sqrt()) / v.v_x.norm_sq().sqrt())
}

/// `𝒫(x,y) = (1−|x|²)/|x−y|²`.
pub fn poisson_kernel(x_ball: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    let r = x_ball.norm_squared();
    if r >= 1.0 {
        return Err(Error::InvalidParameter(
            "point outside the unit ball".into(),
        ));
    }
    if x_ball.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x_ball.len(),
            found: y.len(),
        });
    }
    Ok((1.0 - r) / (x_ball - y).norm_squared())
}

/// `𝒢(y,y′) = (y′ − (y·y′)y)/(1 − y·y′)`.
pub fn half_stereographic(y: &DVector<f64>, yprime: &DVector<f64>) -> Result<DVector<f64>> {
    let d = y.dot(yprime);
    if (1.0 - d).abs() < 1e-14 {
        return Err(Error::Degenerate("y = y' is a pole".into()));
    }
    Ok((yprime - y * d) / (1.0 - d))
}

/// `κ±(x,ξ) = (p, B∓, ±log 𝒫(x, B∓), ±p·𝒢(B∓, B±))`.
pub fn kappa(p: &PhasePoint, sign: Sign) -> Result<KappaPoint> {
    let w = p.energy();
    let y = boundary_map(p, sign.flip())?;
    let other = boundary_map(p, sign)?;
    if (&y - &other).norm() < 1e-9 {
        return Err(Error::Degenerate("B+ = B-".into()));
    }
    let z = hyperboloid_to_ball(p.x())?;
    let s = sign.value();
    Ok(KappaPoint {
        w,
        theta: s * poisson_kernel(&z, &y)?.ln(),
        eta: half_stereographic(&y, &other)? * (s * w),
        y,
    })
}

/// Orthonormal basis of the tangent plane of the sphere at `y0`.
fn tangent_frame(y0: &DVector<f64>) -> DMatrix<f64> {
    let d = y0.len();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(d - 1);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| y0[a].abs().partial_cmp(&y0[b].abs()).unwrap());
    for i in order {
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        v -= y0 * y0[i];
        for b in &basis {
            let c = v.dot(b);
            v -= b * c;
        }
        let nv = v.norm();
        if nv > 1e-8 && basis.len() < d - 1 {
            basis.push(v / nv);
        }
    }
    DMatrix::from_columns(&basis)
}

fn ball_chart_inverse(v: &[f64]) -> Result<PhasePoint> {
    let m = v.len() / 2;
    let z = DVector::from_column_slice(&v[..m]);
    let zeta = DVector::from_column_slice(&v[m..]);
    let d = 1.0 - z.norm_squared();
    let u = zeta * (d * d / 4.0);
    let zu = z.dot(&u);
    let x = ball_to_hyperboloid(&z)?;
    let dxs = &u * (2.0 / d) + &z * (4.0 * zu / (d * d));
    let mut coords = vec![4.0 * zu / (d * d)];
    coords.extend(dxs.iter());
    Ok(PhasePoint::from_parts_unchecked(
        x,
        LorentzVector::new(coords)?,
    ))
}

fn ball_chart(p: &PhasePoint) -> Result<Vec<f64>> {
    let z = hyperboloid_to_ball(p.x())?;
    let x0 = p.x().coords()[0];
    let xi0 = p.xi().coords()[0];
    let dz = p.xi().spatial() / (1.0 + x0) - p.x().spatial() * (xi0 / (1.0 + x0).powi(2));
    let lambda = 2.0 / (1.0 - z.norm_squared());
    let zeta = dz * (lambda * lambda);
    Ok(z.iter().chain(zeta.iter()).copied().collect())
}

/// Target chart on `T*(ℝ⁺ × 𝕊ⁿ)`: positions `(w, s)` with `s` the gnomonic
/// coordinate of `y` about `y0`, momenta `(θ, η_s)`.
fn target_chart(k: &KappaPoint, y0: &DVector<f64>, e: &DMatrix<f64>) -> Vec<f64> {
    let s = e.transpose() * &k.y / k.y.dot(y0);
    let nn = (1.0 + s.norm_squared()).sqrt();
    let base = y0 + e * &s;
    let mut out = vec![k.w];
    out.extend(s.iter());
    out.push(k.theta);
    for i in 0..s.len() {
        let dy = e.column(i) / nn - &base * (s[i] / nn.powi(3));
        out.push(k.eta.dot(&dy));
    }
    out
}

/// `max |JᵀΩJ − Ω|` for the fourth-order central-difference Jacobian `J` of `f` at
/// `point`, where coordinates are ordered `(q, p)` and `Ω = [[0,−I],[I,0]]`.
pub fn symplectic_residual<F>(f: F, point: &[f64], fd_step: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let d = point.len();
    if !d.is_multiple_of(2) {
        return Err(Error::DimensionMismatch {
            expected: d + 1,
            found: d,
        });
    }
    let mut jac = DMatrix::zeros(d, d);
    let mut probe = point.to_vec();
    for i in 0..d {
        let mut at = |k: f64| -> Result<Vec<f64>> {
            probe[i] = point[i] + k * fd_step;
            let v = f(&probe)?;
            probe[i] = point[i];
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.len(),
                });
            }
            Ok(v)
        };
        let (f1, g1, f2, g2) = (at(1.0)?, at(-1.0)?, at(2.0)?, at(-2.0)?);
        for r in 0..d {
            jac[(r, i)] = (8.0 * (f1[r] - g1[r]) - (f2[r] - g2[r])) / (12.0 * fd_step);
        }
    }
    let m = d / 2;
    let mut omega = DMatrix::zeros(d, d);
    for i in 0..m {
        omega[(i, m + i)] = -1.0;
        omega[(m + i, i)] = 1.0;
    }
    Ok((jac.transpose() * &omega * &jac - &omega).amax())
}

/// Finite-difference check that `κ^sign` preserves the symplectic form.
///
/// Source coordinates are the ball-model position `z` and its cotangent
/// coordinate `ζ = λ²·dz(ξ)`, `λ = 2/(1−|z|²)`. Target coordinates use a
/// gnomonic chart of the sphere centred at `y(p)`.
pub fn symplectic_exactness_check(sign: Sign, p: &PhasePoint, fd_step: f64) -> Result<f64> {
    if !(1e-6..=1e-3).contains(&fd_step) {
        return Err(Error::InvalidParameter(format!(
            "fd_step {fd_step:e} outside [1e-6, 1e-3]"
        )));
    }
    let k0 = kappa(p, sign)?;
    let gap = (boundary_map(p, Sign::Plus)? - boundary_map(p, Sign::Minus)?).norm();
    if gap < 1e-6 {
        return Err(Error::Degenerate("chart degeneracy near B+ = B-".into()));
    }
    let y0 = k0.y.clone();
    let e = tangent_frame(&y0);
    let source = ball_chart(p)?;
    symplectic_residual(
        |v| {
            let q = ball_chart_inverse(v)?;
            Ok(target_chart(&kappa(&q, sign)?, &y0, &e))
        },
        &source,
        fd_step,
    )
}

/// `(|dw| + |dy|)/|dκ·v|` maximised over `vectors`, by central differences
/// along retracted straight lines.
pub fn foliation_residual(
    sign: Sign,
    p: &PhasePoint,
    vectors: &[TangentPair],
    fd_step: f64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for v in vectors {
        let kp = kappa(&p.displaced(v, fd_step), sign)?;
        let km = kappa(&p.displaced(v, -fd_step), sign)?;
        let dw = (kp.w - km.w) / (2.0 * fd_step);
        let dy = (&kp.y - &km.y) / (2.0 * fd_step);
        let dtheta = (kp.theta - km.theta) / (2.0 * fd_step);
        let deta = (&kp.eta - &km.eta) / (2.0 * fd_step);
        let total = (dw * dw + dy.norm_squared() + dtheta * dtheta + deta.norm_squared()).sqrt();
        if total == 0.0 {
            return Err(Error::Degenerate("dκ·v vanishes".into()));
        }
        worst = worst.max((dw.abs() + dy.norm()) / total);
    }
    Ok(worst)
}

/// Basis of the weak foliation `ℝX ⊕ E_u` (`Bundle::Unstable`) or `ℝX ⊕ E_s`.
pub fn weak_foliation_basis(p: &PhasePoint, which: Bundle) -> Result<Vec<TangentPair>> {
    let mut out = vec![p.flow_direction()];
    out.extend(stable_unstable_basis(p, which)?);
    Ok(out)
}

/// Checks that `κ⁺` straightens `L_u` and `κ⁻` straightens `L_s`.
pub fn foliation_straightening_check(sign: Sign, p: &PhasePoint) -> Result<f64> {
    let which = match sign {
        Sign::Plus => Bundle::Unstable,
        Sign::Minus => Bundle::Stable,
    };
    foliation_residual(sign, p, &weak_foliation_basis(p, which)?, 1e-4)
}

/// Smallest singular value of the stacked decomposition
/// `ℝX ⊕ ℝ(ξ∂_ξ) ⊕ E_s ⊕ E_u`, normalised column-wise.
pub fn tangent_decomposition_margin(p: &PhasePoint) -> Result<f64> {
    let mut cols = vec![p.flow_direction(), p.dilation_direction()];
    cols.extend(stable_unstable_basis(p, Bundle::Stable)?);
    cols.extend(stable_unstable_basis(p, Bundle::Unstable)?);
    let stacked: Vec<DVector<f64>> = cols
        .iter()
        .map(|c| {
            let v = c.stacked();
            let nv = v.norm();
            v / nv
        })
        .collect();
    let m = DMatrix::from_columns(&stacked);
    Ok(m.singular_values().min())
}

/// `|θ(φ_t p) − (θ(p) − t)|` for the chart `κ±`.
pub fn theta_translation_residual(p: &PhasePoint, sign: Sign, t: f64) -> Result<f64> {
    let a = kappa(p, sign)?;
    let b = kappa(&p.flow(t), sign)?;
    Ok((b.theta - (a.theta - t)).abs())
}
