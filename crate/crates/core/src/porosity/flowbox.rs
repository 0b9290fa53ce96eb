//! Hyperbolic porosity on flow boxes in the frame bundle of `ℍ^{n+1}`, and
//! membership in propagated supports.
//!
//! Flows of left-invariant fields act on the right: `e^{Y} q = q·exp(Y)`.

use std::sync::Arc;

use super::PorosityKind;
use crate::lorentz::{
    exp_general, horospherical, labelled, GroupElement, Label, LieAlgebraElement,
};
use crate::stable::PhasePoint;
use crate::words::Word;
use crate::{Error, Result, Sign};

/// Membership oracle for a subset of `T*ℍ^{n+1}`.
pub trait PhaseOracle: Sync + Send {
    fn contains(&self, p: &PhasePoint) -> Result<bool>;
}

impl<F> PhaseOracle for F
where
    F: Fn(&PhasePoint) -> bool + Sync + Send,
{
    fn contains(&self, p: &PhasePoint) -> Result<bool> {
        Ok(self(p))
    }
}

impl PhaseOracle for Arc<dyn PhaseOracle> {
    fn contains(&self, p: &PhasePoint) -> Result<bool> {
        (**self).contains(p)
    }
}

/// Chordal distance between `(x, ξ/|ξ|)` and `(y, η/|η|)` in the ambient
/// Euclidean space.
pub fn chordal_distance(p: &PhasePoint, q: &PhasePoint) -> f64 {
    let (wp, wq) = (p.energy(), q.energy());
    let dx: f64 = p
        .x()
        .as_slice()
        .iter()
        .zip(q.x().as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let dxi: f64 = p
        .xi()
        .as_slice()
        .iter()
        .zip(q.xi().as_slice())
        .map(|(a, b)| (a / wp - b / wq) * (a / wp - b / wq))
        .sum();
    (dx + dxi).sqrt()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EmptySet;

impl PhaseOracle for EmptySet {
    fn contains(&self, _: &PhasePoint) -> Result<bool> {
        Ok(false)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FullSet;

impl PhaseOracle for FullSet {
    fn contains(&self, _: &PhasePoint) -> Result<bool> {
        Ok(true)
    }
}

/// Finite union of closed chordal balls; invariant under scaling of `ξ`.
#[derive(Debug, Clone, Default)]
pub struct BallUnion {
    balls: Vec<(PhasePoint, f64)>,
}

impl BallUnion {
    pub fn new(balls: Vec<(PhasePoint, f64)>) -> Result<Self> {
        if let Some((_, r)) = balls.iter().find(|(_, r)| !(*r >= 0.0)) {
            return Err(Error::InvalidParameter(format!("ball radius {r}")));
        }
        Ok(Self { balls })
    }

    pub fn balls(&self) -> &[(PhasePoint, f64)] {
        &self.balls
    }
}

impl PhaseOracle for BallUnion {
    fn contains(&self, p: &PhasePoint) -> Result<bool> {
        for (c, _) in &self.balls {
            if c.n() != p.n() {
                return Err(Error::DimensionMismatch {
                    expected: c.n(),
                    found: p.n(),
                });
            }
        }
        Ok(self.balls.iter().any(|(c, r)| chordal_distance(c, p) <= *r))
    }
}

/// `{(x, ξ) : ⟨a, x⟩_E ≥ c}` for a Euclidean normal `a`.
#[derive(Debug, Clone)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl PhaseOracle for HalfSpace {
    fn contains(&self, p: &PhasePoint) -> Result<bool> {
        let x = p.x().as_slice();
        if x.len() != self.normal.len() {
            return Err(Error::DimensionMismatch {
                expected: self.normal.len(),
                found: x.len(),
            });
        }
        Ok(x.iter().zip(&self.normal).map(|(a, b)| a * b).sum::<f64>() >= self.offset)
    }
}

/// Shift found by the sampler.
#[derive(Debug, Clone, PartialEq)]
pub enum Shift {
    /// `u₀ ∈ ℝⁿ` with `|u₀| ≤ α`.
    Ball(Vec<f64>),
    /// `t₀ ∈ [−α, α]` along `U₁^±`.
    Line(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowboxOutcome {
    WitnessFound(Shift),
    NoWitness,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowboxParams {
    pub alpha: f64,
    pub nu: f64,
    pub eps: f64,
    pub kind: PorosityKind,
    /// `+` shifts along `U^+` and thickens along `𝒱^−`.
    pub sign: Sign,
    /// Sample points per flow box.
    pub samples: usize,
}

const PRIMES: [u64; 40] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173,
];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// The centre followed by the first `count − 1` Halton points of
/// `[−1,1]^{du} × [−1,1]^{dv}` that fall in the product of unit balls.
///
/// The first `k` points of a longer list are the list for `k`.
pub fn halton_flowbox_points(du: usize, dv: usize, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let dims = du + dv;
    assert!(dims <= PRIMES.len());
    let mut out = vec![(vec![0.0; du], vec![0.0; dv])];
    let mut i = 1u64;
    while out.len() < count {
        let p: Vec<f64> = (0..dims)
            .map(|k| 2.0 * radical_inverse(i, PRIMES[k]) - 1.0)
            .collect();
        i += 1;
        let (u, v) = p.split_at(du);
        let nu: f64 = u.iter().map(|a| a * a).sum();
        let nv: f64 = v.iter().map(|a| a * a).sum();
        if nu <= 1.0 && nv <= 1.0 {
            out.push((u.to_vec(), v.to_vec()));
        }
    }
    out.truncate(count.max(1));
    out
}

/// `𝒱^σ v = Σ vᵢ U_i^σ + v_{n+1} X`.
pub fn thickening_field(sign: Sign, v: &[f64], n: usize) -> Result<LieAlgebraElement> {
    if v.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: v.len(),
        });
    }
    let gens: Vec<LieAlgebraElement> = (1..=n)
        .map(|i| labelled(Label::U(i, sign), n))
        .chain(std::iter::once(labelled(Label::X, n)))
        .collect::<Result<_>>()?;
    let terms: Vec<(f64, &LieAlgebraElement)> = v.iter().copied().zip(gens.iter()).collect();
    LieAlgebraElement::combination(&terms)
}

fn validate(q: &GroupElement, p: &FlowboxParams) -> Result<()> {
    if !q.certify(1e-8) {
        return Err(Error::NotGroupElement("flow-box frame".into()));
    }
    let ok = p.alpha > 0.0 && p.nu > 0.0 && p.nu <= 1.0 && p.eps >= 0.0 && p.samples >= 1;
    if !ok || !(p.alpha.is_finite() && p.eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("{p:?}")));
    }
    Ok(())
}

/// Precomputed thickening exponentials and shift offsets for one density.
struct Sampler {
    u: Vec<Vec<f64>>,
    v: Vec<GroupElement>,
}

impl Sampler {
    fn new(n: usize, p: &FlowboxParams, count: usize) -> Result<Self> {
        let pts = halton_flowbox_points(n, n + 1, count);
        let mut u = Vec::with_capacity(pts.len());
        let mut v = Vec::with_capacity(pts.len());
        for (pu, pv) in pts {
            u.push(pu.iter().map(|a| a * p.nu * p.alpha).collect());
            let vv: Vec<f64> = pv.iter().map(|a| a * p.eps).collect();
            v.push(exp_general(&thickening_field(p.sign.flip(), &vv, n)?, 1.0)?);
        }
        Ok(Self { u, v })
    }

    fn misses(
        &self,
        omega: &dyn PhaseOracle,
        q: &GroupElement,
        sign: Sign,
        shift: &[f64],
    ) -> Result<bool> {
        for (u, ev) in self.u.iter().zip(&self.v) {
            let s: Vec<f64> = u.iter().zip(shift).map(|(a, b)| a + b).collect();
            let g = q.mul(&horospherical(sign, &s)?).mul(ev);
            if omega.contains(&PhasePoint::from_frame(&g))? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn shift_vector(n: usize, shift: &Shift) -> Result<Vec<f64>> {
    match shift {
        Shift::Ball(u0) if u0.len() == n => Ok(u0.clone()),
        Shift::Ball(u0) => Err(Error::DimensionMismatch {
            expected: n,
            found: u0.len(),
        }),
        Shift::Line(t0) => {
            let mut s = vec![0.0; n];
            s[0] = *t0;
            Ok(s)
        }
    }
}

/// True when all `samples` points of the flow box shifted by `shift` miss
/// `Ω`.
pub fn flowbox_misses(
    omega: &dyn PhaseOracle,
    q: &GroupElement,
    params: &FlowboxParams,
    shift: &Shift,
    samples: usize,
) -> Result<bool> {
    validate(q, params)?;
    let n = q.n();
    let sampler = Sampler::new(n, params, samples)?;
    sampler.misses(omega, q, params.sign, &shift_vector(n, shift)?)
}

/// Candidate shifts on a lattice of pitch `να/2`, nearest to the origin
/// first.
pub fn candidate_shifts(n: usize, params: &FlowboxParams) -> Vec<Shift> {
    let pitch = params.nu * params.alpha / 2.0;
    let reach = (params.alpha / pitch + 1e-9).floor() as i64;
    match params.kind {
        PorosityKind::Line => {
            let mut ts: Vec<i64> = (-reach..=reach).collect();
            ts.sort_by_key(|t| (t.abs(), -*t));
            ts.into_iter()
                .map(|t| Shift::Line(t as f64 * pitch))
                .collect()
        }
        PorosityKind::Ball => {
            let mut pts: Vec<Vec<i64>> = Vec::new();
            let mut cur = vec![-reach; n];
            loop {
                let r2: i64 = cur.iter().map(|c| c * c).sum();
                if (r2 as f64) * pitch * pitch <= params.alpha * params.alpha * (1.0 + 1e-12) {
                    pts.push(cur.clone());
                }
                let mut k = n;
                let done = loop {
                    if k == 0 {
                        break true;
                    }
                    k -= 1;
                    if cur[k] < reach {
                        cur[k] += 1;
                        break false;
                    }
                    cur[k] = -reach;
                };
                if done {
                    break;
                }
            }
            pts.sort_by_key(|p| (p.iter().map(|c| c * c).sum::<i64>(), p.clone()));
            pts.into_iter()
                .map(|p| Shift::Ball(p.iter().map(|&c| c as f64 * pitch).collect()))
                .collect()
        }
    }
}

/// Searches for a shift whose flow box misses `Ω`.
///
/// A candidate is accepted only if it also passes with twice as many
/// sample points.
pub fn flowbox_porosity_sample(
    omega: &dyn PhaseOracle,
    q: &GroupElement,
    params: &FlowboxParams,
) -> Result<FlowboxOutcome> {
    validate(q, params)?;
    let n = q.n();
    let coarse = Sampler::new(n, params, params.samples)?;
    let fine = Sampler::new(n, params, 2 * params.samples)?;
    for shift in candidate_shifts(n, params) {
        let s = shift_vector(n, &shift)?;
        if coarse.misses(omega, q, params.sign, &s)? && fine.misses(omega, q, params.sign, &s)? {
            return Ok(FlowboxOutcome::WitnessFound(shift));
        }
    }
    Ok(FlowboxOutcome::NoWitness)
}

/// Membership in the propagated support `𝒜₋` (`side = −`) or `𝒜₊`
/// (`side = +`) built from the letters of `word`.
///
/// For `𝒜₋` with `w = w₀ … w_{T−1}`, the point must satisfy
/// `φ_k(p) ∈ supp χ_{w_k}` for `k = 0, …, T−1`. For `𝒜₊` the word is read as
/// `w_T … w_1` and `φ_{−k}(p) ∈ supp χ_{w_k}` for `k = 1, …, T`. Both require
/// `1/4 ≤ |ξ| ≤ 4`.
pub fn propagated_support_member(
    p: &PhasePoint,
    word: &Word,
    supports: (&dyn PhaseOracle, &dyn PhaseOracle),
    side: Sign,
) -> Result<bool> {
    if word.is_empty() {
        return Err(Error::InvalidParameter("empty word".into()));
    }
    let w = p.energy();
    if !(0.25..=4.0).contains(&w) {
        return Ok(false);
    }
    let support = |letter: u8| -> &dyn PhaseOracle {
        if letter == 1 {
            supports.0
        } else {
            supports.1
        }
    };
    let t = word.len();
    for k in 0..t {
        let (time, letter) = match side {
            Sign::Minus => (k as f64, word.letter(k)),
            Sign::Plus => (-((k + 1) as f64), word.letter(t - 1 - k)),
        };
        let image = p.flow(time);
        if !support(letter).contains(&image)? {
            return Ok(false);
        }
    }
    Ok(true)
}
