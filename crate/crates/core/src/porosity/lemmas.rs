//! Verifiers for the porosity transformation lemmas.
//!
//! Each verifier certifies the premise with the checker, maps every
//! certified scale to the scale the lemma promises, and runs the checker on
//! the transformed set with the promised constant. A counterexample there is
//! a violation; an inconclusive verdict is recorded separately.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    affine_image, ball_porosity_at, bilipschitz_image, cantor_generate, line_porosity_at,
    neighborhood, scale_ladder, BoxSet, CantorSpec, PorosityKind, SmoothMap, Verdict,
};
use crate::{Error, Result};

/// Tally of conclusion checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LemmaCheck {
    /// Premise scales that were certified.
    pub premise_certified: usize,
    /// Conclusion scales certified porous.
    pub certified: usize,
    pub inconclusive: usize,
    /// Conclusion scales with a counterexample.
    pub violations: usize,
    /// Conclusion scales below the checker's resolution.
    pub skipped: usize,
}

impl LemmaCheck {
    pub fn checked(&self) -> usize {
        self.certified + self.inconclusive + self.violations
    }

    fn record(&mut self, v: Option<Verdict>) {
        match v {
            None => self.skipped += 1,
            Some(Verdict::CertifiedPorous) => self.certified += 1,
            Some(Verdict::Inconclusive) => self.inconclusive += 1,
            Some(Verdict::CounterexampleFound) => self.violations += 1,
        }
    }

    fn merge(&mut self, o: &LemmaCheck) {
        self.premise_certified += o.premise_certified;
        self.certified += o.certified;
        self.inconclusive += o.inconclusive;
        self.violations += o.violations;
        self.skipped += o.skipped;
    }
}

fn check_at(
    x: &BoxSet,
    kind: PorosityKind,
    nu: f64,
    scales: &[f64],
    directions: usize,
) -> Result<Vec<Verdict>> {
    let r = match kind {
        PorosityKind::Ball => ball_porosity_at(x, nu, scales)?,
        PorosityKind::Line => line_porosity_at(x, nu, scales, directions)?,
    };
    Ok(r.scales.iter().map(|s| s.verdict).collect())
}

/// Single-scale check; `None` when the scale is below resolution.
fn check_one(
    x: &BoxSet,
    kind: PorosityKind,
    nu: f64,
    r: f64,
    directions: usize,
) -> Result<Option<Verdict>> {
    match check_at(x, kind, nu, &[r], directions) {
        Ok(v) => Ok(Some(v[0])),
        Err(Error::Resolution(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `X` ν-porous at `R` ⇒ `y + λX` porous at `λR`, with the constant reduced
/// by the rasterisation slack `δ√n/(λR)`.
pub fn verify_affine(
    x: &BoxSet,
    kind: PorosityKind,
    nu: f64,
    scales: &[f64],
    lambda: f64,
    y: &[f64],
    directions: usize,
) -> Result<LemmaCheck> {
    let premise = check_at(x, kind, nu, scales, directions)?;
    let image = affine_image(x, lambda, y)?;
    let slack = x.delta() * (x.n() as f64).sqrt();
    let mut out = LemmaCheck::default();
    for (&r, v) in scales.iter().zip(premise) {
        if v != Verdict::CertifiedPorous {
            continue;
        }
        out.premise_certified += 1;
        let nu2 = nu - slack / (lambda * r);
        if nu2 <= 0.0 {
            out.record(None);
            continue;
        }
        out.record(check_one(&image, kind, nu2, lambda * r, directions)?);
    }
    Ok(out)
}

/// `X` ν-porous at `R` ⇒ `X(α₂)` is ν/2-porous at `R` for `R ≥ 2α₂/ν`.
///
/// The rasterised neighbourhood lies inside `X(α₂ + δ√n)`, so the lemma is
/// applied with that radius.
pub fn verify_neighborhood(
    x: &BoxSet,
    kind: PorosityKind,
    nu: f64,
    scales: &[f64],
    alpha2: f64,
    directions: usize,
) -> Result<LemmaCheck> {
    let eff = alpha2 + x.delta() * (x.n() as f64).sqrt();
    let alpha1 = scales.iter().copied().fold(0.0, f64::max);
    if eff > nu * alpha1 / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha2 = {alpha2} too large for nu = {nu}, alpha1 = {alpha1}"
        )));
    }
    let premise = check_at(x, kind, nu, scales, directions)?;
    let image = neighborhood(x, alpha2)?;
    let mut out = LemmaCheck::default();
    for (&r, v) in scales.iter().zip(premise) {
        if v != Verdict::CertifiedPorous {
            continue;
        }
        out.premise_certified += 1;
        if r < 2.0 * eff / nu {
            continue;
        }
        out.record(check_one(&image, kind, nu / 2.0, r, directions)?);
    }
    Ok(out)
}

/// `κ(X)` ν-porous at `R` ⇒ `X` is `ν/C₁²`-porous on balls (`ν/(2C₁²)` on
/// lines) at `C₁R`.
///
/// The premise is checked on a rasterised superset of `κ(X)`. The line
/// version requires every scale to respect `R ≤ ν/(C₁C₂n)`.
pub fn verify_bilipschitz(
    x: &BoxSet,
    map: &SmoothMap,
    c1: f64,
    kind: PorosityKind,
    nu: f64,
    scales: &[f64],
    directions: usize,
) -> Result<LemmaCheck> {
    let n = x.n() as f64;
    if kind == PorosityKind::Line {
        let c2 = map.c2();
        let cap = nu / (c1 * c2 * n);
        if scales.iter().any(|&r| r > cap) {
            return Err(Error::InvalidParameter(format!(
                "line scales exceed the cap nu/(C1 C2 n) = {cap}"
            )));
        }
    }
    let image = bilipschitz_image(x, map, c1)?;
    let premise = check_at(&image, kind, nu, scales, directions)?;
    let nu2 = match kind {
        PorosityKind::Ball => nu / (c1 * c1),
        PorosityKind::Line => nu / (2.0 * c1 * c1),
    };
    let mut out = LemmaCheck::default();
    for (&r, v) in scales.iter().zip(premise) {
        if v != Verdict::CertifiedPorous {
            continue;
        }
        out.premise_certified += 1;
        out.record(check_one(x, kind, nu2, c1 * r, directions)?);
    }
    Ok(out)
}

/// Largest `ν` in `[lo, hi]` (to bisection accuracy) at which `x` is
/// certified at every scale returned by `scales_for(ν)`.
pub fn calibrate_nu<F>(
    x: &BoxSet,
    kind: PorosityKind,
    directions: usize,
    lo: f64,
    hi: f64,
    steps: usize,
    scales_for: F,
) -> Result<Option<f64>>
where
    F: Fn(f64) -> Option<Vec<f64>>,
{
    let certified = |nu: f64| -> Result<bool> {
        let Some(scales) = scales_for(nu) else {
            return Ok(false);
        };
        if scales.is_empty() {
            return Ok(false);
        }
        match check_at(x, kind, nu, &scales, directions) {
            Ok(v) => Ok(v.iter().all(|v| *v == Verdict::CertifiedPorous)),
            Err(Error::Resolution(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if !certified(lo)? {
        return Ok(None);
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..steps {
        let mid = 0.5 * (a + b);
        if certified(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Some(a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    Affine,
    Neighborhood,
    BiLipschitz,
}

/// Aggregate of a randomized verification campaign.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialStats {
    pub trials: usize,
    /// Trials whose premise could not be certified at any scale.
    pub vacuous: usize,
    pub totals: LemmaCheck,
}

/// A random proper Cantor family member with roughly `min_cells..=max_cells`
/// cells per axis.
pub fn random_cantor<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    min_cells: usize,
    max_cells: usize,
) -> Result<BoxSet> {
    let base = rng.random_range(3..=5usize);
    let mut depth = 1u32;
    while base.pow(depth + 1) <= max_cells {
        depth += 1;
    }
    if base.pow(depth) < min_cells {
        return Err(Error::InvalidParameter(format!(
            "no depth of base {base} fits {min_cells}..={max_cells}"
        )));
    }
    let size = rng.random_range(1..base);
    let mut kept: Vec<usize> = sample(rng, base, size).into_vec();
    kept.sort_unstable();
    cantor_generate(&CantorSpec::new(base, &kept, depth), n)
}

const NU_FLOOR: f64 = 0.1;

fn default_scales(x: &BoxSet) -> Vec<f64> {
    scale_ladder(4.0 * x.delta() / NU_FLOOR * (1.0 + 1e-9), 1.0).unwrap_or_default()
}

/// Runs `trials` randomized verifications of one lemma on Cantor-family
/// inputs, deterministically from `seed`.
pub fn run_trials(
    lemma: Lemma,
    kind: PorosityKind,
    trials: usize,
    seed: u64,
) -> Result<TrialStats> {
    let mut stats = TrialStats::default();
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let check = one_trial(lemma, kind, t, &mut rng)?;
        stats.trials += 1;
        match check {
            Some(c) if c.checked() > 0 => stats.totals.merge(&c),
            Some(c) => {
                stats.vacuous += 1;
                stats.totals.merge(&c);
            }
            None => stats.vacuous += 1,
        }
    }
    Ok(stats)
}

fn one_trial(
    lemma: Lemma,
    kind: PorosityKind,
    t: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Option<LemmaCheck>> {
    let two_d = t % 4 == 3 && !(lemma == Lemma::BiLipschitz && kind == PorosityKind::Line);
    let n = if two_d { 2 } else { 1 };
    let directions = 2 * n;
    match lemma {
        Lemma::Affine => {
            let x = if n == 1 {
                random_cantor(rng, 1, 243, 3125)?
            } else {
                random_cantor(rng, 2, 64, 125)?
            };
            let scales = default_scales(&x);
            let Some(nu) = calibrate_nu(&x, kind, directions, NU_FLOOR, 1.0, 5, |_| {
                Some(scales.clone())
            })?
            else {
                return Ok(None);
            };
            let lambda = rng.random_range(0.5..=1.0);
            let y: Vec<f64> = (0..n)
                .map(|_| rng.random_range(0.0..=1.0 - lambda))
                .collect();
            verify_affine(&x, kind, nu, &scales, lambda, &y, directions).map(Some)
        }
        Lemma::Neighborhood => {
            let x = if n == 1 {
                random_cantor(rng, 1, 243, 3125)?
            } else {
                random_cantor(rng, 2, 64, 125)?
            };
            let scales = default_scales(&x);
            let Some(nu) = calibrate_nu(&x, kind, directions, NU_FLOOR, 1.0, 5, |_| {
                Some(scales.clone())
            })?
            else {
                return Ok(None);
            };
            let cells = rng.random_range(1..=4usize) as f64;
            let alpha2 = cells * x.delta();
            let eff = alpha2 + x.delta() * (n as f64).sqrt();
            if eff > nu / 2.0 {
                return Ok(None);
            }
            verify_neighborhood(&x, kind, nu, &scales, alpha2, directions).map(Some)
        }
        Lemma::BiLipschitz => {
            let map = match rng.random_range(0..3) {
                0 => SmoothMap::Identity(n),
                1 => SmoothMap::diagonal((0..n).map(|_| rng.random_range(0.7..=1.0)).collect())?,
                _ => SmoothMap::sine(n, rng.random_range(0.0..=0.05))?,
            };
            let c1 = map.c1();
            let c2 = map.c2();
            let x = match (kind, n) {
                (PorosityKind::Line, _) => random_cantor(rng, 1, 2000, 6561)?,
                (_, 1) => random_cantor(rng, 1, 243, 3125)?,
                _ => random_cantor(rng, 2, 64, 125)?,
            };
            let delta = x.delta();
            let image = bilipschitz_image(&x, &map, c1)?;
            let factor = match kind {
                PorosityKind::Ball => 1.0,
                PorosityKind::Line => 2.0,
            };
            let scales_for = |nu: f64| -> Option<Vec<f64>> {
                let lo = 4.0 * factor * c1 * delta / nu * (1.0 + 1e-9);
                let hi = match kind {
                    PorosityKind::Line if c2 > 0.0 => (nu / (c1 * c2 * n as f64)).min(1.0 / c1),
                    _ => 1.0 / c1,
                };
                scale_ladder(lo, hi).ok()
            };
            let Some(nu) = calibrate_nu(&image, kind, directions, 0.05, 1.0, 5, scales_for)? else {
                return Ok(None);
            };
            let Some(scales) = scales_for(nu) else {
                return Ok(None);
            };
            verify_bilipschitz(&x, &map, c1, kind, nu, &scales, directions).map(Some)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_self_similarity_trial() {
        let x = cantor_generate(&CantorSpec::middle_third(6), 1).unwrap();
        let scales = scale_ladder(0.05, 1.0).unwrap();
        let c = verify_affine(&x, PorosityKind::Ball, 0.15, &scales, 1.0 / 3.0, &[0.0], 2).unwrap();
        assert!(c.premise_certified > 0);
        assert_eq!(c.violations, 0);
    }

    #[test]
    fn neighborhood_rejects_large_radius() {
        let x = cantor_generate(&CantorSpec::middle_third(5), 1).unwrap();
        let scales = scale_ladder(0.1, 0.2).unwrap();
        assert!(verify_neighborhood(&x, PorosityKind::Ball, 0.2, &scales, 0.05, 2).is_err());
    }

    #[test]
    fn identity_map_keeps_the_constant() {
        let x = cantor_generate(&CantorSpec::middle_third(6), 1).unwrap();
        let scales = scale_ladder(0.05, 1.0).unwrap();
        let c = verify_bilipschitz(
            &x,
            &SmoothMap::Identity(1),
            1.0,
            PorosityKind::Ball,
            0.15,
            &scales,
            2,
        )
        .unwrap();
        assert!(c.certified > 0);
        assert_eq!(c.violations, 0);
    }

    #[test]
    fn small_campaigns_have_no_violations() {
        for lemma in [Lemma::Affine, Lemma::Neighborhood, Lemma::BiLipschitz] {
            for kind in [PorosityKind::Ball, PorosityKind::Line] {
                let s = run_trials(lemma, kind, 8, 7).unwrap();
                assert_eq!(s.totals.violations, 0, "{lemma:?} {kind:?} {s:?}");
            }
        }
    }
}
