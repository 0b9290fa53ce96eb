//! Decision procedures for `ν`-porosity on balls and on lines.
//!
//! Every verdict carries explicit resolution slack. With `d` the distance
//! between cell centres and `δ` the grid pitch, the true clearance of a cell
//! centre lies in `[d − δ√n/2, d]`, and of any point of that cell in
//! `[d − δ√n, d + δ√n/2]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr_free::standard_normal;
use rayon::prelude::*;

use super::edt::{sliding_max, DistanceField};
use super::BoxSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PorosityKind {
    Ball,
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    CertifiedPorous,
    Inconclusive,
    CounterexampleFound,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::CertifiedPorous => "CertifiedPorous",
            Verdict::Inconclusive => "Inconclusive",
            Verdict::CounterexampleFound => "CounterexampleFound",
        })
    }
}

/// A ball or segment with too little clearance.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Ball {
        center: Vec<f64>,
        diameter: f64,
    },
    Segment {
        start: Vec<f64>,
        direction: Vec<f64>,
        length: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleResult {
    pub scale: f64,
    /// Worst certified clearance over all windows, in units of `νR`.
    pub margin: f64,
    /// Best clearance upper bound of the worst window, in units of `νR`.
    pub upper_margin: f64,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PorosityReport {
    pub kind: PorosityKind,
    pub nu: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub directions: Option<usize>,
    pub delta: f64,
    pub scales: Vec<ScaleResult>,
    pub verdict: Verdict,
}

/// `α₀·2^{k/2}` for `k = 0, 1, …` while the value stays `≤ α₁`.
pub fn scale_ladder(alpha0: f64, alpha1: f64) -> Result<Vec<f64>> {
    if !(alpha0 > 0.0 && alpha0 <= alpha1 && alpha1.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "scale range [{alpha0}, {alpha1}]"
        )));
    }
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let r = alpha0 * 2f64.powf(k as f64 / 2.0);
        if r > alpha1 * (1.0 + 1e-12) {
            break;
        }
        out.push(r);
        k += 1;
    }
    Ok(out)
}

fn combine(results: &[ScaleResult]) -> Verdict {
    if results
        .iter()
        .any(|r| r.verdict == Verdict::CounterexampleFound)
    {
        Verdict::CounterexampleFound
    } else if results
        .iter()
        .all(|r| r.verdict == Verdict::CertifiedPorous)
    {
        Verdict::CertifiedPorous
    } else {
        Verdict::Inconclusive
    }
}

fn check_inputs(x: &BoxSet, nu: f64, scales: &[f64]) -> Result<()> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::InvalidParameter(format!("nu = {nu} outside (0, 1]")));
    }
    let smallest = scales.iter().copied().fold(f64::INFINITY, f64::min);
    if scales.is_empty() || !(smallest > 0.0) {
        return Err(Error::InvalidParameter(
            "empty or nonpositive scales".into(),
        ));
    }
    if x.delta() > nu * smallest / 4.0 * (1.0 + 1e-12) {
        return Err(Error::Resolution(format!(
            "delta = {} exceeds nu*alpha0/4 = {}",
            x.delta(),
            nu * smallest / 4.0
        )));
    }
    Ok(())
}

fn pad_for(x: &BoxSet, nu: f64, rmax: f64) -> usize {
    let n = x.n() as f64;
    (nu * rmax * (1.25 + n.sqrt() / 8.0) / x.delta() + n.sqrt()).ceil() as usize + 3
}

/// Ball porosity from `α₀` to `α₁` on the `√2` ladder.
pub fn ball_porosity_check(
    x: &BoxSet,
    nu: f64,
    alpha0: f64,
    alpha1: f64,
) -> Result<PorosityReport> {
    let scales = scale_ladder(alpha0, alpha1)?;
    let mut r = ball_porosity_at(x, nu, &scales)?;
    r.alpha0 = alpha0;
    r.alpha1 = alpha1;
    Ok(r)
}

/// Ball porosity at an explicit list of scales.
pub fn ball_porosity_at(x: &BoxSet, nu: f64, scales: &[f64]) -> Result<PorosityReport> {
    check_inputs(x, nu, scales)?;
    let rmax = scales.iter().copied().fold(0.0, f64::max);
    let field = DistanceField::new(x, pad_for(x, nu, rmax));
    let results: Vec<ScaleResult> = scales
        .par_iter()
        .map(|&r| ball_scale(&field, nu, r))
        .collect();
    Ok(PorosityReport {
        kind: PorosityKind::Ball,
        nu,
        alpha0: scales.iter().copied().fold(f64::INFINITY, f64::min),
        alpha1: rmax,
        directions: None,
        delta: x.delta(),
        verdict: combine(&results),
        scales: results,
    })
}

fn ball_scale(field: &DistanceField, nu: f64, r: f64) -> ScaleResult {
    let n = field.n() as f64;
    let delta = field.delta();
    let half_diag = delta * n.sqrt() / 2.0;
    let target = nu * r;
    let dims = field.dims();
    let inscribed = ((r / (n.sqrt() * delta)) + 1e-9).floor() as usize;
    let margin = match sliding_max(field.values(), &dims, inscribed.max(1)) {
        Some((maxes, _)) if inscribed >= 1 => {
            maxes.iter().copied().fold(f64::INFINITY, f64::min) - half_diag
        }
        _ => f64::NEG_INFINITY,
    };
    let half = (r / (2.0 * delta) + 0.5 + 1e-9).floor() as usize;
    let width = 2 * half + 1;
    let (upper, witness) = match sliding_max(field.values(), &dims, width) {
        Some((maxes, rdims)) => {
            let (best_idx, best) = maxes
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            let mut corner = vec![0; rdims.len()];
            let mut rem = best_idx;
            for k in (0..rdims.len()).rev() {
                corner[k] = rem % rdims[k];
                rem /= rdims[k];
            }
            let centre: Vec<usize> = corner.iter().map(|c| c + half).collect();
            (best + half_diag, Some(field.center(&centre)))
        }
        None => (f64::INFINITY, None),
    };
    let verdict = if margin >= target {
        Verdict::CertifiedPorous
    } else if upper < target {
        Verdict::CounterexampleFound
    } else {
        Verdict::Inconclusive
    };
    ScaleResult {
        scale: r,
        margin: margin / target,
        upper_margin: upper / target,
        witness: if verdict == Verdict::CounterexampleFound {
            witness.map(|center| Witness::Ball {
                center,
                diameter: r,
            })
        } else {
            None
        },
        verdict,
    }
}

mod rand_distr_free {
    use rand::Rng;

    /// Box–Muller standard normal sample.
    pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Unit directions covering the projective sphere `S^{n−1}/±`.
///
/// `n = 1`: the single direction `+1`; `n = 2`: angles `kπ/D`; `n = 3`: a
/// Fibonacci lattice on the upper hemisphere; `n ≥ 4`: seeded random points
/// folded into a half-space.
pub fn sample_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0]],
        2 => (0..count)
            .map(|k| {
                let a = std::f64::consts::PI * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (k as f64 + 0.5) / count as f64;
                    let rad = (1.0 - z * z).sqrt();
                    let phi = golden * k as f64;
                    vec![rad * phi.cos(), rad * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0xd1ec_7105 + n as u64);
            (0..count)
                .map(|_| {
                    let mut v: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
                    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                    let flip = if v[n - 1] < 0.0 { -1.0 } else { 1.0 };
                    v.iter_mut().for_each(|a| *a *= flip / norm);
                    v
                })
                .collect()
        }
    }
}

/// Line porosity from `α₀` to `α₁` on the `√2` ladder with `directions`
/// sampled directions (`≥ 2n`).
pub fn line_porosity_check(
    x: &BoxSet,
    nu: f64,
    alpha0: f64,
    alpha1: f64,
    directions: usize,
) -> Result<PorosityReport> {
    let scales = scale_ladder(alpha0, alpha1)?;
    let mut r = line_porosity_at(x, nu, &scales, directions)?;
    r.alpha0 = alpha0;
    r.alpha1 = alpha1;
    Ok(r)
}

/// Line porosity at an explicit list of scales.
pub fn line_porosity_at(
    x: &BoxSet,
    nu: f64,
    scales: &[f64],
    directions: usize,
) -> Result<PorosityReport> {
    check_inputs(x, nu, scales)?;
    if directions < 2 * x.n() {
        return Err(Error::InvalidParameter(format!(
            "{directions} directions < 2n = {}",
            2 * x.n()
        )));
    }
    let rmax = scales.iter().copied().fold(0.0, f64::max);
    let field = DistanceField::new(x, pad_for(x, nu, rmax));
    let dirs = sample_directions(x.n(), directions);
    let results: Vec<ScaleResult> = if x.n() == 1 {
        // On the line a segment of length R is a ball of diameter R.
        scales
            .par_iter()
            .map(|&r| {
                let mut s = ball_scale(&field, nu, r);
                if let Some(Witness::Ball { center, diameter }) = s.witness.take() {
                    s.witness = Some(Witness::Segment {
                        start: vec![center[0] - diameter / 2.0],
                        direction: vec![1.0],
                        length: diameter,
                    });
                }
                s
            })
            .collect()
    } else {
        scales
            .iter()
            .map(|&r| line_scale(&field, nu, r, &dirs))
            .collect()
    };
    Ok(PorosityReport {
        kind: PorosityKind::Line,
        nu,
        alpha0: scales.iter().copied().fold(f64::INFINITY, f64::min),
        alpha1: rmax,
        directions: Some(directions),
        delta: x.delta(),
        verdict: combine(&results),
        scales: results,
    })
}

fn box_distance(x: &[f64]) -> f64 {
    x.iter()
        .map(|&v| {
            let d = if v < 0.0 {
                -v
            } else if v > 1.0 {
                v - 1.0
            } else {
                0.0
            };
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Worst lower bound and worst upper bound over a family of segments, the
/// latter with the anchor index and direction that attain it.
#[derive(Clone, Copy)]
struct SegmentTally {
    lower: f64,
    upper: f64,
    anchor: usize,
    direction: usize,
}

impl SegmentTally {
    const NONE: SegmentTally = SegmentTally {
        lower: f64::INFINITY,
        upper: f64::INFINITY,
        anchor: usize::MAX,
        direction: usize::MAX,
    };

    fn merge(self, o: SegmentTally) -> SegmentTally {
        let (upper, anchor, direction) = if o.upper < self.upper {
            (o.upper, o.anchor, o.direction)
        } else {
            (self.upper, self.anchor, self.direction)
        };
        SegmentTally {
            lower: self.lower.min(o.lower),
            upper,
            anchor,
            direction,
        }
    }
}

fn line_scale(field: &DistanceField, nu: f64, r: f64, dirs: &[Vec<f64>]) -> ScaleResult {
    let n = field.n();
    let nf = n as f64;
    let delta = field.delta();
    let target = nu * r;
    let pitch = nu * r / 4.0;
    let anchor_slack = pitch * nf.sqrt() / 2.0;
    let lo = -target - anchor_slack - pitch;
    let hi = 1.0 + target + anchor_slack + pitch;
    let per_axis = ((hi - lo) / pitch).ceil() as usize + 1;
    let total: usize = per_axis.pow(n as u32);
    let samples = (r / delta).ceil() as usize;
    let in_region = |p: &[f64]| p.iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12);
    let anchor = |flat: usize| -> Vec<f64> {
        let mut rem = flat;
        let mut start = vec![0.0; n];
        for k in (0..n).rev() {
            start[k] = lo + (rem % per_axis) as f64 * pitch;
            rem /= per_axis;
        }
        start
    };

    let tally = (0..total)
        .into_par_iter()
        .map(|flat| {
            let start = anchor(flat);
            if !in_region(&start) {
                return SegmentTally::NONE;
            }
            let mut p = vec![0.0; n];
            let mut acc = SegmentTally::NONE;
            for (di, u) in dirs.iter().enumerate() {
                for k in 0..n {
                    p[k] = start[k] + r * u[k];
                }
                if !in_region(&p) {
                    continue;
                }
                let mut lower = f64::NEG_INFINITY;
                let mut upper = f64::NEG_INFINITY;
                for j in 0..=samples {
                    let t = r * j as f64 / samples as f64;
                    for k in 0..n {
                        p[k] = start[k] + t * u[k];
                    }
                    let boxd = box_distance(&p);
                    let (l, up) = match field.value_at(&p) {
                        Some(d) => (
                            (d - delta * nf.sqrt()).max(boxd),
                            d + delta * nf.sqrt() / 2.0,
                        ),
                        None => (boxd, f64::INFINITY),
                    };
                    lower = lower.max(l - anchor_slack);
                    upper = upper.max(up);
                }
                acc = acc.merge(SegmentTally {
                    lower,
                    upper: upper + delta / 2.0,
                    anchor: flat,
                    direction: di,
                });
            }
            acc
        })
        .reduce(|| SegmentTally::NONE, SegmentTally::merge);

    let margin = tally.lower;
    let upper = tally.upper;
    let verdict = if margin >= target {
        Verdict::CertifiedPorous
    } else if upper < target {
        Verdict::CounterexampleFound
    } else {
        Verdict::Inconclusive
    };
    ScaleResult {
        scale: r,
        margin: margin / target,
        upper_margin: upper / target,
        witness: if verdict == Verdict::CounterexampleFound {
            Some(Witness::Segment {
                start: anchor(tally.anchor),
                direction: dirs[tally.direction].clone(),
                length: r,
            })
        } else {
            None
        },
        verdict,
    }
}

impl Witness {
    /// Re-checks the witness against `x` by brute-force distances: every
    /// point of the ball or segment must have clearance below `νR`.
    ///
    /// Points are sampled on a lattice of pitch `s`, each standing for a cell
    /// of radius `s√n/2`; the pitch is refined from `νR/4` down to `δ` until
    /// the bound closes.
    pub fn verify(&self, x: &BoxSet, nu: f64) -> bool {
        let delta = x.delta();
        let n = x.n();
        let (len, target) = match self {
            Witness::Ball { diameter, .. } => (*diameter, nu * diameter),
            Witness::Segment { length, .. } => (*length, nu * length),
        };
        let mut pitch = target / 4.0;
        loop {
            let pitch_now = pitch.max(delta);
            let ok = match self {
                Witness::Ball { center, .. } => {
                    let half = (len / (2.0 * pitch_now)).ceil() as i64;
                    let slack = pitch_now * (n as f64).sqrt() / 2.0;
                    let mut worst: f64 = 0.0;
                    let mut off = vec![-half; n];
                    loop {
                        let p: Vec<f64> = center
                            .iter()
                            .zip(&off)
                            .map(|(c, o)| c + *o as f64 * pitch_now)
                            .collect();
                        worst = worst.max(x.distance_brute(&p) + slack);
                        if worst >= target || !advance(&mut off, half) {
                            break;
                        }
                    }
                    worst < target
                }
                Witness::Segment {
                    start, direction, ..
                } => {
                    let samples = (len / pitch_now).ceil() as usize;
                    let step = len / samples as f64;
                    let mut worst: f64 = 0.0;
                    for j in 0..=samples {
                        let t = step * j as f64;
                        let p: Vec<f64> = start
                            .iter()
                            .zip(direction)
                            .map(|(a, u)| a + t * u)
                            .collect();
                        worst = worst.max(x.distance_brute(&p) + step / 2.0);
                        if worst >= target {
                            break;
                        }
                    }
                    worst < target
                }
            };
            if ok {
                return true;
            }
            if pitch_now <= delta {
                return false;
            }
            pitch /= 2.0;
        }
    }
}

fn advance(off: &mut [i64], half: i64) -> bool {
    let mut k = off.len();
    loop {
        if k == 0 {
            return false;
        }
        k -= 1;
        if off[k] < half {
            off[k] += 1;
            return true;
        }
        off[k] = -half;
    }
}

impl PorosityReport {
    /// True when every recorded witness re-verifies.
    pub fn verify_witnesses(&self, x: &BoxSet) -> bool {
        self.scales
            .iter()
            .filter_map(|s| s.witness.as_ref())
            .all(|w| w.verify(x, self.nu))
    }

    /// Header lines `# key = value` followed by one CSV row per scale.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let kind = match self.kind {
            PorosityKind::Ball => "ball",
            PorosityKind::Line => "line",
        };
        out.push_str(&format!("# kind = {kind}\n"));
        out.push_str(&format!("# nu = {:.16e}\n", self.nu));
        out.push_str(&format!("# alpha0 = {:.16e}\n", self.alpha0));
        out.push_str(&format!("# alpha1 = {:.16e}\n", self.alpha1));
        out.push_str(&format!("# delta = {:.16e}\n", self.delta));
        if let Some(d) = self.directions {
            out.push_str(&format!("# directions = {d}\n"));
        }
        out.push_str(&format!("# verdict = {}\n", self.verdict));
        out.push_str("scale,margin,upper_margin,verdict,witness\n");
        for s in &self.scales {
            let w = match &s.witness {
                None => String::new(),
                Some(Witness::Ball { center, .. }) => format!("center {}", fmt_vec(center)),
                Some(Witness::Segment {
                    start, direction, ..
                }) => format!("start {} dir {}", fmt_vec(start), fmt_vec(direction)),
            };
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{},{}\n",
                s.scale, s.margin, s.upper_margin, s.verdict, w
            ));
        }
        out
    }
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter()
        .map(|a| format!("{a:.16e}"))
        .collect::<Vec<_>>()
        .join(" ")
}
