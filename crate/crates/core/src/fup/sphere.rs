//! Gnomonic charts on `𝕊ⁿ ⊂ ℝ^{n+1}` (n = 1, 2) and porosity of chart images.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kernel::fibonacci_points;
use crate::porosity::{
    ball_porosity_at, line_porosity_at, BoxSet, PorosityKind, PorosityReport, Verdict,
};
use crate::{Error, Result};

/// Geodesic radius of every chart ball.
pub const CHART_RADIUS: f64 = 0.5;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let r = dot(v, v).sqrt();
    v.iter_mut().for_each(|a| *a /= r);
    r
}

/// Great-circle distance between unit vectors.
pub fn geodesic_distance(a: &[f64], b: &[f64]) -> f64 {
    // atan2 form stays accurate for nearby and antipodal points
    let c = dot(a, b);
    let cross: f64 = {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - c * x).collect();
        dot(&d, &d).sqrt()
    };
    cross.atan2(c)
}

/// Central projection onto the tangent hyperplane at `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct GnomonicChart {
    center: Vec<f64>,
    frame: Vec<Vec<f64>>,
}

impl GnomonicChart {
    pub fn new(center: &[f64]) -> Result<Self> {
        let m = center.len();
        if m < 2 {
            return Err(Error::InvalidParameter(
                "sphere dimension must be ≥ 1".into(),
            ));
        }
        let mut c = center.to_vec();
        if !(normalize(&mut c) > 1e-12) {
            return Err(Error::Degenerate("zero chart centre".into()));
        }
        let mut frame: Vec<Vec<f64>> = Vec::with_capacity(m - 1);
        for k in 0..m {
            if frame.len() == m - 1 {
                break;
            }
            let mut e = vec![0.0; m];
            e[k] = 1.0;
            for b in std::iter::once(&c).chain(frame.iter()) {
                let p = dot(&e, b);
                e.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
            if dot(&e, &e) > 1e-6 {
                normalize(&mut e);
                frame.push(e);
            }
        }
        Ok(Self { center: c, frame })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Intrinsic dimension `n`.
    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    /// Radius `tan(1/2)` of the chart image.
    pub fn image_radius() -> f64 {
        CHART_RADIUS.tan()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        geodesic_distance(&self.center, y) <= CHART_RADIUS + 1e-12
    }

    /// Frame coordinates of `y/⟨y,c⟩ − c`; `y` must lie in the chart ball.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.center.len() {
            return Err(Error::DimensionMismatch {
                expected: self.center.len(),
                found: y.len(),
            });
        }
        if !self.contains(y) {
            return Err(Error::InvalidParameter("point outside chart".into()));
        }
        let s = dot(y, &self.center);
        Ok(self.frame.iter().map(|e| dot(y, e) / s).collect())
    }

    pub fn unproject(&self, x: &[f64]) -> Vec<f64> {
        let mut p = self.center.clone();
        for (xi, e) in x.iter().zip(&self.frame) {
            p.iter_mut().zip(e).for_each(|(a, b)| *a += xi * b);
        }
        normalize(&mut p);
        p
    }
}

/// Charts whose radius-1/2 balls cover the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Atlas {
    pub charts: Vec<GnomonicChart>,
}

impl Atlas {
    /// Seven charts centred at angles `2πk/7` on `𝕊¹`.
    pub fn circle() -> Self {
        let charts = (0..7)
            .map(|k| {
                let t = TAU * k as f64 / 7.0;
                GnomonicChart::new(&[t.cos(), t.sin()]).expect("unit centre")
            })
            .collect();
        Self { charts }
    }

    /// Fibonacci centres on `𝕊²`, coverage verified by sampling.
    pub fn sphere(count: usize) -> Result<Self> {
        let charts = fibonacci_points(count)
            .iter()
            .map(|c| GnomonicChart::new(c))
            .collect::<Result<Vec<_>>>()?;
        let atlas = Self { charts };
        atlas.verify_coverage(20_000, 0.02, 11)?;
        Ok(atlas)
    }

    pub fn dim(&self) -> usize {
        self.charts.first().map_or(0, |c| c.dim())
    }

    /// Every sampled point lies at least `margin` inside some chart ball.
    pub fn verify_coverage(&self, samples: usize, margin: f64, seed: u64) -> Result<()> {
        let m = self.dim() + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let mut y: Vec<f64> = (0..m).map(|_| standard_normal(&mut rng)).collect();
            normalize(&mut y);
            let best = self
                .charts
                .iter()
                .map(|c| geodesic_distance(c.center(), &y))
                .fold(f64::INFINITY, f64::min);
            if best > CHART_RADIUS - margin {
                return Err(Error::Degenerate(format!("chart coverage gap at {y:?}")));
            }
        }
        Ok(())
    }
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (TAU * v).cos()
}

/// Largest observed `|x − y| / d_S(ψ⁻¹x, ψ⁻¹y)` over random pairs in the chart image.
pub fn measure_c2(chart: &GnomonicChart, pairs: usize, seed: u64) -> (f64, f64) {
    let n = chart.dim();
    let r = GnomonicChart::image_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = |rng: &mut ChaCha8Rng| loop {
        let x: Vec<f64> = (0..n)
            .map(|_| (2.0 * rng.random::<f64>() - 1.0) * r)
            .collect();
        if dot(&x, &x) <= r * r {
            return x;
        }
    };
    let (mut c2, mut upper) = (0.0f64, 0.0f64);
    for _ in 0..pairs {
        let (x, y) = (sample(&mut rng), sample(&mut rng));
        let e = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if e < 1e-9 {
            continue;
        }
        let s = geodesic_distance(&chart.unproject(&x), &chart.unproject(&y));
        c2 = c2.max(e / s);
        upper = upper.max(s / e);
    }
    (c2, upper)
}

/// A finite union of closed geodesic caps `(centre, radius)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapUnion {
    pub ambient: usize,
    pub caps: Vec<(Vec<f64>, f64)>,
}

impl CapUnion {
    pub fn empty(ambient: usize) -> Self {
        Self {
            ambient,
            caps: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        let mut c = vec![0.0; ambient];
        c[0] = 1.0;
        Self {
            ambient,
            caps: vec![(c, std::f64::consts::PI)],
        }
    }

    /// Intervals `[a, b]` of angle on the great circle `{x₀² + x₁² = 1}`,
    /// fattened by `band`; caps along each interval are spaced by `band/2`.
    pub fn along_circle(ambient: usize, intervals: &[(f64, f64)], band: f64) -> Self {
        let point = |t: f64| {
            let mut p = vec![0.0; ambient];
            p[0] = t.cos();
            p[1] = t.sin();
            p
        };
        let mut caps = Vec::new();
        for &(a, b) in intervals {
            if ambient == 2 {
                caps.push((point(0.5 * (a + b)), 0.5 * (b - a) + band));
                continue;
            }
            let k = ((b - a) / (0.5 * band)).ceil().max(1.0) as usize;
            for i in 0..=k {
                caps.push((point(a + (b - a) * i as f64 / k as f64), band));
            }
        }
        Self { ambient, caps }
    }

    /// Exact geodesic distance to the union.
    pub fn distance(&self, y: &[f64]) -> f64 {
        self.caps
            .iter()
            .map(|(c, r)| (geodesic_distance(c, y) - r).max(0.0))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Middle-third Cantor intervals of depth `depth` inside the arc `[start, start+len]`.
pub fn cantor_arc(start: f64, len: f64, depth: u32) -> Vec<(f64, f64)> {
    let mut out = vec![(start, start + len)];
    for _ in 0..depth {
        out = out
            .into_iter()
            .flat_map(|(a, b)| {
                let t = (b - a) / 3.0;
                [(a, a + t), (b - t, b)]
            })
            .collect();
    }
    out
}

/// Superset of `ψ(Ω ∩ M)` rasterised on `m` cells per axis, coordinates mapped
/// to `[0,1]^n` by `u = (x + r)/(2r)` with `r = tan(1/2)`.
pub fn chart_image(omega: &CapUnion, chart: &GnomonicChart, m: usize) -> Result<BoxSet> {
    let n = chart.dim();
    let r = GnomonicChart::image_radius();
    let mut set = BoxSet::empty(n, m)?;
    let delta = set.delta();
    // half-diagonal of a cell in chart units; ψ⁻¹ is 1-Lipschitz
    let reach = r * delta * (n as f64).sqrt();
    for idx in 0..set.len() {
        let x: Vec<f64> = set
            .cell_center(idx)
            .iter()
            .map(|u| u * 2.0 * r - r)
            .collect();
        if dot(&x, &x).sqrt() > r + reach {
            continue;
        }
        if omega.distance(&chart.unproject(&x)) <= reach {
            let cell = set.cell(idx);
            set.set_cell(&cell, true);
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereReport {
    pub c2: f64,
    pub nu_chart: f64,
    pub charts: Vec<PorosityReport>,
    pub verdict: Verdict,
}

/// Runs the Euclidean checker on every chart image at `ν/(2C₂)`.
///
/// `scales` are chart-space lengths; `c2` is the lower bi-Lipschitz constant
/// of the charts (at least 2).
#[allow(clippy::too_many_arguments)]
pub fn sphere_porosity_check(
    omega: &CapUnion,
    atlas: &Atlas,
    nu: f64,
    c2: f64,
    kind: PorosityKind,
    scales: &[f64],
    m: usize,
    directions: usize,
) -> Result<SphereReport> {
    if omega.ambient != atlas.dim() + 1 {
        return Err(Error::DimensionMismatch {
            expected: atlas.dim() + 1,
            found: omega.ambient,
        });
    }
    if c2 < 2.0 {
        return Err(Error::InvalidParameter(format!("C₂ = {c2} < 2")));
    }
    let nu_chart = nu / (2.0 * c2);
    let span = 2.0 * GnomonicChart::image_radius();
    let scaled: Vec<f64> = scales.iter().map(|s| s / span).collect();
    let mut charts = Vec::with_capacity(atlas.charts.len());
    for chart in &atlas.charts {
        let img = chart_image(omega, chart, m)?;
        let rep = match kind {
            PorosityKind::Ball => ball_porosity_at(&img, nu_chart, &scaled)?,
            PorosityKind::Line => line_porosity_at(&img, nu_chart, &scaled, directions)?,
        };
        charts.push(rep);
    }
    let verdict = if charts
        .iter()
        .any(|c| c.verdict == Verdict::CounterexampleFound)
    {
        Verdict::CounterexampleFound
    } else if charts.iter().all(|c| c.verdict == Verdict::CertifiedPorous) {
        Verdict::CertifiedPorous
    } else {
        Verdict::Inconclusive
    };
    Ok(SphereReport {
        c2,
        nu_chart,
        charts,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centre_maps_to_origin_and_round_trips() {
        let c = GnomonicChart::new(&[0.3, -0.4, 0.866]).unwrap();
        assert!(c
            .project(c.center())
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-15));
        let y = c.unproject(&[0.2, -0.1]);
        let x = c.project(&y).unwrap();
        assert!((x[0] - 0.2).abs() < 1e-12 && (x[1] + 0.1).abs() < 1e-12);
        assert!(c.project(&[-0.3, 0.4, -0.866]).is_err());
    }

    #[test]
    fn great_circles_become_lines() {
        let c = GnomonicChart::new(&[0.0, 0.0, 1.0]).unwrap();
        let (a, b) = (c.unproject(&[0.1, 0.3]), c.unproject(&[-0.2, 0.05]));
        for t in [0.2, 0.5, 0.8] {
            let mut p: Vec<f64> = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (1.0 - t) * x + t * y)
                .collect();
            normalize(&mut p);
            let x = c.project(&p).unwrap();
            let (pa, pb) = ([0.1, 0.3], [-0.2, 0.05]);
            let cross = (pb[0] - pa[0]) * (x[1] - pa[1]) - (pb[1] - pa[1]) * (x[0] - pa[0]);
            assert!(cross.abs() < 1e-10);
        }
    }

    #[test]
    fn lipschitz_bounds() {
        for chart in [
            &Atlas::circle().charts[2],
            &GnomonicChart::new(&[1.0, 1.0, 1.0]).unwrap(),
        ] {
            let (c2, upper) = measure_c2(chart, 1000, 3);
            assert!((1.0..=2.0).contains(&c2), "{c2}");
            assert!(upper <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn atlases_cover() {
        Atlas::circle().verify_coverage(5000, 0.02, 1).unwrap();
        assert_eq!(Atlas::sphere(64).unwrap().charts.len(), 64);
        assert!(Atlas::sphere(8).is_err());
    }

    #[test]
    fn trivial_sets() {
        let atlas = Atlas::circle();
        let scales = [0.1, 0.2];
        let e = sphere_porosity_check(
            &CapUnion::empty(2),
            &atlas,
            0.5,
            2.0,
            PorosityKind::Ball,
            &scales,
            512,
            2,
        )
        .unwrap();
        assert_eq!(e.verdict, Verdict::CertifiedPorous);
        let f = sphere_porosity_check(
            &CapUnion::full(2),
            &atlas,
            0.5,
            2.0,
            PorosityKind::Ball,
            &scales,
            512,
            2,
        )
        .unwrap();
        assert_eq!(f.verdict, Verdict::CounterexampleFound);
    }
}
