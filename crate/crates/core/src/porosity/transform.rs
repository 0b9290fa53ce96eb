//! Set transformations: affine images, metric neighbourhoods and images
//! under bi-Lipschitz maps.

use rand::Rng;

use super::{BoxSet, Provenance};
use crate::{Error, Result};

/// Rasterisation of `y + λX` clipped to `[0,1]^n` at the same resolution.
///
/// Every cell meeting the image of an occupied cell with positive volume is
/// marked, so the result contains the clipped image and lies within `δ√n` of
/// it.
pub fn affine_image(x: &BoxSet, lambda: f64, y: &[f64]) -> Result<BoxSet> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda}")));
    }
    if y.len() != x.n() {
        return Err(Error::DimensionMismatch {
            expected: x.n(),
            found: y.len(),
        });
    }
    if y.iter().any(|&v| v > 1.0 || v + lambda < 0.0) {
        return Err(Error::InvalidParameter(
            "affine image misses the unit cube".into(),
        ));
    }
    let delta = x.delta();
    let boxes: Vec<(Vec<f64>, Vec<f64>)> = x
        .occupied()
        .map(|idx| {
            let c = x.cell(idx);
            let lo: Vec<f64> = c
                .iter()
                .zip(y)
                .map(|(&k, &t)| t + lambda * k as f64 * delta)
                .collect();
            let hi: Vec<f64> = lo.iter().map(|v| v + lambda * delta).collect();
            (lo, hi)
        })
        .collect();
    let mut out = BoxSet::from_boxes(x.n(), x.m(), &boxes)?;
    if lambda < 1.0 {
        // Images thinner than a cell may only touch a boundary; keep them.
        for (lo, hi) in &boxes {
            let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
            if let Some(c) = x.cell_of(&mid) {
                out.set_cell(&c, true);
            }
        }
    }
    Ok(out.with_provenance(Provenance::Derived(format!(
        "affine image, lambda = {lambda}"
    ))))
}

/// The neighbourhood `X(α₂)`: every cell within box-to-box distance `α₂` of
/// an occupied cell.
///
/// The result contains `X(α₂)` and is contained in `X(α₂ + δ√n)`.
pub fn neighborhood(x: &BoxSet, alpha2: f64) -> Result<BoxSet> {
    let delta = x.delta();
    if !(alpha2 >= delta * (1.0 - 1e-12)) {
        return Err(Error::Resolution(format!(
            "alpha2 = {alpha2} below the grid pitch {delta}"
        )));
    }
    let n = x.n();
    let m = x.m() as i64;
    let reach = (alpha2 / delta).ceil() as i64 + 1;
    let limit = (alpha2 / delta) * (alpha2 / delta) * (1.0 + 1e-12);
    let mut stencil: Vec<Vec<i64>> = Vec::new();
    for_each_in_box(&vec![-reach; n], &vec![reach; n], |off| {
        let gap: f64 = off
            .iter()
            .map(|&o| {
                let g = (o.abs() - 1).max(0) as f64;
                g * g
            })
            .sum();
        if gap <= limit {
            stencil.push(off.to_vec());
        }
    });
    let mut out = BoxSet::empty(n, x.m())?;
    let mut target = vec![0usize; n];
    for idx in x.occupied() {
        let c = x.cell(idx);
        'stencil: for s in &stencil {
            for k in 0..n {
                let v = c[k] as i64 + s[k];
                if v < 0 || v >= m {
                    continue 'stencil;
                }
                target[k] = v as usize;
            }
            out.set_cell(&target, true);
        }
    }
    Ok(out.with_provenance(Provenance::Derived(format!(
        "neighbourhood, alpha2 = {alpha2}"
    ))))
}

/// Smooth invertible self-maps of `[0,1]^n` with known distortion bounds.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothMap {
    Identity(usize),
    /// `x ↦ diag(d) x`.
    Diagonal(Vec<f64>),
    /// `x ↦ x + a sin(2πx)` in each coordinate, `0 ≤ a < 1/(2π)`.
    Sine {
        n: usize,
        amplitude: f64,
    },
}

impl SmoothMap {
    pub fn sine(n: usize, amplitude: f64) -> Result<Self> {
        if !(0.0..1.0 / std::f64::consts::TAU).contains(&amplitude) {
            return Err(Error::InvalidParameter(format!(
                "sine amplitude {amplitude} breaks monotonicity"
            )));
        }
        Ok(SmoothMap::Sine { n, amplitude })
    }

    pub fn diagonal(d: Vec<f64>) -> Result<Self> {
        if d.is_empty() || d.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(
                "diagonal entries must be positive".into(),
            ));
        }
        Ok(SmoothMap::Diagonal(d))
    }

    pub fn n(&self) -> usize {
        match self {
            SmoothMap::Identity(n) => *n,
            SmoothMap::Diagonal(d) => d.len(),
            SmoothMap::Sine { n, .. } => *n,
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        match self {
            SmoothMap::Identity(_) => x.to_vec(),
            SmoothMap::Diagonal(d) => x.iter().zip(d).map(|(a, b)| a * b).collect(),
            SmoothMap::Sine { amplitude, .. } => x
                .iter()
                .map(|&v| v + amplitude * (std::f64::consts::TAU * v).sin())
                .collect(),
        }
    }

    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        match self {
            SmoothMap::Identity(_) => y.to_vec(),
            SmoothMap::Diagonal(d) => y.iter().zip(d).map(|(a, b)| a / b).collect(),
            SmoothMap::Sine { amplitude, .. } => y
                .iter()
                .map(|&target| {
                    let tau = std::f64::consts::TAU;
                    let mut v = target;
                    for _ in 0..60 {
                        let f = v + amplitude * (tau * v).sin() - target;
                        let df = 1.0 + amplitude * tau * (tau * v).cos();
                        let step = f / df;
                        v -= step;
                        if step.abs() < 1e-15 {
                            break;
                        }
                    }
                    v
                })
                .collect(),
        }
    }

    /// Bi-Lipschitz constant `C₁` with `C₁⁻¹|x−y| ≤ |κx−κy| ≤ C₁|x−y|`.
    pub fn c1(&self) -> f64 {
        match self {
            SmoothMap::Identity(_) => 1.0,
            SmoothMap::Diagonal(d) => d.iter().map(|&v| v.max(1.0 / v)).fold(1.0, f64::max),
            SmoothMap::Sine { amplitude, .. } => {
                let s = amplitude * std::f64::consts::TAU;
                (1.0 + s).max(1.0 / (1.0 - s))
            }
        }
    }

    /// Bound `C₂` on the second derivatives of the inverse map.
    pub fn c2(&self) -> f64 {
        match self {
            SmoothMap::Identity(_) | SmoothMap::Diagonal(_) => 0.0,
            SmoothMap::Sine { amplitude, .. } => {
                let tau = std::f64::consts::TAU;
                amplitude * tau * tau / (1.0 - amplitude * tau).powi(3)
            }
        }
    }

    /// Sampled bi-Lipschitz constant over random pairs in `[0,1]^n`, inflated
    /// by 2%.
    pub fn estimate_c1<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> Result<f64> {
        let n = self.n();
        let mut worst: f64 = 1.0;
        for i in 0..samples {
            let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let scale = if i % 2 == 0 { 1e-4 } else { 1.0 };
            let b: Vec<f64> = a
                .iter()
                .map(|v| (v + scale * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0))
                .collect();
            let dx = dist(&a, &b);
            if dx == 0.0 {
                continue;
            }
            let dy = dist(&self.forward(&a), &self.forward(&b));
            if !(dy > 0.0) {
                return Err(Error::Degenerate("map collapses two sample points".into()));
            }
            worst = worst.max(dy / dx).max(dx / dy);
        }
        Ok(worst * 1.02)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Rasterised superset of `κ(X)`: every cell within `C₁δ√n/2` of the image
/// of an occupied cell centre.
pub fn bilipschitz_image(x: &BoxSet, map: &SmoothMap, c1: f64) -> Result<BoxSet> {
    let n = x.n();
    if map.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: map.n(),
        });
    }
    let delta = x.delta();
    let radius = c1 * delta * (n as f64).sqrt() / 2.0;
    let m = x.m() as i64;
    let mut out = BoxSet::empty(n, x.m())?;
    for idx in x.occupied() {
        let c = x.cell_center(idx);
        let p = map.forward(&c);
        let back = map.inverse(&p);
        if dist(&back, &c) > 1e-9 {
            return Err(Error::Degenerate(format!(
                "map is not invertible near {c:?}"
            )));
        }
        if p.iter().any(|v| !(-1e-12..=1.0 + 1e-12).contains(v)) {
            return Err(Error::InvalidParameter(format!(
                "image point {p:?} leaves the unit cube"
            )));
        }
        let lo: Vec<i64> = p
            .iter()
            .map(|&v| (((v - radius) / delta).floor() as i64).max(0))
            .collect();
        let hi: Vec<i64> = p
            .iter()
            .map(|&v| (((v + radius) / delta).floor() as i64).min(m - 1))
            .collect();
        for_each_in_box(&lo, &hi, |cur| {
            let gap: f64 = cur
                .iter()
                .zip(&p)
                .map(|(&k, &v)| {
                    let a = k as f64 * delta;
                    let b = a + delta;
                    let d = if v < a {
                        a - v
                    } else if v > b {
                        v - b
                    } else {
                        0.0
                    };
                    d * d
                })
                .sum::<f64>()
                .sqrt();
            if gap <= radius {
                let cell: Vec<usize> = cur.iter().map(|&k| k as usize).collect();
                out.set_cell(&cell, true);
            }
        });
    }
    Ok(out.with_provenance(Provenance::Derived("bi-Lipschitz image".into())))
}

fn for_each_in_box<F: FnMut(&[i64])>(lo: &[i64], hi: &[i64], mut f: F) {
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return;
    }
    let mut cur = lo.to_vec();
    loop {
        f(&cur);
        let mut k = cur.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if cur[k] < hi[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = lo[k];
        }
    }
}
