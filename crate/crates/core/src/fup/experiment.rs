//! Norm ladders for the Fourier, general-phase and log-phase cores.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::kernel::{general_phase_fio, log_phase_kernel, QuadratureGrid, SmoothCutoff};
use super::sphere::cantor_arc;
use super::{
    beta_fit, estimate, Core, DecayFit, MaskedOperator, NormEstimate, PowerOptions,
    SemiclassicalDft,
};
use crate::porosity::{cantor_generate, BoxSet, CantorSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoreSpec {
    Fourier,
    /// `Φ = −2π⟨x,y⟩ + quadratic·⟨y,y⟩`, `b ≡ 1`.
    GeneralPhase {
        quadratic: f64,
    },
    /// Log phase on `𝕊¹` with Cantor sets on opposite quarter arcs.
    LogPhase {
        w: f64,
    },
}

impl CoreSpec {
    pub fn label(&self) -> &'static str {
        match self {
            CoreSpec::Fourier => "fourier",
            CoreSpec::GeneralPhase { .. } => "general",
            CoreSpec::LogPhase { .. } => "log-phase",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub core: CoreSpec,
    #[serde(default = "one")]
    pub n: usize,
    /// Cantor base; grid size is `base^depth` for the cube cores.
    #[serde(default = "three")]
    pub base: usize,
    #[serde(default = "outer_digits")]
    pub kept: Vec<usize>,
    pub depths: Vec<u32>,
    /// Thickening exponent for `X(h^ρ)`.
    #[serde(default = "one_f")]
    pub rho: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "tol")]
    pub tol: f64,
    /// Also check `norm ≥ sqrt(|X₋|/N^n)` (only meaningful for the Fourier core).
    #[serde(default)]
    pub lower_bound: bool,
}

fn one() -> usize {
    1
}
fn three() -> usize {
    3
}
fn one_f() -> f64 {
    1.0
}
fn tol() -> f64 {
    1e-8
}
fn outer_digits() -> Vec<usize> {
    vec![0, 2]
}

impl ExperimentConfig {
    pub fn cantor(core: CoreSpec, depths: Vec<u32>) -> Self {
        Self {
            core,
            n: 1,
            base: 3,
            kept: outer_digits(),
            depths,
            rho: 1.0,
            seed: 0,
            tol: tol(),
            lower_bound: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub core: String,
    pub n: usize,
    pub size: usize,
    pub h: f64,
    pub rho: f64,
    pub norm: f64,
    pub iters: usize,
    pub converged: bool,
    pub dense: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
    pub fit: Option<DecayFit>,
}

/// Dilates a mask by `radius` cells in the sup norm.
pub fn dilate(x: &BoxSet, radius: usize) -> BoxSet {
    if radius == 0 {
        return x.clone();
    }
    let (n, m) = (x.n(), x.m());
    let mut mask = x.mask().to_vec();
    let mut stride = 1;
    for _ in 0..n {
        let src = mask.clone();
        for (i, slot) in mask.iter_mut().enumerate() {
            let c = (i / stride) % m;
            let lo = c.saturating_sub(radius);
            let hi = (c + radius).min(m - 1);
            *slot = (lo..=hi).any(|d| src[i - c * stride + d * stride]);
        }
        stride *= m;
    }
    BoxSet::from_mask(n, m, mask).expect("same shape")
}

/// Dilation radius `round(N·h^ρ) − 1` in cells; a cell already has width `h`.
pub fn thickening_radius(size: usize, rho: f64) -> usize {
    let h = 1.0 / size as f64;
    ((size as f64 * h.powf(rho)).round() as usize).saturating_sub(1)
}

fn power_opts(cfg: &ExperimentConfig, salt: u64) -> PowerOptions {
    PowerOptions {
        tol: cfg.tol,
        seed: cfg.seed.wrapping_add(salt),
        ..PowerOptions::default()
    }
}

fn cube_point(cfg: &ExperimentConfig, depth: u32) -> Result<ExperimentRow> {
    let raw = if cfg.kept.len() == cfg.base {
        let size = cfg
            .base
            .checked_pow(depth)
            .ok_or(Error::UnsupportedSize(cfg.base))?;
        BoxSet::full(cfg.n, size)?
    } else {
        cantor_generate(&CantorSpec::new(cfg.base, &cfg.kept, depth), cfg.n)?
    };
    let set = dilate(&raw, thickening_radius(raw.m(), cfg.rho));
    let size = set.m();
    let h = 1.0 / size as f64;
    let est: NormEstimate = match &cfg.core {
        CoreSpec::Fourier => {
            let dft = SemiclassicalDft::new(size, cfg.n)?;
            estimate(
                &MaskedOperator::from_sets(&dft, &set, &set)?,
                &power_opts(cfg, depth as u64),
            )?
        }
        CoreSpec::GeneralPhase { quadratic } => {
            let q = *quadratic;
            let k = general_phase_fio(
                Box::new(move |x, y| {
                    let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                    let yy: f64 = y.iter().map(|a| a * a).sum();
                    -TAU * xy + q * yy
                }),
                Box::new(|_, _| 1.0),
                QuadratureGrid::cube(cfg.n, size)?,
                QuadratureGrid::cube(cfg.n, size)?,
                h,
            )?;
            estimate(
                &MaskedOperator::from_sets(&k, &set, &set)?,
                &power_opts(cfg, depth as u64),
            )?
        }
        CoreSpec::LogPhase { .. } => unreachable!(),
    };
    if matches!(cfg.core, CoreSpec::Fourier) {
        if est.norm > 1.0 + 1e-10 {
            return Err(Error::Degenerate(format!("norm {} exceeds 1", est.norm)));
        }
        if cfg.lower_bound {
            let floor = (set.count() as f64 / set.len() as f64).sqrt();
            if est.norm < floor - 1e-12 {
                return Err(Error::Degenerate(format!(
                    "norm {} below column bound {floor}",
                    est.norm
                )));
            }
        }
    }
    Ok(ExperimentRow {
        core: cfg.core.label().into(),
        n: cfg.n,
        size,
        h,
        rho: cfg.rho,
        norm: est.norm,
        iters: est.iterations,
        converged: est.converged,
        dense: est.dense,
    })
}

/// Circle grid size `4·3^k·⌈w⌉` used by the log-phase ladder.
pub fn log_phase_grid(w: f64, depth: u32) -> usize {
    4 * 3usize.pow(depth) * (w.ceil().max(1.0) as usize)
}

fn arc_mask(grid: &QuadratureGrid, intervals: &[(f64, f64)]) -> Vec<usize> {
    let size = grid.len();
    (0..size)
        .filter(|&j| {
            let t = TAU * j as f64 / size as f64;
            intervals
                .iter()
                .any(|&(a, b)| t >= a - 1e-12 && t <= b + 1e-12)
        })
        .collect()
}

fn log_phase_point(cfg: &ExperimentConfig, w: f64, depth: u32) -> Result<ExperimentRow> {
    let size = log_phase_grid(w, depth);
    if size > 4096 {
        return Err(Error::UnsupportedSize(size));
    }
    let h = FRAC_PI_2 / 3f64.powi(depth as i32);
    let grid = QuadratureGrid::circle(size)?;
    let minus = arc_mask(&grid, &cantor_arc(0.0, FRAC_PI_2, depth));
    let plus = arc_mask(&grid, &cantor_arc(PI, FRAC_PI_2, depth));
    let chi = SmoothCutoff {
        inner: 0.5,
        outer: 1.0,
    };
    let k = log_phase_kernel(w, h, Box::new(move |a, b| chi.eval(a, b)), grid, 0.5)?;
    let core: &dyn Core = &k;
    let est = estimate(
        &MaskedOperator::new(core, minus, plus)?,
        &power_opts(cfg, depth as u64),
    )?;
    Ok(ExperimentRow {
        core: cfg.core.label().into(),
        n: 1,
        size,
        h,
        rho: cfg.rho,
        norm: est.norm,
        iters: est.iterations,
        converged: est.converged,
        dense: est.dense,
    })
}

/// Runs every ladder point in order and fits `norm ≈ C h^β` when at least
/// four points are available.
pub fn fup_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if cfg.depths.is_empty() {
        return Err(Error::InvalidParameter("empty depth ladder".into()));
    }
    let mut rows = Vec::with_capacity(cfg.depths.len());
    for &d in &cfg.depths {
        rows.push(match cfg.core {
            CoreSpec::LogPhase { w } => log_phase_point(cfg, w, d)?,
            _ => cube_point(cfg, d)?,
        });
    }
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.norm)).collect();
    let fit = if samples.len() >= 4 {
        Some(beta_fit(&samples)?)
    } else {
        None
    };
    Ok(ExperimentResult { rows, fit })
}

/// `{:.16e}` keeps 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl ExperimentResult {
    /// CSV rows plus a `#`-prefixed fit footer.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("core,n,N,h,rho,norm,iters,converged,dense\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.core,
                r.n,
                r.size,
                fmt_float(r.h),
                fmt_float(r.rho),
                fmt_float(r.norm),
                r.iters,
                r.converged,
                r.dense.map(fmt_float).unwrap_or_default()
            );
        }
        if let Some(f) = &self.fit {
            let _ = writeln!(s, "# beta = {}", fmt_float(f.beta));
            let _ = writeln!(s, "# intercept = {}", fmt_float(f.intercept));
            let _ = writeln!(s, "# residual = {}", fmt_float(f.residual));
            let _ = writeln!(s, "# log_span = {}", fmt_float(f.log_span()));
        }
        s
    }

    /// Norms never increase along the ladder (up to `tol`).
    pub fn nonincreasing(&self, tol: f64) -> bool {
        self.rows.windows(2).all(|p| p[1].norm <= p[0].norm + tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dilation_in_two_dimensions() {
        let mut x = BoxSet::empty(2, 9).unwrap();
        x.set_cell(&[4, 4], true);
        let d = dilate(&x, 1);
        assert_eq!(d.count(), 9);
        assert!(d.contains_cell(&[3, 5]) && !d.contains_cell(&[2, 4]));
        assert_eq!(thickening_radius(243, 1.0), 0);
        assert_eq!(thickening_radius(256, 0.75), 3);
    }

    #[test]
    fn full_masks_have_unit_norm_and_zero_beta() {
        let mut cfg = ExperimentConfig::cantor(CoreSpec::Fourier, vec![1, 2, 3, 4]);
        cfg.kept = vec![0, 1, 2];
        let r = fup_experiment(&cfg).unwrap();
        assert!(r.rows.iter().all(|row| (row.norm - 1.0).abs() < 1e-10));
        assert!(r.fit.unwrap().beta.abs() < 1e-9);
    }

    #[test]
    fn cantor_ladder_decays() {
        let cfg = ExperimentConfig::cantor(CoreSpec::Fourier, vec![2, 3, 4, 5]);
        let r = fup_experiment(&cfg).unwrap();
        assert!(r.nonincreasing(1e-10));
        assert!(r.fit.as_ref().unwrap().beta > 0.0);
        assert!(r.to_csv().lines().count() == 9);
    }
}
