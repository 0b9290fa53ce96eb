use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::Core;
use crate::{Error, Result};

pub type PhaseFn = Box<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Quadrature nodes with weights, in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    /// Intrinsic dimension.
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    /// Points `j/N` of the unit cube, first coordinate most significant.
    pub fn cube(n: usize, size: usize) -> Result<Self> {
        let total = size
            .checked_pow(n as u32)
            .filter(|&t| t > 0 && t <= 1 << 20)
            .ok_or(Error::UnsupportedSize(size))?;
        let points = (0..total)
            .map(|mut idx| {
                let mut p = vec![0.0; n];
                for k in (0..n).rev() {
                    p[k] = (idx % size) as f64 / size as f64;
                    idx /= size;
                }
                p
            })
            .collect();
        Ok(Self {
            dim: n,
            points,
            weights: vec![(size as f64).powi(-(n as i32)); total],
        })
    }

    /// Equally spaced points at angles `2πj/N` on the unit circle.
    pub fn circle(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::UnsupportedSize(size));
        }
        let points = (0..size)
            .map(|j| {
                let t = TAU * j as f64 / size as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        Ok(Self {
            dim: 1,
            points,
            weights: vec![TAU / size as f64; size],
        })
    }

    /// Fibonacci lattice on the unit sphere with equal weights `4π/N`.
    pub fn fibonacci_sphere(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::UnsupportedSize(size));
        }
        Ok(Self {
            dim: 2,
            points: fibonacci_points(size),
            weights: vec![4.0 * PI / size as f64; size],
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub(crate) fn fibonacci_points(size: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..size)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / size as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = golden * k as f64;
            vec![r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

/// Quadrature discretisation of `f ↦ c ∫ e^{iΦ(x,y)/h} b(x,y) f(y) dy`.
pub struct KernelCore {
    rows: QuadratureGrid,
    cols: QuadratureGrid,
    phase: PhaseFn,
    amplitude: PhaseFn,
    h: f64,
    prefactor: f64,
    label: &'static str,
}

impl std::fmt::Debug for KernelCore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "KernelCore {{ {}: {}x{}, h: {} }}",
            self.label,
            self.rows.len(),
            self.cols.len(),
            self.h
        )
    }
}

impl KernelCore {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn rows(&self) -> &QuadratureGrid {
        &self.rows
    }

    pub fn cols(&self) -> &QuadratureGrid {
        &self.cols
    }
}

impl Core for KernelCore {
    fn dim_in(&self) -> usize {
        self.cols.len()
    }

    fn dim_out(&self) -> usize {
        self.rows.len()
    }

    fn entry(&self, row: usize, col: usize) -> Complex64 {
        let (x, y) = (&self.rows.points[row], &self.cols.points[col]);
        let b = (self.amplitude)(x, y);
        if b == 0.0 {
            return Complex64::default();
        }
        Complex64::from_polar(
            self.prefactor * b * self.cols.weights[col],
            (self.phase)(x, y) / self.h,
        )
    }

    fn label(&self) -> &'static str {
        self.label
    }
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("h = {h}")))
    }
}

/// `h^{−n/2} Σ_j e^{iΦ(x_i,y_j)/h} b(x_i,y_j) f(y_j) Δy_j` on the given grids.
pub fn general_phase_fio(
    phase: PhaseFn,
    amplitude: PhaseFn,
    grid_x: QuadratureGrid,
    grid_y: QuadratureGrid,
    h: f64,
) -> Result<KernelCore> {
    check_h(h)?;
    if grid_x.dim != grid_y.dim {
        return Err(Error::DimensionMismatch {
            expected: grid_x.dim,
            found: grid_y.dim,
        });
    }
    let prefactor = h.powf(-(grid_y.dim as f64) / 2.0);
    Ok(KernelCore {
        rows: grid_x,
        cols: grid_y,
        phase,
        amplitude,
        h,
        prefactor,
        label: "general",
    })
}

/// A smooth cutoff in the chordal distance, 0 below `inner` and 1 above `outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothCutoff {
    pub inner: f64,
    pub outer: f64,
}

impl SmoothCutoff {
    pub fn eval(&self, y: &[f64], yp: &[f64]) -> f64 {
        let d = chord(y, yp);
        if d <= self.inner {
            return 0.0;
        }
        if d >= self.outer {
            return 1.0;
        }
        let t = (d - self.inner) / (self.outer - self.inner);
        let f = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
        f(t) / (f(t) + f(1.0 - t))
    }
}

fn chord(y: &[f64], yp: &[f64]) -> f64 {
    y.iter()
        .zip(yp)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `(2πh)^{−n/2} Σ_j (|y − y′_j|/2)^{2iw/h} χ(y, y′_j) v(y′_j) Δy′_j` with the
/// Euclidean chordal distance. `χ` must vanish on pairs closer than `margin`.
pub fn log_phase_kernel(
    w: f64,
    h: f64,
    chi: PhaseFn,
    grid: QuadratureGrid,
    margin: f64,
) -> Result<KernelCore> {
    check_h(h)?;
    if !(w > 0.0 && w.is_finite()) || !(margin > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "w = {w}, margin = {margin}"
        )));
    }
    for (i, y) in grid.points.iter().enumerate() {
        for yp in &grid.points[i..] {
            if chord(y, yp) < margin && (chi(y, yp) != 0.0 || chi(yp, y) != 0.0) {
                return Err(Error::InvalidParameter(
                    "cutoff does not vanish near the diagonal".into(),
                ));
            }
        }
    }
    let prefactor = (TAU * h).powf(-(grid.dim as f64) / 2.0);
    Ok(KernelCore {
        rows: grid.clone(),
        cols: grid,
        phase: Box::new(move |y, yp| 2.0 * w * (chord(y, yp) / 2.0).ln()),
        amplitude: chi,
        h,
        prefactor,
        label: "log-phase",
    })
}
