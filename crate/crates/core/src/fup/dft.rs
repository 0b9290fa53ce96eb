use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Core;
use crate::{Error, Result};

/// True when `n ≥ 1` has no prime factors other than 2 and 3.
pub fn is_three_smooth(mut n: usize) -> bool {
    if n == 0 {
        return false;
    }
    for p in [2, 3] {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n == 1
}

/// Complex samples on the grid `{j/N}^n` with `h = 1/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    n: usize,
    size: usize,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(n: usize, size: usize, values: Vec<Complex64>) -> Result<Self> {
        let total = size
            .checked_pow(n as u32)
            .ok_or(Error::UnsupportedSize(size))?;
        if values.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: values.len(),
            });
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::NonFinite("grid function value".into()));
        }
        Ok(Self { n, size, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn h(&self) -> f64 {
        1.0 / self.size as f64
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Discrete `L²` norm `(h^n Σ|f_j|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.h().powi(self.n as i32))
            .sqrt()
    }
}

/// The unitary DFT on `N^n` points, `N^{−n/2} Σ_k e^{−2πi⟨j,k⟩/N} f_k`.
#[derive(Clone)]
pub struct SemiclassicalDft {
    n: usize,
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SemiclassicalDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SemiclassicalDft {{ n: {}, N: {} }}", self.n, self.size)
    }
}

impl SemiclassicalDft {
    pub fn new(size: usize, n: usize) -> Result<Self> {
        if !is_three_smooth(size) || n == 0 || n > 3 {
            return Err(Error::UnsupportedSize(size));
        }
        size.checked_pow(n as u32)
            .filter(|&t| t <= 1 << 24)
            .ok_or(Error::UnsupportedSize(size))?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn h(&self) -> f64 {
        1.0 / self.size as f64
    }

    fn transform(&self, x: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let size = self.size;
        let mut line = vec![Complex64::default(); size];
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        for axis in 0..self.n {
            let stride = size.pow((self.n - 1 - axis) as u32);
            let outer = x.len() / (size * stride);
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * size * stride + s;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = x[base + k * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        x[base + k * stride] = *v;
                    }
                }
            }
        }
        let scale = (size as f64).powf(-(self.n as f64) / 2.0);
        x.iter_mut().for_each(|v| *v *= scale);
    }

    /// Applies the transform to a grid function.
    pub fn apply_grid(&self, f: &GridFunction) -> Result<GridFunction> {
        if f.n() != self.n || f.size() != self.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                found: f.size(),
            });
        }
        let mut v = f.values().to_vec();
        self.transform(&mut v, &self.forward);
        GridFunction::new(self.n, self.size, v)
    }

    /// Dense matrix entry `N^{−n/2} e^{−2πi⟨j,k⟩/N}` by direct evaluation.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        let size = self.size;
        let (mut a, mut b) = (row, col);
        let mut dot = 0usize;
        for _ in 0..self.n {
            dot += (a % size) * (b % size);
            a /= size;
            b /= size;
        }
        let phase = -std::f64::consts::TAU * ((dot % size) as f64) / size as f64;
        Complex64::from_polar((size as f64).powf(-(self.n as f64) / 2.0), phase)
    }
}

impl Core for SemiclassicalDft {
    fn dim_in(&self) -> usize {
        self.size.pow(self.n as u32)
    }

    fn dim_out(&self) -> usize {
        self.dim_in()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = x.to_vec();
        self.transform(&mut y, &self.forward);
        y
    }

    fn adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = x.to_vec();
        self.transform(&mut y, &self.inverse);
        y
    }

    fn is_fast(&self) -> bool {
        true
    }

    fn entry(&self, row: usize, col: usize) -> Complex64 {
        SemiclassicalDft::entry(self, row, col)
    }

    fn label(&self) -> &'static str {
        "fourier"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(len: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn smallest_dft() {
        let f = SemiclassicalDft::new(2, 1).unwrap();
        let r = 0.5f64.sqrt();
        assert!((f.entry(0, 0) - Complex64::new(r, 0.0)).norm() < 1e-15);
        assert!((f.entry(1, 1) - Complex64::new(-r, 0.0)).norm() < 1e-15);
        let v = f.apply(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert!((v[1] - Complex64::new(r, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn unitary_and_order_four() {
        let f = SemiclassicalDft::new(1024, 1).unwrap();
        for s in 0..100 {
            let x = random(1024, s);
            let y = f.apply(&x);
            assert!((norm(&x) - norm(&y)).abs() < 1e-12 * norm(&x));
        }
        let g = SemiclassicalDft::new(256, 1).unwrap();
        let x = random(256, 7);
        let mut y = x.clone();
        for _ in 0..4 {
            y = g.apply(&y);
        }
        let err = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn fast_matches_direct_in_two_dimensions() {
        let f = SemiclassicalDft::new(6, 2).unwrap();
        let x = random(36, 3);
        let y = f.apply(&x);
        for r in 0..36 {
            let direct: Complex64 = (0..36).map(|c| f.entry(r, c) * x[c]).sum();
            assert!((direct - y[r]).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_unsupported_sizes() {
        assert!(SemiclassicalDft::new(10, 1).is_err());
        assert!(SemiclassicalDft::new(0, 1).is_err());
        assert!(SemiclassicalDft::new(729, 1).is_ok());
    }
}
