use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SemiclassicalDft;
use crate::porosity::BoxSet;
use crate::{Error, Result};

/// A linear map `ℂ^{dim_in} → ℂ^{dim_out}` with an adjoint.
pub trait Core: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;

    /// Matrix entry, evaluated directly.
    fn entry(&self, row: usize, col: usize) -> Complex64;

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim_out())
            .map(|r| (0..self.dim_in()).map(|c| self.entry(r, c) * x[c]).sum())
            .collect()
    }

    fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim_in())
            .map(|c| {
                (0..self.dim_out())
                    .map(|r| self.entry(r, c).conj() * y[r])
                    .sum()
            })
            .collect()
    }

    /// Whether `apply` beats forming the masked submatrix.
    fn is_fast(&self) -> bool {
        false
    }

    fn label(&self) -> &'static str;
}

/// `1_L A 1_R` restricted to the index sets `R → L`.
pub struct MaskedOperator<'a> {
    core: &'a dyn Core,
    left: Vec<usize>,
    right: Vec<usize>,
    matrix: Option<DMatrix<Complex64>>,
}

impl std::fmt::Debug for MaskedOperator<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "MaskedOperator {{ core: {}, left: {}, right: {} }}",
            self.core.label(),
            self.left.len(),
            self.right.len()
        )
    }
}

impl<'a> MaskedOperator<'a> {
    pub fn new(core: &'a dyn Core, left: Vec<usize>, right: Vec<usize>) -> Result<Self> {
        if let Some(&r) = left.iter().find(|&&r| r >= core.dim_out()) {
            return Err(Error::IndexOutOfRange(format!("row {r}")));
        }
        if let Some(&c) = right.iter().find(|&&c| c >= core.dim_in()) {
            return Err(Error::IndexOutOfRange(format!("column {c}")));
        }
        let matrix = (!core.is_fast()).then(|| {
            DMatrix::from_fn(left.len(), right.len(), |i, j| {
                core.entry(left[i], right[j])
            })
        });
        Ok(Self {
            core,
            left,
            right,
            matrix,
        })
    }

    /// Masks taken from the occupied cells of two sets on the core's grid.
    pub fn from_sets(core: &'a dyn Core, left: &BoxSet, right: &BoxSet) -> Result<Self> {
        for s in [left, right] {
            if s.len() != core.dim_in() {
                return Err(Error::DimensionMismatch {
                    expected: core.dim_in(),
                    found: s.len(),
                });
            }
        }
        Self::new(core, left.occupied().collect(), right.occupied().collect())
    }

    pub fn rows(&self) -> usize {
        self.left.len()
    }

    pub fn cols(&self) -> usize {
        self.right.len()
    }

    pub fn core(&self) -> &dyn Core {
        self.core
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        if let Some(m) = &self.matrix {
            return (m * nalgebra::DVector::from_column_slice(x))
                .as_slice()
                .to_vec();
        }
        let mut full = vec![Complex64::default(); self.core.dim_in()];
        for (v, &c) in x.iter().zip(&self.right) {
            full[c] = *v;
        }
        let y = self.core.apply(&full);
        self.left.iter().map(|&r| y[r]).collect()
    }

    pub fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        if let Some(m) = &self.matrix {
            return (m.adjoint() * nalgebra::DVector::from_column_slice(y))
                .as_slice()
                .to_vec();
        }
        let mut full = vec![Complex64::default(); self.core.dim_out()];
        for (v, &r) in y.iter().zip(&self.left) {
            full[r] = *v;
        }
        let x = self.core.adjoint(&full);
        self.right.iter().map(|&c| x[c]).collect()
    }

    /// The masked submatrix built entry by entry.
    pub fn dense(&self) -> DMatrix<Complex64> {
        match &self.matrix {
            Some(m) => m.clone(),
            None => DMatrix::from_fn(self.rows(), self.cols(), |i, j| {
                self.core.entry(self.left[i], self.right[j])
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    /// Relative residual `‖A*Av − λv‖ ≤ tol·λ`.
    pub tol: f64,
    pub restarts: usize,
    /// Iteration cap per start; `None` means `max(10·dim, 100)`.
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            restarts: 3,
            max_iter: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub norm: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest singular value of the dense submatrix, when computed.
    pub dense: Option<f64>,
}

impl NormEstimate {
    /// True when the dense value is absent or within `tol` of the iterate.
    pub fn agrees(&self, tol: f64) -> bool {
        self.dense.is_none_or(|d| (d - self.norm).abs() <= tol)
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn l2(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn orthonormalize(block: &mut Vec<Vec<Complex64>>) {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(block.len());
    for mut v in block.drain(..) {
        for _ in 0..2 {
            for q in &out {
                let p = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= p * b);
            }
        }
        let s = l2(&v);
        if s > 1e-300 {
            v.iter_mut().for_each(|a| *a /= s);
            out.push(v);
        }
    }
    *block = out;
}

/// Largest singular value by block power iteration on `A*A` with a
/// Rayleigh–Ritz step, repeated from independent random starts.
///
/// A start converges when the top Ritz pair has residual `≤ tol·λ`.
pub fn power_norm(op: &MaskedOperator<'_>, opts: &PowerOptions) -> NormEstimate {
    let dim = op.cols();
    if dim == 0 || op.rows() == 0 {
        return NormEstimate {
            norm: 0.0,
            lower: 0.0,
            upper: 0.0,
            iterations: 0,
            converged: true,
            dense: None,
        };
    }
    let cap = opts
        .max_iter
        .unwrap_or((10 * op.core().dim_in().max(dim)).max(100))
        .max(1);
    let width = dim.min(4);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = (0.0f64, f64::INFINITY);
    let mut iterations = 0;
    let mut all_converged = true;
    for _ in 0..opts.restarts.max(1) {
        let mut block: Vec<Vec<Complex64>> = (0..width)
            .map(|_| {
                (0..dim)
                    .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect()
            })
            .collect();
        orthonormalize(&mut block);
        let mut converged = false;
        let mut lambda = 0.0;
        let mut residual = f64::INFINITY;
        for _ in 0..cap {
            iterations += 1;
            let images: Vec<Vec<Complex64>> =
                block.iter().map(|v| op.adjoint(&op.apply(v))).collect();
            let b = block.len();
            let gram = DMatrix::from_fn(b, b, |i, j| dot(&block[i], &images[j]));
            let gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = gram.symmetric_eigen();
            let top = eig.eigenvalues.imax();
            lambda = eig.eigenvalues[top].max(0.0);
            let s = eig.eigenvectors.column(top);
            let mut ritz = vec![Complex64::default(); dim];
            let mut image = vec![Complex64::default(); dim];
            for k in 0..b {
                for t in 0..dim {
                    ritz[t] += block[k][t] * s[k];
                    image[t] += images[k][t] * s[k];
                }
            }
            residual = image
                .iter()
                .zip(&ritz)
                .map(|(a, r)| (a - r * lambda).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if lambda == 0.0 && images.iter().all(|w| l2(w) == 0.0) {
                converged = true;
                break;
            }
            if residual <= opts.tol * lambda {
                converged = true;
                break;
            }
            block = images;
            orthonormalize(&mut block);
            if block.is_empty() {
                converged = true;
                break;
            }
        }
        all_converged &= converged;
        if lambda > best.0 {
            best = (lambda, lambda + residual);
        }
    }
    NormEstimate {
        norm: best.0.sqrt(),
        lower: best.0.sqrt(),
        upper: best.1.sqrt(),
        iterations,
        converged: all_converged,
        dense: None,
    }
}

/// Largest singular value of the masked submatrix by dense SVD.
pub fn dense_norm(op: &MaskedOperator<'_>) -> f64 {
    if op.rows() == 0 || op.cols() == 0 {
        return 0.0;
    }
    op.dense().singular_values().max()
}

/// Largest dense submatrix (in entries) cross-checked by SVD.
pub const DENSE_ENTRY_CAP: usize = 1 << 18;

/// `‖1_{X₋} 𝓕_h 1_{X₊}‖` on the grid of the two sets, with `h = 1/N`.
///
/// Runs power iteration; when `N^n ≤ 4096` and the submatrix is small
/// enough the dense singular value is recorded alongside.
pub fn masked_norm(xminus: &BoxSet, xplus: &BoxSet, opts: &PowerOptions) -> Result<NormEstimate> {
    if xminus.n() != xplus.n() || xminus.m() != xplus.m() {
        return Err(Error::DimensionMismatch {
            expected: xminus.len(),
            found: xplus.len(),
        });
    }
    let dft = SemiclassicalDft::new(xminus.m(), xminus.n())?;
    let op = MaskedOperator::from_sets(&dft, xminus, xplus)?;
    estimate(&op, opts)
}

/// Power iteration plus the dense cross-check when feasible.
pub fn estimate(op: &MaskedOperator<'_>, opts: &PowerOptions) -> Result<NormEstimate> {
    let mut est = power_norm(op, opts);
    if !est.converged {
        return Err(Error::NotConverged {
            lower: est.lower,
            upper: est.upper,
        });
    }
    if op.core().dim_in() <= 4096 && op.rows() * op.cols() <= DENSE_ENTRY_CAP {
        est.dense = Some(dense_norm(op));
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::porosity::{cantor_generate, CantorSpec};

    #[test]
    fn full_masks_give_one() {
        let x = BoxSet::full(1, 64).unwrap();
        let e = masked_norm(&x, &x, &PowerOptions::default()).unwrap();
        assert!((e.norm - 1.0).abs() < 1e-10);
        assert!(e.agrees(1e-6));
    }

    #[test]
    fn single_column_is_exact() {
        let mut plus = BoxSet::empty(1, 81).unwrap();
        plus.set_cell(&[17], true);
        let mut minus = BoxSet::empty(1, 81).unwrap();
        for c in [0, 3, 4, 40, 41, 80] {
            minus.set_cell(&[c], true);
        }
        let e = masked_norm(&minus, &plus, &PowerOptions::default()).unwrap();
        assert!((e.norm - (6.0f64 / 81.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cantor_pair_matches_dense() {
        let x = cantor_generate(&CantorSpec::middle_third(5), 1).unwrap();
        let e = masked_norm(&x, &x, &PowerOptions::default()).unwrap();
        let d = e.dense.unwrap();
        assert!((d - e.norm).abs() < 1e-6, "{} vs {}", e.norm, d);
        assert!(e.norm < 1.0 && e.norm > 0.0);
    }

    #[test]
    fn normal_operator_is_positive_and_adjoint_consistent() {
        let x = cantor_generate(&CantorSpec::middle_third(4), 1).unwrap();
        let dft = SemiclassicalDft::new(81, 1).unwrap();
        let op = MaskedOperator::from_sets(&dft, &x, &x).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rand_vec = |k: usize| -> Vec<Complex64> {
            (0..k)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect()
        };
        for _ in 0..10 {
            let u = rand_vec(op.cols());
            let v = rand_vec(op.rows());
            let lhs = dot(&op.apply(&u), &v);
            let rhs = dot(&u, &op.adjoint(&v));
            assert!((lhs - rhs).norm() < 1e-10);
            let q = dot(&u, &op.adjoint(&op.apply(&u)));
            assert!(q.re >= -1e-12 && q.im.abs() < 1e-10);
        }
    }
}
