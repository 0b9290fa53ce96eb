use nalgebra::DVector;

use crate::{Error, Result};

/// A vector of Minkowski space `ℝ^{1,n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzVector {
    coords: DVector<f64>,
}

/// Classification of a vector relative to the hyperboloid and its boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Hyperboloid,
    Boundary,
    Neither,
}

impl LorentzVector {
    /// Builds a vector from `n+2` coordinates, `n ≥ 1`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: coords.len(),
            });
        }
        Ok(Self {
            coords: DVector::from_vec(coords),
        })
    }

    pub fn from_dvector(coords: DVector<f64>) -> Result<Self> {
        Self::new(coords.as_slice().to_vec())
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            coords: DVector::zeros(n + 2),
        }
    }

    /// The standard basis vector `e⃗_i` of `ℝ^{1,n+1}`.
    pub fn basis(i: usize, n: usize) -> Self {
        let mut v = Self::zeros(n);
        v.coords[i] = 1.0;
        v
    }

    /// The dimension `n` of the hyperbolic space `ℍ^{n+1}`.
    pub fn n(&self) -> usize {
        self.coords.len() - 2
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }

    /// Spatial part `(x₁, …, x_{n+1})`.
    pub fn spatial(&self) -> DVector<f64> {
        self.coords.rows(1, self.coords.len() - 1).into_owned()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coords: &self.coords * s,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            coords: &self.coords + &other.coords,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coords: &self.coords - &other.coords,
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        Self {
            coords: &self.coords * a + &other.coords * b,
        }
    }

    /// `⟨self, self⟩_M`.
    pub fn norm_sq(&self) -> f64 {
        inner_unchecked(&self.coords, &self.coords)
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn inner_unchecked(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let spatial: f64 = u.iter().zip(v.iter()).skip(1).map(|(a, b)| a * b).sum();
    spatial - u[0] * v[0]
}

/// The Minkowski form `−u₀v₀ + Σ_{j≥1} u_j v_j`.
pub fn minkowski_inner(u: &LorentzVector, v: &LorentzVector) -> Result<f64> {
    if u.coords.len() != v.coords.len() {
        return Err(Error::DimensionMismatch {
            expected: u.coords.len(),
            found: v.coords.len(),
        });
    }
    Ok(inner_unchecked(&u.coords, &v.coords))
}

pub fn classify_point(v: &LorentzVector, tol: f64) -> PointClass {
    let q = v.norm_sq();
    if (q + 1.0).abs() <= tol && v.coords[0] > 0.0 {
        PointClass::Hyperboloid
    } else if q.abs() <= tol && (v.coords[0] - 1.0).abs() <= tol {
        PointClass::Boundary
    } else {
        PointClass::Neither
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_inner_products() {
        let e0 = LorentzVector::basis(0, 2);
        let e1 = LorentzVector::basis(1, 2);
        assert_eq!(minkowski_inner(&e0, &e0).unwrap(), -1.0);
        assert_eq!(minkowski_inner(&e1, &e1).unwrap(), 1.0);
        assert_eq!(minkowski_inner(&e0, &e1).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_dimensions() {
        let a = LorentzVector::basis(0, 2);
        let b = LorentzVector::basis(0, 3);
        assert!(matches!(
            minkowski_inner(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn classification() {
        let n = 3;
        assert_eq!(
            classify_point(&LorentzVector::basis(0, n), 1e-12),
            PointClass::Hyperboloid
        );
        let inf = LorentzVector::new(vec![1.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(classify_point(&inf, 1e-12), PointClass::Boundary);
        assert_eq!(
            classify_point(&LorentzVector::basis(1, n), 1e-12),
            PointClass::Neither
        );
        assert_eq!(
            classify_point(&LorentzVector::basis(0, n).scaled(-1.0), 1e-12),
            PointClass::Neither
        );
    }
}
