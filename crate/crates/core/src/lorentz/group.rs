use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;

use super::algebra::{frame_labels, labelled, minkowski_j};
use super::{check_dim, Label, LieAlgebraElement, LorentzVector};
use crate::{Error, Result, Sign};

/// A matrix in `SO₀(1,n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    matrix: DMatrix<f64>,
}

/// Returns true iff `MᵀJM = J`, `det M = 1` and `M₀₀ > 0`, each within `tol`.
pub fn is_group_element(m: &DMatrix<f64>, tol: f64) -> bool {
    let size = m.nrows();
    if size < 3 || m.ncols() != size || m.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let j = minkowski_j(size);
    let lorentz = (m.transpose() * &j * m - &j).amax();
    lorentz <= tol && (m.determinant() - 1.0).abs() <= tol && m[(0, 0)] > 0.0
}

impl GroupElement {
    /// Certifies `matrix` at tolerance `tol`.
    pub fn new(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !is_group_element(&matrix, tol) {
            return Err(Error::NotGroupElement(format!(
                "membership fails at tolerance {tol:e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix known to be in the group by construction.
    pub(crate) fn from_trusted(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n + 2, n + 2),
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows() - 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// The inverse `J Mᵀ J`.
    pub fn inverse(&self) -> GroupElement {
        let j = minkowski_j(self.matrix.nrows());
        GroupElement {
            matrix: &j * self.matrix.transpose() * &j,
        }
    }

    pub fn act(&self, v: &LorentzVector) -> LorentzVector {
        LorentzVector::from_dvector(&self.matrix * v.coords()).expect("dimension preserved")
    }

    pub fn column(&self, i: usize) -> LorentzVector {
        LorentzVector::from_dvector(self.matrix.column(i).into_owned()).expect("n+2 entries")
    }

    /// Max-norm distance between matrices.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        (&self.matrix - &other.matrix).amax()
    }

    /// Re-runs the membership predicate.
    pub fn certify(&self, tol: f64) -> bool {
        is_group_element(&self.matrix, tol)
    }
}

impl fmt::Display for GroupElement {
    /// Row-major text with the header `lorentz n=<n>`; 17 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lorentz n={}", self.n())?;
        for r in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .map(|c| format!("{:.16e}", self.matrix[(r, c)]))
                .collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for GroupElement {
    type Err = Error;

    /// Parses the text form and certifies membership at the default tolerance.
    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty group element".into()))?;
        let n: usize = header
            .strip_prefix("lorentz n=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header `{header}`")))?;
        check_dim(n)?;
        let size = n + 2;
        let mut data = Vec::with_capacity(size * size);
        for line in lines {
            for tok in line.split_whitespace() {
                data.push(
                    tok.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad entry `{tok}`")))?,
                );
            }
        }
        if data.len() != size * size {
            return Err(Error::Parse(format!(
                "expected {} entries, found {}",
                size * size,
                data.len()
            )));
        }
        GroupElement::new(DMatrix::from_row_slice(size, size, &data), super::TOL_GROUP)
    }
}

fn hyperbolic_block(size: usize, k: usize, t: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(size, size);
    let (c, s) = (t.cosh(), t.sinh());
    m[(0, 0)] = c;
    m[(k, k)] = c;
    m[(0, k)] = s;
    m[(k, 0)] = s;
    m
}

fn rotation_block(size: usize, i: usize, j: usize, t: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(size, size);
    let (c, s) = (t.cos(), t.sin());
    m[(i, i)] = c;
    m[(j, j)] = c;
    m[(i, j)] = s;
    m[(j, i)] = -s;
    m
}

/// `exp(Σ sᵢ U_i^σ)` in closed form (the series stops at the quadratic term).
pub fn horospherical(sign: Sign, s: &[f64]) -> Result<GroupElement> {
    let n = s.len();
    check_dim(n)?;
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("horospherical parameter".into()));
    }
    let sg = sign.value();
    let q: f64 = s.iter().map(|v| v * v).sum::<f64>() / 2.0;
    let mut m = DMatrix::identity(n + 2, n + 2);
    m[(0, 0)] = 1.0 + q;
    m[(0, 1)] = -sg * q;
    m[(1, 0)] = sg * q;
    m[(1, 1)] = 1.0 - q;
    for (i, si) in s.iter().enumerate() {
        m[(0, i + 2)] = -si;
        m[(1, i + 2)] = -sg * si;
        m[(i + 2, 0)] = -si;
        m[(i + 2, 1)] = sg * si;
    }
    Ok(GroupElement::from_trusted(m))
}

/// `exp(tY)`. Closed forms are used for labelled generators and for
/// nilpotent elements of order three; other elements go through the general
/// scaling-and-squaring exponential.
pub fn exp_flow(y: &LieAlgebraElement, t: f64) -> Result<GroupElement> {
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("flow time {t}")));
    }
    let size = y.matrix().nrows();
    let n = size - 2;
    match y.label() {
        Some(Label::X) => Ok(GroupElement::from_trusted(hyperbolic_block(size, 1, t))),
        Some(Label::A(k)) => Ok(GroupElement::from_trusted(hyperbolic_block(size, k, t))),
        Some(Label::R(i, j)) => Ok(GroupElement::from_trusted(rotation_block(size, i, j, t))),
        Some(Label::U(i, sign)) => {
            let mut s = vec![0.0; n];
            s[i - 1] = t;
            horospherical(sign, &s)
        }
        None => {
            let scale = y.matrix().amax().max(1.0);
            if y.isometry_residual() > 1e-10 * scale {
                return Err(Error::InvalidParameter(
                    "generator is not in so(1,n+1)".into(),
                ));
            }
            let m = y.matrix() * t;
            let m2 = &m * &m;
            let m3 = &m2 * &m;
            if m3.amax() <= 1e-15 * m.amax().max(1.0).powi(3) {
                let e = DMatrix::identity(size, size) + &m + m2 * 0.5;
                Ok(GroupElement::from_trusted(e))
            } else {
                Ok(GroupElement::from_trusted(m.exp()))
            }
        }
    }
}

/// `exp(tY)` by the general matrix exponential, ignoring any closed form.
pub fn exp_general(y: &LieAlgebraElement, t: f64) -> Result<GroupElement> {
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("flow time {t}")));
    }
    Ok(GroupElement::from_trusted((y.matrix() * t).exp()))
}

/// The projection `π_{K₀}(g) = (g e⃗₀, g e⃗₁)` to the unit tangent bundle.
pub fn pi_k0(g: &GroupElement) -> (LorentzVector, LorentzVector) {
    (g.column(0), g.column(1))
}

/// A product of five exponentials of randomly chosen frame generators with
/// parameters uniform in `[−1, 1]`.
pub fn random_group_element<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<GroupElement> {
    let labels = frame_labels(n)?;
    let mut g = GroupElement::identity(n);
    for _ in 0..5 {
        let label = labels[rng.random_range(0..labels.len())];
        let t = rng.random_range(-1.0..=1.0);
        g = g.mul(&exp_flow(&labelled(label, n)?, t)?);
    }
    Ok(g)
}

/// `J`-Gram matrix `MᵀJM`, useful for diagnostics.
pub fn minkowski_gram(m: &DMatrix<f64>) -> DMatrix<f64> {
    let j = minkowski_j(m.nrows());
    m.transpose() * &j * m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::{generator, GeneratorKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_reflection() {
        assert!(is_group_element(&DMatrix::identity(4, 4), 1e-10));
        let mut m = DMatrix::identity(4, 4);
        m[(0, 0)] = -1.0;
        assert!(!is_group_element(&m, 1e-10));
    }

    #[test]
    fn exp_x_is_group_element() {
        let x = generator(GeneratorKind::X, 0, 0, 2).unwrap();
        let g = exp_flow(&x, 1.0).unwrap();
        assert!(g.certify(1e-10));
        assert_eq!(g.matrix()[(0, 0)], 1f64.cosh());
        assert_eq!(g.matrix()[(0, 1)], 1f64.sinh());
        assert_eq!(exp_flow(&x, 0.0).unwrap(), GroupElement::identity(2));
    }

    #[test]
    fn closed_forms_match_general_exponential() {
        let n = 3;
        for y in crate::lorentz::frame(n).unwrap() {
            for t in [-1.7, -0.3, 0.4, 2.1] {
                let a = exp_flow(&y, t).unwrap();
                let b = exp_general(&y, t).unwrap();
                assert!(
                    a.distance(&b) < 1e-12 * a.matrix().amax(),
                    "{:?}",
                    y.label()
                );
            }
        }
    }

    #[test]
    fn horospherical_pattern() {
        // exp(sU₁⁺), n=2: first 3x3 block carries 1 ± s²/2 and ±s.
        let s = 0.7;
        let u = generator(GeneratorKind::Uplus, 1, 0, 2).unwrap();
        let g = exp_flow(&u, s).unwrap();
        let m = g.matrix();
        assert_eq!(m[(0, 0)], 1.0 + s * s / 2.0);
        assert_eq!(m[(1, 1)], 1.0 - s * s / 2.0);
        assert_eq!(m[(0, 2)], -s);
        assert_eq!(m[(2, 1)], s);
        assert_eq!(m[(3, 3)], 1.0);
        assert_eq!(m[(0, 3)], 0.0);
        let diff = u.matrix() * s;
        let cube = &diff * &diff * &diff;
        assert_eq!(cube.amax(), 0.0);
    }

    #[test]
    fn nilpotent_combination_uses_quadratic_series() {
        let n = 3;
        let u1 = generator(GeneratorKind::Uminus, 1, 0, n).unwrap();
        let u3 = generator(GeneratorKind::Uminus, 3, 0, n).unwrap();
        let y = LieAlgebraElement::combination(&[(0.4, &u1), (-1.1, &u3)]).unwrap();
        let a = exp_flow(&y, 1.0).unwrap();
        let b = horospherical(Sign::Minus, &[0.4, 0.0, -1.1]).unwrap();
        assert!(a.distance(&b) < 1e-15);
    }

    #[test]
    fn non_finite_time_rejected() {
        let x = generator(GeneratorKind::X, 0, 0, 2).unwrap();
        assert!(exp_flow(&x, f64::NAN).is_err());
        assert!(exp_flow(&x, f64::INFINITY).is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random_group_element(3, &mut rng).unwrap();
        let text = g.to_string();
        assert!(text.starts_with("lorentz n=3\n"));
        let back: GroupElement = text.parse().unwrap();
        assert_eq!(back, g);
        assert!("lorentz n=2\n1 0 0\n".parse::<GroupElement>().is_err());
        assert!("matrix\n".parse::<GroupElement>().is_err());
    }

    #[test]
    fn inverse_is_exact_for_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_group_element(4, &mut rng).unwrap();
        let e = g.mul(&g.inverse());
        assert!(e.distance(&GroupElement::identity(4)) < 1e-12);
    }
}
