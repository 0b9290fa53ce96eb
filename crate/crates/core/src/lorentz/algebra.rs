use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::check_dim;
use crate::{Error, Result, Sign};

/// Kinds of frame generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    X,
    A,
    R,
    Uplus,
    Uminus,
}

/// Name of a frame element, serialized as `X`, `A2`, `R23`, `U1+`, `U1-`.
///
/// Two-digit indices of `R` are separated by a comma (`R10,11`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    X,
    A(usize),
    R(usize, usize),
    U(usize, Sign),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Label::X => f.write_str("X"),
            Label::A(k) => write!(f, "A{k}"),
            Label::R(i, j) if i < 10 && j < 10 => write!(f, "R{i}{j}"),
            Label::R(i, j) => write!(f, "R{i},{j}"),
            Label::U(i, s) => write!(f, "U{i}{s}"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad generator label `{s}`"));
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        if s == "X" {
            return Ok(Label::X);
        }
        if let Some(rest) = s.strip_prefix('A') {
            return Ok(Label::A(num(rest)?));
        }
        if let Some(rest) = s.strip_prefix('R') {
            if let Some((a, b)) = rest.split_once(',') {
                return Ok(Label::R(num(a)?, num(b)?));
            }
            if rest.len() == 2 {
                return Ok(Label::R(num(&rest[..1])?, num(&rest[1..])?));
            }
            return Err(bad());
        }
        if let Some(rest) = s.strip_prefix('U') {
            let (idx, sign) = rest.split_at(rest.len().saturating_sub(1));
            return Ok(Label::U(num(idx)?, sign.parse().map_err(|_| bad())?));
        }
        Err(bad())
    }
}

/// An element of `so(1,n+1)`: `YᵀJ + JY = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraElement {
    matrix: DMatrix<f64>,
    label: Option<Label>,
}

impl LieAlgebraElement {
    /// Wraps a matrix after checking the infinitesimal isometry condition.
    pub fn new(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        let size = matrix.nrows();
        if size < 3 || matrix.ncols() != size {
            return Err(Error::DimensionMismatch {
                expected: size.max(3),
                found: matrix.ncols(),
            });
        }
        let el = Self {
            matrix,
            label: None,
        };
        let r = el.isometry_residual();
        if r > tol {
            return Err(Error::InvalidParameter(format!(
                "not an infinitesimal isometry (residual {r:e})"
            )));
        }
        Ok(el)
    }

    pub(crate) fn from_parts(matrix: DMatrix<f64>, label: Option<Label>) -> Self {
        Self { matrix, label }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn label(&self) -> Option<Label> {
        self.label
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows() - 2
    }

    /// Max-norm of `YᵀJ + JY`.
    pub fn isometry_residual(&self) -> f64 {
        let j = minkowski_j(self.matrix.nrows());
        let r = self.matrix.transpose() * &j + &j * &self.matrix;
        r.amax()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_parts(&self.matrix * s, None)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self::from_parts(&self.matrix + &other.matrix, None))
    }

    /// Linear combination `Σ cᵢ Yᵢ`.
    pub fn combination(terms: &[(f64, &LieAlgebraElement)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty combination".into()))?;
        let mut m = DMatrix::zeros(first.1.matrix.nrows(), first.1.matrix.ncols());
        for (c, y) in terms {
            same_dim(first.1, y)?;
            m += &y.matrix * *c;
        }
        Ok(Self::from_parts(m, None))
    }
}

fn same_dim(a: &LieAlgebraElement, b: &LieAlgebraElement) -> Result<()> {
    if a.matrix.nrows() != b.matrix.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.matrix.nrows(),
            found: b.matrix.nrows(),
        });
    }
    Ok(())
}

pub(crate) fn minkowski_j(size: usize) -> DMatrix<f64> {
    let mut j = DMatrix::identity(size, size);
    j[(0, 0)] = -1.0;
    j
}

/// Integer entries of a frame generator as `(row, col, value)` triples.
pub(crate) fn generator_entries(label: Label, n: usize) -> Result<Vec<(usize, usize, i64)>> {
    check_dim(n)?;
    let out_of_range = || Error::IndexOutOfRange(format!("{label} for n={n}"));
    Ok(match label {
        Label::X => vec![(0, 1, 1), (1, 0, 1)],
        Label::A(k) => {
            if !(2..=n + 1).contains(&k) {
                return Err(out_of_range());
            }
            vec![(0, k, 1), (k, 0, 1)]
        }
        Label::R(i, j) => {
            if !(1 <= i && i < j && j <= n + 1) {
                return Err(out_of_range());
            }
            vec![(i, j, 1), (j, i, -1)]
        }
        Label::U(i, sign) => {
            if !(1..=n).contains(&i) {
                return Err(out_of_range());
            }
            // U_i^± = −A_{i+1} ∓ R_{1,i+1}
            let s = match sign {
                Sign::Plus => -1,
                Sign::Minus => 1,
            };
            vec![
                (0, i + 1, -1),
                (i + 1, 0, -1),
                (1, i + 1, s),
                (i + 1, 1, -s),
            ]
        }
    })
}

/// A labelled frame generator.
///
/// Index conventions: `A_k` for `2 ≤ k ≤ n+1`; `R_{i,j}` takes matrix
/// indices `1 ≤ i < j ≤ n+1` (the frame proper uses `i ≥ 2`, while `R_{1,k}`
/// appears inside `U`); `U_i^±` for `1 ≤ i ≤ n`. Unused indices are ignored.
pub fn generator(kind: GeneratorKind, i: usize, j: usize, n: usize) -> Result<LieAlgebraElement> {
    let label = match kind {
        GeneratorKind::X => Label::X,
        GeneratorKind::A => Label::A(i),
        GeneratorKind::R => Label::R(i, j),
        GeneratorKind::Uplus => Label::U(i, Sign::Plus),
        GeneratorKind::Uminus => Label::U(i, Sign::Minus),
    };
    labelled(label, n)
}

/// The generator with a given label.
pub fn labelled(label: Label, n: usize) -> Result<LieAlgebraElement> {
    let size = n + 2;
    let mut m = DMatrix::zeros(size, size);
    for (r, c, v) in generator_entries(label, n)? {
        m[(r, c)] = v as f64;
    }
    Ok(LieAlgebraElement::from_parts(m, Some(label)))
}

/// Frame basis of `so(1,n+1)`: `X`, `U_i^±`, and `R_{i+1,j+1}` for `1 ≤ i < j ≤ n`.
pub fn frame(n: usize) -> Result<Vec<LieAlgebraElement>> {
    frame_labels(n)?
        .into_iter()
        .map(|l| labelled(l, n))
        .collect()
}

pub(crate) fn frame_labels(n: usize) -> Result<Vec<Label>> {
    check_dim(n)?;
    let mut labels = vec![Label::X];
    for i in 1..=n {
        labels.push(Label::U(i, Sign::Plus));
        labels.push(Label::U(i, Sign::Minus));
    }
    for i in 2..=n + 1 {
        for j in i + 1..=n + 1 {
            labels.push(Label::R(i, j));
        }
    }
    Ok(labels)
}

/// The commutator `YZ − ZY`.
pub fn bracket(y: &LieAlgebraElement, z: &LieAlgebraElement) -> Result<LieAlgebraElement> {
    same_dim(y, z)?;
    Ok(LieAlgebraElement::from_parts(
        &y.matrix * &z.matrix - &z.matrix * &y.matrix,
        None,
    ))
}
