//! The commutator table of the frame, checked in exact integer arithmetic
//! and in floating point.
//!
//! Frame generators have entries in `{0, ±1}` and every bracket in the table
//! has entries in `{0, ±1, ±2}`, so integer arithmetic is exact.

use std::collections::HashMap;

use nalgebra::DMatrix;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::algebra::{frame_labels, generator_entries};
use super::{
    exp_flow, exp_general, geodesic_flow_unchecked, labelled, pi_k0, random_group_element, Label,
};
use crate::{Result, Sign};

#[derive(Debug, Clone, PartialEq, Eq)]
struct IntMat {
    size: usize,
    data: Vec<i64>,
}

impl IntMat {
    fn zeros(size: usize) -> Self {
        Self {
            size,
            data: vec![0; size * size],
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let s = self.size;
        let mut out = Self::zeros(s);
        for i in 0..s {
            for k in 0..s {
                let a = self.data[i * s + k];
                if a == 0 {
                    continue;
                }
                for j in 0..s {
                    out.data[i * s + j] += a * other.data[k * s + j];
                }
            }
        }
        out
    }

    fn axpy(&mut self, c: i64, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    fn bracket(&self, other: &Self) -> Self {
        let mut out = self.mul(other);
        out.axpy(-1, &other.mul(self));
        out
    }

    fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.size, self.size, |i, j| {
            self.data[i * self.size + j] as f64
        })
    }

    fn max_abs(&self) -> i64 {
        self.data.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

/// Outcome of one relation of the commutator table.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationCheck {
    pub name: String,
    /// Max-norm residual in exact integer arithmetic.
    pub exact_residual: i64,
    /// Max-norm residual in floating point.
    pub float_residual: f64,
}

impl RelationCheck {
    pub fn holds(&self, float_tol: f64) -> bool {
        self.exact_residual == 0 && self.float_residual <= float_tol
    }
}

struct Frame {
    size: usize,
    mats: HashMap<Label, IntMat>,
}

impl Frame {
    fn new(n: usize, flip: Option<Label>) -> Result<Self> {
        let size = n + 2;
        let mut mats = HashMap::new();
        let mut labels = frame_labels(n)?;
        for i in 2..=n + 1 {
            labels.push(Label::A(i));
        }
        for j in 2..=n + 1 {
            labels.push(Label::R(1, j));
        }
        for label in labels {
            let mut m = IntMat::zeros(size);
            let sign = if flip == Some(label) { -1 } else { 1 };
            for (r, c, v) in generator_entries(label, n)? {
                m.data[r * size + c] = sign * v;
            }
            mats.insert(label, m);
        }
        Ok(Self { size, mats })
    }

    /// `R_{a,b}` with the convention `R_{a,b} = −R_{b,a}`.
    fn r(&self, a: usize, b: usize) -> (i64, &IntMat) {
        if a < b {
            (1, &self.mats[&Label::R(a, b)])
        } else {
            (-1, &self.mats[&Label::R(b, a)])
        }
    }

    fn eval(&self, terms: &[(i64, &IntMat)]) -> IntMat {
        let mut out = IntMat::zeros(self.size);
        for (c, m) in terms {
            out.axpy(*c, m);
        }
        out
    }
}

fn record(out: &mut Vec<RelationCheck>, name: String, lhs: (&IntMat, &IntMat), rhs: IntMat) {
    let exact = lhs.0.bracket(lhs.1);
    let mut diff = exact.clone();
    diff.axpy(-1, &rhs);
    let (a, b) = (lhs.0.to_f64(), lhs.1.to_f64());
    let float = &a * &b - &b * &a - rhs.to_f64();
    out.push(RelationCheck {
        name,
        exact_residual: diff.max_abs(),
        float_residual: float.amax(),
    });
}

/// Checks every relation of the commutator table for the frame of
/// `so(1,n+1)`. `flip` negates one generator as a negative control.
pub fn verify_commutator_table(n: usize, flip: Option<Label>) -> Result<Vec<RelationCheck>> {
    let f = Frame::new(n, flip)?;
    let x = &f.mats[&Label::X];
    let u = |i: usize, s: Sign| &f.mats[&Label::U(i, s)];
    let mut out = Vec::new();
    for i in 1..=n {
        for s in [Sign::Plus, Sign::Minus] {
            let c = if s == Sign::Plus { 1 } else { -1 };
            record(
                &mut out,
                format!("[X,U{i}{s}] = {s}U{i}{s}"),
                (x, u(i, s)),
                f.eval(&[(c, u(i, s))]),
            );
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            for s in [Sign::Plus, Sign::Minus] {
                if i < j {
                    record(
                        &mut out,
                        format!("[U{i}{s},U{j}{s}] = 0"),
                        (u(i, s), u(j, s)),
                        IntMat::zeros(f.size),
                    );
                }
                if i == j && s == Sign::Plus {
                    record(
                        &mut out,
                        format!("[U{i}+,U{i}-] = 2X"),
                        (u(i, Sign::Plus), u(i, Sign::Minus)),
                        f.eval(&[(2, x)]),
                    );
                }
                if i != j {
                    let (c, r) = f.r(i + 1, j + 1);
                    record(
                        &mut out,
                        format!("[U{i}{s},U{j}{}] = 2R{},{}", s.flip(), i + 1, j + 1),
                        (u(i, s), u(j, s.flip())),
                        f.eval(&[(2 * c, r)]),
                    );
                }
            }
        }
    }
    for i in 1..=n {
        for j in i + 1..=n {
            let r = &f.mats[&Label::R(i + 1, j + 1)];
            record(
                &mut out,
                format!("[R{},{},X] = 0", i + 1, j + 1),
                (r, x),
                IntMat::zeros(f.size),
            );
            for k in 1..=n {
                for s in [Sign::Plus, Sign::Minus] {
                    let mut terms = Vec::new();
                    if j == k {
                        terms.push((1, u(i, s)));
                    }
                    if i == k {
                        terms.push((-1, u(j, s)));
                    }
                    record(
                        &mut out,
                        format!(
                            "[R{},{},U{k}{s}] = δ{j}{k}U{i}{s} - δ{i}{k}U{j}{s}",
                            i + 1,
                            j + 1
                        ),
                        (r, u(k, s)),
                        f.eval(&terms),
                    );
                }
            }
        }
    }
    Ok(out)
}

fn relative_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1.0)
}

/// Largest relative gap between the closed-form geodesic flow of `π(g)` and
/// `π(g·exp(tX))` by the general matrix exponential, over random frames and
/// `t ∈ [−5, 5]`.
pub fn flow_compatibility(n: usize, samples: usize, seed: u64) -> Result<f64> {
    let x = labelled(Label::X, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let g = random_group_element(n, &mut rng)?;
        let t = rng.random_range(-5.0..=5.0);
        let (x0, xi0) = pi_k0(&g);
        let (x1, xi1) = geodesic_flow_unchecked(&x0, &xi0, t);
        let (x2, xi2) = pi_k0(&g.mul(&exp_general(&x, t)?));
        let scale = x2.coords().amax().max(xi2.coords().amax()).max(1.0);
        worst = worst.max(x1.max_abs_diff(&x2).max(xi1.max_abs_diff(&xi2)) / scale);
    }
    Ok(worst)
}

/// Largest relative gap in `g·e^{sU}·e^{−tX} = g·e^{−tX}·e^{s e^{±t} U}` over
/// random frames, every `U_i^±`, `|t| ≤ 3` and `|s| ≤ 1`.
pub fn horocyclic_commutation(n: usize, samples: usize, seed: u64) -> Result<f64> {
    let x = labelled(Label::X, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let g = random_group_element(n, &mut rng)?;
        let t = rng.random_range(-3.0..=3.0);
        let s = rng.random_range(-1.0..=1.0);
        let back = exp_flow(&x, -t)?;
        for i in 1..=n {
            for sign in [Sign::Plus, Sign::Minus] {
                let u = labelled(Label::U(i, sign), n)?;
                let lhs = g.mul(&exp_flow(&u, s)?).mul(&back);
                let rhs = g
                    .mul(&back)
                    .mul(&exp_flow(&u, s * (sign.value() * t).exp())?);
                worst = worst.max(relative_gap(lhs.matrix(), rhs.matrix()));
            }
        }
    }
    Ok(worst)
}
