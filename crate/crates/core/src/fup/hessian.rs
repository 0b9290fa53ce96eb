use nalgebra::DMatrix;

use crate::{Error, Result};

/// The linear phase `−2π⟨y, y′⟩`.
pub fn linear_phase(y: &[f64], yp: &[f64]) -> f64 {
    -std::f64::consts::TAU * y.iter().zip(yp).map(|(a, b)| a * b).sum::<f64>()
}

/// The log phase `2w ln|y − y′| − w ln 4`.
pub fn log_phase(w: f64) -> impl Fn(&[f64], &[f64]) -> f64 {
    move |y, yp| {
        let d = y
            .iter()
            .zip(yp)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        2.0 * w * d.ln() - w * 4f64.ln()
    }
}

/// Central-difference mixed Hessian `∂²Φ/∂y_i∂y′_j` in ambient coordinates.
pub fn mixed_hessian(
    phi: &dyn Fn(&[f64], &[f64]) -> f64,
    y: &[f64],
    yp: &[f64],
    step: f64,
) -> Result<DMatrix<f64>> {
    if y.len() != yp.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: yp.len(),
        });
    }
    if y == yp {
        return Err(Error::Degenerate("y = y′".into()));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("fd step {step}")));
    }
    let m = y.len();
    let mut h = DMatrix::zeros(m, m);
    let (mut a, mut b) = (y.to_vec(), yp.to_vec());
    for i in 0..m {
        for j in 0..m {
            let mut acc = 0.0;
            for (si, sj, sign) in [
                (1.0, 1.0, 1.0),
                (1.0, -1.0, -1.0),
                (-1.0, 1.0, -1.0),
                (-1.0, -1.0, 1.0),
            ] {
                a[i] = y[i] + si * step;
                b[j] = yp[j] + sj * step;
                acc += sign * phi(&a, &b);
            }
            a[i] = y[i];
            b[j] = yp[j];
            h[(i, j)] = acc / (4.0 * step * step);
        }
    }
    Ok(h)
}

pub fn mixed_hessian_det(
    phi: &dyn Fn(&[f64], &[f64]) -> f64,
    y: &[f64],
    yp: &[f64],
    step: f64,
) -> Result<f64> {
    Ok(mixed_hessian(phi, y, yp, step)?.determinant())
}

/// `(4w|v|^{−4})^m · det(vvᵀ − ½|v|²I)` with `v = y − y′`, evaluated directly.
pub fn log_phase_hessian_formula(w: f64, y: &[f64], yp: &[f64]) -> f64 {
    let m = y.len();
    let v: Vec<f64> = y.iter().zip(yp).map(|(a, b)| a - b).collect();
    let r2: f64 = v.iter().map(|a| a * a).sum();
    let a = DMatrix::from_fn(m, m, |i, j| {
        v[i] * v[j] - if i == j { 0.5 * r2 } else { 0.0 }
    });
    (4.0 * w / (r2 * r2)).powi(m as i32) * a.determinant()
}

/// `det(vvᵀ + λI)` computed directly and by the matrix determinant lemma
/// `(1 + vᵀ(λI)^{−1}v)·λ^m`.
pub fn determinant_lemma(v: &[f64], lambda: f64) -> (f64, f64) {
    let m = v.len();
    let direct = DMatrix::from_fn(m, m, |i, j| v[i] * v[j] + if i == j { lambda } else { 0.0 })
        .determinant();
    let r2: f64 = v.iter().map(|a| a * a).sum();
    (direct, (1.0 + r2 / lambda) * lambda.powi(m as i32))
}
