//! Exact Euclidean distance transform between cell centres and separable
//! sliding-window maxima.

use std::collections::VecDeque;

use super::BoxSet;

/// One-dimensional lower envelope of parabolas (Felzenszwalb–Huttenlocher).
///
/// `f` holds squared costs (`∞` for absent sites); the result is
/// `min_p (q − p)² + f[p]`.
pub fn edt_1d(f: &[f64]) -> Vec<f64> {
    let len = f.len();
    let sites: Vec<usize> = (0..len).filter(|&p| f[p].is_finite()).collect();
    if sites.is_empty() {
        return vec![f64::INFINITY; len];
    }
    let mut v: Vec<usize> = Vec::with_capacity(sites.len());
    let mut z: Vec<f64> = Vec::with_capacity(sites.len() + 1);
    let inter = |p: usize, q: usize| -> f64 {
        let (pf, qf) = (p as f64, q as f64);
        ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * (qf - pf))
    };
    v.push(sites[0]);
    z.push(f64::NEG_INFINITY);
    for &q in &sites[1..] {
        let mut s = inter(*v.last().unwrap(), q);
        while s <= *z.last().unwrap() {
            v.pop();
            z.pop();
            s = inter(*v.last().unwrap(), q);
        }
        v.push(q);
        z.push(s);
    }
    z.push(f64::INFINITY);
    let mut out = vec![0.0; len];
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
    out
}

/// Applies `op` to every line of an `n`-dimensional row-major array along `axis`.
fn for_each_line<F>(data: &mut [f64], dims: &[usize], axis: usize, mut op: F)
where
    F: FnMut(&mut [f64]),
{
    let len = dims[axis];
    let stride: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let mut line = vec![0.0; len];
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * len * stride + inner;
            for (i, l) in line.iter_mut().enumerate() {
                *l = data[base + i * stride];
            }
            op(&mut line);
            for (i, l) in line.iter().enumerate() {
                data[base + i * stride] = *l;
            }
        }
    }
}

/// Distances from padded cell centres to the nearest occupied cell centre.
#[derive(Debug, Clone)]
pub struct DistanceField {
    n: usize,
    side: usize,
    pad: usize,
    delta: f64,
    values: Vec<f64>,
}

impl DistanceField {
    /// Computes the field on the grid of `x` padded by `pad` cells per side.
    pub fn new(x: &BoxSet, pad: usize) -> Self {
        let n = x.n();
        let m = x.m();
        let side = m + 2 * pad;
        let dims = vec![side; n];
        let total: usize = dims.iter().product();
        let mut values = vec![f64::INFINITY; total];
        for idx in x.occupied() {
            let cell = x.cell(idx);
            let p = cell.iter().fold(0, |acc, &c| acc * side + c + pad);
            values[p] = 0.0;
        }
        for axis in 0..n {
            for_each_line(&mut values, &dims, axis, |line| {
                let out = edt_1d(line);
                line.copy_from_slice(&out);
            });
        }
        let delta = x.delta();
        values.iter_mut().for_each(|v| *v = v.sqrt() * delta);
        Self {
            n,
            side,
            pad,
            delta,
            values,
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.side; self.n]
    }

    /// Centre-to-centre distance at a padded cell index.
    pub fn at(&self, padded: &[usize]) -> f64 {
        self.values[padded.iter().fold(0, |acc, &c| acc * self.side + c)]
    }

    /// Padded cell containing the point `x`, if inside the padded grid.
    pub fn padded_cell(&self, x: &[f64]) -> Option<Vec<usize>> {
        let mut out = Vec::with_capacity(self.n);
        for &v in x {
            let q = (v / self.delta).floor() + self.pad as f64;
            if !(q >= 0.0 && q < self.side as f64) {
                return None;
            }
            out.push(q as usize);
        }
        Some(out)
    }

    /// Value at the padded cell containing `x`, if inside the padded grid.
    pub fn value_at(&self, x: &[f64]) -> Option<f64> {
        let mut idx = 0;
        for &v in x {
            let q = (v / self.delta).floor() + self.pad as f64;
            if !(q >= 0.0 && q < self.side as f64) {
                return None;
            }
            idx = idx * self.side + q as usize;
        }
        Some(self.values[idx])
    }

    /// Centre of a padded cell in ambient coordinates.
    pub fn center(&self, padded: &[usize]) -> Vec<f64> {
        padded
            .iter()
            .map(|&q| (q as f64 - self.pad as f64 + 0.5) * self.delta)
            .collect()
    }

    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for k in (0..self.n).rev() {
            out[k] = idx % self.side;
            idx /= self.side;
        }
        out
    }
}

/// Maxima over all axis-aligned windows of `window` cells per axis.
///
/// Returns the reduced array (each axis shrinks by `window − 1`) and its
/// dimensions, or `None` when the window does not fit.
pub fn sliding_max(
    values: &[f64],
    dims: &[usize],
    window: usize,
) -> Option<(Vec<f64>, Vec<usize>)> {
    if window == 0 || dims.iter().any(|&d| d < window) {
        return None;
    }
    let mut data = values.to_vec();
    let mut cur = dims.to_vec();
    for axis in 0..dims.len() {
        let len = cur[axis];
        let out_len = len - window + 1;
        let stride: usize = cur[axis + 1..].iter().product();
        let outer: usize = cur[..axis].iter().product();
        let mut next = vec![0.0; outer * out_len * stride];
        let mut dq: VecDeque<usize> = VecDeque::with_capacity(window);
        for o in 0..outer {
            for inner in 0..stride {
                let src = |i: usize| data[o * len * stride + i * stride + inner];
                dq.clear();
                for i in 0..len {
                    let v = src(i);
                    while let Some(&b) = dq.back() {
                        if src(b) <= v {
                            dq.pop_back();
                        } else {
                            break;
                        }
                    }
                    dq.push_back(i);
                    if dq[0] + window <= i {
                        dq.pop_front();
                    }
                    if i + 1 >= window {
                        next[o * out_len * stride + (i + 1 - window) * stride + inner] = src(dq[0]);
                    }
                }
            }
        }
        data = next;
        cur[axis] = out_len;
    }
    Some((data, cur))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::porosity::{cantor_generate, CantorSpec};
    use proptest::prelude::*;

    fn brute_1d(f: &[f64]) -> Vec<f64> {
        (0..f.len())
            .map(|q| {
                (0..f.len())
                    .map(|p| (q as f64 - p as f64).powi(2) + f[p])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn edt_line_examples() {
        let inf = f64::INFINITY;
        assert_eq!(edt_1d(&[inf, 0.0, inf, inf]), vec![1.0, 0.0, 1.0, 4.0]);
        assert!(edt_1d(&[inf, inf]).iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn field_matches_brute_force_in_two_dims() {
        let x = cantor_generate(&CantorSpec::middle_third(2), 2).unwrap();
        let f = DistanceField::new(&x, 3);
        for idx in 0..f.values().len() {
            let q = f.unravel(idx);
            let c = f.center(&q);
            let brute = x
                .occupied()
                .map(|o| {
                    let oc = x.cell_center(o);
                    oc.iter()
                        .zip(&c)
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            assert!((brute - f.values()[idx]).abs() < 1e-12);
        }
    }

    #[test]
    fn sliding_max_small() {
        let v = [1.0, 3.0, 2.0, 0.0, 5.0];
        let (out, dims) = sliding_max(&v, &[5], 2).unwrap();
        assert_eq!(out, vec![3.0, 3.0, 2.0, 5.0]);
        assert_eq!(dims, vec![4]);
        assert!(sliding_max(&v, &[5], 6).is_none());
    }

    proptest! {
        #[test]
        fn edt_1d_matches_brute(bits in proptest::collection::vec(any::<bool>(), 1..40)) {
            let f: Vec<f64> = bits.iter().map(|b| if *b { 0.0 } else { f64::INFINITY }).collect();
            let a = edt_1d(&f);
            let b = brute_1d(&f);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x == y) || (x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn sliding_max_matches_brute(
            vals in proptest::collection::vec(-10.0f64..10.0, 36),
            w in 1usize..5,
        ) {
            let (out, dims) = sliding_max(&vals, &[6, 6], w).unwrap();
            for i in 0..dims[0] {
                for j in 0..dims[1] {
                    let mut best = f64::NEG_INFINITY;
                    for a in 0..w {
                        for b in 0..w {
                            best = best.max(vals[(i + a) * 6 + j + b]);
                        }
                    }
                    prop_assert_eq!(out[i * dims[1] + j], best);
                }
            }
        }
    }
}
