use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest number of grid cells a [`BoxSet`] may hold.
pub const MAX_CELLS: usize = 1 << 27;

/// Mid-`M`-adic Cantor construction: base `M`, kept digits per axis, depth `K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CantorSpec {
    pub base: usize,
    /// Either one digit set shared by all axes or one set per axis.
    pub kept_digits: KeptDigits,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KeptDigits {
    Shared(Vec<usize>),
    PerAxis(Vec<Vec<usize>>),
}

impl CantorSpec {
    pub fn new(base: usize, kept: &[usize], depth: u32) -> Self {
        Self {
            base,
            kept_digits: KeptDigits::Shared(kept.to_vec()),
            depth,
        }
    }

    /// The mid-third set `M = 3`, `D = {0, 2}`.
    pub fn middle_third(depth: u32) -> Self {
        Self::new(3, &[0, 2], depth)
    }

    fn digits_for(&self, n: usize) -> Result<Vec<Vec<usize>>> {
        let sets = match &self.kept_digits {
            KeptDigits::Shared(d) => vec![d.clone(); n],
            KeptDigits::PerAxis(d) => {
                if d.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: d.len(),
                    });
                }
                d.clone()
            }
        };
        if self.base < 3 {
            return Err(Error::InvalidParameter(format!("base {} < 3", self.base)));
        }
        if self.depth == 0 {
            return Err(Error::InvalidParameter("depth must be at least 1".into()));
        }
        for d in &sets {
            let mut sorted = d.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != d.len() || d.iter().any(|&v| v >= self.base) {
                return Err(Error::InvalidParameter(format!("bad digit set {d:?}")));
            }
            if d.is_empty() || d.len() >= self.base {
                return Err(Error::InvalidParameter(format!(
                    "digit set {d:?} must be a proper nonempty subset"
                )));
            }
        }
        Ok(sets)
    }

    /// Resolution `M^K`.
    pub fn resolution(&self) -> Result<usize> {
        (self.base as u128)
            .checked_pow(self.depth)
            .filter(|&m| m <= MAX_CELLS as u128)
            .map(|m| m as usize)
            .ok_or_else(|| Error::Resolution(format!("{}^{} overflows", self.base, self.depth)))
    }
}

/// How a [`BoxSet`] was produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Cantor(CantorSpec),
    Boxes(Vec<(Vec<f64>, Vec<f64>)>),
    Derived(String),
}

/// A union of closed grid cells of pitch `δ = 1/m` in `[0,1]^n`.
///
/// Cells are stored row-major with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    n: usize,
    m: usize,
    mask: Vec<bool>,
    provenance: Option<Provenance>,
}

fn checked_cells(n: usize, m: usize) -> Result<usize> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    let mut total: usize = 1;
    for _ in 0..n {
        total = total
            .checked_mul(m)
            .filter(|&t| t <= MAX_CELLS)
            .ok_or_else(|| Error::Resolution(format!("{m}^{n} cells exceed the limit")))?;
    }
    Ok(total)
}

impl BoxSet {
    pub fn empty(n: usize, m: usize) -> Result<Self> {
        Ok(Self {
            n,
            m,
            mask: vec![false; checked_cells(n, m)?],
            provenance: None,
        })
    }

    pub fn full(n: usize, m: usize) -> Result<Self> {
        let mut s = Self::empty(n, m)?;
        s.mask.iter_mut().for_each(|c| *c = true);
        Ok(s)
    }

    pub fn from_mask(n: usize, m: usize, mask: Vec<bool>) -> Result<Self> {
        let total = checked_cells(n, m)?;
        if mask.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: mask.len(),
            });
        }
        Ok(Self {
            n,
            m,
            mask,
            provenance: None,
        })
    }

    /// Rasterises a union of closed boxes `[lo, hi]` at resolution `1/m`.
    ///
    /// A cell is occupied when it overlaps a box with positive volume, or
    /// contains a degenerate box.
    pub fn from_boxes(n: usize, m: usize, boxes: &[(Vec<f64>, Vec<f64>)]) -> Result<Self> {
        let mut s = Self::empty(n, m)?;
        let delta = 1.0 / m as f64;
        for (lo, hi) in boxes {
            if lo.len() != n || hi.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: lo.len().min(hi.len()),
                });
            }
            let mut ranges = Vec::with_capacity(n);
            for k in 0..n {
                let (a, b) = (lo[k].max(0.0), hi[k].min(1.0));
                if !(a <= b) {
                    ranges.clear();
                    break;
                }
                let eps = 1e-12;
                let first = if a == b {
                    ((a / delta).floor() as usize).min(m - 1)
                } else {
                    ((a / delta + eps).floor() as usize).min(m - 1)
                };
                let last = if a == b {
                    first
                } else {
                    (((b / delta - eps).ceil() as usize).max(1) - 1).min(m - 1)
                };
                ranges.push(first..=last);
            }
            if ranges.len() != n {
                continue;
            }
            s.for_each_in_ranges(&ranges, |s, idx| s.mask[idx] = true);
        }
        s.provenance = Some(Provenance::Boxes(boxes.to_vec()));
        Ok(s)
    }

    fn for_each_in_ranges<F: FnMut(&mut Self, usize)>(
        &mut self,
        ranges: &[std::ops::RangeInclusive<usize>],
        mut f: F,
    ) {
        let mut cur: Vec<usize> = ranges.iter().map(|r| *r.start()).collect();
        loop {
            let idx = self.index(&cur);
            f(self, idx);
            let mut k = self.n;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if cur[k] < *ranges[k].end() {
                    cur[k] += 1;
                    break;
                }
                cur[k] = *ranges[k].start();
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Cells per axis.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Grid pitch `δ = 1/m`.
    pub fn delta(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = Some(p);
        self
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    /// Number of occupied cells.
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|c| **c).count()
    }

    pub fn is_void(&self) -> bool {
        !self.mask.iter().any(|c| *c)
    }

    pub fn index(&self, cell: &[usize]) -> usize {
        cell.iter().fold(0, |acc, &c| acc * self.m + c)
    }

    pub fn cell(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for k in (0..self.n).rev() {
            out[k] = idx % self.m;
            idx /= self.m;
        }
        out
    }

    pub fn contains_cell(&self, cell: &[usize]) -> bool {
        self.mask[self.index(cell)]
    }

    pub fn set_cell(&mut self, cell: &[usize], value: bool) {
        let i = self.index(cell);
        self.mask[i] = value;
    }

    pub fn cell_center(&self, idx: usize) -> Vec<f64> {
        self.cell(idx)
            .into_iter()
            .map(|c| (c as f64 + 0.5) * self.delta())
            .collect()
    }

    /// Indices of occupied cells.
    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, c)| **c)
            .map(|(i, _)| i)
    }

    /// Cell containing `x` (clamped to the grid), or `None` outside `[0,1]^n`.
    pub fn cell_of(&self, x: &[f64]) -> Option<Vec<usize>> {
        let mut out = Vec::with_capacity(self.n);
        for &v in x {
            if !(0.0..=1.0).contains(&v) {
                return None;
            }
            out.push(((v * self.m as f64).floor() as usize).min(self.m - 1));
        }
        Some(out)
    }

    pub fn is_subset_of(&self, other: &BoxSet) -> bool {
        self.n == other.n
            && self.m == other.m
            && self.mask.iter().zip(&other.mask).all(|(a, b)| !*a || *b)
    }

    pub fn union(&self, other: &BoxSet) -> Result<BoxSet> {
        if self.n != other.n || self.m != other.m {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        let mask = self
            .mask
            .iter()
            .zip(&other.mask)
            .map(|(a, b)| *a || *b)
            .collect();
        Ok(BoxSet {
            n: self.n,
            m: self.m,
            mask,
            provenance: Some(Provenance::Derived("union".into())),
        })
    }

    /// Exact Euclidean distance from `x` to the union of occupied cells, by
    /// brute force over all cells.
    pub fn distance_brute(&self, x: &[f64]) -> f64 {
        let delta = self.delta();
        self.occupied()
            .map(|idx| {
                let cell = self.cell(idx);
                cell.iter()
                    .zip(x)
                    .map(|(&c, &v)| {
                        let lo = c as f64 * delta;
                        let hi = lo + delta;
                        let d = if v < lo {
                            lo - v
                        } else if v > hi {
                            v - hi
                        } else {
                            0.0
                        };
                        d * d
                    })
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// Re-rasterises at resolution `1/m2`: a target cell is occupied when it
    /// overlaps an occupied source cell with positive volume.
    pub fn resample(&self, m2: usize) -> Result<BoxSet> {
        if m2 == self.m {
            return Ok(self.clone());
        }
        let boxes: Vec<(Vec<f64>, Vec<f64>)> = self
            .occupied()
            .map(|idx| {
                let c = self.cell(idx);
                let lo: Vec<f64> = c.iter().map(|&v| v as f64 * self.delta()).collect();
                let hi: Vec<f64> = lo.iter().map(|v| v + self.delta()).collect();
                (lo, hi)
            })
            .collect();
        let mut out = BoxSet::from_boxes(self.n, m2, &boxes)?;
        out.provenance = Some(Provenance::Derived(format!("resampled to 1/{m2}")));
        Ok(out)
    }
}

/// Generates the depth-`K` Cantor iterate in dimension `n`.
pub fn cantor_generate(spec: &CantorSpec, n: usize) -> Result<BoxSet> {
    let digits = spec.digits_for(n)?;
    let m = spec.resolution()?;
    let mut set = BoxSet::empty(n, m)?;
    let allowed: Vec<Vec<bool>> = digits
        .iter()
        .map(|d| {
            (0..m)
                .map(|mut c| {
                    (0..spec.depth).all(|_| {
                        let ok = d.contains(&(c % spec.base));
                        c /= spec.base;
                        ok
                    })
                })
                .collect()
        })
        .collect();
    for idx in 0..set.len() {
        let cell = set.cell(idx);
        set.mask[idx] = cell.iter().enumerate().all(|(k, &c)| allowed[k][c]);
    }
    set.provenance = Some(Provenance::Cantor(spec.clone()));
    Ok(set)
}

/// A set description as read from a set-spec file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetSpec {
    Cantor {
        cantor: CantorBlock,
    },
    Boxes {
        boxes: Vec<[Vec<f64>; 2]>,
        resolution: usize,
        #[serde(default)]
        dims: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorBlock {
    pub base: usize,
    pub kept_digits: KeptDigits,
    pub depth: u32,
    pub dims: usize,
}

impl SetSpec {
    pub fn build(&self) -> Result<BoxSet> {
        match self {
            SetSpec::Cantor { cantor } => cantor_generate(
                &CantorSpec {
                    base: cantor.base,
                    kept_digits: cantor.kept_digits.clone(),
                    depth: cantor.depth,
                },
                cantor.dims,
            ),
            SetSpec::Boxes {
                boxes,
                resolution,
                dims,
            } => {
                let n = match (dims, boxes.first()) {
                    (Some(d), _) => *d,
                    (None, Some(b)) => b[0].len(),
                    (None, None) => {
                        return Err(Error::Parse(
                            "an empty box list needs an explicit `dims`".into(),
                        ))
                    }
                };
                let pairs: Vec<(Vec<f64>, Vec<f64>)> =
                    boxes.iter().map(|b| (b[0].clone(), b[1].clone())).collect();
                BoxSet::from_boxes(n, *resolution, &pairs)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_depth_one() {
        let s = cantor_generate(&CantorSpec::middle_third(1), 1).unwrap();
        assert_eq!(s.mask(), &[true, false, true]);
    }

    #[test]
    fn cantor_depth_two() {
        let s = cantor_generate(&CantorSpec::middle_third(2), 1).unwrap();
        assert_eq!(s.count(), 4);
        assert_eq!(
            s.mask(),
            &[true, false, true, false, false, false, true, false, true]
        );
    }

    #[test]
    fn cantor_rejects_full_or_empty_digits() {
        assert!(cantor_generate(&CantorSpec::new(3, &[0, 1, 2], 2), 1).is_err());
        assert!(cantor_generate(&CantorSpec::new(3, &[], 2), 1).is_err());
        assert!(cantor_generate(&CantorSpec::new(3, &[0, 3], 2), 1).is_err());
        assert!(cantor_generate(&CantorSpec::new(3, &[0, 2], 40), 1).is_err());
    }

    #[test]
    fn cantor_product_in_two_dims() {
        let spec = CantorSpec {
            base: 4,
            kept_digits: KeptDigits::PerAxis(vec![vec![0, 3], vec![1]]),
            depth: 2,
        };
        let s = cantor_generate(&spec, 2).unwrap();
        assert_eq!(s.count(), 4);
    }

    #[test]
    fn boxes_rasterise() {
        let s = BoxSet::from_boxes(1, 9, &[(vec![0.0], vec![1.0 / 3.0])]).unwrap();
        assert_eq!(s.count(), 3);
        let p = BoxSet::from_boxes(2, 4, &[(vec![0.5, 0.5], vec![0.5, 0.5])]).unwrap();
        assert_eq!(p.count(), 1);
        let e = BoxSet::from_boxes(2, 4, &[]).unwrap();
        assert!(e.is_void());
    }

    #[test]
    fn brute_distance() {
        let s = cantor_generate(&CantorSpec::middle_third(1), 1).unwrap();
        assert!((s.distance_brute(&[0.5]) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(s.distance_brute(&[0.2]), 0.0);
        assert_eq!(s.distance_brute(&[1.5]), 0.5);
    }

    #[test]
    fn resample_refines_exactly() {
        let s = cantor_generate(&CantorSpec::middle_third(2), 1).unwrap();
        let fine = s.resample(27).unwrap();
        assert_eq!(fine.count(), 12);
        assert_eq!(fine.resample(9).unwrap().mask(), s.mask());
    }
}
