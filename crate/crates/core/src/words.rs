//! Words over `{1,2}`, the logarithmic time ladder and exact counting of
//! uncontrolled words.
//!
//! Counting paths use integers only: `α` is held as an exact rational and
//! binomial sums are evaluated in [`BigUint`].

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::{Error, Result};

/// Longest word that fits the packed representation.
pub const MAX_WORD_LEN: usize = 64;
/// Largest block length for which `𝒲(8T₀)` is enumerated.
pub const MAX_ENUM_T0: usize = 3;

/// A word `w₀ w₁ … w_{T−1}` over `{1,2}`; bit `k` is set when `w_k = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    bits: u64,
    len: u8,
}

impl Word {
    pub fn new(letters: &[u8]) -> Result<Self> {
        if letters.len() > MAX_WORD_LEN {
            return Err(Error::InvalidParameter(format!(
                "word of length {} exceeds {MAX_WORD_LEN}",
                letters.len()
            )));
        }
        let mut bits = 0u64;
        for (k, &l) in letters.iter().enumerate() {
            match l {
                1 => bits |= 1 << k,
                2 => {}
                other => {
                    return Err(Error::Parse(format!("letter {other} is not 1 or 2")));
                }
            }
        }
        Ok(Self {
            bits,
            len: letters.len() as u8,
        })
    }

    pub fn from_bits(bits: u64, len: usize) -> Result<Self> {
        if len > MAX_WORD_LEN || (len < 64 && bits >> len != 0) {
            return Err(Error::InvalidParameter(format!(
                "bits {bits:#x} do not fit a word of length {len}"
            )));
        }
        Ok(Self {
            bits,
            len: len as u8,
        })
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// The letter `w_k`, either 1 or 2.
    pub fn letter(&self, k: usize) -> u8 {
        assert!(
            k < self.len(),
            "letter {k} of a word of length {}",
            self.len
        );
        if self.bits >> k & 1 == 1 {
            1
        } else {
            2
        }
    }

    pub fn letters(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(|k| self.letter(k))
    }

    pub fn ones(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Block `b` of length `t0`.
    pub fn block(&self, b: usize, t0: usize) -> Word {
        assert!((b + 1) * t0 <= self.len());
        let mask = if t0 == 64 { u64::MAX } else { (1u64 << t0) - 1 };
        Word {
            bits: (self.bits >> (b * t0)) & mask,
            len: t0 as u8,
        }
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        let len = self.len() + other.len();
        if len > MAX_WORD_LEN {
            return Err(Error::InvalidParameter(format!(
                "concatenation of length {len}"
            )));
        }
        Ok(Word {
            bits: self.bits | other.bits << self.len(),
            len: len as u8,
        })
    }

    /// All `2^T` words of length `T`.
    pub fn all(len: usize) -> Result<impl Iterator<Item = Word>> {
        if len > 32 {
            return Err(Error::UnsupportedSize(len));
        }
        Ok((0..1u64 << len).map(move |bits| Word {
            bits,
            len: len as u8,
        }))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters: Vec<u8> = s
            .trim()
            .chars()
            .map(|c| match c {
                '1' => Ok(1),
                '2' => Ok(2),
                other => Err(Error::Parse(format!("letter {other:?} is not 1 or 2"))),
            })
            .collect::<Result<_>>()?;
        Word::new(&letters)
    }
}

/// Exact proportion of the letter 1.
pub fn ones_fraction(w: &Word) -> Result<BigRational> {
    if w.is_empty() {
        return Err(Error::InvalidParameter("empty word".into()));
    }
    Ok(BigRational::new(
        BigInt::from(w.ones()),
        BigInt::from(w.len()),
    ))
}

/// Parses `α` exactly from a decimal (`0.04`, `4e-2`) or a fraction (`1/25`).
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let num: BigInt = a.trim().parse().map_err(|_| bad())?;
        let den: BigInt = b.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part
            .chars()
            .chain(frac_part.chars())
            .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

/// The rational with the shortest decimal expansion that rounds to `x`.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::NonFinite(format!("{x}")));
    }
    parse_rational(&format!("{x:e}"))
}

fn check_alpha(alpha: &BigRational) -> Result<()> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if !alpha.is_positive() || alpha >= &half {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} outside (0, 1/2)"
        )));
    }
    Ok(())
}

/// `⌊αT₀⌋`, the largest number of ones an uncontrolled block may have.
pub fn max_uncontrolled_ones(t0: usize, alpha: &BigRational) -> usize {
    let prod = alpha * BigRational::from_integer(BigInt::from(t0));
    prod.floor().to_integer().to_usize().unwrap_or(0)
}

/// `T₀ = ⌈(ρ/4)·log(1/h)⌉` and `T₁ = 4T₀`, from `log(1/h)` directly.
///
/// Products within `1e-9` (relative) of an integer are taken to be that
/// integer, so that exact parameter choices are not pushed up by rounding.
pub fn t_ladder_log(log_inv_h: f64, rho: f64) -> Result<(usize, usize)> {
    if !(log_inv_h > 0.0 && log_inv_h.is_finite()) {
        return Err(Error::InvalidParameter(format!("log(1/h) = {log_inv_h}")));
    }
    if !(rho > 0.75 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rho = {rho} outside (3/4, 1)"
        )));
    }
    let x = rho / 4.0 * log_inv_h;
    let nearest = x.round();
    let t0 = if nearest >= 1.0 && (x - nearest).abs() <= 1e-9 * nearest {
        nearest
    } else {
        x.ceil()
    };
    let t0 = (t0 as usize).max(1);
    Ok((t0, 4 * t0))
}

pub fn t_ladder(h: f64, rho: f64) -> Result<(usize, usize)> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParameter(format!("h = {h} outside (0, 1)")));
    }
    t_ladder_log(-h.ln(), rho)
}

/// Parameters of the word decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderParams {
    pub log_inv_h: f64,
    pub rho: f64,
    pub alpha: BigRational,
    pub t0: usize,
    pub t1: usize,
}

impl LadderParams {
    pub fn new(h: f64, rho: f64, alpha: BigRational) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidParameter(format!("h = {h} outside (0, 1)")));
        }
        Self::from_log_inv_h(-h.ln(), rho, alpha)
    }

    pub fn from_log_inv_h(log_inv_h: f64, rho: f64, alpha: BigRational) -> Result<Self> {
        check_alpha(&alpha)?;
        let (t0, t1) = t_ladder_log(log_inv_h, rho)?;
        Ok(Self {
            log_inv_h,
            rho,
            alpha,
            t0,
            t1,
        })
    }

    pub fn h(&self) -> f64 {
        (-self.log_inv_h).exp()
    }
}

fn binomials(t0: usize) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(t0 + 1);
    let mut c = BigUint::one();
    for k in 0..=t0 {
        row.push(c.clone());
        c = c * BigUint::from(t0 - k) / BigUint::from(k + 1);
    }
    row
}

/// `#(𝒲(T₀) ∖ 𝒵) = Σ_{k ≤ αT₀} C(T₀, k)`, the words with `F(w) ≤ α`.
pub fn count_uncontrolled(t0: usize, alpha: &BigRational) -> Result<BigUint> {
    if t0 == 0 {
        return Err(Error::InvalidParameter("T0 must be positive".into()));
    }
    check_alpha(alpha)?;
    let kmax = max_uncontrolled_ones(t0, alpha).min(t0);
    let row = binomials(t0);
    Ok(row[..=kmax]
        .par_iter()
        .cloned()
        .reduce(BigUint::zero, |a, b| a + b))
}

/// `#𝒳 = #(𝒲(T₀) ∖ 𝒵)^8`.
pub fn count_x(params: &LadderParams) -> Result<BigUint> {
    Ok(num_traits::pow(
        count_uncontrolled(params.t0, &params.alpha)?,
        8,
    ))
}

/// True when a block has `F ≤ α`, i.e. lies outside `𝒵`.
pub fn is_uncontrolled(block: &Word, alpha: &BigRational) -> bool {
    let ones = BigInt::from(block.ones());
    let len = BigInt::from(block.len());
    // ones/len ≤ p/q  ⇔  ones·q ≤ p·len for q > 0.
    ones * alpha.denom() <= alpha.numer() * len
}

/// True when every one of the 8 blocks of length `T₀` is uncontrolled.
pub fn in_x(w: &Word, t0: usize, alpha: &BigRational) -> bool {
    (0..8).all(|b| is_uncontrolled(&w.block(b, t0), alpha))
}

fn check_enum(t0: usize) -> Result<()> {
    if t0 == 0 || t0 > MAX_ENUM_T0 {
        return Err(Error::UnsupportedSize(t0));
    }
    Ok(())
}

/// Partitions `𝒲(8T₀)` into `(𝒳, 𝒴)` by enumeration (`T₀ ≤ 2`, at most
/// `2^16` words).
pub fn split_xy(t0: usize, alpha: &BigRational) -> Result<(Vec<Word>, Vec<Word>)> {
    check_alpha(alpha)?;
    if t0 == 0 || t0 > 2 {
        return Err(Error::UnsupportedSize(t0));
    }
    Ok(Word::all(8 * t0)?.partition(|w| in_x(w, t0, alpha)))
}

/// `(#𝒳, #𝒴)` by streaming enumeration of `𝒲(8T₀)` (`T₀ ≤ 3`).
pub fn split_xy_counts(t0: usize, alpha: &BigRational) -> Result<(u64, u64)> {
    check_alpha(alpha)?;
    check_enum(t0)?;
    let kmax = max_uncontrolled_ones(t0, alpha) as u32;
    let mask = (1u64 << t0) - 1;
    let total = 1u64 << (8 * t0);
    let x = (0..total)
        .into_par_iter()
        .filter(|&bits| (0..8).all(|b| (bits >> (b * t0) & mask).count_ones() <= kmax))
        .count() as u64;
    Ok((x, total - x))
}

/// `#𝒳` from enumerating pairs of blocks: the count of uncontrolled
/// two-block words, raised to the fourth power.
pub fn count_x_meet_in_middle(t0: usize, alpha: &BigRational) -> Result<BigUint> {
    check_alpha(alpha)?;
    check_enum(t0)?;
    let pairs = Word::all(2 * t0)?
        .filter(|w| {
            is_uncontrolled(&w.block(0, t0), alpha) && is_uncontrolled(&w.block(1, t0), alpha)
        })
        .count();
    Ok(num_traits::pow(BigUint::from(pairs), 4))
}

/// Natural logarithm of a big integer (`−∞` for zero).
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return x.to_u64().map_or(f64::NAN, |v| (v as f64).ln());
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX);
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// One row of the counting-bound table.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub alpha: BigRational,
    pub rho: f64,
    pub log_inv_h: f64,
    pub t0: usize,
    pub count: BigUint,
    /// `log #𝒳 / log(1/h)`.
    pub ratio: f64,
    /// `log #𝒳 − 4√α·log(1/h)`.
    pub log_c: f64,
    /// `ratio ≤ 4√α + slack`.
    pub within: bool,
}

/// Evaluates `#𝒳` against `h^{−4√α}` along a ladder of `log(1/h)` values.
pub fn bound_check(
    rho: f64,
    alpha: &BigRational,
    log_inv_h: &[f64],
    slack: f64,
) -> Result<Vec<BoundRow>> {
    let exponent = 4.0 * alpha.to_f64().unwrap_or(f64::NAN).sqrt();
    log_inv_h
        .iter()
        .map(|&l| {
            let p = LadderParams::from_log_inv_h(l, rho, alpha.clone())?;
            let count = count_x(&p)?;
            let lc = big_ln(&count);
            let ratio = lc / l;
            Ok(BoundRow {
                alpha: alpha.clone(),
                rho,
                log_inv_h: l,
                t0: p.t0,
                ratio,
                log_c: lc - exponent * l,
                within: ratio <= exponent + slack,
                count,
            })
        })
        .collect()
}
