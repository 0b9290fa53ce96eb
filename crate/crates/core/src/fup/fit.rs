use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Least-squares power law `norm ≈ C h^β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub samples: Vec<(f64, f64)>,
    pub beta: f64,
    /// `ln C`.
    pub intercept: f64,
    /// Max absolute deviation in log space.
    pub residual: f64,
}

impl DecayFit {
    /// `ln h_max − ln h_min` covered by the samples.
    pub fn log_span(&self) -> f64 {
        let ls = self.samples.iter().map(|s| s.0.ln());
        let (lo, hi) = ls.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        hi - lo
    }

    pub fn predict(&self, h: f64) -> f64 {
        (self.intercept + self.beta * h.ln()).exp()
    }
}

/// Ordinary least squares of `ln norm` against `ln h`.
pub fn beta_fit(samples: &[(f64, f64)]) -> Result<DecayFit> {
    if samples.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "need at least 4 samples, got {}",
            samples.len()
        )));
    }
    if let Some(s) = samples
        .iter()
        .find(|(h, v)| !(*h > 0.0 && *v > 0.0 && h.is_finite() && v.is_finite()))
    {
        return Err(Error::InvalidParameter(format!(
            "non-positive sample ({}, {})",
            s.0, s.1
        )));
    }
    let k = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all samples share one h".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (intercept + beta * x - y).abs())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        samples: samples.to_vec(),
        beta,
        intercept,
        residual,
    })
}
