use super::{minkowski_inner, LorentzVector};
use crate::{Error, Result};

/// Geodesic flow on the unit tangent bundle:
/// `(x cosh t + ξ sinh t, x sinh t + ξ cosh t)`.
///
/// The input must satisfy `⟨x,x⟩ = −1`, `⟨ξ,ξ⟩ = 1`, `⟨x,ξ⟩ = 0` within `tol`.
pub fn geodesic_flow(
    x: &LorentzVector,
    xi: &LorentzVector,
    t: f64,
    tol: f64,
) -> Result<(LorentzVector, LorentzVector)> {
    let xx = minkowski_inner(x, x)?;
    let ss = minkowski_inner(xi, xi)?;
    let xs = minkowski_inner(x, xi)?;
    if (xx + 1.0).abs() > tol || x.coords()[0] <= 0.0 {
        return Err(Error::NotOnHyperboloid);
    }
    if (ss - 1.0).abs() > tol || xs.abs() > tol {
        return Err(Error::InvalidPhasePoint(format!(
            "<xi,xi>-1 = {:e}, <x,xi> = {:e}",
            ss - 1.0,
            xs
        )));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("flow time {t}")));
    }
    Ok(geodesic_flow_unchecked(x, xi, t))
}

/// The same formula without constraint checks.
pub fn geodesic_flow_unchecked(
    x: &LorentzVector,
    xi: &LorentzVector,
    t: f64,
) -> (LorentzVector, LorentzVector) {
    let (c, s) = (t.cosh(), t.sinh());
    (x.combine(c, xi, s), x.combine(s, xi, c))
}
