//! Minkowski space, the group `G = SO₀(1,n+1)` and its Lie algebra.
//!
//! Coordinates are indexed `0..=n+1` with `x₀` timelike. Group elements act
//! on column vectors; frames are group elements and the geodesic flow acts
//! on them from the right.

mod algebra;
mod decompose;
mod geodesic;
mod group;
pub mod relations;
mod vector;

pub use algebra::{bracket, frame, generator, labelled, GeneratorKind, Label, LieAlgebraElement};
pub use decompose::{
    flip_reflection, kan_decompose, ku_member, ku_member_by_conjugation, normalizer_decompose,
    normalizer_member, normalizer_member_by_conjugation, random_standard_element,
    standard_subgroup_member, KanFactors, NormalizerKind,
};
pub use geodesic::{geodesic_flow, geodesic_flow_unchecked};
pub use group::{
    exp_flow, exp_general, horospherical, is_group_element, minkowski_gram, pi_k0,
    random_group_element, GroupElement,
};
pub use vector::{classify_point, minkowski_inner, LorentzVector, PointClass};

/// Default tolerance for group membership.
pub const TOL_GROUP: f64 = 1e-10;
/// Default tolerance for reconstructing decomposed elements.
pub const TOL_RECON: f64 = 1e-10;
/// Largest supported `n` (the ambient matrices are `(n+2)×(n+2)`).
pub const MAX_DIM: usize = 16;

pub(crate) fn check_dim(n: usize) -> crate::Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(crate::Error::InvalidParameter(format!(
            "dimension n={n} outside 1..={MAX_DIM}"
        )))
    }
}
