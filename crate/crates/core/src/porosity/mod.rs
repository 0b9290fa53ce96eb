//! Discretised fractal sets in `[0,1]^n`, porosity checkers, verifiers for
//! the porosity transformation lemmas and hyperbolic flow-box samplers.

mod boxset;
mod check;
pub mod edt;
pub mod flowbox;
pub mod lemmas;
mod transform;

pub use boxset::{
    cantor_generate, BoxSet, CantorBlock, CantorSpec, KeptDigits, Provenance, SetSpec,
};
pub use check::{
    ball_porosity_at, ball_porosity_check, line_porosity_at, line_porosity_check,
    sample_directions, scale_ladder, PorosityKind, PorosityReport, ScaleResult, Verdict, Witness,
};
pub use transform::{affine_image, bilipschitz_image, neighborhood, SmoothMap};
