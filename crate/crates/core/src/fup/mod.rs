//! Discretised fractal uncertainty experiments: the semiclassical Fourier
//! transform, masked operator norms, decay fits, oscillatory kernels, the
//! mixed-Hessian determinant and gnomonic charts on spheres.

mod dft;
pub mod experiment;
mod fit;
mod hessian;
mod kernel;
mod operator;
pub mod sphere;

pub use dft::{is_three_smooth, GridFunction, SemiclassicalDft};
pub use fit::{beta_fit, DecayFit};
pub use hessian::{
    determinant_lemma, linear_phase, log_phase, log_phase_hessian_formula, mixed_hessian,
    mixed_hessian_det,
};
pub use kernel::{general_phase_fio, log_phase_kernel, KernelCore, QuadratureGrid, SmoothCutoff};
pub use operator::{
    dense_norm, estimate, masked_norm, power_norm, Core, MaskedOperator, NormEstimate,
    PowerOptions, DENSE_ENTRY_CAP,
};
