//! Complex fundamental solutions of higher-order evolution equations, their
//! semigroup and variation structure, cylinder functionals on time grids,
//! time-sliced path functionals, and finite-dimensional oscillatory
//! integrals.

pub mod error;
pub mod fft;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod oscillatory;
pub mod path;
pub mod projective;
pub mod quad;
pub mod semigroup;

pub use error::{Error, Result};
pub use grid::Grid1D;
pub use kernel::{
    compute_kernel, kernel_mass, scaling_check, total_variation, EvolutionSpec, SampledKernel,
    SymbolClass,
};
pub use num_complex::Complex64;
pub use path::{
    continuity_bound_check, eval_path_functional, fk_convergence_report, fk_time_sliced,
    spectral_reference, FkConvergenceReport, InitialDatum, PathFunctionalSpec, PotentialSpec,
};
pub use projective::{
    compatibility_check, eval_lj, extend_cylinder, marginal_fourier, minimal_extension_eval, Atom,
    AtomicComplexMeasure, CylinderFunction, CylinderMarginal, EvalMethod, TimeGrid,
};
pub use semigroup::{
    chapman_kolmogorov_residual, convolve_kernels, marginal_variation, product_variation_gate,
    ConvolutionSemigroupProbe, VariationReport, Verdict,
};
pub use oscillatory::{
    coordinate_chain, fredholm_det, fresnel_quadrature_lhs, idim_osc_approx, parseval_rhs,
    FiniteRankOperator, FredholmDet, FresnelIntegrand, Projection, ProjectionChain,
    QuadratureMethod,
};
pub use nalgebra::DMatrix;
