//! Streamline-diffusion finite elements with artificial crosswind diffusion
//! on Shishkin meshes for
//!
//! ```text
//! -eps Δu + b·∇u + u = f  in (0, 1)^2,   u = 0 on the boundary,
//! ```
//!
//! together with discrete Green functions and the weighted-norm quantities
//! used to study their pointwise decay.
//!
//! ```
//! use shishkin_sdfem::{Discretization, ProblemSpec, Source};
//!
//! let spec = ProblemSpec::new(1e-4, [1.0, 1.0], Source::One).unwrap();
//! let disc = Discretization::new(16, spec).unwrap();
//! let (u, report) = disc.solve(1e-10).unwrap();
//! assert!(report.relative_residual <= 1e-10);
//! assert!(u.max_abs() > 0.0);
//! ```

pub mod assembly;
pub mod discretization;
pub mod error;
pub mod greens;
pub mod harness;
pub mod mesh;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod stats;
pub mod weights;

#[cfg(doctest)]
mod book;

pub use assembly::{apply_form, assemble, local_matrix, NodalField, SparseSystem, StabilizationProfile};
pub use discretization::Discretization;
pub use error::{Error, Result};
pub use greens::{discrete_green, green_decay_profile, w1inf_norms, Exclusion, GreenFunction};
pub use mesh::{build_mesh, transition_parameters, MeshParams, ProblemSpec, Region, ShishkinMesh, Source};
pub use solver::{solve, SolveReport};
pub use weights::{coercivity_quantities, lemma_quantities, weighted_norm, NormBreakdown, WeightParams};
