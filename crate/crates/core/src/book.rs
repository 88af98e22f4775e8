// The guide's chapters are compiled as doctests so its snippets cannot drift
// from the library. One module per chapter keeps failures attributable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/mesh.md")]
pub mod mesh {}
#[doc = include_str!("../../../book/src/stabilized-form.md")]
pub mod stabilized_form {}
#[doc = include_str!("../../../book/src/solving.md")]
pub mod solving {}
#[doc = include_str!("../../../book/src/green-functions.md")]
pub mod green_functions {}
#[doc = include_str!("../../../book/src/weighted-norm.md")]
pub mod weighted_norm {}
#[doc = include_str!("../../../book/src/interpolation.md")]
pub mod interpolation {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
