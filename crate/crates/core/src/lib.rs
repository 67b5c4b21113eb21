//! Numerical laboratory for Kähler quantization on model polarized
//! varieties.
//!
//! The crate implements the finite-dimensional machinery connecting Kähler
//! potentials on (X, L) with Hermitian inner products on H⁰(X, L^k): the
//! Hilb and FS maps, normalized Bergman kernels, Donaldson's functional P̃_k,
//! the Aubin–Yau functional I_k and the Mabuchi K-energy, together with
//! evaluators for the inequalities chaining them and power-law fits for the
//! asymptotic rates in k.
//!
//! Two models are built in: CP1 with the full sphere grid, and CP2 restricted
//! to torus-invariant data.

pub mod asymptotics;
pub mod error;
pub mod functionals;
pub mod harness;
pub mod manifold;
pub mod numeric;
pub mod quantization;

pub use error::{Error, Result};
pub use manifold::{build_model, ManifoldModel, ModelKind, Potential, ScalarField};
