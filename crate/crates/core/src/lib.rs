//! Rearrangement calculus for monomial-weighted measures.
//!
//! The library evaluates integrals against measures `dμ = Π|x_i|^{A_i} dx`,
//! computes decreasing rearrangements and derived profiles, and verifies a
//! family of anisotropic Sobolev/oscillation inequalities across a catalog of
//! rearrangement-invariant norms (Lebesgue, Lorentz, Lorentz-Zygmund, Gamma,
//! GGamma, convexifications). A sharpness layer estimates the empirical
//! constants and certifies the critical exponent by scaling experiments.

pub mod error;
pub mod functions;
pub mod gradients;
pub mod measure;
pub mod rearrangement;
pub mod sharpness;
pub mod spaces;
pub mod verifier;

pub use error::{Error, Result};
pub use functions::{FamilySpec, FamilyTag, TestFunction};
pub use gradients::{multiplicative_rhs, tilde_profiles, TildeProfile};
pub use measure::{BoxDomain, CellDecomposition, MonomialWeight};
pub use rearrangement::{Curve, DistributionFunction, MonotoneProfile, Tail};
pub use spaces::{SpaceSpec, WeightFunction};
pub use verifier::{CaseId, VerificationReport};
