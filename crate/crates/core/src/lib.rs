//! Generalized cut-set outer bounds for small discrete memoryless
//! multiterminal networks.
//!
//! * [`probkit`]: joint and conditional probability tables, entropy and
//!   conditional mutual information in bits.
//! * [`regioncalc`]: down-sets of cut vectors, Minkowski sums, convex
//!   membership with Carathéodory-minimal certificates.
//! * [`cutset`]: cut vectors of a network, the region swept over a permissible
//!   set of input laws, time-sharing decompositions, classical rate checks.
//! * [`virtualsrc`]: source side (virtual channel cut vectors, distortion,
//!   containment verdicts, witness search, distortion repair).
//! * [`lemmacheck`]: randomized checks of the three structural properties of
//!   the cut potential.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

// `!(x >= 0)` style checks reject NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cutset;
pub mod error;
pub mod lemmacheck;
mod lp;
pub mod probkit;
pub mod regioncalc;
pub mod scalar;
pub mod virtualsrc;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type JointPmf = probkit::JointPmf<f64>;
pub type Channel = probkit::Channel<f64>;
pub type CutVector = regioncalc::CutVector<f64>;
pub type Region = regioncalc::Region<f64>;
pub type NetworkSpec = cutset::NetworkSpec<f64>;
pub type PermissibleSet = cutset::PermissibleSet<f64>;
pub type PhiRegion = cutset::PhiRegion<f64>;
pub type RateMatrix = cutset::RateMatrix<f64>;
pub type SourceSpec = virtualsrc::SourceSpec<f64>;
pub type DistortionSpec = virtualsrc::DistortionSpec<f64>;
pub type Reconstruction = virtualsrc::Reconstruction<f64>;

pub type JointPmf32 = probkit::JointPmf<f32>;
pub type Region32 = regioncalc::Region<f32>;
