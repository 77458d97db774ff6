//! Anisotropic capillary convex geometry and the capillary L_p-Minkowski
//! problem on Wulff caps, in dimensions `n = 1` and `n = 2`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod body;
pub mod domain;
pub mod error;
pub mod jet;
pub mod linalg;
pub mod measures;
pub mod norm;
pub mod num;
pub mod oracle;
pub mod solver;
pub mod spectral;
pub mod verify;
pub mod wulff;

pub use domain::{CapGrid, Domain, MetricData, Resolution, Scheme};
pub use error::{Error, Result};
pub use norm::{DualJet, MinkowskiNorm, Monomial, NormFamily, Symmetry};
pub use wulff::{BoundaryFrame, CapillaryCap, ConditionReport, WulffShape};
