//! Distances and hierarchical clustering on weighted projective spaces.
//!
//! The crate covers four layers:
//!
//! * [`point`]: representatives of classes in `P_q` over `C` and `Q`, the
//!   weighted scaling action, wgcd normalization and weighted heights.
//! * [`scaling`]: the scaling-infimum dissimilarity, its rational analogue
//!   and a scanner for triangle-inequality violations.
//! * [`finsler`]: the Finsler integrand, discrete path lengths and geodesic
//!   distances found by minimizing the length of lifted polygonal paths.
//! * [`cluster`]: distance matrices, agglomerative clustering, dendrogram
//!   cuts, a k-means baseline and a stability check.
//!
//! [`pca`] and [`datasets`] supply preprocessing and synthetic data; [`io`]
//! reads and writes point-set files.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod datasets;
pub mod error;
pub mod finsler;
pub mod io;
pub mod pca;
pub mod point;
pub mod scaling;

mod nelder_mead;

pub use error::{Error, Result};
pub use point::{wgcd, ProjPoint, RatProjPoint, Tangent, Weights};
