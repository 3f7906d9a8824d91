//! Pairwise distance matrices and agglomerative clustering.

mod compare;
mod dendrogram;
mod kmeans;
mod matrix;
mod stability;

pub use compare::{adjusted_rand_index, rand_index};
pub use dendrogram::{agglomerate, canonical_labels, cut, Cut, Dendrogram, Linkage, Merge};
pub use kmeans::kmeans_baseline;
pub use matrix::{distance_matrix, DistanceMatrix};
pub use stability::{stability_check, StabilityReport};
