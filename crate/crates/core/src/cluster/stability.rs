use serde::{Deserialize, Serialize};

use super::dendrogram::{agglomerate, Linkage};
use super::matrix::DistanceMatrix;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub linkage: Linkage,
    /// `sup |A_ij - B_ij|`.
    pub delta: f64,
    /// Largest gap between the sorted merge heights of the two dendrograms.
    pub height_diff: f64,
    /// `height_diff <= delta`; only asserted for single linkage.
    pub bound_holds: Option<bool>,
}

/// Compares the dendrograms of two matrices over the same points.
pub fn stability_check(a: &DistanceMatrix, b: &DistanceMatrix, linkage: Linkage) -> Result<StabilityReport> {
    let delta = a.sup_distance(b)?;
    let sorted = |m: &DistanceMatrix| {
        let mut h = agglomerate(m, linkage).heights();
        h.sort_by(f64::total_cmp);
        h
    };
    let height_diff = sorted(a)
        .iter()
        .zip(&sorted(b))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let bound_holds = (linkage == Linkage::Single).then_some(height_diff <= delta);
    Ok(StabilityReport {
        linkage,
        delta,
        height_diff,
        bound_holds,
    })
}
