//! Dataset normalization and weighted principal component analysis.
//!
//! PCA runs on geometrically normalized lifted representatives. With
//! `W = diag(q)` and `y_i = W^{1/2}(z_i - m)`, the scatter matrix
//! `S = Σ_i y_i y_iᴴ` is Hermitian; its eigenvectors `u_j` give components
//! `c_j = W^{-1/2} u_j`, orthonormal under `⟨a, b⟩_q = Σ q_k a_k conj(b_k)`,
//! and coefficients `⟨z_i - m, c_j⟩_q`.

use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::PointSet;
use crate::point::{weighted_inner, ProjPoint, Weights};

/// Eigenvalues in `[-EIGEN_CLAMP, 0)` are rounding noise and reported as 0.
const EIGEN_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeMode {
    /// Unit weighted norm.
    Geometric,
    /// wgcd 1 with the canonical sign.
    Rational,
}

impl FromStr for NormalizeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(NormalizeMode::Geometric),
            "rational" => Ok(NormalizeMode::Rational),
            other => Err(Error::InvalidOption(format!("unknown normalization mode {other:?}"))),
        }
    }
}

/// Normalizes every point of a set, preserving order. Geometric mode needs
/// complex points and rational mode needs integer points.
pub fn normalize_dataset(points: &PointSet, mode: NormalizeMode) -> Result<PointSet> {
    if points.is_empty() {
        return Err(Error::InvalidOption("dataset is empty".into()));
    }
    match (points, mode) {
        (PointSet::Complex { weights, points }, NormalizeMode::Geometric) => Ok(PointSet::Complex {
            weights: weights.clone(),
            points: points.iter().map(ProjPoint::normalize_geometric).collect(),
        }),
        (PointSet::Rational { weights, points }, NormalizeMode::Rational) => Ok(PointSet::Rational {
            weights: weights.clone(),
            points: points.iter().map(|p| p.normalize()).collect(),
        }),
        (set, mode) => Err(Error::InvalidOption(format!(
            "{mode:?} normalization does not apply to {:?} points",
            set.kind()
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPCAResult {
    pub weights: Weights,
    /// All eigenvalues of the scatter matrix, non-increasing.
    pub eigenvalues: Vec<f64>,
    /// The top `k` components.
    pub components: Vec<Vec<Complex64>>,
    /// Per-point coefficients on `components`.
    pub projected: Vec<Vec<Complex64>>,
    /// Centering vector; zero when centering is off.
    pub mean: Vec<Complex64>,
    /// `Σ_i ‖z_i - m - Σ_j p_ij c_j‖_q²`.
    pub reconstruction_error: f64,
}

fn complex_json(v: &[Complex64]) -> serde_json::Value {
    let re: Vec<f64> = v.iter().map(|c| c.re).collect();
    let im: Vec<f64> = v.iter().map(|c| c.im).collect();
    serde_json::json!({ "re": re, "im": im })
}

impl WeightedPCAResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "weights": self.weights,
            "eigenvalues": self.eigenvalues,
            "components": self.components.iter().map(|c| complex_json(c)).collect::<Vec<_>>(),
            "projected": self.projected.iter().map(|c| complex_json(c)).collect::<Vec<_>>(),
            "mean": complex_json(&self.mean),
            "reconstruction_error": self.reconstruction_error,
        })
    }
}

/// Weighted PCA keeping `k` of the `n + 1` components.
pub fn weighted_pca(points: &[ProjPoint], k: usize, center: bool) -> Result<WeightedPCAResult> {
    if points.len() < 2 {
        return Err(Error::InvalidOption("weighted PCA needs at least two points".into()));
    }
    let weights = points[0].weights().clone();
    for p in &points[1..] {
        weights.ensure_same(p.weights())?;
    }
    let dim = weights.len();
    if k == 0 || k > dim {
        return Err(Error::InvalidOption(format!("k = {k} is outside 1..={dim}")));
    }
    let q = weights.to_f64();
    let root: Vec<f64> = q.iter().map(|x| x.sqrt()).collect();
    let reps: Vec<Vec<Complex64>> = points.iter().map(|p| p.normalize_geometric().into_coords()).collect();

    let mut mean = vec![Complex64::zero(); dim];
    if center {
        for r in &reps {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        let n = reps.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
    }
    let y: Vec<Vec<Complex64>> = reps
        .iter()
        .map(|r| r.iter().zip(&mean).zip(&root).map(|((x, m), s)| (x - m) * s).collect())
        .collect();

    let mut scatter = DMatrix::<Complex64>::zeros(dim, dim);
    for yi in &y {
        for a in 0..dim {
            for b in 0..dim {
                scatter[(a, b)] += yi[a] * yi[b].conj();
            }
        }
    }
    let eig = scatter.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order
        .iter()
        .map(|&i| {
            let v = eig.eigenvalues[i];
            if (-EIGEN_CLAMP..0.0).contains(&v) {
                0.0
            } else {
                v
            }
        })
        .collect();
    let unit: Vec<Vec<Complex64>> = order[..k]
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();

    let components: Vec<Vec<Complex64>> = unit
        .iter()
        .map(|u| u.iter().zip(&root).map(|(x, s)| x / s).collect())
        .collect();
    let projected: Vec<Vec<Complex64>> = y
        .iter()
        .map(|yi| {
            unit.iter()
                .map(|u| u.iter().zip(yi).map(|(uj, yj)| uj.conj() * yj).sum())
                .collect()
        })
        .collect();
    let ones = vec![1.0; dim];
    let reconstruction_error = y
        .iter()
        .zip(&projected)
        .map(|(yi, p)| {
            let mut resid = yi.clone();
            for (u, c) in unit.iter().zip(p) {
                for (r, uj) in resid.iter_mut().zip(u) {
                    *r -= uj * c;
                }
            }
            weighted_inner(&ones, &resid, &resid).re
        })
        .sum();

    Ok(WeightedPCAResult {
        weights,
        eigenvalues,
        components,
        projected,
        mean,
        reconstruction_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::RatProjPoint;

    fn w(q: &[u32]) -> Weights {
        Weights::new(q.to_vec()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identical_points_have_zero_spectrum() {
        let p = ProjPoint::new(w(&[2, 1, 3]), vec![c(0.2, 0.1), c(-0.4, 0.3), c(0.1, 0.0)]).unwrap();
        let r = weighted_pca(&[p.clone(), p.clone(), p], 2, true).unwrap();
        assert!(r.eigenvalues.iter().all(|&e| e.abs() < 1e-12), "{:?}", r.eigenvalues);
        assert!(r.projected.iter().flatten().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn components_are_weighted_orthonormal() {
        let q = w(&[1, 2, 5]);
        let pts: Vec<ProjPoint> = (0..7)
            .map(|i| {
                let t = f64::from(i);
                ProjPoint::new(q.clone(), vec![c(t.sin(), 0.3), c(0.2 * t, t.cos()), c(1.0, -0.1 * t)]).unwrap()
            })
            .collect();
        let r = weighted_pca(&pts, 3, true).unwrap();
        let qf = q.to_f64();
        for a in 0..3 {
            for b in 0..3 {
                let ip = weighted_inner(&qf, &r.components[a], &r.components[b]);
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - c(expect, 0.0)).norm() < 1e-10);
            }
        }
        assert!(r.eigenvalues.windows(2).all(|e| e[0] >= e[1]));
        assert!(r.reconstruction_error.abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = ProjPoint::from_real(w(&[1, 1]), &[1.0, 0.0]).unwrap();
        assert!(weighted_pca(std::slice::from_ref(&p), 1, true).is_err());
        assert!(weighted_pca(&[p.clone(), p.clone()], 0, true).is_err());
        assert!(weighted_pca(&[p.clone(), p], 3, true).is_err());
    }

    #[test]
    fn normalize_modes() {
        let q = w(&[2, 3]);
        let set = PointSet::Rational {
            weights: q.clone(),
            points: vec![
                RatProjPoint::from_i64(q.clone(), &[4, 8]).unwrap(),
                RatProjPoint::from_i64(q.clone(), &[1, 1]).unwrap(),
            ],
        };
        let PointSet::Rational { points, .. } = normalize_dataset(&set, NormalizeMode::Rational).unwrap() else {
            panic!("kind changed");
        };
        let one = RatProjPoint::from_i64(q, &[1, 1]).unwrap();
        assert_eq!(points, vec![one.clone(), one]);
        assert!(normalize_dataset(&set, NormalizeMode::Geometric).is_err());
    }
}
