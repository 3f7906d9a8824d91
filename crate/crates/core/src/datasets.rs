//! Seeded synthetic datasets and the absolute invariant `t_1`.

use std::collections::HashSet;

use num_bigint::{BigInt, RandBigInt};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Pow, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::json;

use crate::error::{Error, Result};
use crate::point::{ProjPoint, RatProjPoint, Weights};

/// Weights of the genus-2 moduli space, graded by the Igusa invariants
/// `(J_2, J_4, J_6, J_10)`.
pub const IGUSA_WEIGHTS: [u32; 4] = [2, 4, 6, 10];

/// Points with ground-truth labels and the parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<P> {
    pub points: Vec<P>,
    pub labels: Vec<usize>,
    pub meta: serde_json::Value,
}

fn gaussian_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|_| Complex64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng)))
        .collect()
}

/// `n_clusters` random unit-norm centers, each with `per_cluster` members
/// `normalize(center + spread * g)` for complex Gaussian `g`. Labels are
/// grouped: cluster 0 first.
pub fn gen_synthetic_clusters(
    q: &Weights,
    n_clusters: usize,
    per_cluster: usize,
    spread: f64,
    seed: u64,
) -> Result<LabeledDataset<ProjPoint>> {
    if n_clusters == 0 || per_cluster == 0 {
        return Err(Error::InvalidOption("cluster count and size must be positive".into()));
    }
    if !(spread > 0.0) || !spread.is_finite() {
        return Err(Error::InvalidOption(format!("spread must be positive, got {spread}")));
    }
    let dim = q.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_clusters * per_cluster);
    let mut labels = Vec::with_capacity(n_clusters * per_cluster);
    for label in 0..n_clusters {
        let center = loop {
            if let Ok(p) = ProjPoint::new(q.clone(), gaussian_vector(&mut rng, dim)) {
                break p.normalize_geometric();
            }
        };
        for _ in 0..per_cluster {
            let noise = gaussian_vector(&mut rng, dim);
            let coords = center.coords().iter().zip(noise).map(|(c, g)| c + g * spread).collect();
            points.push(ProjPoint::new(q.clone(), coords)?.normalize_geometric());
            labels.push(label);
        }
    }
    Ok(LabeledDataset {
        points,
        labels,
        meta: json!({
            "generator": "synthetic-clusters",
            "weights": q,
            "clusters": n_clusters,
            "per_cluster": per_cluster,
            "spread": spread,
            "seed": seed,
        }),
    })
}

/// Per-coordinate box `|x_i| <= floor(H^{q_i})`, exact for integral `H`.
fn coordinate_bounds(q: &[u32], height_bound: f64) -> Result<Vec<BigInt>> {
    q.iter()
        .map(|&qi| {
            if height_bound.fract() == 0.0 {
                let h = BigInt::from_f64(height_bound).expect("finite integral bound");
                Ok(Pow::pow(h, qi))
            } else {
                BigInt::from_f64(height_bound.powi(qi as i32).floor())
                    .ok_or_else(|| Error::InvalidOption(format!("height bound {height_bound} is too large")))
            }
        })
        .collect()
}

/// Distinct wgcd-normalized points of `P_(2,4,6,10)(Q)` with weighted height
/// at most `height_bound`, sampled uniformly from the coordinate box
/// `|x_i| <= H^{q_i}`. Gives up after `100 * count` draws.
pub fn gen_moduli_points(count: usize, height_bound: f64, seed: u64) -> Result<LabeledDataset<RatProjPoint>> {
    if count == 0 {
        return Err(Error::InvalidOption("count must be positive".into()));
    }
    if !(height_bound >= 1.0) || !height_bound.is_finite() {
        return Err(Error::InvalidOption(format!(
            "height bound must be >= 1, got {height_bound}"
        )));
    }
    let weights = Weights::new(IGUSA_WEIGHTS.to_vec())?;
    let bounds = coordinate_bounds(&IGUSA_WEIGHTS, height_bound)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut points = Vec::with_capacity(count);
    let attempts = count.saturating_mul(100);
    for _ in 0..attempts {
        if points.len() == count {
            break;
        }
        let x: Vec<BigInt> = bounds.iter().map(|b| rng.gen_bigint_range(&-b, &(b + 1u32))).collect();
        if x.iter().all(Zero::is_zero) {
            continue;
        }
        let p = RatProjPoint::new(weights.clone(), x)?.normalize();
        if seen.insert(p.coords().to_vec()) {
            points.push(p);
        }
    }
    if points.len() < count {
        return Err(Error::InvalidOption(format!(
            "found only {} distinct points of height <= {height_bound} in {attempts} draws",
            points.len()
        )));
    }
    let labels = vec![0; points.len()];
    Ok(LabeledDataset {
        points,
        labels,
        meta: json!({
            "generator": "moduli-points",
            "weights": weights,
            "count": count,
            "height_bound": height_bound,
            "seed": seed,
        }),
    })
}

/// `t_1 = J_2^5 / J_10` as an exact rational.
pub fn absolute_invariant_t1_exact(p: &RatProjPoint) -> Result<BigRational> {
    if p.weights().as_slice() != IGUSA_WEIGHTS {
        return Err(Error::WeightMismatch {
            left: p.weights().as_slice().to_vec(),
            right: IGUSA_WEIGHTS.to_vec(),
        });
    }
    let (j2, j10) = (&p.coords()[0], &p.coords()[3]);
    if j10.is_zero() {
        return Err(Error::UndefinedInvariant("t_1 needs J_10 != 0".into()));
    }
    Ok(BigRational::new(Pow::pow(j2, 5u32), j10.clone()))
}

/// `t_1 = J_2^5 / J_10`, computed exactly and rounded once.
pub fn absolute_invariant_t1(p: &RatProjPoint) -> Result<f64> {
    let t = absolute_invariant_t1_exact(p)?;
    Ok(t.to_f64().unwrap_or(f64::NAN))
}

/// `t_1` on a real or complex representative; the imaginary part is dropped.
pub fn absolute_invariant_t1_complex(p: &ProjPoint) -> Result<f64> {
    if p.weights().as_slice() != IGUSA_WEIGHTS {
        return Err(Error::WeightMismatch {
            left: p.weights().as_slice().to_vec(),
            right: IGUSA_WEIGHTS.to_vec(),
        });
    }
    let (j2, j10) = (p.coords()[0], p.coords()[3]);
    if j10.is_zero() {
        return Err(Error::UndefinedInvariant("t_1 needs J_10 != 0".into()));
    }
    Ok((j2.powu(5) / j10).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::chord_distance;

    fn w(q: &[u32]) -> Weights {
        Weights::new(q.to_vec()).unwrap()
    }

    #[test]
    fn t1_examples() {
        let q = w(&IGUSA_WEIGHTS);
        let p = RatProjPoint::from_i64(q.clone(), &[1, 0, 0, 1]).unwrap();
        assert_eq!(absolute_invariant_t1(&p).unwrap(), 1.0);
        let p = RatProjPoint::from_i64(q.clone(), &[2, 1, 1, 4]).unwrap();
        assert_eq!(absolute_invariant_t1(&p).unwrap(), 8.0);
        let p = RatProjPoint::from_i64(q, &[2, 1, 1, 0]).unwrap();
        assert!(matches!(absolute_invariant_t1(&p), Err(Error::UndefinedInvariant(_))));
        let p = RatProjPoint::from_i64(w(&[2, 3]), &[1, 1]).unwrap();
        assert!(matches!(absolute_invariant_t1(&p), Err(Error::WeightMismatch { .. })));
    }

    #[test]
    fn t1_scaling_by_integers() {
        let q = w(&IGUSA_WEIGHTS);
        let p = RatProjPoint::from_i64(q.clone(), &[3, -2, 5, 7]).unwrap();
        let t = absolute_invariant_t1_exact(&p).unwrap();
        for l in [-3i64, 2, 5] {
            let scaled: Vec<i64> = [3i64, -2, 5, 7]
                .iter()
                .zip(IGUSA_WEIGHTS)
                .map(|(x, qi)| x * l.pow(qi))
                .collect();
            let s = RatProjPoint::from_i64(q.clone(), &scaled).unwrap();
            assert_eq!(absolute_invariant_t1_exact(&s).unwrap(), t);
        }
    }

    #[test]
    fn synthetic_is_deterministic_and_tight() {
        let q = w(&[2, 1]);
        let a = gen_synthetic_clusters(&q, 3, 4, 1e-13, 9).unwrap();
        assert_eq!(a, gen_synthetic_clusters(&q, 3, 4, 1e-13, 9).unwrap());
        assert_eq!(a.labels, vec![0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]);
        for cluster in a.points.chunks(4) {
            for p in cluster {
                assert!(chord_distance(&cluster[0], p).unwrap() < 1e-9);
                assert!((p.weighted_norm() - 1.0).abs() < 1e-12);
            }
        }
        assert!(gen_synthetic_clusters(&q, 0, 4, 0.1, 0).is_err());
        assert!(gen_synthetic_clusters(&q, 2, 4, 0.0, 0).is_err());
    }

    #[test]
    fn unit_height_moduli_points() {
        let d = gen_moduli_points(20, 1.0, 4).unwrap();
        assert_eq!(d.points.len(), 20);
        for p in &d.points {
            assert!(p.is_normalized());
            assert!(p.coords().iter().all(|x| x.magnitude() <= &1u32.into()));
            assert!(p.weighted_height() <= 1.0);
        }
        // 3^4 - 1 tuples with entries in {-1, 0, 1}
        assert!(gen_moduli_points(81, 1.0, 4).is_err());
        assert!(gen_moduli_points(5, 0.5, 4).is_err());
    }

    #[test]
    fn fractional_height_bound() {
        let d = gen_moduli_points(30, 1.5, 2).unwrap();
        for p in &d.points {
            assert!(p.weighted_height() <= 1.5);
        }
    }
}
