use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dendrogram::canonical_labels;
use crate::error::{Error, Result};

const MAX_ITERS: usize = 100;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(x: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(x, center);
        if d < best.0 {
            best = (d, c);
        }
    }
    best.1
}

/// Lloyd's k-means with a seeded farthest-first start: a random first
/// center, then repeatedly the point farthest from its nearest center.
/// Returns canonical labels.
pub fn kmeans_baseline(coords: &[Vec<f64>], k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = coords.len();
    if n == 0 {
        return Err(Error::InvalidOption("k-means needs at least one point".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidOption(format!("k = {k} is outside 1..={n}")));
    }
    let dim = coords[0].len();
    if coords.iter().any(|c| c.len() != dim) {
        return Err(Error::InvalidOption("points have different dimensions".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = vec![coords[rng.gen_range(0..n)].clone()];
    let mut gap: Vec<f64> = coords.iter().map(|x| sq_dist(x, &centers[0])).collect();
    while centers.len() < k {
        let far = (0..n).fold(0, |b, i| if gap[i] > gap[b] { i } else { b });
        centers.push(coords[far].clone());
        for (g, x) in gap.iter_mut().zip(coords) {
            *g = g.min(sq_dist(x, &coords[far]));
        }
    }

    let mut labels: Vec<usize> = coords.iter().map(|x| nearest(x, &centers)).collect();
    for _ in 0..MAX_ITERS {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (x, &l) in coords.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(x) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let next: Vec<usize> = coords.iter().map(|x| nearest(x, &centers)).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    Ok(canonical_labels(&labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_cluster() {
        let pts = vec![vec![0.0], vec![1.0], vec![5.0]];
        assert_eq!(kmeans_baseline(&pts, 1, 3).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn separated_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pts = Vec::new();
        let mut truth = Vec::new();
        for (c, center) in [[0.0, 0.0], [10.0, 0.0]].iter().enumerate() {
            for _ in 0..20 {
                pts.push(vec![
                    center[0] + rng.gen_range(-0.5..0.5),
                    center[1] + rng.gen_range(-0.5..0.5),
                ]);
                truth.push(c);
            }
        }
        for seed in 0..5 {
            let labels = kmeans_baseline(&pts, 2, seed).unwrap();
            assert_eq!(labels, truth);
            assert_eq!(labels, kmeans_baseline(&pts, 2, seed).unwrap());
        }
    }

    #[test]
    fn invalid_input() {
        assert!(kmeans_baseline(&[], 1, 0).is_err());
        assert!(kmeans_baseline(&[vec![1.0]], 2, 0).is_err());
        assert!(kmeans_baseline(&[vec![1.0], vec![1.0, 2.0]], 1, 0).is_err());
    }
}
