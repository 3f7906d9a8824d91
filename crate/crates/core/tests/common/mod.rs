#![allow(dead_code)]

use finsler_wps::cluster::{DistanceMatrix, Linkage};
use finsler_wps::{ProjPoint, Weights};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn weights(q: &[u32]) -> Weights {
    Weights::new(q.to_vec()).unwrap()
}

pub fn complex_gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|_| Complex64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng)))
        .collect()
}

/// A random class with a unit-norm representative.
pub fn random_point(rng: &mut ChaCha8Rng, q: &Weights) -> ProjPoint {
    ProjPoint::new(q.clone(), complex_gaussian(rng, q.len()))
        .unwrap()
        .normalize_geometric()
}

pub fn inner(q: &[u32], a: &[Complex64], b: &[Complex64]) -> Complex64 {
    q.iter()
        .zip(a.iter().zip(b))
        .map(|(&k, (x, y))| x * y.conj() * f64::from(k))
        .sum()
}

/// Symmetric matrix with entries `k / 8`, `k` in `1..=levels`; sums of up to
/// 2^40 such values are exact in `f64`.
pub fn dyadic_matrix(rng: &mut ChaCha8Rng, n: usize, levels: u32) -> DistanceMatrix {
    DistanceMatrix::from_fn(n, |_, _| f64::from(rng.gen_range(1..=levels)) / 8.0).unwrap()
}

/// Agglomeration recomputing every inter-cluster distance from the leaves
/// at every step. Returns `(left, right, height, id)` per merge.
pub fn naive_agglomerate(m: &DistanceMatrix, linkage: Linkage) -> Vec<(usize, usize, f64, usize)> {
    let n = m.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::new();
    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let (ia, la) = &clusters[a];
                let (ib, lb) = &clusters[b];
                let pairs = la.iter().flat_map(|&x| lb.iter().map(move |&y| m.get(x, y)));
                let h = match linkage {
                    Linkage::Single => pairs.fold(f64::INFINITY, f64::min),
                    Linkage::Complete => pairs.fold(f64::NEG_INFINITY, f64::max),
                    Linkage::Average => pairs.sum::<f64>() / (la.len() * lb.len()) as f64,
                };
                let key = (h, *ia.min(ib), *ia.max(ib));
                let better = match best {
                    None => true,
                    Some((bh, bx, by, _, _)) => h.total_cmp(&bh).then(key.1.cmp(&bx)).then(key.2.cmp(&by)).is_lt(),
                };
                if better {
                    best = Some((key.0, key.1, key.2, a, b));
                }
            }
        }
        let (h, x, y, a, b) = best.unwrap();
        let id = n + step;
        let (_, lb) = clusters.remove(b);
        let (_, la) = clusters.remove(a);
        clusters.push((id, [la, lb].concat()));
        merges.push((x, y, h, id));
    }
    merges
}

/// Brute-force largest `d` with `d^{q_i} | x_i` for all `i`.
pub fn brute_wgcd(x: &[i64], q: &[u32]) -> u64 {
    let cap = x
        .iter()
        .zip(q)
        .filter(|(v, _)| **v != 0)
        .map(|(v, &k)| (v.unsigned_abs() as f64).powf(1.0 / f64::from(k)).floor() as u64 + 1)
        .min()
        .unwrap();
    let max_abs = x.iter().map(|v| v.unsigned_abs()).max().unwrap();
    (1..=cap.min(max_abs))
        .filter(|&d| {
            x.iter().zip(q).all(|(v, &k)| match (d as i128).checked_pow(k) {
                Some(p) => (*v as i128) % p == 0,
                None => *v == 0,
            })
        })
        .max()
        .unwrap_or(1)
}
