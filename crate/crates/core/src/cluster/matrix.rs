use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense symmetric matrix of pairwise distances, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    n: usize,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<MatrixRepr> for DistanceMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        if r.entries.len() != r.n || r.entries.iter().any(|row| row.len() != r.n) {
            return Err(Error::InvalidMatrix(format!("entries are not {0}x{0}", r.n)));
        }
        DistanceMatrix::new(r.n, r.entries.concat())
    }
}

impl From<DistanceMatrix> for MatrixRepr {
    fn from(m: DistanceMatrix) -> Self {
        MatrixRepr {
            n: m.n,
            entries: m.data.chunks(m.n.max(1)).map(<[f64]>::to_vec).collect(),
        }
    }
}

impl DistanceMatrix {
    /// Validates symmetry, a zero diagonal and nonnegative finite entries.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatrix("matrix is empty".into()));
        }
        if data.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidMatrix(format!("diagonal entry {i} is nonzero")));
            }
            for j in i + 1..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::InvalidMatrix(format!("entry ({i}, {j}) = {a}")));
                }
                if a != b {
                    return Err(Error::InvalidMatrix(format!(
                        "entries ({i}, {j}) and ({j}, {i}) differ: {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds a matrix from `f(i, j)` evaluated once per pair `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self::new(n, data)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `sup |A_ij - B_ij|`.
    pub fn sup_distance(&self, other: &DistanceMatrix) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::InvalidMatrix(format!(
                "size mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Evaluates `oracle` once per unordered pair, on `threads` worker threads
/// (0 picks the rayon default). The result does not depend on `threads`.
pub fn distance_matrix<P, F>(points: &[P], oracle: F, threads: usize) -> Result<DistanceMatrix>
where
    P: Sync,
    F: Fn(&P, &P) -> Result<f64> + Sync,
{
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidMatrix("no points".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidOption(format!("thread pool: {e}")))?;
    let values: Vec<Result<f64>> =
        pool.install(|| pairs.par_iter().map(|&(i, j)| oracle(&points[i], &points[j])).collect());
    let mut data = vec![0.0; n * n];
    for (&(i, j), value) in pairs.iter().zip(values) {
        let v = value.map_err(|e| Error::Oracle {
            i,
            j,
            source: Box::new(e),
        })?;
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Oracle {
                i,
                j,
                source: Box::new(Error::InvalidMatrix(format!("oracle returned {v}"))),
            });
        }
        data[i * n + j] = v;
        data[j * n + i] = v;
    }
    DistanceMatrix::new(n, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn single_point() {
        let m = distance_matrix(&[1.0f64], |_, _| Ok(1.0), 1).unwrap();
        assert_eq!(m.as_slice(), &[0.0]);
    }

    #[test]
    fn counts_pairs() {
        let calls = AtomicUsize::new(0);
        let pts: Vec<f64> = (0..5).map(f64::from).collect();
        let m = distance_matrix(
            &pts,
            |a, b| {
                calls.fetch_add(1, Ordering::Relaxed);
                Ok((a - b).abs())
            },
            3,
        )
        .unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), 10);
        assert_eq!(m.get(4, 1), 3.0);
        assert_eq!(m.get(1, 4), 3.0);
    }

    #[test]
    fn oracle_error_carries_pair() {
        let pts = [0.0, 1.0, 2.0];
        let err = distance_matrix(
            &pts,
            |a: &f64, b: &f64| {
                if *a == 1.0 && *b == 2.0 {
                    Err(Error::InvalidScalar)
                } else {
                    Ok(1.0)
                }
            },
            2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Oracle { i: 1, j: 2, .. }));
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(DistanceMatrix::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = DistanceMatrix::from_fn(3, |i, j| (i + j) as f64).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"n":3,"entries":[[0.0,1.0,2.0],[1.0,0.0,3.0],[2.0,3.0,0.0]]}"#);
        let back: DistanceMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
