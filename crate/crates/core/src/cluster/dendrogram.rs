use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::matrix::DistanceMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    Average,
}

impl Linkage {
    pub const ALL: [Linkage; 3] = [Linkage::Single, Linkage::Complete, Linkage::Average];
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            other => Err(Error::InvalidOption(format!("unknown linkage {other:?}"))),
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
        })
    }
}

/// One agglomeration step joining clusters `left < right` into `id`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub id: usize,
}

/// Binary merge tree. Leaves are `0..n_leaves`; the `k`-th merge creates
/// cluster `n_leaves + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DendrogramRepr", into = "DendrogramRepr")]
pub struct Dendrogram {
    n_leaves: usize,
    merges: Vec<Merge>,
}

#[derive(Serialize, Deserialize)]
struct DendrogramRepr {
    n_leaves: usize,
    merges: Vec<(usize, usize, f64, usize)>,
}

impl TryFrom<DendrogramRepr> for Dendrogram {
    type Error = Error;

    fn try_from(r: DendrogramRepr) -> Result<Self> {
        let merges = r
            .merges
            .into_iter()
            .map(|(left, right, height, id)| Merge {
                left,
                right,
                height,
                id,
            })
            .collect();
        Dendrogram::new(r.n_leaves, merges)
    }
}

impl From<Dendrogram> for DendrogramRepr {
    fn from(d: Dendrogram) -> Self {
        DendrogramRepr {
            n_leaves: d.n_leaves,
            merges: d.merges.iter().map(|m| (m.left, m.right, m.height, m.id)).collect(),
        }
    }
}

/// Total order on candidate merges: height, then `(min_id, max_id)`.
fn candidate_cmp(a: (f64, usize, usize), b: (f64, usize, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
}

impl Dendrogram {
    /// Checks ids: merge `k` creates `n_leaves + k` from two distinct
    /// existing, not yet merged clusters.
    pub fn new(n_leaves: usize, merges: Vec<Merge>) -> Result<Self> {
        if n_leaves == 0 {
            return Err(Error::Format("dendrogram has no leaves".into()));
        }
        if merges.len() != n_leaves - 1 {
            return Err(Error::Format(format!(
                "{} leaves need {} merges, got {}",
                n_leaves,
                n_leaves - 1,
                merges.len()
            )));
        }
        let mut used = vec![false; 2 * n_leaves - 1];
        for (k, m) in merges.iter().enumerate() {
            let id = n_leaves + k;
            if m.id != id {
                return Err(Error::Format(format!("merge {k} has id {}, expected {id}", m.id)));
            }
            for child in [m.left, m.right] {
                if child >= id || used[child] {
                    return Err(Error::Format(format!("merge {k} uses invalid cluster {child}")));
                }
                used[child] = true;
            }
            if m.left == m.right || !m.height.is_finite() {
                return Err(Error::Format(format!("merge {k} is malformed")));
            }
        }
        Ok(Self { n_leaves, merges })
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn heights(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.height).collect()
    }

    /// Newick string; leaves are named by `names` or by index, and branch
    /// lengths are height differences between a node and its parent.
    pub fn to_newick(&self, names: Option<&[String]>) -> String {
        let n = self.n_leaves;
        let name = |i: usize| names.map_or_else(|| i.to_string(), |v| v[i].clone());
        if n == 1 {
            return format!("{};", name(0));
        }
        let height = |id: usize| if id < n { 0.0 } else { self.merges[id - n].height };
        // explicit stack: (cluster, parent height, children emitted)
        let mut out = String::new();
        let root = 2 * n - 2;
        let mut stack = vec![(root, None::<f64>, 0u8)];
        while let Some((id, parent, state)) = stack.pop() {
            if id < n {
                out.push_str(&name(id));
                if let Some(p) = parent {
                    out.push_str(&format!(":{}", p - height(id)));
                }
                continue;
            }
            let m = self.merges[id - n];
            match state {
                0 => {
                    out.push('(');
                    stack.push((id, parent, 1));
                    stack.push((m.left, Some(m.height), 0));
                }
                1 => {
                    out.push(',');
                    stack.push((id, parent, 2));
                    stack.push((m.right, Some(m.height), 0));
                }
                _ => {
                    out.push(')');
                    if let Some(p) = parent {
                        out.push_str(&format!(":{}", p - m.height));
                    }
                }
            }
        }
        out.push(';');
        out
    }
}

/// Working state: `value[a][b]` is the linkage distance, or the sum of
/// pairwise distances for average linkage.
struct Active {
    n: usize,
    linkage: Linkage,
    value: Vec<f64>,
    size: Vec<usize>,
    id: Vec<usize>,
    alive: Vec<bool>,
    /// Best candidate `(height, min_id, max_id, partner slot)` per slot.
    best: Vec<Option<(f64, usize, usize, usize)>>,
}

impl Active {
    fn distance(&self, a: usize, b: usize) -> f64 {
        let v = self.value[a * self.n + b];
        match self.linkage {
            Linkage::Average => v / (self.size[a] * self.size[b]) as f64,
            _ => v,
        }
    }

    fn key(&self, a: usize, b: usize) -> (f64, usize, usize) {
        let (x, y) = (self.id[a], self.id[b]);
        (self.distance(a, b), x.min(y), x.max(y))
    }

    fn rescan(&mut self, a: usize) {
        let mut best: Option<(f64, usize, usize, usize)> = None;
        for b in 0..self.n {
            if b == a || !self.alive[b] {
                continue;
            }
            let k = self.key(a, b);
            if best.is_none_or(|(h, x, y, _)| candidate_cmp(k, (h, x, y)).is_lt()) {
                best = Some((k.0, k.1, k.2, b));
            }
        }
        self.best[a] = best;
    }
}

/// Agglomerative clustering to a single cluster.
///
/// Each step merges the pair of active clusters with the smallest linkage
/// distance, breaking ties by the smallest `(min_id, max_id)`. Linkage
/// distances are updated Lance-Williams style; average linkage keeps sums
/// of pairwise distances so that every height is a plain mean.
pub fn agglomerate(m: &DistanceMatrix, linkage: Linkage) -> Dendrogram {
    let n = m.len();
    let mut st = Active {
        n,
        linkage,
        value: m.as_slice().to_vec(),
        size: vec![1; n],
        id: (0..n).collect(),
        alive: vec![true; n],
        best: vec![None; n],
    };
    for a in 0..n {
        st.rescan(a);
    }
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        let (a, b) = {
            let mut pick: Option<(f64, usize, usize, usize, usize)> = None;
            for a in (0..n).filter(|&a| st.alive[a]) {
                if let Some((h, x, y, b)) = st.best[a] {
                    let better = pick.is_none_or(|(ph, px, py, _, _)| candidate_cmp((h, x, y), (ph, px, py)).is_lt());
                    if better {
                        pick = Some((h, x, y, a, b));
                    }
                }
            }
            let (_, _, _, a, b) = pick.expect("at least two active clusters");
            (a.min(b), a.max(b))
        };
        let height = st.distance(a, b);
        let new_id = n + step;
        merges.push(Merge {
            left: st.id[a].min(st.id[b]),
            right: st.id[a].max(st.id[b]),
            height,
            id: new_id,
        });

        // merged cluster lives in slot a
        for k in 0..n {
            if !st.alive[k] || k == a || k == b {
                continue;
            }
            let (va, vb) = (st.value[a * n + k], st.value[b * n + k]);
            let v = match linkage {
                Linkage::Single => va.min(vb),
                Linkage::Complete => va.max(vb),
                Linkage::Average => va + vb,
            };
            st.value[a * n + k] = v;
            st.value[k * n + a] = v;
        }
        st.size[a] += st.size[b];
        st.id[a] = new_id;
        st.alive[b] = false;
        st.best[b] = None;
        st.rescan(a);
        for k in 0..n {
            if !st.alive[k] || k == a {
                continue;
            }
            match st.best[k] {
                Some((_, _, _, p)) if p == a || p == b => st.rescan(k),
                Some((h, x, y, _)) => {
                    let cand = st.key(k, a);
                    if candidate_cmp(cand, (h, x, y)).is_lt() {
                        st.best[k] = Some((cand.0, cand.1, cand.2, a));
                    }
                }
                None => st.rescan(k),
            }
        }
    }
    Dendrogram { n_leaves: n, merges }
}

/// How to cut a dendrogram into flat clusters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cut {
    /// Exactly `k` clusters.
    K(usize),
    /// Keep merges with height at most the threshold.
    Height(f64),
}

/// Relabels so that clusters are numbered by their smallest leaf.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Flat partition with canonical labels.
pub fn cut(d: &Dendrogram, criterion: Cut) -> Result<Vec<usize>> {
    let n = d.n_leaves;
    let keep: Vec<bool> = match criterion {
        Cut::K(k) => {
            if k == 0 || k > n {
                return Err(Error::InvalidOption(format!("k = {k} is outside 1..={n}")));
            }
            (0..n - 1).map(|i| i < n - k).collect()
        }
        Cut::Height(t) => {
            if !(t >= 0.0) {
                return Err(Error::InvalidOption(format!("threshold {t} must be >= 0")));
            }
            d.merges.iter().map(|m| m.height <= t).collect()
        }
    };
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // a representative leaf for every cluster id
    let mut rep: Vec<usize> = (0..n).collect();
    for (m, kept) in d.merges.iter().zip(keep) {
        let (l, r) = (rep[m.left], rep[m.right]);
        if kept {
            let (a, b) = (find(&mut parent, l), find(&mut parent, r));
            parent[a.max(b)] = a.min(b);
        }
        rep.push(l);
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    Ok(canonical_labels(&roots))
}
