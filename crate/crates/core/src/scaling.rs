//! Scaling-infimum dissimilarities and a triangle-inequality scanner.
//!
//! The raw infimum `inf_{λ,μ ∈ C*} ‖λ·z − μ·w‖` (weighted action on each
//! side) is identically zero: sending `λ` and `μ` to zero together shrinks
//! both representatives. The computable quantity pins one scale. With
//! `|μ| = 1`, the phase of `μ` can be absorbed into `λ` coordinatewise, so
//!
//! ```text
//! D(z, w) = inf_{α ∈ C*} ‖α·z − w‖,   α·z = (α^{q_k} z_k)_k
//! ```
//!
//! `D` is not symmetric for non-uniform weights, so [`dissimilarity`]
//! returns `min(D(z, w), D(w, z))`, the infimum over the feasible set
//! `{|μ| = 1} ∪ {|λ| = 1}`, which is closed under swapping `λ` and `μ`.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nelder_mead;
use crate::point::{bigint_to_f64, ProjPoint, RatProjPoint};

/// Search settings for [`dissimilarity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityOptions {
    /// Apply `normalize_geometric` to both inputs first.
    pub normalize_inputs: bool,
    /// Radial grid `r_min … r_max`, log-spaced, `r_count` points.
    pub r_min: f64,
    pub r_max: f64,
    pub r_count: usize,
    pub angle_count: usize,
    /// Nelder-Mead iteration cap per refinement start.
    pub refine_iters: usize,
    pub tol: f64,
    /// Seeds the two extra random refinement starts.
    pub seed: u64,
}

impl Default for DissimilarityOptions {
    fn default() -> Self {
        Self {
            normalize_inputs: true,
            r_min: 1e-3,
            r_max: 1e3,
            r_count: 25,
            angle_count: 16,
            refine_iters: 200,
            tol: 1e-9,
            seed: 0,
        }
    }
}

impl DissimilarityOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_max > self.r_min && self.r_max.is_finite()) {
            return Err(Error::InvalidOption(format!(
                "radial grid bounds must satisfy 0 < r_min < r_max, got {} and {}",
                self.r_min, self.r_max
            )));
        }
        if self.r_count < 2 || self.angle_count < 2 {
            return Err(Error::InvalidOption("grid counts must be at least 2".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidOption("tol must be positive".into()));
        }
        Ok(())
    }
}

/// Search settings for [`dissimilarity_rational`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalScanOptions {
    /// Scalings range over reduced fractions `a/b` with `1 ≤ a, b ≤ H`.
    pub height_bound: u64,
    pub include_negative: bool,
}

impl Default for RationalScanOptions {
    fn default() -> Self {
        Self {
            height_bound: 50,
            include_negative: true,
        }
    }
}

/// Euclidean distance between the geometrically normalized representatives.
pub fn chord_distance(p1: &ProjPoint, p2: &ProjPoint) -> Result<f64> {
    p1.weights().ensure_same(p2.weights())?;
    Ok(euclidean(
        p1.normalize_geometric().coords(),
        p2.normalize_geometric().coords(),
    ))
}

fn euclidean(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// `‖α·z − w‖` with `α = r e^{iθ}`.
fn scaled_gap(q: &[u32], z: &[Complex64], w: &[Complex64], alpha: Complex64) -> f64 {
    q.iter()
        .zip(z.iter().zip(w))
        .map(|(&qk, (zk, wk))| (alpha.powu(qk) * zk - wk).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Refinement starts taken from grid local minima.
const GRID_STARTS: usize = 6;

/// `inf_α ‖α·z − w‖` by grid search in `(log r, θ)` and Nelder-Mead
/// refinement from `α = 1`, the best local minima of the grid and two
/// seeded random starts.
fn one_sided(q: &[u32], z: &[Complex64], w: &[Complex64], opts: &DissimilarityOptions) -> f64 {
    let log_min = opts.r_min.ln();
    let log_max = opts.r_max.ln();
    let tau = std::f64::consts::TAU;
    let objective = |x: &[f64]| scaled_gap(q, z, w, Complex64::from_polar(x[0].exp(), x[1]));
    let (nr, na) = (opts.r_count, opts.angle_count);
    let at = |i: usize, j: usize| {
        [
            log_min + (log_max - log_min) * i as f64 / (nr - 1) as f64,
            tau * j as f64 / na as f64,
        ]
    };

    // α = 1, i.e. the plain Euclidean distance, is always a candidate.
    let mut best_value = euclidean(z, w);
    let mut grid = vec![0.0; nr * na];
    for i in 0..nr {
        for j in 0..na {
            let v = objective(&at(i, j));
            grid[i * na + j] = v;
            best_value = best_value.min(v);
        }
    }
    // local minima over the r neighbours and the periodic θ neighbours
    let mut minima: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..nr {
        for j in 0..na {
            let v = grid[i * na + j];
            let mut neighbours = vec![grid[i * na + (j + 1) % na], grid[i * na + (j + na - 1) % na]];
            if i > 0 {
                neighbours.push(grid[(i - 1) * na + j]);
            }
            if i + 1 < nr {
                neighbours.push(grid[(i + 1) * na + j]);
            }
            if neighbours.iter().all(|&n| v <= n) {
                minima.push((v, i, j));
            }
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![[0.0, 0.0]];
    starts.extend(minima.iter().take(GRID_STARTS).map(|&(_, i, j)| at(i, j)));
    for _ in 0..2 {
        starts.push([rng.gen_range(log_min..=log_max), rng.gen_range(0.0..tau)]);
    }
    let steps = [(log_max - log_min) / (nr - 1) as f64, tau / na as f64];
    for start in starts {
        let m = nelder_mead::minimize(objective, &start, &steps, opts.refine_iters, opts.tol * 1e-3);
        if m.value < best_value {
            best_value = m.value;
        }
    }
    best_value
}

/// Scaling-infimum dissimilarity `d([z],[w])`.
///
/// Returns `min(D(z,w), D(w,z))` (see the module docs). The result never
/// exceeds the Euclidean distance of the (optionally normalized) inputs and
/// is exactly symmetric in its arguments.
pub fn dissimilarity(p1: &ProjPoint, p2: &ProjPoint, opts: &DissimilarityOptions) -> Result<f64> {
    p1.weights().ensure_same(p2.weights())?;
    opts.validate()?;
    let (a, b) = if opts.normalize_inputs {
        (p1.normalize_geometric(), p2.normalize_geometric())
    } else {
        (p1.clone(), p2.clone())
    };
    let q = a.weights().as_slice();
    let forward = one_sided(q, a.coords(), b.coords(), opts);
    let backward = one_sided(q, b.coords(), a.coords(), opts);
    Ok(forward.min(backward))
}

/// Reduced fractions `±a/b`, `1 ≤ a, b ≤ H`, in a fixed order.
pub fn rational_scalings(opts: &RationalScanOptions) -> Vec<(i64, i64)> {
    let h = opts.height_bound as i64;
    let mut out = Vec::new();
    for b in 1..=h {
        for a in 1..=h {
            if num_integer::gcd(a, b) == 1 {
                out.push((a, b));
                if opts.include_negative {
                    out.push((-a, b));
                }
            }
        }
    }
    out
}

/// Rational dissimilarity `d_Q`.
///
/// Letting both `λ` and `μ` range over small fractions degenerates exactly
/// like the complex infimum (take `λ = μ = 1/H`), so one side is pinned to
/// a unit, mirroring [`dissimilarity`]: the result is the minimum of
/// `(Σ |λ^{q_i} x_i − μ^{q_i} y_i|²)^{1/2}` over pairs with `λ` in
/// [`rational_scalings`] and `μ = ±1`, or `λ = ±1` and `μ` in
/// [`rational_scalings`].
///
/// The scan is exhaustive, so the value is non-increasing in the height
/// bound and exactly symmetric.
pub fn dissimilarity_rational(p1: &RatProjPoint, p2: &RatProjPoint, opts: &RationalScanOptions) -> Result<f64> {
    p1.weights().ensure_same(p2.weights())?;
    if opts.height_bound < 1 {
        return Err(Error::InvalidOption("height bound must be at least 1".into()));
    }
    if !p1.is_normalized() || !p2.is_normalized() {
        return Err(Error::NotNormalized);
    }
    let x: Vec<f64> = p1.coords().iter().map(bigint_to_f64).collect();
    let y: Vec<f64> = p2.coords().iter().map(bigint_to_f64).collect();
    Ok(rational_scan(p1.weights().as_slice(), &x, &y, opts))
}

/// Exhaustive scan behind [`dissimilarity_rational`], without the
/// normalization precondition.
fn rational_scan(q: &[u32], x: &[f64], y: &[f64], opts: &RationalScanOptions) -> f64 {
    let scalings = rational_scalings(opts);
    let units: &[i64] = if opts.include_negative { &[1, -1] } else { &[1] };
    let unit_images = |v: &[f64]| -> Vec<Vec<f64>> {
        units
            .iter()
            .map(|&u| q.iter().zip(v).map(|(&qi, vi)| rational_power(u, 1, qi) * vi).collect())
            .collect()
    };
    let (xu, yu) = (unit_images(x), unit_images(y));
    let mut best = f64::INFINITY;
    let mut scaled = vec![0.0; q.len()];
    for &(a, b) in &scalings {
        for (moving, fixed) in [(x, &yu), (y, &xu)] {
            for (s, (&qi, vi)) in scaled.iter_mut().zip(q.iter().zip(moving)) {
                *s = rational_power(a, b, qi) * vi;
            }
            for target in fixed.iter() {
                let mut acc = 0.0;
                for (s, t) in scaled.iter().zip(target) {
                    let d = s - t;
                    acc += d * d;
                    if acc >= best {
                        break;
                    }
                }
                if acc < best {
                    best = acc;
                }
            }
        }
    }
    best.sqrt()
}

/// `(a/b)^q` as a float, computed the same way for every caller.
fn rational_power(a: i64, b: i64, q: u32) -> f64 {
    let num = num_traits::pow(num_bigint::BigInt::from(a), q as usize);
    let den = num_traits::pow(num_bigint::BigInt::from(b), q as usize);
    num_rational::BigRational::new(num, den).to_f64().unwrap_or(f64::NAN)
}

/// One sampled triple `(u, v, w)` and its ratio `d(u,w) / (d(u,v) + d(v,w))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleRatio {
    pub triple: [usize; 3],
    pub ratio: f64,
    pub d_uv: f64,
    pub d_vw: f64,
    pub d_uw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub max_ratio: f64,
    pub argmax: [usize; 3],
    /// Triples with ratio above `1 + tol`.
    pub violations: Vec<TripleRatio>,
    /// Triples whose denominator vanished; their ratio is recorded as 0.
    pub zero_denominator: Vec<[usize; 3]>,
    pub trials: usize,
    pub seed: u64,
    #[serde(skip)]
    pub triples: Vec<TripleRatio>,
}

/// Samples `trials` triples of distinct indices, deterministic given `seed`.
pub fn sample_triples(n: usize, trials: usize, seed: u64) -> Result<Vec<[usize; 3]>> {
    if n < 3 {
        return Err(Error::InvalidOption(format!(
            "need at least 3 points for a triangle scan, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..trials)
        .map(|_| {
            let idx = sample(&mut rng, n, 3);
            [idx.index(0), idx.index(1), idx.index(2)]
        })
        .collect())
}

/// Scans sampled triples for triangle-inequality violations of `metric`.
///
/// Triples are evaluated in parallel and merged in sampling order, so the
/// report depends only on the inputs and `seed`.
pub fn triangle_violation_scan<P, M>(
    points: &[P],
    metric: M,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<ViolationReport>
where
    P: Sync,
    M: Fn(&P, &P) -> Result<f64> + Sync,
{
    let triples = sample_triples(points.len(), trials, seed)?;
    let evaluated = triples
        .par_iter()
        .map(|&[u, v, w]| {
            let d_uv = metric(&points[u], &points[v])?;
            let d_vw = metric(&points[v], &points[w])?;
            let d_uw = metric(&points[u], &points[w])?;
            let denom = d_uv + d_vw;
            let ratio = if denom > 0.0 { d_uw / denom } else { 0.0 };
            Ok(TripleRatio {
                triple: [u, v, w],
                ratio,
                d_uv,
                d_vw,
                d_uw,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(evaluated, tol, trials, seed))
}

fn summarize(triples: Vec<TripleRatio>, tol: f64, trials: usize, seed: u64) -> ViolationReport {
    let mut max_ratio = 0.0;
    let mut argmax = triples.first().map_or([0, 0, 0], |t| t.triple);
    for t in &triples {
        if t.ratio > max_ratio {
            max_ratio = t.ratio;
            argmax = t.triple;
        }
    }
    let violations = triples.iter().filter(|t| t.ratio > 1.0 + tol).cloned().collect();
    let zero_denominator = triples
        .iter()
        .filter(|t| t.d_uv + t.d_vw == 0.0)
        .map(|t| t.triple)
        .collect();
    ViolationReport {
        max_ratio,
        argmax,
        violations,
        zero_denominator,
        trials,
        seed,
        triples,
    }
}
