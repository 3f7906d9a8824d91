//! Finsler integrand, discrete path length and geodesic distances.
//!
//! For a representative `z` and tangent `v`, with
//! `A = Σ q_k |v_k|²`, `B = Σ q_k |z_k|²` and `C = |Σ q_k z_k conj(v_k)|`,
//! the integrand is
//!
//! ```text
//! F(z, v) = (A^{1/2} / B^{1/2}) · (C / B^{1/2}) = A^{1/2} C / B
//! ```
//!
//! `F` is homogeneous of degree 2 in `v`, so the length of a curve depends on
//! its parameterization. Paths are therefore always sampled at `M + 1`
//! uniformly spaced parameters on `[0, 1]` and measured with the midpoint
//! rule.
//!
//! Geodesic distances are found by gradient descent on the interior nodes of
//! a polygonal lift, starting from the straight chord between the normalized
//! endpoints, with numerical central-difference gradients and backtracking.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{weighted_inner, weighted_norm_sqr, ProjPoint, RatProjPoint, Tangent, Weights};

/// Step for central-difference gradients.
const GRADIENT_STEP: f64 = 1e-6;
/// Steps that bring a node's weighted norm below this are rejected.
const MIN_NODE_NORM: f64 = 1e-6;
/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-18;

/// `A^{1/2} C / B` on raw slices.
pub(crate) fn integrand(q: &[f64], z: &[Complex64], v: &[Complex64]) -> f64 {
    let a = weighted_norm_sqr(q, v);
    let b = weighted_norm_sqr(q, z);
    let c = weighted_inner(q, z, v).norm();
    a.sqrt() * c / b
}

/// The Finsler norm `F([z], v)`.
pub fn finsler_norm(base: &ProjPoint, v: &[Complex64]) -> Result<f64> {
    if v.len() != base.coords().len() {
        return Err(Error::InvalidPoint(format!(
            "tangent has {} components, base has {}",
            v.len(),
            base.coords().len()
        )));
    }
    Ok(integrand(&base.weights().to_f64(), base.coords(), v))
}

pub fn finsler_norm_tangent(t: &Tangent) -> f64 {
    integrand(&t.base().weights().to_f64(), t.base().coords(), t.vector())
}

/// The rational Finsler norm `F_Q([x], v)` for a wgcd-1 base and a rational
/// tangent. `A`, `B` and `C` are accumulated exactly; only the final square
/// root is taken in floating point.
pub fn finsler_norm_rational(base: &RatProjPoint, v: &[BigRational]) -> Result<f64> {
    if !base.is_normalized() {
        return Err(Error::NotNormalized);
    }
    if v.len() != base.coords().len() {
        return Err(Error::InvalidPoint(format!(
            "tangent has {} components, base has {}",
            v.len(),
            base.coords().len()
        )));
    }
    let mut a = BigRational::zero();
    let mut b = BigRational::zero();
    let mut c = BigRational::zero();
    for ((x, vk), &q) in base.coords().iter().zip(v).zip(base.weights().as_slice()) {
        let q = BigRational::from_integer(q.into());
        let x = BigRational::from_integer(x.clone());
        a += &q * vk * vk;
        b += &q * &x * &x;
        c += &q * &x * vk;
    }
    let a = a.to_f64().unwrap_or(f64::INFINITY);
    let ratio = (c.abs() / b).to_f64().unwrap_or(f64::INFINITY);
    Ok(a.sqrt() * ratio)
}

/// A polygonal lift `γ(s/M)`, `s = 0..=M`, in the punctured coordinate space.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePath {
    weights: Weights,
    nodes: Vec<Vec<Complex64>>,
}

impl PiecewisePath {
    pub fn new(weights: Weights, nodes: Vec<Vec<Complex64>>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::DegeneratePath(format!(
                "need at least two nodes, got {}",
                nodes.len()
            )));
        }
        for (s, node) in nodes.iter().enumerate() {
            if node.len() != weights.len() {
                return Err(Error::DegeneratePath(format!(
                    "node {s} has {} coordinates for {} weights",
                    node.len(),
                    weights.len()
                )));
            }
            if node.iter().all(|c| c.is_zero()) {
                return Err(Error::DegeneratePath(format!("node {s} is zero")));
            }
        }
        Ok(Self { weights, nodes })
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn nodes(&self) -> &[Vec<Complex64>] {
        &self.nodes
    }

    /// Number of segments `M`.
    pub fn segments(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn reversed(&self) -> PiecewisePath {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        PiecewisePath {
            weights: self.weights.clone(),
            nodes,
        }
    }

    /// Straight chord from `a` to `b` with `segments` uniform pieces.
    pub fn chord(weights: Weights, a: &[Complex64], b: &[Complex64], segments: usize) -> Result<Self> {
        let nodes = (0..=segments)
            .map(|s| {
                let t = s as f64 / segments as f64;
                a.iter().zip(b).map(|(x, y)| x + (y - x) * t).collect()
            })
            .collect();
        Self::new(weights, nodes)
    }
}

/// Cost of one segment: `F(midpoint, M·Δ) / M`. Infinite at a zero midpoint.
fn segment_cost(
    q: &[f64],
    a: &[Complex64],
    b: &[Complex64],
    m: f64,
    mid: &mut [Complex64],
    vel: &mut [Complex64],
) -> f64 {
    for k in 0..a.len() {
        mid[k] = (a[k] + b[k]) * 0.5;
        vel[k] = (b[k] - a[k]) * m;
    }
    let bsum = weighted_norm_sqr(q, mid);
    if bsum == 0.0 {
        return f64::INFINITY;
    }
    integrand(q, mid, vel) / m
}

/// Midpoint-rule length of a path.
pub fn path_length(path: &PiecewisePath) -> Result<f64> {
    let q = path.weights.to_f64();
    let dim = q.len();
    let m = path.segments() as f64;
    let mut mid = vec![Complex64::zero(); dim];
    let mut vel = vec![Complex64::zero(); dim];
    let mut total = 0.0;
    for (s, pair) in path.nodes.windows(2).enumerate() {
        let cost = segment_cost(&q, &pair[0], &pair[1], m, &mut mid, &mut vel);
        if !cost.is_finite() {
            return Err(Error::DegeneratePath(format!("segment {s} has a zero midpoint")));
        }
        total += cost;
    }
    Ok(total)
}

/// Settings for [`geodesic_distance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicOptions {
    /// Number of path segments `M`.
    pub segments: usize,
    pub max_iters: usize,
    /// Initial descent step.
    pub step: f64,
    /// Stop when an accepted step lowers the length by less than this.
    pub tol: f64,
    /// Start 0 is the chord; the others are seeded perturbations of it.
    pub multistarts: usize,
    pub seed: u64,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        Self {
            segments: 16,
            max_iters: 500,
            step: 0.1,
            tol: 1e-8,
            multistarts: 3,
            seed: 0,
        }
    }
}

impl GeodesicOptions {
    pub fn validate(&self) -> Result<()> {
        if self.segments < 2 {
            return Err(Error::InvalidOption("segments must be at least 2".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidOption("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) || !(self.step > 0.0) {
            return Err(Error::InvalidOption("tol and step must be positive".into()));
        }
        if self.multistarts < 1 {
            return Err(Error::InvalidOption("multistarts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicResult {
    /// Length of `path`.
    pub distance: f64,
    pub path: PiecewisePath,
    pub converged: bool,
    pub iterations: usize,
    /// Length of the straight chord the solver started from.
    pub initial_length: f64,
    /// Which start produced `path`.
    pub start: usize,
    /// Lengths after each accepted step of the winning start, beginning with
    /// its initial length.
    pub history: Vec<f64>,
}

impl GeodesicResult {
    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = self
            .path
            .nodes()
            .iter()
            .map(|n| {
                let re: Vec<f64> = n.iter().map(|c| c.re).collect();
                let im: Vec<f64> = n.iter().map(|c| c.im).collect();
                serde_json::json!({ "re": re, "im": im })
            })
            .collect();
        serde_json::json!({
            "distance": self.distance,
            "converged": self.converged,
            "iterations": self.iterations,
            "initial_length": self.initial_length,
            "start": self.start,
            "weights": self.path.weights(),
            "nodes": nodes,
        })
    }
}

/// Geodesic solver state over a flat node buffer `(M + 1) × dim`.
struct Solver<'a> {
    q: &'a [f64],
    dim: usize,
    segments: usize,
    /// Optimize imaginary parts too; false for real (rational) lifts.
    complex: bool,
    mid: Vec<Complex64>,
    vel: Vec<Complex64>,
}

struct Descent {
    nodes: Vec<Complex64>,
    energy: f64,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

impl<'a> Solver<'a> {
    fn new(q: &'a [f64], segments: usize, complex: bool) -> Self {
        let dim = q.len();
        Self {
            q,
            dim,
            segments,
            complex,
            mid: vec![Complex64::zero(); dim],
            vel: vec![Complex64::zero(); dim],
        }
    }

    fn node<'b>(&self, nodes: &'b [Complex64], s: usize) -> &'b [Complex64] {
        &nodes[s * self.dim..(s + 1) * self.dim]
    }

    fn segment(&mut self, nodes: &[Complex64], s: usize) -> f64 {
        let dim = self.dim;
        let (a, b) = (&nodes[s * dim..(s + 1) * dim], &nodes[(s + 1) * dim..(s + 2) * dim]);
        segment_cost(self.q, a, b, self.segments as f64, &mut self.mid, &mut self.vel)
    }

    fn energy(&mut self, nodes: &[Complex64]) -> f64 {
        (0..self.segments).map(|s| self.segment(nodes, s)).sum()
    }

    /// Rejects node sets with a node of weighted norm below the guard.
    fn admissible(&self, nodes: &[Complex64]) -> bool {
        (1..self.segments).all(|s| weighted_norm_sqr(self.q, self.node(nodes, s)).sqrt() >= MIN_NODE_NORM)
    }

    /// Central-difference gradient with respect to interior nodes. Only the
    /// two segments touching a node depend on it.
    fn gradient(&mut self, nodes: &mut [Complex64], grad: &mut [Complex64]) {
        let dim = self.dim;
        grad.iter_mut().for_each(|g| *g = Complex64::zero());
        let parts: &[Complex64] = if self.complex {
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]
        } else {
            &[Complex64::new(1.0, 0.0)]
        };
        for s in 1..self.segments {
            for k in 0..dim {
                let idx = s * dim + k;
                let original = nodes[idx];
                for &dir in parts {
                    nodes[idx] = original + dir * GRADIENT_STEP;
                    let plus = self.segment(nodes, s - 1) + self.segment(nodes, s);
                    nodes[idx] = original - dir * GRADIENT_STEP;
                    let minus = self.segment(nodes, s - 1) + self.segment(nodes, s);
                    nodes[idx] = original;
                    grad[idx] += dir * ((plus - minus) / (2.0 * GRADIENT_STEP));
                }
            }
        }
    }

    fn descend(&mut self, mut nodes: Vec<Complex64>, opts: &GeodesicOptions) -> Descent {
        let mut energy = self.energy(&nodes);
        let mut history = vec![energy];
        let mut grad = vec![Complex64::zero(); nodes.len()];
        let mut trial = nodes.clone();
        let mut step = opts.step;
        let mut converged = false;
        let mut iterations = 0;

        while iterations < opts.max_iters {
            iterations += 1;
            self.gradient(&mut nodes, &mut grad);
            let grad_sqr: f64 = grad.iter().map(Complex64::norm_sqr).sum();
            if grad_sqr == 0.0 || !grad_sqr.is_finite() {
                converged = grad_sqr == 0.0;
                break;
            }
            let mut t = step;
            let accepted = loop {
                for ((x, g), y) in nodes.iter().zip(&grad).zip(trial.iter_mut()) {
                    *y = x - g * t;
                }
                if self.admissible(&trial) {
                    let e = self.energy(&trial);
                    if e <= energy - ARMIJO * t * grad_sqr {
                        break Some(e);
                    }
                }
                t *= 0.5;
                if t < MIN_STEP {
                    break None;
                }
            };
            let Some(next) = accepted else {
                converged = true;
                break;
            };
            std::mem::swap(&mut nodes, &mut trial);
            let decrease = energy - next;
            energy = next;
            history.push(energy);
            step = (t * 2.0).min(opts.step * 1e6);
            if decrease < opts.tol {
                converged = true;
                break;
            }
        }
        Descent {
            nodes,
            energy,
            iterations,
            converged,
            history,
        }
    }
}

/// Rotates `w` by the unit scalar `e^{iψ}` (weighted action) maximizing
/// `Re⟨z, e^{iψ}·w⟩_q`.
fn phase_align(q: &[u32], qf: &[f64], z: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
    let terms: Vec<Complex64> = qf
        .iter()
        .zip(z.iter().zip(w))
        .map(|(&qk, (zk, wk))| zk * wk.conj() * qk)
        .collect();
    // Re Σ_k terms_k e^{-iψ q_k}
    let score = |psi: f64| -> f64 {
        terms
            .iter()
            .zip(q)
            .map(|(t, &qk)| (t * Complex64::from_polar(1.0, -psi * f64::from(qk))).re)
            .sum()
    };
    const GRID: usize = 2048;
    let tau = std::f64::consts::TAU;
    let h = tau / GRID as f64;
    let mut best = (score(0.0), 0.0);
    for i in 1..GRID {
        let psi = h * i as f64;
        let v = score(psi);
        if v > best.0 {
            best = (v, psi);
        }
    }
    // Newton on the derivative, kept inside the neighbouring grid cells
    let derivs = |psi: f64| -> (f64, f64) {
        terms.iter().zip(q).fold((0.0, 0.0), |(d1, d2), (t, &qk)| {
            let qk = f64::from(qk);
            let e = t * Complex64::from_polar(1.0, -psi * qk);
            (d1 + qk * e.im, d2 - qk * qk * e.re)
        })
    };
    let mut psi = best.1;
    for _ in 0..20 {
        let (d1, d2) = derivs(psi);
        if !(d2 < 0.0) {
            break;
        }
        let next = psi - d1 / d2;
        if (next - best.1).abs() > h || next == psi {
            break;
        }
        psi = next;
    }
    if score(psi) < best.0 - 1e-12 * best.0.abs() {
        psi = best.1;
    }
    let unit = Complex64::from_polar(1.0, psi);
    w.iter().zip(q).map(|(wk, &qk)| unit.powu(qk) * wk).collect()
}

fn solve(
    weights: &Weights,
    start: Vec<Complex64>,
    end: Vec<Complex64>,
    complex: bool,
    opts: &GeodesicOptions,
) -> Result<GeodesicResult> {
    opts.validate()?;
    let q = weights.to_f64();
    let dim = q.len();
    let m = opts.segments;
    let chord = PiecewisePath::chord(weights.clone(), &start, &end, m)?;
    let initial_length = path_length(&chord)?;
    let chord_flat: Vec<Complex64> = chord.nodes().iter().flatten().copied().collect();
    let scale = start
        .iter()
        .zip(&end)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        * 0.1;

    let mut solver = Solver::new(&q, m, complex);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(usize, Descent)> = None;
    for index in 0..opts.multistarts {
        let mut nodes = chord_flat.clone();
        if index > 0 {
            for s in 1..m {
                for k in 0..dim {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = if complex { StandardNormal.sample(&mut rng) } else { 0.0 };
                    nodes[s * dim + k] += Complex64::new(re, im) * scale;
                }
            }
        }
        if !solver.admissible(&nodes) || !solver.energy(&nodes).is_finite() {
            continue;
        }
        let run = solver.descend(nodes, opts);
        let better = match &best {
            None => true,
            Some((_, b)) => run.energy < b.energy,
        };
        if better {
            best = Some((index, run));
        }
    }
    let (index, run) =
        best.ok_or_else(|| Error::SolverFailed(format!("all {} starts were degenerate", opts.multistarts)))?;
    let nodes: Vec<Vec<Complex64>> = run.nodes.chunks(dim).map(<[Complex64]>::to_vec).collect();
    let path = PiecewisePath::new(weights.clone(), nodes)?;
    let distance = path_length(&path)?;
    Ok(GeodesicResult {
        distance,
        path,
        converged: run.converged,
        iterations: run.iterations,
        initial_length,
        start: index,
        history: run.history,
    })
}

/// Geodesic distance `d_F` between two classes.
///
/// Both endpoints are normalized geometrically and `p2` is phase-aligned to
/// `p1`; the returned length never exceeds `initial_length`, the length of
/// the chord between them.
pub fn geodesic_distance(p1: &ProjPoint, p2: &ProjPoint, opts: &GeodesicOptions) -> Result<GeodesicResult> {
    p1.weights().ensure_same(p2.weights())?;
    let weights = p1.weights();
    let z = p1.normalize_geometric();
    let w = p2.normalize_geometric();
    let aligned = phase_align(weights.as_slice(), &weights.to_f64(), z.coords(), w.coords());
    solve(weights, z.into_coords(), aligned, true, opts)
}

/// Rational geodesic distance `d_{F,Q}`: the same solver on real lifted
/// paths between the real lifts of two wgcd-1 points, with `p2` aligned by
/// the unit `λ = ±1`.
pub fn geodesic_distance_rational(
    p1: &RatProjPoint,
    p2: &RatProjPoint,
    opts: &GeodesicOptions,
) -> Result<GeodesicResult> {
    p1.weights().ensure_same(p2.weights())?;
    if !p1.is_normalized() || !p2.is_normalized() {
        return Err(Error::NotNormalized);
    }
    let weights = p1.weights();
    let q = weights.to_f64();
    let z = p1.to_proj_point().normalize_geometric();
    let w = p2.to_proj_point().normalize_geometric();
    let flipped = w.act(Complex64::new(-1.0, 0.0))?;
    let end = if weighted_inner(&q, z.coords(), flipped.coords()).re > weighted_inner(&q, z.coords(), w.coords()).re {
        flipped
    } else {
        w
    };
    solve(weights, z.into_coords(), end.into_coords(), false, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn w(q: &[u32]) -> Weights {
        Weights::new(q.to_vec()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn norm_examples() {
        let z = ProjPoint::from_real(w(&[1, 1]), &[1.0, 0.0]).unwrap();
        assert_eq!(finsler_norm(&z, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap(), 0.0);
        assert_eq!(finsler_norm(&z, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap(), 0.0);
        assert_eq!(finsler_norm(&z, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap(), 1.0);
        assert!(finsler_norm(&z, &[c(1.0, 0.0)]).is_err());
        let t = Tangent::new(z, vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(finsler_norm_tangent(&t), 1.0);
    }

    #[test]
    fn rational_norm_examples() {
        let x = RatProjPoint::from_i64(w(&[2, 3]), &[1, 1]).unwrap();
        let r = |n: i64| BigRational::from_integer(BigInt::from(n));
        assert_eq!(finsler_norm_rational(&x, &[r(0), r(0)]).unwrap(), 0.0);
        let f = finsler_norm_rational(&x, &[r(1), r(0)]).unwrap();
        assert!((f - 2f64.sqrt() * 2.0 / 5.0).abs() < 1e-15);
        let f3 = finsler_norm_rational(&x, &[r(3), r(0)]).unwrap();
        assert!((f3 - 9.0 * f).abs() < 1e-12 * f3);
        let unnormalized = RatProjPoint::from_i64(w(&[2, 3]), &[4, 8]).unwrap();
        assert!(matches!(
            finsler_norm_rational(&unnormalized, &[r(1), r(0)]),
            Err(Error::NotNormalized)
        ));
    }

    #[test]
    fn single_segment_length() {
        let path = PiecewisePath::new(
            w(&[1, 1]),
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0), c(1.0, 0.0)]],
        )
        .unwrap();
        assert!((path_length(&path).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn constant_path_has_zero_length() {
        let node = vec![c(0.3, 0.1), c(-0.2, 0.5)];
        let path = PiecewisePath::new(w(&[2, 1]), vec![node; 9]).unwrap();
        assert_eq!(path_length(&path).unwrap(), 0.0);
    }

    #[test]
    fn zero_midpoint_is_degenerate() {
        let path = PiecewisePath::new(
            w(&[1, 1]),
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]],
        )
        .unwrap();
        assert!(matches!(path_length(&path), Err(Error::DegeneratePath(_))));
        assert!(PiecewisePath::new(w(&[1, 1]), vec![vec![c(1.0, 0.0), c(0.0, 0.0)]]).is_err());
        assert!(PiecewisePath::new(
            w(&[1, 1]),
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]
        )
        .is_err());
    }

    #[test]
    fn refining_a_circular_arc_converges() {
        // z(t) = (cos(t π/3), sin(t π/3) e^{i t}) in P_(1,1)
        let arc = |m: usize| {
            let nodes = (0..=m)
                .map(|s| {
                    let t = s as f64 / m as f64;
                    let a = t * std::f64::consts::FRAC_PI_3;
                    vec![c(a.cos(), 0.0), Complex64::from_polar(a.sin(), t)]
                })
                .collect();
            path_length(&PiecewisePath::new(w(&[1, 1]), nodes).unwrap()).unwrap()
        };
        let coarse = arc(64);
        let fine = arc(128);
        assert!((coarse - fine).abs() < 0.01 * fine, "{coarse} vs {fine}");
    }

    #[test]
    fn identical_points_have_zero_distance() {
        let p = ProjPoint::new(w(&[2, 1]), vec![c(0.5, 0.2), c(-0.1, 0.7)]).unwrap();
        let r = geodesic_distance(&p, &p, &GeodesicOptions::default()).unwrap();
        assert!(r.distance <= 1e-8, "{}", r.distance);
        let x = RatProjPoint::from_i64(w(&[2, 3]), &[3, 5]).unwrap();
        let r = geodesic_distance_rational(&x, &x, &GeodesicOptions::default()).unwrap();
        assert!(r.distance <= 1e-8);
    }

    #[test]
    fn solver_never_exceeds_chord_and_decreases_monotonically() {
        let p = ProjPoint::new(w(&[2, 1]), vec![c(0.5, 0.2), c(-0.1, 0.7)]).unwrap();
        let q = ProjPoint::new(w(&[2, 1]), vec![c(-0.3, 0.9), c(0.4, -0.2)]).unwrap();
        let r = geodesic_distance(&p, &q, &GeodesicOptions::default()).unwrap();
        assert!(r.distance <= r.initial_length);
        assert!(r.history.windows(2).all(|h| h[1] < h[0]));
        assert!((r.distance - path_length(&r.path).unwrap()).abs() <= 1e-10);
        assert_eq!(r.path.segments(), 16);
    }

    #[test]
    fn options_are_validated() {
        let p = ProjPoint::from_real(w(&[2, 1]), &[1.0, 0.0]).unwrap();
        let bad = GeodesicOptions {
            segments: 1,
            ..Default::default()
        };
        assert!(matches!(geodesic_distance(&p, &p, &bad), Err(Error::InvalidOption(_))));
    }

    #[test]
    fn normalized_chord_has_zero_length() {
        // Unit-norm nodes with real consecutive pairings make every C vanish.
        // Pick the unit e^{iψ} making ⟨z, e^{iψ}·w⟩_q real, then project the
        // chord onto the unit sphere: the discrete length is 0.
        let q = w(&[2, 1]);
        let qf = q.to_f64();
        let z = ProjPoint::new(q.clone(), vec![c(0.5, 0.2), c(-0.1, 0.7)])
            .unwrap()
            .normalize_geometric();
        let far = ProjPoint::new(q.clone(), vec![c(-0.3, 0.9), c(0.4, -0.2)])
            .unwrap()
            .normalize_geometric();
        let rotated = |psi: f64| far.act(Complex64::from_polar(1.0, psi)).unwrap();
        let imag = |psi: f64| weighted_inner(&qf, z.coords(), rotated(psi).coords()).im;
        let (mut lo, mut hi) = (0.0, 0.0);
        for i in 0..64 {
            let (a, b) = (i as f64 * 0.1, (i + 1) as f64 * 0.1);
            if imag(a) * imag(b) <= 0.0 && weighted_inner(&qf, z.coords(), rotated(a).coords()).re > 0.0 {
                (lo, hi) = (a, b);
                break;
            }
        }
        assert!(hi > 0.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if imag(lo) * imag(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let end = rotated(lo);
        let chord = PiecewisePath::chord(q.clone(), z.coords(), end.coords(), 16).unwrap();
        let nodes = chord
            .nodes()
            .iter()
            .map(|n| {
                ProjPoint::new(q.clone(), n.clone())
                    .unwrap()
                    .normalize_geometric()
                    .into_coords()
            })
            .collect();
        let projected = PiecewisePath::new(q, nodes).unwrap();
        let chord_len = path_length(&chord).unwrap();
        let projected_len = path_length(&projected).unwrap();
        assert!(chord_len > 1e-2, "{chord_len}");
        assert!(projected_len < 1e-12, "{projected_len}");
    }

    #[test]
    fn phase_alignment_recovers_rotated_copy() {
        let q = [2u32, 3, 5];
        let qf = [2.0, 3.0, 5.0];
        let z = vec![c(0.3, 0.1), c(-0.2, 0.25), c(0.05, -0.1)];
        let rot = Complex64::from_polar(1.0, 0.9);
        let w: Vec<Complex64> = z.iter().zip(&q).map(|(x, &k)| rot.powu(k) * x).collect();
        let aligned = phase_align(&q, &qf, &z, &w);
        for (a, b) in aligned.iter().zip(&z) {
            assert!((a - b).norm() < 1e-9);
        }
    }
}
