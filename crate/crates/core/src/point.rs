//! Points of a weighted projective space and the weighted scaling action.
//!
//! A class `[z]` in `P_q` is carried by one representative `z`, a nonzero
//! coordinate vector together with its weight vector `q`. Two
//! representatives are in the same class when
//! `w_k = λ^{q_k} z_k` for one nonzero scalar `λ` and every `k`.
//!
//! Complex points are [`ProjPoint`]; integer points over `Q` are
//! [`RatProjPoint`], carried exactly as big integers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive integer weights `(q_0, …, q_n)`, at least two of them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Weights(Vec<u32>);

impl Weights {
    pub fn new(q: Vec<u32>) -> Result<Self> {
        if q.len() < 2 {
            return Err(Error::InvalidWeights(format!(
                "need at least two weights, got {}",
                q.len()
            )));
        }
        if let Some(bad) = q.iter().find(|&&w| w == 0) {
            return Err(Error::InvalidWeights(format!("weight {bad} is not positive")));
        }
        Ok(Self(q))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Least common multiple of all weights.
    pub fn lcm(&self) -> u64 {
        self.0.iter().fold(1u64, |acc, &q| acc.lcm(&u64::from(q)))
    }

    pub(crate) fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&q| f64::from(q)).collect()
    }

    pub(crate) fn ensure_same(&self, other: &Weights) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::WeightMismatch {
                left: self.0.clone(),
                right: other.0.clone(),
            })
        }
    }
}

impl TryFrom<Vec<u32>> for Weights {
    type Error = Error;

    fn try_from(q: Vec<u32>) -> Result<Self> {
        Self::new(q)
    }
}

impl From<Weights> for Vec<u32> {
    fn from(w: Weights) -> Self {
        w.0
    }
}

impl FromStr for Weights {
    type Err = Error;

    /// Accepts `2,4,6,10`, `2 4 6 10` or `(2,4,6,10)`.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let q = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| Error::InvalidWeights(format!("cannot parse weight {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(q)
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Weighted inner product `Σ q_k a_k conj(b_k)`.
pub(crate) fn weighted_inner(q: &[f64], a: &[Complex64], b: &[Complex64]) -> Complex64 {
    q.iter()
        .zip(a.iter().zip(b))
        .map(|(&qk, (ak, bk))| ak * bk.conj() * qk)
        .sum()
}

/// Squared weighted norm `Σ q_k |z_k|²`.
pub(crate) fn weighted_norm_sqr(q: &[f64], z: &[Complex64]) -> f64 {
    q.iter().zip(z).map(|(&qk, zk)| qk * zk.norm_sqr()).sum()
}

/// A complex representative of a class in `P_q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjPoint {
    weights: Weights,
    coords: Vec<Complex64>,
}

impl ProjPoint {
    pub fn new(weights: Weights, coords: Vec<Complex64>) -> Result<Self> {
        if coords.len() != weights.len() {
            return Err(Error::InvalidPoint(format!(
                "{} coordinates for {} weights",
                coords.len(),
                weights.len()
            )));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        if coords.iter().all(|c| c.is_zero()) {
            return Err(Error::InvalidPoint("all coordinates are zero".into()));
        }
        Ok(Self { weights, coords })
    }

    /// Representative with real coordinates.
    pub fn from_real(weights: Weights, coords: &[f64]) -> Result<Self> {
        Self::new(weights, coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.coords
    }

    /// `‖z‖_q = (Σ q_k |z_k|²)^{1/2}`, strictly positive for a valid point.
    pub fn weighted_norm(&self) -> f64 {
        weighted_norm_sqr(&self.weights.to_f64(), &self.coords).sqrt()
    }

    /// Divides the coordinates by the positive real `‖z‖_q`.
    ///
    /// This is plain scalar division, not the group action, so for
    /// non-uniform weights the result is in general a different class.
    pub fn normalize_geometric(&self) -> ProjPoint {
        let norm = self.weighted_norm();
        ProjPoint {
            weights: self.weights.clone(),
            coords: self.coords.iter().map(|c| c / norm).collect(),
        }
    }

    /// The weighted action `z_k ↦ λ^{q_k} z_k`.
    pub fn act(&self, lambda: Complex64) -> Result<ProjPoint> {
        if lambda.is_zero() || !lambda.re.is_finite() || !lambda.im.is_finite() {
            return Err(Error::InvalidScalar);
        }
        let coords = self
            .coords
            .iter()
            .zip(self.weights.as_slice())
            .map(|(z, &q)| lambda.powu(q) * z)
            .collect();
        Ok(ProjPoint {
            weights: self.weights.clone(),
            coords,
        })
    }

    /// Tests whether `self` and `other` represent the same class.
    ///
    /// With `L = lcm(q)`, the classes agree iff the zero patterns agree and
    /// `(w_k / z_k)^{L/q_k}` is the same complex number for every nonzero
    /// `z_k`. The comparison is done on logarithms: log-moduli must agree
    /// within `tol` and the arguments within `tol` modulo `2π`, which is a
    /// relative comparison of the ratios to first order.
    pub fn equivalent(&self, other: &ProjPoint, tol: f64) -> Result<bool> {
        self.weights.ensure_same(&other.weights)?;
        let lcm = self.weights.lcm() as f64;
        let mut reference: Option<(f64, f64)> = None;
        for ((z, w), &q) in self.coords.iter().zip(&other.coords).zip(self.weights.as_slice()) {
            match (z.is_zero(), w.is_zero()) {
                (true, true) => continue,
                (true, false) | (false, true) => return Ok(false),
                (false, false) => {}
            }
            let power = lcm / f64::from(q);
            let log_mod = power * (w.norm().ln() - z.norm().ln());
            let arg = power * (w.arg() - z.arg());
            match reference {
                None => reference = Some((log_mod, arg)),
                Some((m0, a0)) => {
                    if (log_mod - m0).abs() > tol || wrapped_angle(arg - a0).abs() > tol {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Maps an angle to `(-π, π]`.
fn wrapped_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let r = a.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r - two_pi
    } else {
        r
    }
}

/// A tangent vector `v` attached to a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    base: ProjPoint,
    v: Vec<Complex64>,
}

impl Tangent {
    pub fn new(base: ProjPoint, v: Vec<Complex64>) -> Result<Self> {
        if v.len() != base.coords.len() {
            return Err(Error::InvalidPoint(format!(
                "tangent has {} components, base has {}",
                v.len(),
                base.coords.len()
            )));
        }
        Ok(Self { base, v })
    }

    pub fn base(&self) -> &ProjPoint {
        &self.base
    }

    pub fn vector(&self) -> &[Complex64] {
        &self.v
    }
}

/// Valuation of `p` in `x` (x nonzero).
fn valuation(x: &BigUint, p: &BigUint) -> u64 {
    let mut v = 0;
    let mut rest = x.clone();
    loop {
        let (quot, rem) = rest.div_rem(p);
        if !rem.is_zero() {
            return v;
        }
        rest = quot;
        v += 1;
    }
}

/// Weighted gcd: the largest `d ≥ 1` with `d^{q_i} | x_i` for every `i`.
///
/// Zero coordinates impose no constraint. Every admissible `d` divides the
/// ordinary gcd of the nonzero coordinates, so `d` is assembled prime by
/// prime from the factorization of that gcd: the exponent of `p` in `d` is
/// `min_i ⌊v_p(x_i) / q_i⌋` over the nonzero `x_i`.
pub fn wgcd(x: &[BigInt], q: &Weights) -> Result<BigUint> {
    if x.len() != q.len() {
        return Err(Error::InvalidPoint(format!(
            "{} coordinates for {} weights",
            x.len(),
            q.len()
        )));
    }
    let nonzero: Vec<(BigUint, u32)> = x
        .iter()
        .zip(q.as_slice())
        .filter(|(xi, _)| !xi.is_zero())
        .map(|(xi, &qi)| (xi.magnitude().clone(), qi))
        .collect();
    if nonzero.is_empty() {
        return Err(Error::InvalidPoint("all coordinates are zero".into()));
    }
    let g = nonzero.iter().fold(BigUint::zero(), |acc, (xi, _)| acc.gcd(xi));
    if g.is_one() {
        return Ok(g);
    }
    let factors: BTreeMap<BigUint, usize> = num_prime::nt_funcs::factorize(g);
    let mut d = BigUint::one();
    for p in factors.keys() {
        let exponent = nonzero
            .iter()
            .map(|(xi, qi)| valuation(xi, p) / u64::from(*qi))
            .min()
            .unwrap_or(0);
        if exponent > 0 {
            d *= num_traits::pow(p.clone(), exponent as usize);
        }
    }
    Ok(d)
}

/// An integer representative of a class in `P_q(Q)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatProjPoint {
    weights: Weights,
    coords: Vec<BigInt>,
    normalized: bool,
}

impl RatProjPoint {
    /// Builds a point; the normalized flag is set iff `wgcd = 1`.
    pub fn new(weights: Weights, coords: Vec<BigInt>) -> Result<Self> {
        let d = wgcd(&coords, &weights)?;
        Ok(Self {
            weights,
            coords,
            normalized: d.is_one(),
        })
    }

    pub fn from_i64(weights: Weights, coords: &[i64]) -> Result<Self> {
        Self::new(weights, coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn wgcd(&self) -> BigUint {
        // Invariant of construction: coords are nonzero and match weights.
        wgcd(&self.coords, &self.weights).expect("valid rational point")
    }

    /// Canonical representative: divides by `d^{q_i}` with `d = wgcd`, then
    /// acts by `λ = −1` if the lowest-index nonzero coordinate of odd weight
    /// is negative.
    pub fn normalize(&self) -> RatProjPoint {
        let d = BigInt::from(self.wgcd());
        let mut coords: Vec<BigInt> = self
            .coords
            .iter()
            .zip(self.weights.as_slice())
            .map(|(x, &q)| x / num_traits::pow(d.clone(), q as usize))
            .collect();
        let q = self.weights.as_slice();
        let flip = coords
            .iter()
            .zip(q)
            .find(|(x, &qi)| qi % 2 == 1 && !x.is_zero())
            .is_some_and(|(x, _)| x.is_negative());
        if flip {
            for (x, &qi) in coords.iter_mut().zip(q) {
                if qi % 2 == 1 {
                    *x = -&*x;
                }
            }
        }
        RatProjPoint {
            weights: self.weights.clone(),
            coords,
            normalized: true,
        }
    }

    /// `max_i |x_i|^{1/q_i}` on the canonical representative.
    ///
    /// Exact perfect powers give exact integer roots.
    pub fn weighted_height(&self) -> f64 {
        let canonical;
        let point = if self.normalized {
            self
        } else {
            canonical = self.normalize();
            &canonical
        };
        point
            .coords
            .iter()
            .zip(point.weights.as_slice())
            .map(|(x, &q)| integer_root_f64(x.magnitude(), q))
            .fold(0.0, f64::max)
    }

    /// Real lift as a complex point.
    pub fn to_proj_point(&self) -> ProjPoint {
        let coords = self
            .coords
            .iter()
            .map(|x| Complex64::new(bigint_to_f64(x), 0.0))
            .collect();
        ProjPoint {
            weights: self.weights.clone(),
            coords,
        }
    }
}

impl fmt::Display for RatProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(BigInt::to_string).collect();
        write!(f, "[{}]", parts.join(" : "))
    }
}

pub(crate) fn bigint_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(if x.sign() == Sign::Minus {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

/// `x^{1/q}`, exact when `x` is a perfect `q`-th power.
fn integer_root_f64(x: &BigUint, q: u32) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let root = x.nth_root(q);
    if num_traits::pow(root.clone(), q as usize) == *x {
        return root.to_f64().unwrap_or(f64::INFINITY);
    }
    match x.to_f64() {
        Some(v) if v.is_finite() => v.powf(1.0 / f64::from(q)),
        _ => {
            // ln x = ln(x >> s) + s ln 2 for huge x
            let shift = x.bits().saturating_sub(64);
            let head = (x >> shift).to_f64().unwrap_or(f64::MAX);
            ((head.ln() + shift as f64 * std::f64::consts::LN_2) / f64::from(q)).exp()
        }
    }
}
