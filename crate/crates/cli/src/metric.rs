use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, Result};
use clap::Args;
use finsler_wps::finsler::{geodesic_distance, geodesic_distance_rational, GeodesicOptions, GeodesicResult};
use finsler_wps::io::PointSet;
use finsler_wps::scaling::{
    chord_distance, dissimilarity, dissimilarity_rational, DissimilarityOptions, RationalScanOptions,
};
use finsler_wps::{ProjPoint, RatProjPoint};
use serde::{Deserialize, Serialize};

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Chord,
    Dissimilarity,
    Finsler,
    RationalDissimilarity,
    RationalFinsler,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Chord,
        Metric::Dissimilarity,
        Metric::Finsler,
        Metric::RationalDissimilarity,
        Metric::RationalFinsler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Chord => "chord",
            Metric::Dissimilarity => "dissimilarity",
            Metric::Finsler => "finsler",
            Metric::RationalDissimilarity => "rational-dissimilarity",
            Metric::RationalFinsler => "rational-finsler",
        }
    }

    pub fn is_rational(self) -> bool {
        matches!(self, Metric::RationalDissimilarity | Metric::RationalFinsler)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric {s:?}; expected one of chord, dissimilarity, finsler, rational-dissimilarity, rational-finsler"))
    }
}

/// Optimizer settings shared by every metric-evaluating subcommand.
#[derive(Debug, Clone, Args, Serialize)]
pub struct OptimizerArgs {
    /// Path segments for geodesic solves.
    #[arg(long, default_value_t = 16)]
    pub segments: usize,
    /// Iteration cap for the geodesic solver and the dissimilarity refinement.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Geodesic solver starts.
    #[arg(long, default_value_t = 3)]
    pub multistarts: usize,
    /// Height bound H of the rational scaling scan.
    #[arg(long, default_value_t = 50)]
    pub height_bound: u64,
    /// Skip geometric normalization before the dissimilarity search.
    #[arg(long)]
    pub raw: bool,
}

impl OptimizerArgs {
    pub fn geodesic(&self, seed: u64) -> GeodesicOptions {
        let d = GeodesicOptions::default();
        GeodesicOptions {
            segments: self.segments,
            max_iters: self.iters.unwrap_or(d.max_iters),
            multistarts: self.multistarts,
            seed,
            ..d
        }
    }

    pub fn dissimilarity(&self, seed: u64) -> DissimilarityOptions {
        let d = DissimilarityOptions::default();
        DissimilarityOptions {
            normalize_inputs: !self.raw,
            refine_iters: self.iters.unwrap_or(d.refine_iters),
            seed,
            ..d
        }
    }

    pub fn rational(&self) -> RationalScanOptions {
        RationalScanOptions {
            height_bound: self.height_bound,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geodesic(0)
            .validate()
            .map_err(|e| UsageError::new(e.to_string()))?;
        self.dissimilarity(0)
            .validate()
            .map_err(|e| UsageError::new(e.to_string()))?;
        if self.height_bound < 1 {
            return Err(UsageError::new("--height-bound must be at least 1").into());
        }
        Ok(())
    }
}

/// A metric bound to the points of one dataset.
pub enum Oracle {
    Complex {
        metric: Metric,
        points: Vec<ProjPoint>,
        dissimilarity: DissimilarityOptions,
        geodesic: GeodesicOptions,
    },
    Rational {
        metric: Metric,
        points: Vec<RatProjPoint>,
        scan: RationalScanOptions,
        geodesic: GeodesicOptions,
    },
}

impl Oracle {
    /// `seed` drives the optimizers' random starts.
    pub fn new(metric: Metric, set: PointSet, opts: &OptimizerArgs, seed: u64) -> Result<Self> {
        match set {
            PointSet::Complex { points, .. } if !metric.is_rational() => Ok(Oracle::Complex {
                metric,
                points,
                dissimilarity: opts.dissimilarity(seed),
                geodesic: opts.geodesic(seed),
            }),
            PointSet::Rational { points, .. } if metric.is_rational() => Ok(Oracle::Rational {
                metric,
                points: points.iter().map(RatProjPoint::normalize).collect(),
                scan: opts.rational(),
                geodesic: opts.geodesic(seed),
            }),
            PointSet::Complex { .. } => Err(UsageError::new(format!(
                "metric {metric} needs integer points, but the input holds complex points"
            ))
            .into()),
            PointSet::Rational { .. } => Err(UsageError::new(format!(
                "metric {metric} needs complex points, but the input holds integer points"
            ))
            .into()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Oracle::Complex { points, .. } => points.len(),
            Oracle::Rational { points, .. } => points.len(),
        }
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(UsageError::new(format!("index {i} is out of range for {} points", self.len())).into());
        }
        Ok(())
    }

    /// Geodesic solve for the Finsler metrics, `None` for the others.
    pub fn geodesic(&self, i: usize, j: usize) -> finsler_wps::Result<Option<GeodesicResult>> {
        match self {
            Oracle::Complex {
                metric: Metric::Finsler,
                points,
                geodesic,
                ..
            } => geodesic_distance(&points[i], &points[j], geodesic).map(Some),
            Oracle::Rational {
                metric: Metric::RationalFinsler,
                points,
                geodesic,
                ..
            } => geodesic_distance_rational(&points[i], &points[j], geodesic).map(Some),
            _ => Ok(None),
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> finsler_wps::Result<f64> {
        if let Some(g) = self.geodesic(i, j)? {
            return Ok(g.distance);
        }
        match self {
            Oracle::Complex {
                metric,
                points,
                dissimilarity: opts,
                ..
            } => match metric {
                Metric::Chord => chord_distance(&points[i], &points[j]),
                _ => dissimilarity(&points[i], &points[j], opts),
            },
            Oracle::Rational { points, scan, .. } => dissimilarity_rational(&points[i], &points[j], scan),
        }
    }
}

pub fn parse_metric_list(s: &str) -> Result<Vec<Metric>> {
    let metrics = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Metric>().map_err(|e| anyhow!(UsageError::new(e))))
        .collect::<Result<Vec<_>>>()?;
    if metrics.is_empty() {
        return Err(UsageError::new("--metrics is empty").into());
    }
    Ok(metrics)
}
