//! Point-set files.
//!
//! JSON, complex points:
//! `{"weights":[q0,…], "points":[{"re":[…],"im":[…]},…]}`
//!
//! JSON, rational points:
//! `{"weights":[q0,…], "points":[[x0,…],…]}`. Integers that do not fit in 64
//! bits are accepted and written as decimal strings.
//!
//! CSV: a header line `# weights: q0 q1 …`, then one row per point, either
//! `re0,im0,re1,im1,…` (complex) or `x0,x1,…` (rational). Other lines
//! starting with `#` are comments.

use num_bigint::BigInt;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::point::{ProjPoint, RatProjPoint, Weights};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Complex,
    Rational,
}

/// A homogeneous list of points sharing one weight vector.
#[derive(Debug, Clone, PartialEq)]
pub enum PointSet {
    Complex {
        weights: Weights,
        points: Vec<ProjPoint>,
    },
    Rational {
        weights: Weights,
        points: Vec<RatProjPoint>,
    },
}

impl PointSet {
    pub fn weights(&self) -> &Weights {
        match self {
            PointSet::Complex { weights, .. } | PointSet::Rational { weights, .. } => weights,
        }
    }

    pub fn kind(&self) -> PointKind {
        match self {
            PointSet::Complex { .. } => PointKind::Complex,
            PointSet::Rational { .. } => PointKind::Rational,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            PointSet::Complex { points, .. } => points.len(),
            PointSet::Rational { points, .. } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        Self::from_json_value(&value)
    }

    pub fn from_json_value(value: &Value) -> Result<Self> {
        let weights = value
            .get("weights")
            .ok_or_else(|| Error::Format("missing \"weights\"".into()))?;
        let weights: Weights =
            serde_json::from_value(weights.clone()).map_err(|e| Error::Format(format!("field \"weights\": {e}")))?;
        let points = value
            .get("points")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Format("missing \"points\" array".into()))?;

        let complex = points.first().is_none_or(Value::is_object);
        if complex {
            let points = points
                .iter()
                .enumerate()
                .map(|(i, p)| complex_point_from_json(&weights, p).map_err(|e| at_point(i, e)))
                .collect::<Result<Vec<_>>>()?;
            Ok(PointSet::Complex { weights, points })
        } else {
            let points = points
                .iter()
                .enumerate()
                .map(|(i, p)| rational_point_from_json(&weights, p).map_err(|e| at_point(i, e)))
                .collect::<Result<Vec<_>>>()?;
            Ok(PointSet::Rational { weights, points })
        }
    }

    pub fn to_json_value(&self) -> Value {
        match self {
            PointSet::Complex { weights, points } => {
                let points: Vec<Value> = points
                    .iter()
                    .map(|p| {
                        let re: Vec<f64> = p.coords().iter().map(|c| c.re).collect();
                        let im: Vec<f64> = p.coords().iter().map(|c| c.im).collect();
                        json!({ "re": re, "im": im })
                    })
                    .collect();
                json!({ "weights": weights, "points": points })
            }
            PointSet::Rational { weights, points } => {
                let points: Vec<Value> = points
                    .iter()
                    .map(|p| Value::Array(p.coords().iter().map(bigint_to_json).collect()))
                    .collect();
                json!({ "weights": weights, "points": points })
            }
        }
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut weights: Option<Weights> = None;
        let mut complex = Vec::new();
        let mut rational = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(rest) = comment.trim().strip_prefix("weights:") {
                    let parsed = rest.parse::<Weights>().map_err(|e| Error::Parse {
                        line: line_no,
                        msg: e.to_string(),
                    })?;
                    weights = Some(parsed);
                }
                continue;
            }
            let weights = weights.as_ref().ok_or_else(|| Error::Parse {
                line: line_no,
                msg: "data row before the `# weights:` header".into(),
            })?;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let n = weights.len();
            let parse_err = |field: usize, msg: String| Error::Parse {
                line: line_no,
                msg: format!("field {}: {msg}", field + 1),
            };
            if fields.len() == 2 * n {
                let mut values = Vec::with_capacity(2 * n);
                for (f, s) in fields.iter().enumerate() {
                    values.push(
                        s.parse::<f64>()
                            .map_err(|_| parse_err(f, format!("not a number: {s:?}")))?,
                    );
                }
                let coords = values.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
                let p = ProjPoint::new(weights.clone(), coords).map_err(|e| Error::Parse {
                    line: line_no,
                    msg: e.to_string(),
                })?;
                complex.push(p);
            } else if fields.len() == n {
                let mut coords = Vec::with_capacity(n);
                for (f, s) in fields.iter().enumerate() {
                    coords.push(
                        s.parse::<BigInt>()
                            .map_err(|_| parse_err(f, format!("not an integer: {s:?}")))?,
                    );
                }
                let p = RatProjPoint::new(weights.clone(), coords).map_err(|e| Error::Parse {
                    line: line_no,
                    msg: e.to_string(),
                })?;
                rational.push(p);
            } else {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!(
                        "expected {} (rational) or {} (complex) fields, found {}",
                        n,
                        2 * n,
                        fields.len()
                    ),
                });
            }
            if !complex.is_empty() && !rational.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "mixed complex and rational rows".into(),
                });
            }
        }
        let weights = weights.ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing `# weights:` header".into(),
        })?;
        if rational.is_empty() {
            Ok(PointSet::Complex {
                weights,
                points: complex,
            })
        } else {
            Ok(PointSet::Rational {
                weights,
                points: rational,
            })
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.weights().as_slice().iter().map(u32::to_string).collect();
        out.push_str(&format!("# weights: {}\n", header.join(" ")));
        match self {
            PointSet::Complex { points, .. } => {
                for p in points {
                    let row: Vec<String> = p
                        .coords()
                        .iter()
                        .flat_map(|c| [format_float(c.re), format_float(c.im)])
                        .collect();
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
            }
            PointSet::Rational { points, .. } => {
                for p in points {
                    let row: Vec<String> = p.coords().iter().map(BigInt::to_string).collect();
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Formats a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn at_point(i: usize, e: Error) -> Error {
    Error::Format(format!("point {i}: {e}"))
}

fn complex_point_from_json(weights: &Weights, p: &Value) -> Result<ProjPoint> {
    let part = |name: &str| -> Result<Vec<f64>> {
        let arr = p
            .get(name)
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Format(format!("missing \"{name}\" array")))?;
        arr.iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| Error::Format(format!("non-numeric entry in \"{name}\"")))
            })
            .collect()
    };
    let re = part("re")?;
    let im = part("im")?;
    if re.len() != im.len() {
        return Err(Error::Format(format!(
            "\"re\" has {} entries, \"im\" has {}",
            re.len(),
            im.len()
        )));
    }
    let coords = re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect();
    ProjPoint::new(weights.clone(), coords)
}

fn rational_point_from_json(weights: &Weights, p: &Value) -> Result<RatProjPoint> {
    let arr = p
        .as_array()
        .ok_or_else(|| Error::Format("expected an array of integers".into()))?;
    let coords = arr.iter().map(bigint_from_json).collect::<Result<Vec<_>>>()?;
    if coords.len() != weights.len() {
        return Err(Error::Format(format!(
            "{} coordinates for {} weights",
            coords.len(),
            weights.len()
        )));
    }
    RatProjPoint::new(weights.clone(), coords)
}

fn bigint_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                Err(Error::Format(format!("not an integer: {n}")))
            }
        }
        Value::String(s) => s
            .parse::<BigInt>()
            .map_err(|_| Error::Format(format!("not an integer: {s:?}"))),
        other => Err(Error::Format(format!("not an integer: {other}"))),
    }
}

fn bigint_to_json(x: &BigInt) -> Value {
    match i64::try_from(x) {
        Ok(i) => Value::from(i),
        Err(_) => Value::String(x.to_string()),
    }
}
