use std::collections::HashMap;

use crate::error::{Error, Result};

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1) / 2) as f64
}

struct Table {
    pairs: f64,
    joint: f64,
    rows: f64,
    cols: f64,
}

fn contingency(a: &[usize], b: &[usize]) -> Result<Table> {
    if a.len() != b.len() {
        return Err(Error::InvalidOption(format!(
            "partitions have {} and {} elements",
            a.len(),
            b.len()
        )));
    }
    let mut joint: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let sum = |m: &mut dyn Iterator<Item = u64>| m.map(choose2).sum::<f64>();
    Ok(Table {
        pairs: choose2(a.len() as u64),
        joint: sum(&mut joint.into_values()),
        rows: sum(&mut rows.into_values()),
        cols: sum(&mut cols.into_values()),
    })
}

/// Fraction of point pairs on which two partitions agree.
pub fn rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = contingency(a, b)?;
    if t.pairs == 0.0 {
        return Ok(1.0);
    }
    Ok((t.pairs + 2.0 * t.joint - t.rows - t.cols) / t.pairs)
}

/// Hubert-Arabie adjusted Rand index; 1 for identical partitions up to
/// relabeling.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = contingency(a, b)?;
    if t.pairs == 0.0 {
        return Ok(1.0);
    }
    let expected = t.rows * t.cols / t.pairs;
    let max = 0.5 * (t.rows + t.cols);
    if max == expected {
        return Ok(1.0);
    }
    Ok((t.joint - expected) / (max - expected))
}
