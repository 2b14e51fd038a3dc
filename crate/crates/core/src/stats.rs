use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean, sample standard deviation (`n - 1` denominator) and standard error
/// of the mean over replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sem: f64,
    pub sd: f64,
    pub reps: usize,
}

pub fn aggregate_replications(values: &[f64]) -> Result<Summary> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewReplications(n));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    Ok(Summary {
        mean,
        sem: sd / (n as f64).sqrt(),
        sd,
        reps: n,
    })
}

/// Pointwise mean of equal-length series.
pub fn mean_curve(series: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = series.first() else {
        return Vec::new();
    };
    let mut acc = vec![0.0; first.len()];
    for s in series {
        assert_eq!(s.len(), acc.len(), "series lengths differ");
        for (a, v) in acc.iter_mut().zip(s) {
            *a += v;
        }
    }
    let n = series.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}
