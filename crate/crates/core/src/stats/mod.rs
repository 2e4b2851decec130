//! Estimation and comparison utilities shared by the simulators.
//!
//! All reductions over replications are chunked with a fixed chunk size and
//! combined by a pairwise tree, so results are bit-identical for any number
//! of worker threads.

mod ecf;
pub mod quad;

pub use ecf::{cf_distance, empirical_cf, CfDistance, CfEstimate, CfReport, EmpiricalCf, ThetaGrid};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows per reduction chunk. Fixed so that the summation order never depends on scheduling.
pub(crate) const CHUNK_ROWS: usize = 4096;

/// Row-major `N × n` matrix of replications.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Build an `N × n` matrix by evaluating `f(k)` for each replication `k`
    /// in parallel; `f` must return exactly `cols` values.
    pub fn generate<F>(rows: usize, cols: usize, f: F) -> Result<Self>
    where
        F: Fn(u64) -> Result<Vec<f64>> + Sync,
    {
        let per_row: Vec<Vec<f64>> = (0..rows as u64)
            .into_par_iter()
            .map(&f)
            .collect::<Result<_>>()?;
        let mut data = Vec::with_capacity(rows * cols);
        for r in per_row {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend(r);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.cols..(k + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter_rows().map(|r| r[j]).collect()
    }

    pub(crate) fn chunks(&self) -> impl IndexedParallelIterator<Item = &[f64]> {
        self.data.par_chunks(CHUNK_ROWS * self.cols.max(1))
    }
}

/// Pairwise (tree) reduction in a fixed order.
pub(crate) fn tree_sum<T, F>(mut parts: Vec<T>, add: F) -> Option<T>
where
    T: Clone,
    F: Fn(&T, &T) -> T,
{
    if parts.is_empty() {
        return None;
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        for pair in parts.chunks(2) {
            match pair {
                [a, b] => next.push(add(a, b)),
                [a] => next.push(a.clone()),
                _ => unreachable!(),
            }
        }
        parts = next;
    }
    parts.pop()
}

fn add_vecs(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// `|value - target| <= k * stderr`
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

/// Column means with standard errors.
pub fn column_means(samples: &SampleMatrix) -> Vec<Estimate> {
    let n = samples.cols();
    let parts: Vec<Vec<f64>> = samples
        .chunks()
        .map(|chunk| {
            let mut acc = vec![0.0; 2 * n];
            for row in chunk.chunks_exact(n) {
                for (j, &x) in row.iter().enumerate() {
                    acc[2 * j] += x;
                    acc[2 * j + 1] += x * x;
                }
            }
            acc
        })
        .collect();
    let total = tree_sum(parts, |a, b| add_vecs(a, b)).unwrap_or_else(|| vec![0.0; 2 * n]);
    let count = samples.rows() as f64;
    (0..n)
        .map(|j| {
            let mean = total[2 * j] / count;
            let var = if count > 1.0 {
                ((total[2 * j + 1] - count * mean * mean) / (count - 1.0)).max(0.0)
            } else {
                0.0
            };
            Estimate {
                value: mean,
                stderr: (var / count).sqrt(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovEstimate {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub stderr: f64,
}

/// Unbiased sample covariance for each requested column pair.
///
/// The standard error is the sample standard deviation of the centred
/// products divided by `sqrt(N)`.
pub fn empirical_cov(samples: &SampleMatrix, pairs: &[(usize, usize)]) -> Result<Vec<CovEstimate>> {
    let n = samples.cols();
    if samples.rows() < 2 {
        return Err(Error::Precondition("covariance needs at least two rows".into()));
    }
    for &(i, j) in pairs {
        if i >= n || j >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: i.max(j) + 1,
            });
        }
    }
    let means: Vec<f64> = column_means(samples).iter().map(|e| e.value).collect();
    let p = pairs.len();
    let parts: Vec<Vec<f64>> = samples
        .chunks()
        .map(|chunk| {
            let mut acc = vec![0.0; 2 * p];
            for row in chunk.chunks_exact(n) {
                for (k, &(i, j)) in pairs.iter().enumerate() {
                    let prod = (row[i] - means[i]) * (row[j] - means[j]);
                    acc[2 * k] += prod;
                    acc[2 * k + 1] += prod * prod;
                }
            }
            acc
        })
        .collect();
    let total = tree_sum(parts, |a, b| add_vecs(a, b)).unwrap_or_else(|| vec![0.0; 2 * p]);
    let count = samples.rows() as f64;
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let mean_prod = total[2 * k] / count;
            let var_prod = ((total[2 * k + 1] / count) - mean_prod * mean_prod).max(0.0);
            CovEstimate {
                i,
                j,
                value: total[2 * k] / (count - 1.0),
                stderr: (var_prod / count).sqrt(),
            }
        })
        .collect())
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
