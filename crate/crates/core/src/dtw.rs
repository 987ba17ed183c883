//! Dynamic time warping with absolute-difference local cost.
//!
//! Warping steps are index steps: on non-uniform time grids the gap between
//! two samples in minutes plays no role. An optional Sakoe-Chiba band limits
//! `|i - j|`.

use serde::{Deserialize, Serialize};

use crate::error::DtwError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct DtwConfig {
    /// Sakoe-Chiba half-width in steps; `None` is exact DTW.
    #[serde(default)]
    pub window: Option<usize>,
}

impl DtwConfig {
    pub fn exact() -> Self {
        Self { window: None }
    }

    pub fn with_window(window: usize) -> Self {
        Self {
            window: Some(window),
        }
    }

    fn check(&self, len_a: usize, len_b: usize) -> Result<(), DtwError> {
        if len_a == 0 || len_b == 0 {
            return Err(DtwError::Empty);
        }
        if let Some(w) = self.window {
            if w < len_a.abs_diff(len_b) {
                return Err(DtwError::InfeasibleWindow {
                    window: w,
                    len_a,
                    len_b,
                });
            }
        }
        Ok(())
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        self.window.is_none_or(|w| i.abs_diff(j) <= w)
    }
}

/// Accumulated cost matrix, row-major `(len_a) x (len_b)`, `INFINITY` outside the band.
fn cost_matrix(a: &[f64], b: &[f64], cfg: &DtwConfig) -> Vec<f64> {
    let (n, m) = (a.len(), b.len());
    let mut acc = vec![f64::INFINITY; n * m];
    for i in 0..n {
        for j in 0..m {
            if !cfg.in_band(i, j) {
                continue;
            }
            let local = (a[i] - b[j]).abs();
            let prev = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => acc[j - 1],
                (_, 0) => acc[(i - 1) * m],
                _ => acc[(i - 1) * m + j - 1]
                    .min(acc[(i - 1) * m + j])
                    .min(acc[i * m + j - 1]),
            };
            acc[i * m + j] = local + prev;
        }
    }
    acc
}

/// Minimum total `|a_i - b_j|` over all monotone warping paths.
pub fn dtw_distance(a: &[f64], b: &[f64], cfg: &DtwConfig) -> Result<f64, DtwError> {
    cfg.check(a.len(), b.len())?;
    if cfg.window.is_none() {
        return Ok(dtw_two_rows(a, b));
    }
    let acc = cost_matrix(a, b, cfg);
    Ok(acc[a.len() * b.len() - 1])
}

// Exact DTW in O(len_b) memory.
fn dtw_two_rows(a: &[f64], b: &[f64]) -> f64 {
    let m = b.len();
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    for (i, &x) in a.iter().enumerate() {
        for j in 0..m {
            let local = (x - b[j]).abs();
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cur[j - 1],
                (_, 0) => prev[0],
                _ => prev[j - 1].min(prev[j]).min(cur[j - 1]),
            };
            cur[j] = local + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Optimal cost and one optimal warping path from `(0, 0)` to `(len_a-1, len_b-1)`.
///
/// Ties during backtracking prefer the diagonal, then a step in `a`, then in `b`.
pub fn dtw_path(
    a: &[f64],
    b: &[f64],
    cfg: &DtwConfig,
) -> Result<(f64, Vec<(usize, usize)>), DtwError> {
    cfg.check(a.len(), b.len())?;
    let (n, m) = (a.len(), b.len());
    let acc = cost_matrix(a, b, cfg);
    let mut path = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while (i, j) != (0, 0) {
        (i, j) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = acc[(i - 1) * m + j - 1];
            let up = acc[(i - 1) * m + j];
            let left = acc[i * m + j - 1];
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        path.push((i, j));
    }
    path.reverse();
    Ok((acc[n * m - 1], path))
}

/// Full pairwise matrix. Symmetric with a zero diagonal by construction.
pub fn dtw_distance_matrix(series: &[Vec<f64>], cfg: &DtwConfig) -> Result<Vec<Vec<f64>>, DtwError> {
    let n = series.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    for (i, s) in series.iter().enumerate() {
        if s.is_empty() {
            return Err(DtwError::Pair {
                i,
                j: i,
                source: Box::new(DtwError::Empty),
            });
        }
    }
    let dist = |&(i, j): &(usize, usize)| {
        dtw_distance(&series[i], &series[j], cfg).map_err(|e| DtwError::Pair {
            i,
            j,
            source: Box::new(e),
        })
    };
    #[cfg(feature = "parallel")]
    let values: Vec<f64> = {
        use rayon::prelude::*;
        pairs.par_iter().map(dist).collect::<Result<_, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<f64> = pairs.iter().map(dist).collect::<Result<_, _>>()?;

    let mut matrix = vec![vec![0.0; n]; n];
    for (&(i, j), d) in pairs.iter().zip(values) {
        matrix[i][j] = d;
        matrix[j][i] = d;
    }
    Ok(matrix)
}

/// Test oracle: enumerates every monotone warping path explicitly.
///
/// Exponential in the series lengths, so limited to 64 cells. The optional
/// window discards paths that leave the band.
pub fn brute_force_dtw(a: &[f64], b: &[f64], window: Option<usize>) -> Result<f64, DtwError> {
    if a.is_empty() || b.is_empty() {
        return Err(DtwError::Empty);
    }
    if a.len() * b.len() > 64 {
        return Err(DtwError::TooLarge(a.len() * b.len()));
    }
    fn walk(a: &[f64], b: &[f64], window: Option<usize>, i: usize, j: usize, sum: f64, best: &mut f64) {
        if let Some(w) = window {
            if i.abs_diff(j) > w {
                return;
            }
        }
        let sum = sum + (a[i] - b[j]).abs();
        if i == a.len() - 1 && j == b.len() - 1 {
            if sum < *best {
                *best = sum;
            }
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, window, i + 1, j, sum, best);
        }
        if j + 1 < b.len() {
            walk(a, b, window, i, j + 1, sum, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, window, i + 1, j + 1, sum, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, window, 0, 0, 0.0, &mut best);
    if best.is_infinite() {
        return Err(DtwError::InfeasibleWindow {
            window: window.unwrap_or(0),
            len_a: a.len(),
            len_b: b.len(),
        });
    }
    Ok(best)
}
