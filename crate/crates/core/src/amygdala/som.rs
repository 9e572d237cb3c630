use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SomParams {
    /// Initial learning rate.
    pub eta0: f64,
    /// Initial neighborhood radius in grid units.
    pub sigma0: f64,
    /// Decay constant shared by learning rate and radius.
    pub tau: f64,
}

impl Default for SomParams {
    fn default() -> Self {
        Self {
            eta0: 0.3,
            sigma0: 4.0,
            tau: 1000.0,
        }
    }
}

/// Kohonen map on a rectangular grid; weights are row-major, `dim` per unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomGrid {
    rows: usize,
    cols: usize,
    dim: usize,
    weights: Vec<f64>,
    t: u64,
    params: SomParams,
}

impl SomGrid {
    pub fn from_weights(rows: usize, cols: usize, dim: usize, weights: Vec<f64>, params: SomParams) -> Result<Self> {
        if rows == 0 || cols == 0 || dim == 0 {
            return Err(Error::InvalidParam("SOM grid and input dimension must be non-zero".into()));
        }
        if weights.len() != rows * cols * dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{} weights", rows * cols * dim),
                found: format!("{}", weights.len()),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParam("SOM weights must be finite".into()));
        }
        let SomParams { eta0, sigma0, tau } = params;
        if !(eta0 > 0.0 && eta0.is_finite() && sigma0 > 0.0 && sigma0.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParam(format!("SOM eta0, sigma0, tau must be > 0, got {params:?}")));
        }
        if sigma0 > rows.max(cols) as f64 {
            return Err(Error::InvalidParam(format!(
                "sigma0 {sigma0} exceeds the larger grid side {}",
                rows.max(cols)
            )));
        }
        Ok(Self {
            rows,
            cols,
            dim,
            weights,
            t: 0,
            params,
        })
    }

    /// Weights drawn uniformly from `ranges[k]` for component `k`.
    pub fn random(
        rows: usize,
        cols: usize,
        ranges: &[(f64, f64)],
        params: SomParams,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let dim = ranges.len();
        let mut weights = Vec::with_capacity(rows * cols * dim);
        for _ in 0..rows * cols {
            for &(lo, hi) in ranges {
                weights.push(if hi > lo { rng.gen_range(lo..hi) } else { lo });
            }
        }
        Self::from_weights(rows, cols, dim, weights, params)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn units(&self) -> usize {
        self.rows * self.cols
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn params(&self) -> SomParams {
        self.params
    }

    pub fn weight(&self, row: usize, col: usize) -> &[f64] {
        let i = (row * self.cols + col) * self.dim;
        &self.weights[i..i + self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn learning_rate(&self) -> f64 {
        self.params.eta0 * (-(self.t as f64) / self.params.tau).exp()
    }

    pub fn radius(&self) -> f64 {
        self.params.sigma0 * (-(self.t as f64) / self.params.tau).exp()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: format!("SOM input of dimension {}", self.dim),
                found: format!("{}", x.len()),
            });
        }
        Ok(())
    }

    /// Best matching unit; ties go to the lowest row-major index.
    pub fn bmu(&self, x: &[f64]) -> Result<(usize, usize)> {
        self.check_dim(x)?;
        let mut best = (0, f64::INFINITY);
        for (u, w) in self.weights.chunks_exact(self.dim).enumerate() {
            let d2: f64 = w.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < best.1 {
                best = (u, d2);
            }
        }
        Ok((best.0 / self.cols, best.0 % self.cols))
    }

    /// One Kohonen update toward `x` with Gaussian neighborhood; returns the
    /// BMU used.
    pub fn train_step(&mut self, x: &[f64]) -> Result<(usize, usize)> {
        let (br, bc) = self.bmu(x)?;
        let eta = self.learning_rate();
        let sigma = self.radius();
        let two_sigma2 = 2.0 * sigma * sigma;
        for (u, w) in self.weights.chunks_exact_mut(self.dim).enumerate() {
            let (r, c) = (u / self.cols, u % self.cols);
            let g2 = (r as f64 - br as f64).powi(2) + (c as f64 - bc as f64).powi(2);
            let h = (-g2 / two_sigma2).exp();
            let step = eta * h;
            for (wk, xk) in w.iter_mut().zip(x) {
                *wk += step * (xk - *wk);
            }
        }
        self.t += 1;
        Ok((br, bc))
    }
}
