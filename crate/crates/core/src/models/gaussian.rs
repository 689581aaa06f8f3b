use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bvn::{bvn_cdf, phi_inv};
use crate::ccx::ComparisonResult;
use crate::dist_core::{from_samples, ConditionalModel, DiscreteMarginal, SampleRow};
use crate::error::{Error, Result};
use crate::verdict::Verdict;

const SYMMETRY_TOL: f64 = 1e-10;
const EIGEN_CUTOFF: f64 = 1e-10;
const R2_SLACK: f64 = 1e-9;
const MC_CHUNK: usize = 8192;

/// Normal law of `(Y, X_1, ..., X_p)`; `Y` is the first coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl GaussianSpec {
    pub fn new(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        let s = Self { mean, cov };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.mean.len();
        if n < 2 {
            return Err(Error::InvalidInput("need Y and at least one predictor".into()));
        }
        if self.cov.len() != n || self.cov.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!("covariance must be {n} x {n}")));
        }
        if self
            .mean
            .iter()
            .chain(self.cov.iter().flatten())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidInput("non-finite mean or covariance entry".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if (self.cov[i][j] - self.cov[j][i]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidInput(format!(
                        "covariance is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let full = DMatrix::from_fn(n, n, |i, j| 0.5 * (self.cov[i][j] + self.cov[j][i]));
        let eig = full.symmetric_eigenvalues();
        let lmax = eig.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
        if eig.iter().any(|&l| l < -EIGEN_CUTOFF * lmax.max(1.0)) {
            return Err(Error::InvalidInput("covariance is not positive semidefinite".into()));
        }
        Ok(())
    }

    /// Unit variances, every pair of coordinates correlated `rho`.
    pub fn equicorrelated(p: usize, rho: f64) -> Result<Self> {
        let n = p + 1;
        let cov = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { rho }).collect())
            .collect();
        Self::new(vec![0.0; n], cov)
    }

    /// Independent standard normal predictors, each correlated `rho` with `Y`.
    pub fn independent_predictors(p: usize, rho: f64) -> Result<Self> {
        let n = p + 1;
        let cov = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match (i, j) {
                        _ if i == j => 1.0,
                        (0, _) | (_, 0) => rho,
                        _ => 0.0,
                    })
                    .collect()
            })
            .collect();
        Self::new(vec![0.0; n], cov)
    }

    /// `(Y, X)` standard bivariate normal with correlation `rho`.
    pub fn bivariate(rho: f64) -> Result<Self> {
        Self::equicorrelated(1, rho)
    }

    pub fn dim_x(&self) -> usize {
        self.mean.len() - 1
    }

    pub fn var_y(&self) -> f64 {
        self.cov[0][0]
    }
}

/// Share of `Var(Y)` explained by `X`: `Σ_YX Σ_X⁻ Σ_XY / σ_Y²` with a
/// spectral pseudoinverse.
pub fn gaussian_r2(s: &GaussianSpec) -> Result<f64> {
    s.validate()?;
    let var_y = s.var_y();
    if !(var_y > 0.0) {
        return Err(Error::Degenerate("Var(Y) must be positive".into()));
    }
    let p = s.dim_x();
    let sigma_x = DMatrix::from_fn(p, p, |i, j| 0.5 * (s.cov[i + 1][j + 1] + s.cov[j + 1][i + 1]));
    let c = DVector::from_fn(p, |i, _| s.cov[0][i + 1]);
    let eig = sigma_x.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    if eig.eigenvalues.iter().any(|&l| l < -EIGEN_CUTOFF * lmax.max(1.0)) {
        return Err(Error::InvalidInput(
            "covariance of X is not positive semidefinite".into(),
        ));
    }
    let cutoff = EIGEN_CUTOFF * lmax;
    let mut explained = 0.0;
    let mut projected = DVector::zeros(p);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > cutoff {
            let v = eig.eigenvectors.column(k);
            let coef = v.dot(&c);
            explained += coef * coef / l;
            projected += v * coef;
        }
    }
    // Any generalised inverse gives the same value only when Σ_XY lies in
    // the range of Σ_X, which holds for every valid covariance.
    let residual = (&c - &projected).norm();
    if residual > 1e-6 * (1.0 + c.norm()) {
        return Err(Error::InvalidInput(
            "covariance is not positive semidefinite: Cov(X, Y) leaves the range of Cov(X)".into(),
        ));
    }
    let r2 = explained / var_y;
    if !(-R2_SLACK..=1.0 + R2_SLACK).contains(&r2) {
        return Err(Error::InvalidInput(format!(
            "covariance is not positive semidefinite (explained share {r2})"
        )));
    }
    Ok(r2.clamp(0.0, 1.0))
}

/// Gaussian models are ordered by their explained share of variance.
pub fn gaussian_ccx(a: &GaussianSpec, b: &GaussianSpec, tol: f64) -> Result<ComparisonResult> {
    let (ra, rb) = (gaussian_r2(a)?, gaussian_r2(b)?);
    let verdict = Verdict::from_sides(ra <= rb + tol, rb <= ra + tol);
    Ok(ComparisonResult::summary(verdict, tol))
}

/// Sampling settings for [`gaussian_discretize`]; streams are keyed by
/// `(seed, chunk)` so results do not depend on the thread count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
}

/// Finite model of `(Y, S)` where `S` is the sufficient linear score of `X`,
/// correlated `sqrt(r²)` with `Y`. Cells are `n_cells` equally likely
/// intervals of `S`; `Y` takes `n_levels` equally likely values.
///
/// Without `mc` the cell probabilities are exact bivariate normal rectangle
/// probabilities; with it the model is the empirical checkerboard of a
/// simulated sample.
pub fn gaussian_discretize(
    s: &GaussianSpec,
    n_cells: usize,
    n_levels: usize,
    mc: Option<MonteCarlo>,
) -> Result<ConditionalModel> {
    if n_cells == 0 || n_levels < 2 {
        return Err(Error::InvalidInput("need at least one cell and two levels".into()));
    }
    let r = gaussian_r2(s)?.sqrt();
    let (mu, sd) = (s.mean[0], s.var_y().sqrt());
    if let Some(mc) = mc {
        return simulate(r, mu, sd, n_cells, n_levels, mc);
    }
    let n = n_levels as f64;
    let atoms: Vec<f64> = (1..=n_levels)
        .map(|j| mu + sd * phi_inv((j as f64 - 0.5) / n))
        .collect();
    let y = DiscreteMarginal::from_cdf(atoms, (1..=n_levels).map(|j| j as f64 / n).collect())?;
    let s_breaks: Vec<f64> = (0..=n_cells).map(|i| phi_inv(i as f64 / n_cells as f64)).collect();
    let mut cond_cdf: Vec<Vec<f64>> = (1..n_levels)
        .into_par_iter()
        .map(|j| {
            let level = j as f64 / n;
            let yj = phi_inv(level);
            let joint: Vec<f64> = s_breaks
                .iter()
                .enumerate()
                .map(|(i, &sb)| match i {
                    0 => 0.0,
                    _ if i == n_cells => level,
                    _ => bvn_cdf(yj, sb, r),
                })
                .collect();
            joint
                .windows(2)
                .map(|w| ((w[1] - w[0]) * n_cells as f64).clamp(0.0, 1.0))
                .collect()
        })
        .collect();
    for j in 1..cond_cdf.len() {
        for i in 0..n_cells {
            cond_cdf[j][i] = cond_cdf[j][i].max(cond_cdf[j - 1][i]);
        }
    }
    cond_cdf.push(vec![1.0; n_cells]);
    ConditionalModel::new(y, vec![1.0 / n_cells as f64; n_cells], cond_cdf)
}

fn simulate(r: f64, mu: f64, sd: f64, n_cells: usize, n_levels: usize, mc: MonteCarlo) -> Result<ConditionalModel> {
    if mc.samples < n_cells.max(n_levels) {
        return Err(Error::InvalidInput("too few Monte Carlo samples for the grid".into()));
    }
    let chunks = mc.samples.div_ceil(MC_CHUNK);
    let s = (1.0 - r * r).max(0.0).sqrt();
    let rows: Vec<SampleRow> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(c as u64);
            let len = MC_CHUNK.min(mc.samples - c * MC_CHUNK);
            (0..len)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let e: f64 = StandardNormal.sample(&mut rng);
                    SampleRow::new(mu + sd * (r * z + s * e), vec![z])
                })
                .collect::<Vec<_>>()
        })
        .collect();
    from_samples(&rows, n_cells, n_levels)
}
