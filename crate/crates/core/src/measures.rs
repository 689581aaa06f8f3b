//! Dependence measures that are monotone in the ccx order.
//!
//! All measures compare the conditional cdf of `Y` given the cell with the
//! unconditional one, level by level. Levels are evaluated through the left
//! limits `P(Y < a_j)`, i.e. through conditional survival probabilities
//! `P(Y >= a_j | cell)`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist_core::ConditionalModel;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::reduce::{reduce_to_si, BivariateSIGrid};

/// Normalisers at or below this are treated as zero.
const NORMALIZER_FLOOR: f64 = 1e-15;

/// A convex `φ: [-1, 1] -> R` with `φ(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiSpec {
    Square,
    Abs,
    /// `|t|^k`, `k >= 1`.
    Power(f64),
    /// Integral from 0 of a step slope function: slope `slopes[0]` below
    /// `breaks[0]`, `slopes[k]` on `(breaks[k-1], breaks[k])`, and
    /// `slopes[r]` above the last break.
    PiecewiseLinear {
        breaks: Vec<f64>,
        slopes: Vec<f64>,
    },
}

impl PhiSpec {
    pub fn power(k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 1.0) {
            return Err(Error::InvalidInput(format!("power exponent {k} must be at least 1")));
        }
        Ok(PhiSpec::Power(k))
    }

    pub fn piecewise_linear(breaks: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if slopes.len() != breaks.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} breaks need {} slopes, got {}",
                breaks.len(),
                breaks.len() + 1,
                slopes.len()
            )));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidInput(
                "breaks must be finite and strictly increasing".into(),
            ));
        }
        if slopes.windows(2).any(|w| w[1] < w[0]) || slopes.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidInput("slopes must be finite and nondecreasing".into()));
        }
        Ok(PhiSpec::PiecewiseLinear { breaks, slopes })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            PhiSpec::Square => t * t,
            PhiSpec::Abs => t.abs(),
            PhiSpec::Power(k) => t.abs().powf(*k),
            PhiSpec::PiecewiseLinear { breaks, slopes } => {
                // Integrate the slope function from 0 to t.
                let slope_at = |x: f64| slopes[breaks.partition_point(|&b| b <= x)];
                let (lo, hi, sign) = if t >= 0.0 { (0.0, t, 1.0) } else { (t, 0.0, -1.0) };
                let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo && b < hi).collect();
                cuts.insert(0, lo);
                cuts.push(hi);
                let area: f64 = cuts
                    .windows(2)
                    .map(|w| (w[1] - w[0]) * slope_at(0.5 * (w[0] + w[1])))
                    .sum();
                sign * area
            }
        }
    }

    /// `φ` has a kink or positive curvature at 0.
    pub fn strictly_convex_at_zero(&self) -> bool {
        match self {
            PhiSpec::Square | PhiSpec::Abs | PhiSpec::Power(_) => true,
            PhiSpec::PiecewiseLinear { breaks, slopes } => match breaks.iter().position(|&b| b == 0.0) {
                Some(k) => slopes[k] < slopes[k + 1],
                None => false,
            },
        }
    }

    pub fn strictly_convex(&self) -> bool {
        match self {
            PhiSpec::Square => true,
            PhiSpec::Power(k) => *k > 1.0,
            PhiSpec::Abs | PhiSpec::PiecewiseLinear { .. } => false,
        }
    }
}

impl fmt::Display for PhiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiSpec::Square => f.write_str("square"),
            PhiSpec::Abs => f.write_str("abs"),
            PhiSpec::Power(k) => write!(f, "power:{k}"),
            PhiSpec::PiecewiseLinear { breaks, slopes } => write!(f, "piecewise:{breaks:?}:{slopes:?}"),
        }
    }
}

impl FromStr for PhiSpec {
    type Err = Error;

    /// `square`, `abs` or `power:K`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "square" => Ok(PhiSpec::Square),
            "abs" => Ok(PhiSpec::Abs),
            other => match other.strip_prefix("power:") {
                Some(k) => PhiSpec::power(
                    k.parse()
                        .map_err(|_| Error::InvalidInput(format!("bad power exponent {k:?}")))?,
                ),
                None => Err(Error::InvalidInput(format!(
                    "unknown phi {other:?}; expected square, abs or power:K"
                ))),
            },
        }
    }
}

fn require_nondegenerate(m: &ConditionalModel) -> Result<()> {
    if m.y().is_degenerate() {
        return Err(Error::Degenerate("the measure is undefined for degenerate Y".into()));
    }
    Ok(())
}

/// Per-level sums `Σ_j p_j t_j` with a fixed reduction order.
fn level_sum<F: Fn(usize) -> f64 + Sync>(m: &ConditionalModel, term: F) -> f64 {
    let probs = m.y().probs();
    let terms: Vec<f64> = (0..m.n_levels()).into_par_iter().map(|j| probs[j] * term(j)).collect();
    pairwise_sum(&terms)
}

fn cell_sum<F: Fn(usize) -> f64>(m: &ConditionalModel, term: F) -> f64 {
    let terms: Vec<f64> = m.weights().iter().enumerate().map(|(i, w)| w * term(i)).collect();
    pairwise_sum(&terms)
}

fn finish(num: f64, den: f64) -> Result<f64> {
    if !(den > NORMALIZER_FLOOR) {
        return Err(Error::Degenerate(format!("normaliser {den} is not positive")));
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// Chatterjee's ξ: average variance of `P(Y >= a_j | cell)` over its maximum.
pub fn chatterjee_xi(m: &ConditionalModel) -> Result<f64> {
    require_nondegenerate(m)?;
    let num = level_sum(m, |j| {
        let c = m.y().cdf_left(j);
        cell_sum(m, |i| (m.cdf_left(j, i) - c).powi(2))
    });
    let den = level_sum(m, |j| {
        let c = m.y().cdf_left(j);
        c * (1.0 - c)
    });
    finish(num, den)
}

/// Normaliser of [`xi_phi`]: the value of the numerator under perfect dependence.
pub fn alpha_phi(m: &ConditionalModel, phi: &PhiSpec) -> f64 {
    level_sum(m, |j| {
        let c = m.y().cdf_left(j);
        c * phi.eval(1.0 - c) + (1.0 - c) * phi.eval(-c)
    })
}

/// Normaliser of [`lambda_phi`].
pub fn beta_phi(m: &ConditionalModel, phi: &PhiSpec) -> f64 {
    let spread = phi.eval(1.0) + phi.eval(-1.0);
    level_sum(m, |j| {
        let c = m.y().cdf_left(j);
        c * (1.0 - c) * spread
    })
}

/// `ξ_φ`: average `φ`-deviation of the conditional cdf from the marginal one.
pub fn xi_phi(m: &ConditionalModel, phi: &PhiSpec) -> Result<f64> {
    require_nondegenerate(m)?;
    let num = level_sum(m, |j| {
        let c = m.y().cdf_left(j);
        cell_sum(m, |i| phi.eval(m.cdf_left(j, i) - c))
    });
    finish(num, alpha_phi(m, phi))
}

/// `Λ_φ`: average `φ`-difference between the conditional cdfs of two
/// independent cells.
pub fn lambda_phi(m: &ConditionalModel, phi: &PhiSpec) -> Result<f64> {
    require_nondegenerate(m)?;
    let num = level_sum(m, |j| {
        cell_sum(m, |i| {
            let fi = m.cdf_left(j, i);
            cell_sum(m, |k| phi.eval(fi - m.cdf_left(j, k)))
        })
    });
    finish(num, beta_phi(m, phi))
}

/// Integrated R²: the explained fraction of `Var(1{Y <= a_j})`, averaged over
/// all atoms but the largest.
pub fn integrated_r2_nu(m: &ConditionalModel) -> Result<f64> {
    require_nondegenerate(m)?;
    let last = m.n_levels() - 1;
    let num = level_sum(m, |j| {
        if j == last {
            return 0.0;
        }
        let c = m.y().cdf_values()[j];
        let var = cell_sum(m, |i| (m.row(j)[i] - c).powi(2));
        var / (c * (1.0 - c))
    });
    let mass = 1.0 - m.y().probs()[last];
    finish(num, mass)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcordanceKind {
    SpearmanRho,
    KendallTau,
    GiniGamma,
}

impl FromStr for ConcordanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho" | "spearman_rho" => Ok(ConcordanceKind::SpearmanRho),
            "tau" | "kendall_tau" => Ok(ConcordanceKind::KendallTau),
            "gamma" | "gini_gamma" => Ok(ConcordanceKind::GiniGamma),
            _ => Err(Error::InvalidInput(format!("unknown concordance measure {s:?}"))),
        }
    }
}

/// Checkerboard copula of a grid: exact in `u`, linear in `v` between the
/// cdf levels of `Y`.
struct Checkerboard {
    u: Vec<f64>,
    /// `t[0] = 0`, then the cdf levels.
    t: Vec<f64>,
    /// `h[j][k] = C(u[k], t[j])`.
    h: Vec<Vec<f64>>,
}

impl Checkerboard {
    fn new(grid: &BivariateSIGrid) -> Self {
        let mut h = vec![vec![0.0; grid.u_breaks().len()]];
        h.extend((0..grid.y().len()).map(|j| grid.joint_cdf_row(j)));
        let t = std::iter::once(0.0)
            .chain(grid.y().cdf_values().iter().copied())
            .collect();
        Self {
            u: grid.u_breaks().to_vec(),
            t,
            h,
        }
    }

    fn comonotone(levels: &[f64]) -> Self {
        let t: Vec<f64> = std::iter::once(0.0).chain(levels.iter().copied()).collect();
        let h = t.iter().map(|&tj| t.iter().map(|&uk| uk.min(tj)).collect()).collect();
        Self { u: t.clone(), t, h }
    }

    fn corner_avg(&self, j: usize, k: usize) -> f64 {
        0.25 * (self.h[j - 1][k - 1] + self.h[j - 1][k] + self.h[j][k - 1] + self.h[j][k])
    }

    fn eval(&self, u: f64, v: f64) -> f64 {
        let row = |j: usize| {
            let k = self.u.partition_point(|&x| x < u).clamp(1, self.u.len() - 1);
            let (u0, u1) = (self.u[k - 1], self.u[k]);
            let lam = ((u - u0) / (u1 - u0)).clamp(0.0, 1.0);
            self.h[j][k - 1] + lam * (self.h[j][k] - self.h[j][k - 1])
        };
        let j = self.t.partition_point(|&x| x < v).clamp(1, self.t.len() - 1);
        let (t0, t1) = (self.t[j - 1], self.t[j]);
        let lam = ((v - t0) / (t1 - t0)).clamp(0.0, 1.0);
        (1.0 - lam) * row(j - 1) + lam * row(j)
    }

    fn spearman(&self) -> f64 {
        let mut terms = Vec::new();
        for j in 1..self.t.len() {
            for k in 1..self.u.len() {
                let area = (self.t[j] - self.t[j - 1]) * (self.u[k] - self.u[k - 1]);
                terms.push(area * self.corner_avg(j, k));
            }
        }
        12.0 * pairwise_sum(&terms) - 3.0
    }

    fn kendall(&self) -> f64 {
        let mut terms = Vec::new();
        for j in 1..self.t.len() {
            for k in 1..self.u.len() {
                let mass = self.h[j][k] - self.h[j][k - 1] - self.h[j - 1][k] + self.h[j - 1][k - 1];
                terms.push(mass * self.corner_avg(j, k));
            }
        }
        4.0 * pairwise_sum(&terms) - 1.0
    }

    fn gini(&self) -> f64 {
        // C(u, u) and C(u, 1 - u) are quadratic between the cuts, so
        // Simpson's rule is exact on each piece.
        let integrate = |anti: bool| {
            let mut cuts: Vec<f64> = self.u.clone();
            cuts.extend(self.t.iter().map(|&t| if anti { 1.0 - t } else { t }));
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let f = |x: f64| self.eval(x, if anti { 1.0 - x } else { x });
            let terms: Vec<f64> = cuts
                .windows(2)
                .map(|w| (w[1] - w[0]) / 6.0 * (f(w[0]) + 4.0 * f(0.5 * (w[0] + w[1])) + f(w[1])))
                .collect();
            pairwise_sum(&terms)
        };
        4.0 * (integrate(false) + integrate(true)) - 2.0
    }

    fn measure(&self, kind: ConcordanceKind) -> f64 {
        match kind {
            ConcordanceKind::SpearmanRho => self.spearman(),
            ConcordanceKind::KendallTau => self.kendall(),
            ConcordanceKind::GiniGamma => self.gini(),
        }
    }
}

/// The concordance measure of a grid read as a checkerboard copula,
/// without normalisation.
pub fn checkerboard_measure(grid: &BivariateSIGrid, kind: ConcordanceKind) -> f64 {
    Checkerboard::new(grid).measure(kind)
}

/// Whether all atoms of `Y` carry the same mass.
pub fn has_uniform_levels(m: &ConditionalModel) -> bool {
    let n = m.n_levels() as f64;
    m.y().probs().iter().all(|p| (p * n - 1.0).abs() <= 1e-9)
}

/// Concordance measure of the reduced SI grid, scaled so that perfect
/// dependence scores 1 at the given number of levels.
pub fn rearranged_measure(m: &ConditionalModel, kind: ConcordanceKind) -> Result<f64> {
    require_nondegenerate(m)?;
    if !has_uniform_levels(m) {
        return Err(Error::Mode(
            "rearranged measures need equally likely Y atoms; uniformize the model first".into(),
        ));
    }
    let grid = reduce_to_si(m);
    let top = Checkerboard::comonotone(m.y().cdf_values()).measure(kind);
    Ok((checkerboard_measure(&grid, kind) / top).clamp(0.0, 1.0))
}

/// Every measure in the crate, keyed by a short name. Rearranged measures
/// are included only when `Y` has equally likely atoms.
pub fn all_measures(m: &ConditionalModel, phi: &PhiSpec) -> Result<Vec<(&'static str, f64)>> {
    let mut out = vec![
        ("xi", chatterjee_xi(m)?),
        ("xi_phi", xi_phi(m, phi)?),
        ("lambda_phi", lambda_phi(m, phi)?),
        ("nu", integrated_r2_nu(m)?),
    ];
    if has_uniform_levels(m) {
        out.push(("rho_rearranged", rearranged_measure(m, ConcordanceKind::SpearmanRho)?));
        out.push(("tau_rearranged", rearranged_measure(m, ConcordanceKind::KendallTau)?));
        out.push(("gamma_rearranged", rearranged_measure(m, ConcordanceKind::GiniGamma)?));
    }
    Ok(out)
}
