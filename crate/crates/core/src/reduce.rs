//! Dimension reduction to bivariate stochastically increasing grids and the
//! concordance characterisation of the ccx order.

use rayon::prelude::*;
use serde::Serialize;

use crate::ccx::{assemble, shared_levels, ComparisonResult, Criterion, LevelOutcome, MISMATCH_REASON};
use crate::dist_core::{marginal_constraint, ConditionalModel, DiscreteMarginal};
use crate::error::{Error, Result};
use crate::numeric::{dedup_sorted, merge_knots};
use crate::rearrange::{decreasing_rearrangement, Crossing};
use crate::verdict::Verdict;

/// Breakpoints closer than this are treated as one.
const KNOT_EPS: f64 = 1e-12;

/// A bivariate law of `(Y, U)` with `U` uniform: on `(u_{k-1}, u_k]` the
/// conditional cdf of `Y` is column `k` of `g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BivariateSIGrid {
    y: DiscreteMarginal,
    u_breaks: Vec<f64>,
    g: Vec<Vec<f64>>,
}

impl BivariateSIGrid {
    /// Shape checks only; use [`verify_si`] for the SI invariants.
    pub fn new(y: DiscreteMarginal, u_breaks: Vec<f64>, g: Vec<Vec<f64>>) -> Result<Self> {
        let k = u_breaks.len().saturating_sub(1);
        if k == 0 || u_breaks[0] != 0.0 || u_breaks[k] != 1.0 || u_breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid(
                "u breakpoints must increase strictly from 0 to 1".into(),
            ));
        }
        if g.len() != y.len() || g.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidGrid(format!(
                "expected a {} x {k} matrix of conditional cdf values",
                y.len()
            )));
        }
        if g.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidGrid("conditional cdf values must lie in [0, 1]".into()));
        }
        Ok(Self { y, u_breaks, g })
    }

    pub fn y(&self) -> &DiscreteMarginal {
        &self.y
    }

    pub fn u_breaks(&self) -> &[f64] {
        &self.u_breaks
    }

    pub fn g(&self) -> &[Vec<f64>] {
        &self.g
    }

    pub fn n_intervals(&self) -> usize {
        self.u_breaks.len() - 1
    }

    pub fn widths(&self) -> Vec<f64> {
        self.u_breaks.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `P(Y = a_j, U in (u_{k-1}, u_k])`, rows in increasing `Y` order.
    pub fn mass_matrix(&self) -> Vec<Vec<f64>> {
        let widths = self.widths();
        (0..self.g.len())
            .map(|j| {
                (0..widths.len())
                    .map(|k| {
                        let below = if j == 0 { 0.0 } else { self.g[j - 1][k] };
                        widths[k] * (self.g[j][k] - below)
                    })
                    .collect()
            })
            .collect()
    }

    /// Joint cdf `P(U <= u, Y <= a_j)` at the breakpoints.
    pub fn joint_cdf_row(&self, j: usize) -> Vec<f64> {
        let mut acc = 0.0;
        std::iter::once(0.0)
            .chain(self.widths().iter().zip(&self.g[j]).map(|(w, v)| {
                acc += w * v;
                acc
            }))
            .collect()
    }

    /// The grid read as a model with one cell per `u` interval.
    pub fn to_model(&self) -> Result<ConditionalModel> {
        let widths = self.widths();
        let total: f64 = widths.iter().sum();
        let weights = widths.iter().map(|w| w / total).collect();
        ConditionalModel::new(self.y.clone(), weights, self.g.clone())
    }

    /// Same grid with the `Y` atoms replaced by their cdf values.
    pub fn with_cdf_labels(&self) -> Self {
        let levels = self.y.cdf_values().to_vec();
        Self {
            y: DiscreteMarginal::from_cdf(levels.clone(), levels).expect("cdf values increase strictly"),
            u_breaks: self.u_breaks.clone(),
            g: self.g.clone(),
        }
    }
}

/// Rearrange every row of the conditional cdf decreasingly over the cells.
pub fn reduce_to_si(m: &ConditionalModel) -> BivariateSIGrid {
    let rows: Vec<_> = (0..m.n_levels())
        .into_par_iter()
        .map(|j| decreasing_rearrangement(&m.eta(j)))
        .collect();
    let mut all: Vec<f64> = rows.iter().flat_map(|r| r.breaks().iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    let mut u_breaks = dedup_sorted(all, KNOT_EPS);
    *u_breaks.last_mut().unwrap() = 1.0;
    if u_breaks.len() > 2 && 1.0 - u_breaks[u_breaks.len() - 2] <= KNOT_EPS {
        u_breaks.remove(u_breaks.len() - 2);
    }
    let mids: Vec<f64> = u_breaks.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let g = rows
        .iter()
        .map(|r| mids.iter().map(|&u| r.value_at(u)).collect())
        .collect();
    BivariateSIGrid::new(m.y().clone(), u_breaks, g).expect("rearranged rows form a valid grid")
}

/// Columns nonincreasing in `u`, rows nondecreasing in `Y` ending at 1, and
/// the `u`-mixture reproducing the `Y` cdf.
pub fn verify_si(grid: &BivariateSIGrid, tol: f64) -> bool {
    let g = grid.g();
    let decreasing_in_u = g.iter().all(|row| row.windows(2).all(|w| w[1] <= w[0] + tol));
    let increasing_in_y = g
        .windows(2)
        .all(|rows| rows[0].iter().zip(&rows[1]).all(|(a, b)| *a <= b + tol));
    let ends_at_one = g.last().unwrap().iter().all(|v| (v - 1.0).abs() <= tol);
    let widths = grid.widths();
    let mixes = g.iter().zip(grid.y().cdf_values()).all(|(row, c)| {
        let mix: f64 = widths.iter().zip(row).map(|(w, v)| w * v).sum();
        (mix - c).abs() <= tol
    });
    decreasing_in_u && increasing_in_y && ends_at_one && mixes
}

/// Piecewise-linear interpolation of a joint cdf row given at `knots`.
fn interp(knots: &[f64], values: &[f64], u: f64) -> f64 {
    let k = knots.partition_point(|&t| t < u);
    if k == 0 {
        return values[0];
    }
    if k == knots.len() {
        return *values.last().unwrap();
    }
    if u == knots[k] {
        return values[k];
    }
    values[k - 1] + (values[k] - values[k - 1]) * (u - knots[k - 1]) / (knots[k] - knots[k - 1])
}

/// Lower-orthant comparison of two joint cdf rows on the union of knots.
fn compare_rows(level: f64, ka: &[f64], ha: &[f64], kb: &[f64], hb: &[f64], tol: f64) -> LevelOutcome {
    let mut excess = Crossing {
        x: 0.0,
        lhs: 0.0,
        rhs: 0.0,
    };
    let mut deficit = excess;
    for u in merge_knots(ka, kb, 0.0) {
        let (a, b) = (interp(ka, ha, u), interp(kb, hb, u));
        if a - b > excess.gap() {
            excess = Crossing { x: u, lhs: a, rhs: b };
        }
        if b - a > deficit.gap() {
            deficit = Crossing { x: u, lhs: b, rhs: a };
        }
    }
    let total_gap = (ha.last().unwrap() - hb.last().unwrap()).abs();
    let verdict = if total_gap > tol {
        Verdict::MarginalMismatch
    } else {
        Verdict::from_sides(excess.gap() <= tol, deficit.gap() <= tol)
    };
    LevelOutcome {
        level,
        verdict,
        excess,
        deficit,
    }
}

/// Concordance order of two grids: `P(U <= u, Y <= a_j)` of `A` below that
/// of `B` at every breakpoint and every shared level.
pub fn concordance_leq(ga: &BivariateSIGrid, gb: &BivariateSIGrid, tol: f64) -> ComparisonResult {
    if !marginal_constraint(ga.y(), gb.y()) {
        return ComparisonResult::mismatch(tol, MISMATCH_REASON);
    }
    let m = ga.y().len();
    let outcomes = (0..m - 1)
        .map(|j| {
            let (ha, hb) = (ga.joint_cdf_row(j), gb.joint_cdf_row(j));
            compare_rows(ga.y().cdf_values()[j], ga.u_breaks(), &ha, gb.u_breaks(), &hb, tol)
        })
        .collect();
    assemble(outcomes, tol, Criterion::Exact)
}

/// ccx through reduction: both models are reduced to SI grids, `Y` is
/// replaced by its cdf value, and the grids are compared in concordance.
pub fn ccx_via_concordance(a: &ConditionalModel, b: &ConditionalModel, tol: f64) -> ComparisonResult {
    if !marginal_constraint(a.y(), b.y()) {
        return ComparisonResult::mismatch(tol, MISMATCH_REASON);
    }
    let ga = reduce_to_si(a).with_cdf_labels();
    let gb = reduce_to_si(b).with_cdf_labels();
    concordance_leq(&ga, &gb, tol)
}

/// Concordance of the raw joint cdfs `P(X-cell <= i, Y <= a_j)` of two models
/// on the same cells. Agrees with ccx when both models are already SI.
pub fn raw_concordance(a: &ConditionalModel, b: &ConditionalModel, tol: f64) -> Result<ComparisonResult> {
    if a.n_cells() != b.n_cells() || a.weights().iter().zip(b.weights()).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(Error::InvalidInput(
            "raw concordance needs identical cell weights".into(),
        ));
    }
    let Some(levels) = shared_levels(a, b) else {
        return Ok(ComparisonResult::mismatch(tol, MISMATCH_REASON));
    };
    let mut knots = vec![0.0];
    let mut acc = 0.0;
    for w in a.weights() {
        acc += w;
        knots.push(acc);
    }
    let cumulative = |m: &ConditionalModel, j: usize| {
        let mut acc = 0.0;
        std::iter::once(0.0)
            .chain(m.weights().iter().zip(m.row(j)).map(|(w, v)| {
                acc += w * v;
                acc
            }))
            .collect::<Vec<f64>>()
    };
    let outcomes = levels
        .iter()
        .map(|&(v, j)| compare_rows(v, &knots, &cumulative(a, j), &knots, &cumulative(b, j), tol))
        .collect();
    Ok(assemble(outcomes, tol, Criterion::Exact))
}

/// Whether a model's conditional cdf rows are nonincreasing across its cells.
pub fn is_si_model(m: &ConditionalModel, tol: f64) -> bool {
    m.cond_cdf()
        .iter()
        .all(|row| row.windows(2).all(|w| w[1] <= w[0] + tol))
}
