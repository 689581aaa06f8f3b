//! The conditional convex order between finite models.
//!
//! `A ≼ccx B` holds when, at every level `v` of the shared `Y` range, the
//! conditional cdf row `u -> P(Y <= q(v) | cell)` of `A` is smaller than that
//! of `B` in the Schur order for functions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist_core::{marginal_constraint, ConditionalModel};
use crate::error::{Error, Result};
use crate::rearrange::{compare_curves, Crossing, RearrangementCurve};
use crate::verdict::{aggregate, Verdict};

/// Where a one-sided inequality fails: at level `level` and coordinate `x`
/// the tested side has value `lhs`, exceeding the other side's `rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub level: f64,
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelComparison {
    /// The cdf level `v`.
    pub level: f64,
    pub verdict: Verdict,
    /// Largest amount by which `A` exceeds `B` (negative or zero if never).
    pub max_excess: f64,
    /// Largest amount by which `B` exceeds `A`.
    pub max_deficit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// The verdict characterises the order.
    Exact,
    /// `LessEq`/`GreaterEq` imply the order but their absence does not refute it.
    Sufficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub verdict: Verdict,
    /// Worst violation of `A ≼ B`; set only for `Incomparable`.
    pub witness: Option<Witness>,
    /// Worst violation of `B ≼ A`; set only for `Incomparable`.
    pub counter_witness: Option<Witness>,
    pub tol: f64,
    pub per_level: Vec<LevelComparison>,
    pub criterion: Criterion,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
}

impl ComparisonResult {
    pub fn mismatch(tol: f64, reason: impl Into<String>) -> Self {
        Self {
            verdict: Verdict::MarginalMismatch,
            witness: None,
            counter_witness: None,
            tol,
            per_level: Vec::new(),
            criterion: Criterion::Exact,
            reason: Some(reason.into()),
        }
    }

    /// Result without per-level detail, e.g. from a closed form.
    pub fn summary(verdict: Verdict, tol: f64) -> Self {
        Self {
            verdict,
            witness: None,
            counter_witness: None,
            tol,
            per_level: Vec::new(),
            criterion: Criterion::Exact,
            reason: None,
        }
    }
}

/// Per-level outcome shared by all engines.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LevelOutcome {
    pub level: f64,
    pub verdict: Verdict,
    /// `lhs` from `A`, `rhs` from `B`.
    pub excess: Crossing,
    /// `lhs` from `B`, `rhs` from `A`.
    pub deficit: Crossing,
}

pub(crate) fn assemble(levels: Vec<LevelOutcome>, tol: f64, criterion: Criterion) -> ComparisonResult {
    let verdict = aggregate(levels.iter().map(|l| l.verdict));
    let (mut witness, mut counter_witness) = (None, None);
    if verdict == Verdict::Incomparable {
        let worst = |pick: fn(&LevelOutcome) -> Crossing| {
            levels
                .iter()
                .map(|l| (l.level, pick(l)))
                .max_by(|a, b| a.1.gap().total_cmp(&b.1.gap()))
                .map(|(level, c)| Witness {
                    level,
                    x: c.x,
                    lhs: c.lhs,
                    rhs: c.rhs,
                })
        };
        witness = worst(|l| l.excess);
        counter_witness = worst(|l| l.deficit);
    }
    let reason = (verdict == Verdict::MarginalMismatch)
        .then(|| "conditional rows carry different mass at some level".to_string());
    ComparisonResult {
        verdict,
        witness,
        counter_witness,
        tol,
        per_level: levels
            .iter()
            .map(|l| LevelComparison {
                level: l.level,
                verdict: l.verdict,
                max_excess: l.excess.gap(),
                max_deficit: l.deficit.gap(),
            })
            .collect(),
        criterion,
        reason,
    }
}

/// Levels `v` strictly inside (0, 1) shared by both models, as row indices.
pub(crate) fn shared_levels(a: &ConditionalModel, b: &ConditionalModel) -> Option<Vec<(f64, usize)>> {
    if !marginal_constraint(a.y(), b.y()) {
        return None;
    }
    let m = a.n_levels();
    Some((0..m - 1).map(|j| (a.y().cdf_values()[j], j)).collect())
}

pub(crate) const MISMATCH_REASON: &str = "the closures of the Y ranges differ";

/// Decide `A ≼ccx B` level by level through the Schur order.
pub fn ccx_compare(a: &ConditionalModel, b: &ConditionalModel, tol: f64) -> ComparisonResult {
    let Some(levels) = shared_levels(a, b) else {
        return ComparisonResult::mismatch(tol, MISMATCH_REASON);
    };
    let outcomes: Vec<LevelOutcome> = levels
        .par_iter()
        .map(|&(v, j)| {
            let cmp = compare_curves(
                &RearrangementCurve::new(&a.eta(j)),
                &RearrangementCurve::new(&b.eta(j)),
                tol,
            );
            LevelOutcome {
                level: v,
                verdict: cmp.verdict,
                excess: cmp.excess,
                deficit: cmp.deficit,
            }
        })
        .collect();
    assemble(outcomes, tol, Criterion::Exact)
}

/// Every row of the conditional cdf is constant across cells.
pub fn is_independent(m: &ConditionalModel, tol: f64) -> bool {
    m.cond_cdf().iter().all(|row| {
        let (lo, hi) = row.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
        hi - lo <= tol
    })
}

/// Every conditional cdf entry is 0 or 1: `Y` is a function of the cell.
pub fn is_perfect(m: &ConditionalModel, tol: f64) -> bool {
    m.cond_cdf().iter().flatten().all(|&v| v <= tol || v >= 1.0 - tol)
}

/// Cells indexed by pairs `(x, z)`; `x_index[i]` and `z_index[i]` give the
/// factor levels of cell `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductCells {
    pub x_index: Vec<usize>,
    pub z_index: Vec<usize>,
}

impl ProductCells {
    /// Full `nx × nz` product, `x` major.
    pub fn grid(nx: usize, nz: usize) -> Self {
        Self {
            x_index: (0..nx * nz).map(|i| i / nz).collect(),
            z_index: (0..nx * nz).map(|i| i % nz).collect(),
        }
    }

    fn index(&self, keep: Factor) -> &[usize] {
        match keep {
            Factor::X => &self.x_index,
            Factor::Z => &self.z_index,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    X,
    Z,
}

/// The model of `(Y, X)` (or `(Y, Z)`) from a model over product cells.
pub fn marginalize_cells(m: &ConditionalModel, cells: &ProductCells, keep: Factor) -> Result<ConditionalModel> {
    if cells.x_index.len() != m.n_cells() || cells.z_index.len() != m.n_cells() {
        return Err(Error::InvalidInput(format!(
            "factor map covers {} / {} cells, model has {}",
            cells.x_index.len(),
            cells.z_index.len(),
            m.n_cells()
        )));
    }
    let mut seen = std::collections::HashSet::new();
    if !cells.x_index.iter().zip(&cells.z_index).all(|pair| seen.insert(pair)) {
        return Err(Error::InvalidInput("two cells share the same (x, z) pair".into()));
    }
    m.merge_cells(cells.index(keep))
}

/// `F_{Y|X,Z} = F_{Y|X}` cellwise, i.e. `Y ⊥ Z | X`.
pub fn is_conditionally_independent(
    m: &ConditionalModel,
    cells: &ProductCells,
    keep: Factor,
    tol: f64,
) -> Result<bool> {
    let coarse = marginalize_cells(m, cells, keep)?;
    let idx = cells.index(keep);
    Ok((0..m.n_levels()).all(|j| (0..m.n_cells()).all(|i| (m.row(j)[i] - coarse.row(j)[idx[i]]).abs() <= tol)))
}
