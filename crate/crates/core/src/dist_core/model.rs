use serde::{Deserialize, Serialize};

use super::{marginal::DiscreteMarginal, step::StepFunction, CONSISTENCY_TOL, PROB_SUM_TOL};
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// Slack allowed on entries of a conditional cdf before they are clamped.
const ENTRY_SLACK: f64 = 1e-12;

/// Finite representation of `(Y, X)`.
///
/// The predictor enters only through a partition into cells with positive
/// weights. `cond_cdf[j][i]` is `P(Y <= a_j | cell i)`; rows are indexed by
/// the atoms of `Y` in increasing order and the last row is identically 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalModel {
    y: DiscreteMarginal,
    weights: Vec<f64>,
    cond_cdf: Vec<Vec<f64>>,
}

impl ConditionalModel {
    pub fn new(y: DiscreteMarginal, weights: Vec<f64>, cond_cdf: Vec<Vec<f64>>) -> Result<Self> {
        let weights = check_weights(weights)?;
        let cond_cdf = check_cdf_matrix(cond_cdf, y.len(), weights.len())?;
        for (j, row) in cond_cdf.iter().enumerate() {
            let mix = mixture(&weights, row);
            let target = y.cdf_values()[j];
            if (mix - target).abs() > CONSISTENCY_TOL {
                return Err(Error::InvalidModel(format!(
                    "marginal consistency fails at atom {j}: cells mix to {mix}, marginal cdf is {target}"
                )));
            }
        }
        Ok(Self { y, weights, cond_cdf })
    }

    /// Build the model whose `Y` marginal is the cell mixture of the given
    /// conditional cdfs.
    pub fn from_parts(y_atoms: Vec<f64>, weights: Vec<f64>, cond_cdf: Vec<Vec<f64>>) -> Result<Self> {
        let weights = check_weights(weights)?;
        let cond_cdf = check_cdf_matrix(cond_cdf, y_atoms.len(), weights.len())?;
        let mut levels: Vec<f64> = cond_cdf.iter().map(|row| mixture(&weights, row)).collect();
        *levels.last_mut().unwrap() = 1.0;
        if let Some(j) = (0..levels.len()).find(|&j| {
            let prev = if j == 0 { 0.0 } else { levels[j - 1] };
            !(levels[j] > prev)
        }) {
            return Err(Error::InvalidModel(format!("atom {j} carries no mass")));
        }
        let y = DiscreteMarginal::from_cdf(y_atoms, levels)?;
        Ok(Self { y, weights, cond_cdf })
    }

    /// Build from a joint mass matrix `mass[j][i] = P(Y = a_j, cell i)`.
    /// Masses are normalised; empty rows and columns are dropped.
    pub fn from_joint_mass(y_atoms: Vec<f64>, mass: &[Vec<f64>]) -> Result<Self> {
        if mass.len() != y_atoms.len() || mass.is_empty() {
            return Err(Error::InvalidModel(format!(
                "{} atoms but {} mass rows",
                y_atoms.len(),
                mass.len()
            )));
        }
        let n = mass[0].len();
        if mass.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidModel("ragged mass matrix".into()));
        }
        if mass.iter().flatten().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidModel("masses must be finite and nonnegative".into()));
        }
        let total: f64 = mass.iter().flatten().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidModel("total mass is zero".into()));
        }
        let rows: Vec<usize> = (0..mass.len()).filter(|&j| mass[j].iter().any(|&p| p > 0.0)).collect();
        let cols: Vec<usize> = (0..n).filter(|&i| mass.iter().any(|r| r[i] > 0.0)).collect();
        let col_mass: Vec<f64> = cols.iter().map(|&i| rows.iter().map(|&j| mass[j][i]).sum()).collect();
        let weights: Vec<f64> = col_mass.iter().map(|c| c / total).collect();
        let mut cond_cdf = Vec::with_capacity(rows.len());
        let mut acc = vec![0.0; cols.len()];
        for &j in &rows {
            for (k, &i) in cols.iter().enumerate() {
                acc[k] += mass[j][i];
            }
            cond_cdf.push(acc.iter().zip(&col_mass).map(|(a, c)| (a / c).min(1.0)).collect());
        }
        *cond_cdf.last_mut().unwrap() = vec![1.0; cols.len()];
        let atoms = rows.iter().map(|&j| y_atoms[j]).collect();
        Self::from_parts(atoms, renormalise(weights), cond_cdf)
    }

    /// Model with a single cell: `Y` independent of any predictor.
    pub fn independent(y: DiscreteMarginal, weights: Vec<f64>) -> Result<Self> {
        let cond_cdf = y.cdf_values().iter().map(|&c| vec![c; weights.len()]).collect();
        Self::new(y, weights, cond_cdf)
    }

    pub fn y(&self) -> &DiscreteMarginal {
        &self.y
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cond_cdf(&self) -> &[Vec<f64>] {
        &self.cond_cdf
    }

    pub fn n_levels(&self) -> usize {
        self.y.len()
    }

    pub fn n_cells(&self) -> usize {
        self.weights.len()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.cond_cdf[j]
    }

    /// `P(Y < a_j | cell i)`.
    pub fn cdf_left(&self, j: usize, i: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.cond_cdf[j - 1][i]
        }
    }

    /// `P(Y >= a_j | cell i)`.
    pub fn survival(&self, j: usize, i: usize) -> f64 {
        1.0 - self.cdf_left(j, i)
    }

    /// Row `j` as a step function of the cell coordinate `u`, cells laid out
    /// in order with their weights as widths.
    pub fn eta(&self, j: usize) -> StepFunction {
        StepFunction::from_widths(&self.weights, self.cond_cdf[j].clone())
            .expect("validated weights give a valid step function")
    }

    pub fn relabel_y<F: Fn(f64) -> f64>(&self, g: F) -> Result<Self> {
        Ok(Self {
            y: self.y.relabel(g)?,
            weights: self.weights.clone(),
            cond_cdf: self.cond_cdf.clone(),
        })
    }

    /// Replace each `Y` atom by its cdf value, i.e. the model of `(F_Y(Y), X)`.
    pub fn with_cdf_labels(&self) -> Self {
        let y = DiscreteMarginal::from_cdf(self.y.cdf_values().to_vec(), self.y.cdf_values().to_vec())
            .expect("cdf values are strictly increasing");
        Self {
            y,
            weights: self.weights.clone(),
            cond_cdf: self.cond_cdf.clone(),
        }
    }

    /// Reorder cells: new cell `k` is old cell `perm[k]`.
    pub fn permute_cells(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_cells();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidInput("not a permutation of the cells".into()));
        }
        Ok(Self {
            y: self.y.clone(),
            weights: perm.iter().map(|&p| self.weights[p]).collect(),
            cond_cdf: self
                .cond_cdf
                .iter()
                .map(|row| perm.iter().map(|&p| row[p]).collect())
                .collect(),
        })
    }

    /// Merge cells into groups (`groups[i]` is the group of cell `i`; ids
    /// must cover `0..G`). The result is the model of `(Y, h(X))` for the
    /// coarsening `h`.
    pub fn merge_cells(&self, groups: &[usize]) -> Result<Self> {
        if groups.len() != self.n_cells() {
            return Err(Error::InvalidInput(format!(
                "group map has {} entries for {} cells",
                groups.len(),
                self.n_cells()
            )));
        }
        let n_groups = groups.iter().max().map_or(0, |g| g + 1);
        let mut weights = vec![0.0; n_groups];
        for (i, &g) in groups.iter().enumerate() {
            weights[g] += self.weights[i];
        }
        if weights.contains(&0.0) {
            return Err(Error::InvalidInput("group ids must be contiguous from 0".into()));
        }
        let cond_cdf = self
            .cond_cdf
            .iter()
            .map(|row| {
                let mut acc = vec![0.0; n_groups];
                for (i, &g) in groups.iter().enumerate() {
                    acc[g] += self.weights[i] * row[i];
                }
                acc.iter().zip(&weights).map(|(a, w)| (a / w).clamp(0.0, 1.0)).collect()
            })
            .collect();
        Ok(Self {
            y: self.y.clone(),
            weights,
            cond_cdf,
        })
    }

    /// Serializable form with the `depord/1` schema tag.
    pub fn to_document(&self) -> GridDocument {
        GridDocument {
            schema: GridDocument::SCHEMA.to_string(),
            y_atoms: self.y.atoms().to_vec(),
            cell_weights: self.weights.clone(),
            cond_cdf: self.cond_cdf.clone(),
        }
    }

    pub fn from_document(doc: &GridDocument) -> Result<Self> {
        if doc.schema != GridDocument::SCHEMA {
            return Err(Error::InvalidInput(format!(
                "unsupported schema {:?}, expected {:?}",
                doc.schema,
                GridDocument::SCHEMA
            )));
        }
        Self::from_parts(doc.y_atoms.clone(), doc.cell_weights.clone(), doc.cond_cdf.clone())
    }
}

/// On-disk grid format; rows of `cond_cdf` follow the `Y` atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDocument {
    pub schema: String,
    pub y_atoms: Vec<f64>,
    pub cell_weights: Vec<f64>,
    pub cond_cdf: Vec<Vec<f64>>,
}

impl GridDocument {
    pub const SCHEMA: &'static str = "depord/1";
}

/// Randomised distributional transform of `Y` onto `n_levels` equally likely
/// levels: the atom mass at each cdf jump is spread uniformly, independent of
/// the cell. The result has uniform-like `Y` (atoms `1..=n_levels`).
pub fn uniformize(m: &ConditionalModel, n_levels: usize) -> Result<ConditionalModel> {
    if n_levels < 2 {
        return Err(Error::InvalidInput("uniformize needs at least two levels".into()));
    }
    let y = m.y();
    let mut rows = Vec::with_capacity(n_levels);
    for k in 1..=n_levels {
        let t = k as f64 / n_levels as f64;
        if k == n_levels {
            rows.push(vec![1.0; m.n_cells()]);
            continue;
        }
        let j = y.cdf_values().partition_point(|&c| c < t).min(y.len() - 1);
        let lo = y.cdf_left(j);
        let theta = ((t - lo) / y.probs()[j]).clamp(0.0, 1.0);
        rows.push(
            (0..m.n_cells())
                .map(|i| {
                    let below = m.cdf_left(j, i);
                    (below + theta * (m.cond_cdf[j][i] - below)).clamp(0.0, 1.0)
                })
                .collect(),
        );
    }
    let y_new = DiscreteMarginal::uniform_levels(n_levels)?;
    ConditionalModel::new(y_new, m.weights.clone(), rows)
}

fn mixture(weights: &[f64], row: &[f64]) -> f64 {
    let terms: Vec<f64> = weights.iter().zip(row).map(|(w, f)| w * f).collect();
    pairwise_sum(&terms)
}

fn renormalise(weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn check_weights(weights: Vec<f64>) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::InvalidModel("no cells".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidModel(format!("cell weights must be positive, got {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::InvalidModel(format!("cell weights sum to {total}")));
    }
    Ok(weights)
}

fn check_cdf_matrix(mut f: Vec<Vec<f64>>, m: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    if f.len() != m {
        return Err(Error::InvalidModel(format!("{} cdf rows for {m} atoms", f.len())));
    }
    if let Some(r) = f.iter().find(|r| r.len() != n) {
        return Err(Error::InvalidModel(format!(
            "cdf row of length {} for {n} cells",
            r.len()
        )));
    }
    for j in 0..m {
        for i in 0..n {
            let v = f[j][i];
            if !v.is_finite() || !(-ENTRY_SLACK..=1.0 + ENTRY_SLACK).contains(&v) {
                return Err(Error::InvalidModel(format!(
                    "cdf entry ({j}, {i}) = {v} outside [0, 1]"
                )));
            }
            let prev = if j == 0 { 0.0 } else { f[j - 1][i] };
            if v < prev - ENTRY_SLACK {
                return Err(Error::InvalidModel(format!(
                    "cdf of cell {i} decreases at atom {j}: {prev} -> {v}"
                )));
            }
            f[j][i] = v.clamp(prev, 1.0);
        }
    }
    if let Some((i, v)) = f[m - 1]
        .iter()
        .enumerate()
        .find(|(_, v)| (**v - 1.0).abs() > CONSISTENCY_TOL)
    {
        return Err(Error::InvalidModel(format!("cdf of cell {i} ends at {v}, not 1")));
    }
    f[m - 1].iter_mut().for_each(|v| *v = 1.0);
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perfect_2x2() -> ConditionalModel {
        ConditionalModel::from_parts(vec![0.0, 1.0], vec![0.5, 0.5], vec![vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap()
    }

    #[test]
    fn joint_mass_round_trip() {
        let mass = vec![vec![0.1, 0.2], vec![0.3, 0.4]];
        let m = ConditionalModel::from_joint_mass(vec![0.0, 1.0], &mass).unwrap();
        assert!((m.weights()[0] - 0.4).abs() < 1e-15);
        assert!((m.row(0)[0] - 0.25).abs() < 1e-15);
        assert!((m.row(0)[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.y().cdf_values()[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn empty_rows_and_columns_are_dropped() {
        let mass = vec![vec![0.5, 0.0], vec![0.0, 0.0], vec![0.5, 0.0]];
        let m = ConditionalModel::from_joint_mass(vec![0.0, 1.0, 2.0], &mass).unwrap();
        assert_eq!(m.n_cells(), 1);
        assert_eq!(m.y().atoms(), &[0.0, 2.0]);
    }

    #[test]
    fn rejects_inconsistent_marginal() {
        let y = DiscreteMarginal::bernoulli(0.5).unwrap();
        let err = ConditionalModel::new(y, vec![0.5, 0.5], vec![vec![0.9, 0.9], vec![1.0, 1.0]]);
        assert!(matches!(err, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn rejects_decreasing_columns_and_bad_weights() {
        let bad = ConditionalModel::from_parts(vec![0.0, 1.0, 2.0], vec![1.0], vec![vec![0.6], vec![0.5], vec![1.0]]);
        assert!(bad.is_err());
        let bad = ConditionalModel::from_parts(vec![0.0, 1.0], vec![0.5, 0.6], vec![vec![0.5, 0.5], vec![1.0, 1.0]]);
        assert!(bad.is_err());
        let bad = ConditionalModel::from_parts(vec![0.0, 1.0], vec![1.0], vec![vec![0.5], vec![0.9]]);
        assert!(bad.is_err());
    }

    #[test]
    fn merging_preserves_the_marginal() {
        let m = ConditionalModel::from_parts(
            vec![0.0, 1.0, 2.0],
            vec![0.2, 0.3, 0.5],
            vec![vec![0.1, 0.4, 0.7], vec![0.5, 0.9, 0.8], vec![1.0; 3]],
        )
        .unwrap();
        let merged = m.merge_cells(&[0, 1, 0]).unwrap();
        assert_eq!(merged.n_cells(), 2);
        for j in 0..3 {
            let mix: f64 = merged.weights().iter().zip(merged.row(j)).map(|(w, f)| w * f).sum();
            assert!((mix - m.y().cdf_values()[j]).abs() < 1e-12);
        }
        assert!(m.merge_cells(&[0, 2, 0]).is_err());
        assert!(m.merge_cells(&[0, 1]).is_err());
    }

    #[test]
    fn permutation_checks() {
        let m = perfect_2x2();
        let p = m.permute_cells(&[1, 0]).unwrap();
        assert_eq!(p.row(0), &[0.0, 1.0]);
        assert!(m.permute_cells(&[0, 0]).is_err());
    }

    #[test]
    fn document_round_trip_is_bitwise() {
        let m = ConditionalModel::from_parts(
            vec![-1.5, 0.25, 3.0],
            vec![0.1, 0.6, 0.3],
            vec![vec![0.123456789, 0.3, 0.05], vec![0.5, 0.7, 0.9], vec![1.0; 3]],
        )
        .unwrap();
        let back = ConditionalModel::from_document(&m.to_document()).unwrap();
        assert_eq!(back, m);
        let mut doc = m.to_document();
        doc.schema = "other/2".into();
        assert!(ConditionalModel::from_document(&doc).is_err());
    }

    #[test]
    fn uniformize_spreads_atoms_evenly() {
        let m = perfect_2x2();
        let u = uniformize(&m, 4).unwrap();
        assert_eq!(u.y().probs().len(), 4);
        // level 1/4 sits half way through the atom at 0, which cell 0 holds fully.
        assert!((u.row(0)[0] - 0.5).abs() < 1e-15);
        assert!((u.row(0)[1] - 0.0).abs() < 1e-15);
        assert!((u.row(1)[0] - 1.0).abs() < 1e-15);
        assert!((u.row(2)[1] - 0.5).abs() < 1e-15);
    }
}
