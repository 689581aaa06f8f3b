#![allow(dead_code)]

use depord::ccx::ProductCells;
use depord::dist_core::{ConditionalModel, DiscreteMarginal};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Positive probabilities; with `uniform` all equal.
pub fn random_probs(rng: &mut TestRng, n: usize, uniform: bool) -> Vec<f64> {
    if uniform {
        return vec![1.0 / n as f64; n];
    }
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// A nonnegative matrix with the odd exact zero to create ties.
fn random_matrix(rng: &mut TestRng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    if rng.random_bool(0.15) {
                        0.0
                    } else {
                        rng.random_range(0.0..1.0)
                    }
                })
                .collect()
        })
        .collect()
}

/// A model whose `Y` law has the given masses: a random joint mass matrix
/// with its rows rescaled to `probs`.
pub fn model_with_y(rng: &mut TestRng, probs: &[f64], cells: usize) -> ConditionalModel {
    loop {
        let mut mass = random_matrix(rng, probs.len(), cells);
        if mass.iter().any(|r| r.iter().all(|v| *v == 0.0)) {
            continue;
        }
        for (row, p) in mass.iter_mut().zip(probs) {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v *= p / s);
        }
        let atoms = (0..probs.len()).map(|j| j as f64).collect();
        if let Ok(m) = ConditionalModel::from_joint_mass(atoms, &mass) {
            if m.n_levels() == probs.len() {
                return m;
            }
        }
    }
}

/// A model with given `Y` masses and equal cell weights (Sinkhorn scaling).
pub fn model_with_y_equal_cells(rng: &mut TestRng, probs: &[f64], cells: usize) -> ConditionalModel {
    let mut mass: Vec<Vec<f64>> = (0..probs.len())
        .map(|_| (0..cells).map(|_| rng.random_range(0.02..1.0)).collect())
        .collect();
    for _ in 0..2000 {
        for (row, p) in mass.iter_mut().zip(probs) {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v *= p / s);
        }
        for i in 0..cells {
            let s: f64 = mass.iter().map(|r| r[i]).sum();
            mass.iter_mut().for_each(|r| r[i] /= s * cells as f64);
        }
    }
    let weights = vec![1.0 / cells as f64; cells];
    let mut cond_cdf = Vec::new();
    let mut acc = vec![0.0; cells];
    for row in &mass {
        for i in 0..cells {
            acc[i] += row[i] * cells as f64;
        }
        cond_cdf.push(acc.iter().map(|v| v.min(1.0)).collect::<Vec<f64>>());
    }
    *cond_cdf.last_mut().unwrap() = vec![1.0; cells];
    let levels = cumulative(probs);
    let y = DiscreteMarginal::from_cdf((0..probs.len()).map(|j| j as f64).collect(), levels).unwrap();
    ConditionalModel::new(y, weights, cond_cdf).unwrap()
}

pub fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    *out.last_mut().unwrap() = 1.0;
    out
}

pub fn random_model(rng: &mut TestRng, max_atoms: usize, max_cells: usize) -> ConditionalModel {
    let m = rng.random_range(2..=max_atoms);
    let n = rng.random_range(1..=max_cells);
    let uniform = rng.random_bool(0.3);
    let probs = random_probs(rng, m, uniform);
    model_with_y(rng, &probs, n)
}

/// Same `Y` law, conditional cdf rows constant across cells.
pub fn independent_version(m: &ConditionalModel) -> ConditionalModel {
    ConditionalModel::independent(m.y().clone(), m.weights().to_vec()).unwrap()
}

/// A perfectly dependent model with the same `Y` law: every cell carries a
/// single atom, atoms split into a random number of cells in random order.
pub fn perfect_version(rng: &mut TestRng, y: &DiscreteMarginal) -> ConditionalModel {
    let mut cells: Vec<(usize, f64)> = Vec::new();
    for (j, &p) in y.probs().iter().enumerate() {
        let pieces = rng.random_range(1..=3);
        let cuts = random_probs(rng, pieces, false);
        cells.extend(cuts.iter().map(|c| (j, p * c)));
    }
    cells.shuffle(rng);
    let weights: Vec<f64> = cells.iter().map(|c| c.1).collect();
    let total: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let cond_cdf = (0..y.len())
        .map(|j| cells.iter().map(|&(k, _)| if k <= j { 1.0 } else { 0.0 }).collect())
        .collect();
    ConditionalModel::from_parts(y.atoms().to_vec(), weights, cond_cdf).unwrap()
}

/// Rows pulled towards the marginal cdf: `t F + (1 - t) F_Y`.
pub fn shrink(m: &ConditionalModel, t: f64) -> ConditionalModel {
    let c = m.y().cdf_values();
    let rows = m
        .cond_cdf()
        .iter()
        .zip(c)
        .map(|(row, &cj)| row.iter().map(|v| t * v + (1.0 - t) * cj).collect())
        .collect();
    ConditionalModel::new(m.y().clone(), m.weights().to_vec(), rows).unwrap()
}

/// Random grouping of the cells into at most `groups` nonempty groups.
pub fn random_grouping(rng: &mut TestRng, n: usize, groups: usize) -> Vec<usize> {
    let g = groups.min(n).max(1);
    let mut ids: Vec<usize> = (0..n).map(|i| if i < g { i } else { rng.random_range(0..g) }).collect();
    ids.shuffle(rng);
    ids
}

/// Model over `nx × nz` product cells, optionally with `Y ⊥ Z | X`.
pub fn product_model(
    rng: &mut TestRng,
    m_atoms: usize,
    nx: usize,
    nz: usize,
    ci: bool,
) -> (ConditionalModel, ProductCells) {
    let cells = ProductCells::grid(nx, nz);
    let uniform = rng.random_bool(0.3);
    let probs = random_probs(rng, m_atoms, uniform);
    let base = loop {
        let m = model_with_y(rng, &probs, nx * nz);
        if m.n_cells() == nx * nz {
            break m;
        }
    };
    if !ci {
        return (base, cells);
    }
    // Replace every cell's law by that of its x-group.
    let coarse = base.merge_cells(&cells.x_index).unwrap();
    let rows = (0..base.n_levels())
        .map(|j| (0..nx * nz).map(|i| coarse.row(j)[cells.x_index[i]]).collect())
        .collect();
    let m = ConditionalModel::new(base.y().clone(), base.weights().to_vec(), rows).unwrap();
    (m, cells)
}

pub fn random_permutation(rng: &mut TestRng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// A pair of models on the same `Y` law drawn from a mix of comparable and
/// generic constructions.
pub fn random_pair(rng: &mut TestRng, max_atoms: usize, max_cells: usize) -> (ConditionalModel, ConditionalModel) {
    let b = random_model(rng, max_atoms, max_cells);
    let a = match rng.random_range(0..8) {
        0 => {
            let k = rng.random_range(1..=b.n_cells());
            let g = random_grouping(rng, b.n_cells(), k);
            shrink(&b.merge_cells(&g).unwrap(), rng.random_range(0.0..1.0))
        }
        1 => {
            let k = rng.random_range(1..=b.n_cells());
            let g = random_grouping(rng, b.n_cells(), k);
            b.merge_cells(&g).unwrap()
        }
        2 => independent_version(&b),
        3 => perfect_version(rng, b.y()),
        4 => shrink(&b, rng.random_range(0.0..1.0)),
        5 => b.permute_cells(&random_permutation(rng, b.n_cells())).unwrap(),
        6 => random_model(rng, max_atoms, max_cells),
        _ => {
            let probs = b.y().probs().to_vec();
            let n = rng.random_range(1..=max_cells);
            model_with_y(rng, &probs, n)
        }
    };
    if rng.random_bool(0.5) {
        (a, b)
    } else {
        (b, a)
    }
}

/// Sort each row decreasingly: with equal cell weights this is the SI
/// version of the model on the same cells.
pub fn sorted_rows(m: &ConditionalModel) -> ConditionalModel {
    let rows = m
        .cond_cdf()
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.sort_by(|a, b| b.total_cmp(a));
            r
        })
        .collect();
    ConditionalModel::new(m.y().clone(), m.weights().to_vec(), rows).unwrap()
}

/// Two Bernoulli parameter sets sharing `q`. Conditionals are drawn on a
/// coarse grid a third of the time so that ties and equalities occur.
pub fn bernoulli_pair(rng: &mut TestRng) -> (depord::models::BernoulliParams, depord::models::BernoulliParams) {
    let coarse = rng.random_bool(0.3);
    let pick = |rng: &mut TestRng| {
        if coarse {
            rng.random_range(1..10) as f64 / 10.0
        } else {
            rng.random_range(0.01..0.99)
        }
    };
    let q = pick(rng);
    let one = |rng: &mut TestRng| loop {
        let p = pick(rng);
        let alpha = if rng.random_bool(0.1) { 1.0 - q } else { pick(rng) };
        let beta = (1.0 - q - (1.0 - p) * alpha) / p;
        if (0.0..=1.0).contains(&beta) {
            if let Ok(b) = depord::models::BernoulliParams::new(p, q, alpha, beta) {
                return b;
            }
        }
    };
    (one(rng), one(rng))
}
