use std::io::Read;

use super::model::ConditionalModel;
use crate::error::{Error, Result};

/// Above this many distinct `y` values the sample is binned.
pub const DEFAULT_MAX_ATOMS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub y: f64,
    pub x: Vec<f64>,
}

impl SampleRow {
    pub fn new(y: f64, x: Vec<f64>) -> Self {
        Self { y, x }
    }
}

/// Empirical checkerboard model of a sample.
///
/// Cells are iterated rank bins of `x`: the first coordinate is split into
/// `b` rank bins, each bin is split by the ranks of the second coordinate
/// within it, and so on, with `b` the largest integer such that `b^p` does
/// not exceed `n_cells` and the last coordinate taking up the remainder.
/// Ties are never split across bins. Empty cells are dropped.
pub fn from_samples(rows: &[SampleRow], n_cells: usize, max_atoms: usize) -> Result<ConditionalModel> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("no samples".into()));
    }
    if n_cells == 0 || max_atoms == 0 {
        return Err(Error::InvalidInput("n_cells and max_atoms must be positive".into()));
    }
    if rows.len() < n_cells {
        return Err(Error::InvalidInput(format!(
            "{} samples cannot fill {n_cells} cells",
            rows.len()
        )));
    }
    let dim = rows[0].x.len();
    if dim == 0 {
        return Err(Error::InvalidInput("samples carry no predictor".into()));
    }
    if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.x.len() != dim) {
        return Err(Error::InvalidInput(format!(
            "row {k} has {} predictor values, expected {dim}",
            r.x.len()
        )));
    }
    if rows
        .iter()
        .any(|r| !r.y.is_finite() || r.x.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::InvalidInput("non-finite sample value".into()));
    }

    let (y_atoms, y_index) = bin_y(rows, max_atoms);

    let base = (1..=n_cells)
        .take_while(|b| b.pow(dim as u32) <= n_cells)
        .last()
        .unwrap_or(1);
    let last = n_cells.div_ceil(base.pow(dim as u32 - 1));
    let mut groups: Vec<Vec<usize>> = vec![(0..rows.len()).collect()];
    for d in 0..dim {
        let bins = if d + 1 == dim { last } else { base };
        groups = groups
            .into_iter()
            .flat_map(|g| split_by_rank(g, bins, |k| rows[k].x[d]))
            .collect();
    }

    let mut mass = vec![vec![0.0; groups.len()]; y_atoms.len()];
    for (c, g) in groups.iter().enumerate() {
        for &k in g {
            mass[y_index[k]][c] += 1.0;
        }
    }
    let n = rows.len() as f64;
    mass.iter_mut().flatten().for_each(|m| *m /= n);
    ConditionalModel::from_joint_mass(y_atoms, &mass)
}

/// Split `members` into at most `bins` nonempty groups by rank of `key`,
/// never separating equal keys. A value with lowest rank `r` among `n`
/// goes to bin `floor(r * bins / n)`.
fn split_by_rank<F: Fn(usize) -> f64>(mut members: Vec<usize>, bins: usize, key: F) -> Vec<Vec<usize>> {
    members.sort_by(|&a, &b| key(a).total_cmp(&key(b)));
    let n = members.len();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut current_bin = usize::MAX;
    let mut start = 0;
    while start < n {
        let v = key(members[start]);
        let mut end = start + 1;
        while end < n && key(members[end]) == v {
            end += 1;
        }
        let bin = start * bins / n;
        if bin != current_bin {
            out.push(Vec::new());
            current_bin = bin;
        }
        out.last_mut().unwrap().extend_from_slice(&members[start..end]);
        start = end;
    }
    out
}

/// Distinct `y` values, or rank bins labelled by their largest value when
/// there are more than `max_atoms`. Returns the atoms and each row's atom.
fn bin_y(rows: &[SampleRow], max_atoms: usize) -> (Vec<f64>, Vec<usize>) {
    let mut distinct: Vec<f64> = rows.iter().map(|r| r.y).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let groups = if distinct.len() <= max_atoms {
        split_by_rank((0..rows.len()).collect(), rows.len(), |k| rows[k].y)
    } else {
        split_by_rank((0..rows.len()).collect(), max_atoms, |k| rows[k].y)
    };
    let mut index = vec![0; rows.len()];
    let atoms = groups
        .iter()
        .enumerate()
        .map(|(j, g)| {
            g.iter().for_each(|&k| index[k] = j);
            g.iter().map(|&k| rows[k].y).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    (atoms, index)
}

/// Read samples from CSV with a header row: first column `y`, the rest `x`.
pub fn read_samples_csv<R: Read>(reader: R) -> Result<Vec<SampleRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let width = rdr
        .headers()
        .map_err(|e| Error::InvalidInput(format!("csv header: {e}")))?
        .len();
    if width < 2 {
        return Err(Error::InvalidInput(
            "csv needs a y column and at least one x column".into(),
        ));
    }
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        let mut vals = Vec::with_capacity(width);
        for (col, field) in record.iter().enumerate() {
            if field.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "missing value in data row {}, column {}",
                    line + 1,
                    col + 1
                )));
            }
            let v: f64 = field
                .parse()
                .map_err(|_| Error::InvalidInput(format!("data row {}: cannot parse {field:?}", line + 1)))?;
            vals.push(v);
        }
        let y = vals.remove(0);
        rows.push(SampleRow::new(y, vals));
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("csv has no data rows".into()));
    }
    Ok(rows)
}
