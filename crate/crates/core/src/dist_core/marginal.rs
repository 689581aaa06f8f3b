use serde::Serialize;

use super::PROB_SUM_TOL;
use crate::error::{Error, Result};

/// A univariate law with finitely many atoms.
///
/// Atoms are strictly increasing and every atom carries positive mass. The
/// cumulative values are stored alongside the masses so that a law built from
/// cdf levels reproduces those levels bit for bit; the last one is exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMarginal {
    atoms: Vec<f64>,
    probs: Vec<f64>,
    #[serde(skip)]
    cdf: Vec<f64>,
}

impl DiscreteMarginal {
    pub fn new(atoms: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMarginal("no atoms".into()));
        }
        if atoms.len() != probs.len() {
            return Err(Error::InvalidMarginal(format!(
                "{} atoms but {} probabilities",
                atoms.len(),
                probs.len()
            )));
        }
        check_atoms(&atoms)?;
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidMarginal(format!(
                "probabilities must be positive, got {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidMarginal(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc.min(1.0)
            })
            .collect();
        *cdf.last_mut().unwrap() = 1.0;
        Ok(Self { atoms, probs, cdf })
    }

    /// Build from atoms and the cdf value at each atom. The cdf levels are
    /// kept exactly as given (the last is forced to 1).
    pub fn from_cdf(atoms: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != cdf.len() {
            return Err(Error::InvalidMarginal(
                "atoms and cdf values must be non-empty and of equal length".into(),
            ));
        }
        check_atoms(&atoms)?;
        let last = *cdf.last().unwrap();
        if (last - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidMarginal(format!("cdf must end at 1, ends at {last}")));
        }
        let mut cdf = cdf;
        *cdf.last_mut().unwrap() = 1.0;
        let mut prev = 0.0;
        let mut probs = Vec::with_capacity(cdf.len());
        for &c in &cdf {
            if !(c > prev) || !c.is_finite() {
                return Err(Error::InvalidMarginal(format!(
                    "cdf values must be strictly increasing in (0, 1], got {c} after {prev}"
                )));
            }
            probs.push(c - prev);
            prev = c;
        }
        Ok(Self { atoms, probs, cdf })
    }

    pub fn point_mass(atom: f64) -> Self {
        Self::new(vec![atom], vec![1.0]).expect("point mass is a valid law")
    }

    /// Law on {0, 1} with `P(Y = 1) = q`.
    pub fn bernoulli(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("bernoulli q = {q} outside (0, 1)")));
        }
        Self::from_cdf(vec![0.0, 1.0], vec![1.0 - q, 1.0])
    }

    /// `n` equally likely atoms `1, 2, ..., n` with cdf levels `j / n`.
    pub fn uniform_levels(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMarginal("zero levels".into()));
        }
        let atoms = (1..=n).map(|j| j as f64).collect();
        let cdf = (1..=n).map(|j| j as f64 / n as f64).collect();
        Self::from_cdf(atoms, cdf)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// cdf at each atom, `cdf_values()[j] = P(Y <= a_j)`.
    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.atoms.len() == 1
    }

    /// `P(Y < a_j)`, the left limit of the cdf at atom `j`.
    pub fn cdf_left(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.cdf[j - 1]
        }
    }

    /// `P(Y <= y)`.
    pub fn cdf(&self, y: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= y);
        if k == 0 {
            0.0
        } else {
            self.cdf[k - 1]
        }
    }

    /// Left-continuous generalised inverse `min { a_j : F(a_j) >= v }`.
    pub fn quantile(&self, v: f64) -> Result<f64> {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Domain(format!("quantile level {v} outside (0, 1)")));
        }
        let k = self.cdf.partition_point(|&c| c < v);
        Ok(self.atoms[k.min(self.atoms.len() - 1)])
    }

    /// Relabel atoms by a strictly increasing map; cdf levels are unchanged.
    pub fn relabel<F: Fn(f64) -> f64>(&self, g: F) -> Result<Self> {
        let atoms: Vec<f64> = self.atoms.iter().map(|&a| g(a)).collect();
        check_atoms(&atoms)?;
        Ok(Self {
            atoms,
            probs: self.probs.clone(),
            cdf: self.cdf.clone(),
        })
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().zip(&self.probs).map(|(a, p)| a * p).sum()
    }
}

fn check_atoms(atoms: &[f64]) -> Result<()> {
    if let Some(a) = atoms.iter().find(|a| !a.is_finite()) {
        return Err(Error::InvalidMarginal(format!("non-finite atom {a}")));
    }
    if let Some(w) = atoms.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidMarginal(format!(
            "atoms must be strictly increasing, got {} then {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Closure of the range of the cdf: `{0} ∪ {F(a_j)}`.
pub fn range_closure(m: &DiscreteMarginal) -> Vec<f64> {
    std::iter::once(0.0).chain(m.cdf.iter().copied()).collect()
}

/// True iff the two laws have the same closed cdf range (within 1e-12).
pub fn marginal_constraint(m1: &DiscreteMarginal, m2: &DiscreteMarginal) -> bool {
    m1.len() == m2.len() && m1.cdf.iter().zip(&m2.cdf).all(|(a, b)| (a - b).abs() <= PROB_SUM_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> DiscreteMarginal {
        DiscreteMarginal::new(vec![1.0, 2.0, 3.0], vec![0.2, 0.3, 0.5]).unwrap()
    }

    #[test]
    fn quantile_examples() {
        let b = DiscreteMarginal::bernoulli(0.5).unwrap();
        assert_eq!(b.quantile(0.3).unwrap(), 0.0);
        assert_eq!(b.quantile(0.7).unwrap(), 1.0);
        assert_eq!(b.quantile(0.5).unwrap(), 0.0);
        assert_eq!(three().quantile(0.5).unwrap(), 2.0);
        assert_eq!(three().quantile(0.2).unwrap(), 1.0);
        assert_eq!(three().quantile(0.2000001).unwrap(), 2.0);
    }

    #[test]
    fn quantile_rejects_levels_outside_unit_interval() {
        let m = three();
        for v in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(m.quantile(v), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn quantile_inverts_cdf_on_atoms() {
        let m = three();
        for (j, &a) in m.atoms().iter().enumerate().take(m.len() - 1) {
            assert_eq!(m.quantile(m.cdf(a)).unwrap(), a, "atom {j}");
        }
        let last = *m.atoms().last().unwrap();
        assert_eq!(m.quantile(1.0 - m.probs()[2] / 2.0).unwrap(), last);
    }

    #[test]
    fn range_closure_examples() {
        let b = DiscreteMarginal::bernoulli(0.5).unwrap();
        assert_eq!(range_closure(&b), vec![0.0, 0.5, 1.0]);
        let r = range_closure(&three());
        assert_eq!(r.len(), 4);
        for (x, y) in r.iter().zip([0.0, 0.2, 0.5, 1.0]) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(range_closure(&DiscreteMarginal::point_mass(4.0)), vec![0.0, 1.0]);
    }

    #[test]
    fn marginal_constraint_examples() {
        let b = DiscreteMarginal::bernoulli(0.5).unwrap();
        let shifted = DiscreteMarginal::new(vec![10.0, 20.0], vec![0.5, 0.5]).unwrap();
        assert!(marginal_constraint(&b, &shifted));
        assert!(!marginal_constraint(&b, &DiscreteMarginal::bernoulli(0.4).unwrap()));
    }

    #[test]
    fn staircase_laws_with_shifted_jumps_satisfy_constraint() {
        // F(0.5) = 0.4 followed by a jump of height 0.4; Y' shifts the lower
        // part by 2 and the upper part by 1.5.
        let y = DiscreteMarginal::from_cdf(vec![0.25, 0.5, 1.25, 1.5], vec![0.2, 0.4, 0.8, 1.0]).unwrap();
        let y2 = y.relabel(|a| if a <= 0.5 { a + 2.0 } else { a + 1.5 }).unwrap();
        assert!(marginal_constraint(&y, &y2));
        let z = DiscreteMarginal::new(vec![0.0, 1.0, 2.0], vec![0.4, 0.4, 0.2]).unwrap();
        assert!(!marginal_constraint(&y, &z));
    }

    #[test]
    fn construction_errors() {
        assert!(DiscreteMarginal::new(vec![], vec![]).is_err());
        assert!(DiscreteMarginal::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMarginal::new(vec![1.0, 2.0], vec![0.0, 1.0]).is_err());
        assert!(DiscreteMarginal::new(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteMarginal::from_cdf(vec![1.0, 2.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteMarginal::bernoulli(1.0).is_err());
    }

    #[test]
    fn last_cdf_value_is_exactly_one() {
        let m = DiscreteMarginal::new(vec![0.0, 1.0, 2.0], vec![0.1, 0.2, 0.7]).unwrap();
        assert_eq!(*m.cdf_values().last().unwrap(), 1.0);
        assert_eq!(m.cdf(5.0), 1.0);
        assert_eq!(m.cdf(-1.0), 0.0);
        assert_eq!(m.cdf_left(0), 0.0);
    }
}
