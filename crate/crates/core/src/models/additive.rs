use serde::Serialize;

use super::bvn::phi_inv;
use crate::ccx::{ccx_compare, ComparisonResult};
use crate::dist_core::{ConditionalModel, DiscreteMarginal};
use crate::error::{Error, Result};

/// Continuous stand-in for a discrete error law: each atom's mass is spread
/// uniformly over the bin between the midpoints to its neighbours (the outer
/// bins are symmetric around their atom).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramLaw {
    edges: Vec<f64>,
    cdf_at_edges: Vec<f64>,
}

impl HistogramLaw {
    pub fn new(eps: &DiscreteMarginal) -> Result<Self> {
        let a = eps.atoms();
        if a.len() < 2 {
            return Err(Error::InvalidInput("the error law needs at least two atoms".into()));
        }
        let n = a.len();
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(a[0] - 0.5 * (a[1] - a[0]));
        edges.extend(a.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        edges.push(a[n - 1] + 0.5 * (a[n - 1] - a[n - 2]));
        let cdf_at_edges = std::iter::once(0.0).chain(eps.cdf_values().iter().copied()).collect();
        Ok(Self { edges, cdf_at_edges })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.edges[0], *self.edges.last().unwrap())
    }

    pub fn cdf(&self, e: f64) -> f64 {
        let (lo, hi) = self.support();
        if e <= lo {
            return 0.0;
        }
        if e >= hi {
            return 1.0;
        }
        let k = self.edges.partition_point(|&x| x <= e);
        let (e0, e1) = (self.edges[k - 1], self.edges[k]);
        let (c0, c1) = (self.cdf_at_edges[k - 1], self.cdf_at_edges[k]);
        c0 + (c1 - c0) * (e - e0) / (e1 - e0)
    }
}

/// Law of `f(X) + σ ε` given each atom of `f(X)`.
struct AdditiveLaw<'a> {
    f: &'a DiscreteMarginal,
    eps: &'a HistogramLaw,
    sigma: f64,
}

impl AdditiveLaw<'_> {
    fn conditional_cdf(&self, k: usize, y: f64) -> f64 {
        let fk = self.f.atoms()[k];
        if self.sigma == 0.0 {
            return if fk <= y { 1.0 } else { 0.0 };
        }
        self.eps.cdf((y - fk) / self.sigma)
    }

    fn cdf(&self, y: f64) -> f64 {
        let terms: Vec<f64> = (0..self.f.len())
            .map(|k| self.f.probs()[k] * self.conditional_cdf(k, y))
            .collect();
        terms.iter().sum::<f64>().min(1.0)
    }

    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.eps.support();
        let (f0, f1) = (self.f.atoms()[0], *self.f.atoms().last().unwrap());
        (f0 + self.sigma * lo - 1.0, f1 + self.sigma * hi + 1.0)
    }

    /// `min { y : F(y) >= v }` by bisection.
    fn quantile(&self, v: f64) -> f64 {
        let (mut lo, mut hi) = self.support();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= v {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// Finite model of `(f(X) + σ ε, X)` evaluated at the given cdf levels (the
/// last must be 1). Cells are the atoms of `f(X)`.
pub fn additive_model(
    f: &DiscreteMarginal,
    eps: &DiscreteMarginal,
    sigma: f64,
    levels: &[f64],
) -> Result<ConditionalModel> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "sigma = {sigma} must be finite and nonnegative"
        )));
    }
    let hist = HistogramLaw::new(eps)?;
    let law = AdditiveLaw { f, eps: &hist, sigma };
    let m = levels.len();
    let mut atoms: Vec<f64> = levels[..m - 1].iter().map(|&v| law.quantile(v)).collect();
    atoms.push(law.support().1);
    let cond_cdf = atoms[..m - 1]
        .iter()
        .map(|&y| (0..f.len()).map(|k| law.conditional_cdf(k, y)).collect())
        .chain(std::iter::once(vec![1.0; f.len()]))
        .collect();
    let y = DiscreteMarginal::from_cdf(atoms, levels.to_vec())?;
    ConditionalModel::new(y, f.probs().to_vec(), cond_cdf)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditiveStep {
    pub sigma: f64,
    pub sigma_next: f64,
    /// `ccx_compare(model at sigma_next, model at sigma)`.
    pub result: ComparisonResult,
}

/// For each consecutive pair `σ < σ'` compare the noisier model against the
/// less noisy one. Both models of a pair share one level grid: `n_levels`
/// equally likely levels, or the cdf levels of `f(X)` when `σ = 0`.
pub fn additive_error_verify(
    f: &DiscreteMarginal,
    eps: &DiscreteMarginal,
    sigmas: &[f64],
    n_levels: usize,
    tol: f64,
) -> Result<Vec<AdditiveStep>> {
    if sigmas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("sigmas must be strictly ascending".into()));
    }
    if sigmas.first().is_some_and(|&s| s < 0.0) {
        return Err(Error::InvalidInput("sigmas must be nonnegative".into()));
    }
    if n_levels < 2 {
        return Err(Error::InvalidInput("need at least two levels".into()));
    }
    let uniform: Vec<f64> = (1..=n_levels).map(|j| j as f64 / n_levels as f64).collect();
    sigmas
        .windows(2)
        .map(|w| {
            let levels = if w[0] == 0.0 { f.cdf_values() } else { &uniform[..] };
            let lo = additive_model(f, eps, w[0], levels)?;
            let hi = additive_model(f, eps, w[1], levels)?;
            Ok(AdditiveStep {
                sigma: w[0],
                sigma_next: w[1],
                result: ccx_compare(&hi, &lo, tol),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorShape {
    Normal,
    Uniform,
    /// Standard exponential shifted to mean zero.
    ShiftedExponential,
}

/// `n` equally likely atoms at the mid-quantiles of the shape.
pub fn error_shape(shape: ErrorShape, n: usize) -> Result<DiscreteMarginal> {
    if n < 2 {
        return Err(Error::InvalidInput("need at least two atoms".into()));
    }
    let atoms = (1..=n)
        .map(|i| {
            let u = (i as f64 - 0.5) / n as f64;
            match shape {
                ErrorShape::Normal => phi_inv(u),
                ErrorShape::Uniform => u - 0.5,
                ErrorShape::ShiftedExponential => -(1.0 - u).ln() - 1.0,
            }
        })
        .collect();
    DiscreteMarginal::from_cdf(atoms, (1..=n).map(|i| i as f64 / n as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccx::is_perfect;
    use crate::verdict::Verdict;

    #[test]
    fn histogram_cdf() {
        let eps = DiscreteMarginal::new(vec![0.0, 1.0, 3.0], vec![0.25, 0.25, 0.5]).unwrap();
        let h = HistogramLaw::new(&eps).unwrap();
        assert_eq!(h.support(), (-0.5, 4.0));
        assert_eq!(h.cdf(-0.5), 0.0);
        assert!((h.cdf(0.5) - 0.25).abs() < 1e-15);
        assert!((h.cdf(3.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_noise_is_perfect() {
        let f = error_shape(ErrorShape::Normal, 11).unwrap();
        let eps = error_shape(ErrorShape::Uniform, 11).unwrap();
        let m = additive_model(&f, &eps, 0.0, f.cdf_values()).unwrap();
        assert!(is_perfect(&m, 0.0));
        let steps = additive_error_verify(&f, &eps, &[0.0, 0.5], 20, 1e-9).unwrap();
        assert!(steps[0].result.verdict.is_le());
    }

    #[test]
    fn noise_lowers_dependence() {
        let f = error_shape(ErrorShape::Normal, 41).unwrap();
        let eps = error_shape(ErrorShape::ShiftedExponential, 41).unwrap();
        let steps = additive_error_verify(&f, &eps, &[0.5, 1.0, 2.0], 60, 1e-9).unwrap();
        for s in steps {
            assert_eq!(s.result.verdict, Verdict::LessEq, "{} -> {}", s.sigma, s.sigma_next);
        }
    }

    #[test]
    fn input_checks() {
        let f = error_shape(ErrorShape::Normal, 5).unwrap();
        assert!(additive_error_verify(&f, &f, &[1.0, 0.5], 10, 1e-9).is_err());
        assert!(HistogramLaw::new(&DiscreteMarginal::point_mass(0.0)).is_err());
    }
}
