use serde::{Deserialize, Serialize};

use crate::ccx::{ComparisonResult, LevelComparison, Witness};
use crate::dist_core::ConditionalModel;
use crate::error::{Error, Result};
use crate::verdict::Verdict;

const CONSISTENCY_TOL: f64 = 1e-12;

/// `(Y, X)` on `{0, 1}²` with `p = P(X = 1)`, `q = P(Y = 1)`,
/// `alpha = P(Y = 0 | X = 0)` and `beta = P(Y = 0 | X = 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliParams {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl BernoulliParams {
    pub fn new(p: f64, q: f64, alpha: f64, beta: f64) -> Result<Self> {
        let s = Self { p, q, alpha, beta };
        s.validate()?;
        Ok(s)
    }

    /// Parameters with `q` implied by the conditional laws.
    pub fn from_conditionals(p: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(p, (1.0 - p) * (1.0 - alpha) + p * (1.0 - beta), alpha, beta)
    }

    pub fn validate(&self) -> Result<()> {
        let open = |x: f64| x > 0.0 && x < 1.0;
        let closed = |x: f64| (0.0..=1.0).contains(&x);
        if !open(self.p) || !open(self.q) {
            return Err(Error::Domain(format!(
                "p = {} and q = {} must lie in (0, 1)",
                self.p, self.q
            )));
        }
        if !closed(self.alpha) || !closed(self.beta) {
            return Err(Error::Domain(format!(
                "alpha = {} and beta = {} must lie in [0, 1]",
                self.alpha, self.beta
            )));
        }
        let implied = (1.0 - self.p) * (1.0 - self.alpha) + self.p * (1.0 - self.beta);
        if (implied - self.q).abs() > CONSISTENCY_TOL {
            return Err(Error::InvalidModel(format!(
                "q = {} but the conditional laws give P(Y = 1) = {implied}",
                self.q
            )));
        }
        Ok(())
    }

    fn lo(&self) -> f64 {
        self.alpha.min(self.beta)
    }

    fn hi(&self) -> f64 {
        self.alpha.max(self.beta)
    }

    /// Kink of the integrated rearrangement: the width of the cell with the
    /// larger conditional cdf.
    fn kink(&self) -> f64 {
        if self.alpha >= self.beta {
            1.0 - self.p
        } else {
            self.p
        }
    }
}

/// `x -> ∫_0^x η*` at the single level `1 - q`: slope `α ∨ β` up to the
/// kink, then `α ∧ β`.
pub fn bernoulli_curve(b: &BernoulliParams, x: f64) -> f64 {
    let total = 1.0 - b.q;
    (b.hi() * x).min(total - b.lo() * (1.0 - x))
}

/// Closed-form ccx comparison: `A ≼ B` iff `q = q'`, `α' ∧ β' <= α ∧ β`
/// and `α ∨ β <= α' ∨ β'`.
pub fn bernoulli_ccx(a: &BernoulliParams, b: &BernoulliParams, tol: f64) -> Result<ComparisonResult> {
    a.validate()?;
    b.validate()?;
    if (a.q - b.q).abs() > tol.max(1e-12) {
        return Ok(ComparisonResult::mismatch(
            tol,
            format!("q = {} differs from q' = {}", a.q, b.q),
        ));
    }
    let le = b.lo() <= a.lo() + tol && a.hi() <= b.hi() + tol;
    let ge = a.lo() <= b.lo() + tol && b.hi() <= a.hi() + tol;
    let verdict = Verdict::from_sides(le, ge);
    let level = 1.0 - a.q;
    // Each concave curve is the minimum of two lines, so the worst gap
    // sits at one of the two kinks (or is zero at the origin).
    let worst = |f: &BernoulliParams, g: &BernoulliParams| {
        [0.0, a.kink(), b.kink()]
            .into_iter()
            .map(|x| Witness {
                level,
                x,
                lhs: bernoulli_curve(f, x),
                rhs: bernoulli_curve(g, x),
            })
            .max_by(|u, v| (u.lhs - u.rhs).total_cmp(&(v.lhs - v.rhs)))
            .expect("nonempty")
    };
    let (excess, deficit) = (worst(a, b), worst(b, a));
    let mut result = ComparisonResult::summary(verdict, tol);
    result.per_level = vec![LevelComparison {
        level,
        verdict,
        max_excess: excess.lhs - excess.rhs,
        max_deficit: deficit.lhs - deficit.rhs,
    }];
    if verdict == Verdict::Incomparable {
        result.witness = Some(excess);
        result.counter_witness = Some(deficit);
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BernoulliClass {
    Independent,
    Perfect,
    Comonotone,
    Countermonotone,
}

/// Which of the extreme cases the parameters realise; empty if none.
pub fn bernoulli_classify(b: &BernoulliParams, tol: f64) -> Vec<BernoulliClass> {
    let mut out = Vec::new();
    if (b.alpha - b.beta).abs() <= tol {
        out.push(BernoulliClass::Independent);
    }
    if b.lo() <= tol && b.hi() >= 1.0 - tol {
        out.push(BernoulliClass::Perfect);
    }
    let upper = ((1.0 - b.q) / (1.0 - b.p)).min(1.0);
    if (b.alpha - upper).abs() <= tol {
        out.push(BernoulliClass::Comonotone);
    }
    let lower = (1.0 - b.q / (1.0 - b.p)).max(0.0);
    if (b.alpha - lower).abs() <= tol {
        out.push(BernoulliClass::Countermonotone);
    }
    out
}

/// Two cells of weights `(1 - p, p)` with conditional cdf rows `(α, β)`, `(1, 1)`.
pub fn bernoulli_to_model(b: &BernoulliParams) -> Result<ConditionalModel> {
    b.validate()?;
    let y = crate::dist_core::DiscreteMarginal::bernoulli(b.q)?;
    let c0 = (1.0 - b.p) * b.alpha + b.p * b.beta;
    // Use the cell mixture as the marginal level so both sides agree bit for bit.
    let y = crate::dist_core::DiscreteMarginal::from_cdf(y.atoms().to_vec(), vec![c0, 1.0])?;
    ConditionalModel::new(y, vec![1.0 - b.p, b.p], vec![vec![b.alpha, b.beta], vec![1.0, 1.0]])
}
