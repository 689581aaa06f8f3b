//! Brute-force reference implementations, written for auditability rather
//! than speed. They share no comparison code with the main engines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ccx::{assemble, ComparisonResult, Criterion, LevelOutcome};
use crate::dist_core::{range_closure, ConditionalModel};
use crate::error::{Error, Result};
use crate::rearrange::Crossing;
use crate::verdict::Verdict;

/// Tolerance on the equality of means in the convex order.
const MEAN_TOL: f64 = 1e-12;

/// A finitely supported law given by values and weights (repeats allowed).
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLaw {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FiniteLaw {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Self {
        assert_eq!(values.len(), weights.len(), "values and weights must pair up");
        Self { values, weights }
    }

    pub fn point(x: f64) -> Self {
        Self::new(vec![x], vec![1.0])
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, phi: F) -> f64 {
        self.values.iter().zip(&self.weights).map(|(&x, &w)| w * phi(x)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    /// `E (S - t)_+`.
    pub fn stop_loss(&self, t: f64) -> f64 {
        self.expect(|x| (x - t).max(0.0))
    }
}

/// Largest `E(S - t)_+ - E(T - t)_+` over the atoms of both laws.
fn stop_loss_excess(s: &FiniteLaw, t: &FiniteLaw) -> Crossing {
    let mut worst = Crossing {
        x: 0.0,
        lhs: 0.0,
        rhs: 0.0,
    };
    let mut first = true;
    for &c in s.values.iter().chain(&t.values) {
        let (a, b) = (s.stop_loss(c), t.stop_loss(c));
        if first || a - b > worst.gap() {
            worst = Crossing { x: c, lhs: a, rhs: b };
            first = false;
        }
    }
    worst
}

/// `S <=cx T`: equal means and `E(S - t)_+ <= E(T - t)_+` at every atom of
/// either law (stop-loss transforms are piecewise linear with kinks there).
pub fn convex_order_bruteforce(s: &FiniteLaw, t: &FiniteLaw, tol: f64) -> bool {
    (s.mean() - t.mean()).abs() <= MEAN_TOL && stop_loss_excess(s, t).gap() <= tol
}

/// Monte Carlo check of `E φ(S) <= E φ(T)` over random convex piecewise
/// linear `φ(x) = a x + Σ c_k (x - k)_+` with `c_k >= 0` and one to four
/// kinks, each placed at an atom of either law or uniformly in `[0, 1]`.
/// Can only refute the order, never prove it.
pub fn convex_order_sampled(s: &FiniteLaw, t: &FiniteLaw, n_functions: usize, seed: u64, tol: f64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if (s.mean() - t.mean()).abs() > MEAN_TOL {
        return false;
    }
    let atoms: Vec<f64> = s.values.iter().chain(&t.values).copied().collect();
    for _ in 0..n_functions {
        let slope = rng.random_range(-3.0..3.0);
        let hinges: Vec<(f64, f64)> = (0..rng.random_range(1..=4))
            .map(|_| {
                let knot = if rng.random_bool(0.5) {
                    atoms[rng.random_range(0..atoms.len())]
                } else {
                    rng.random()
                };
                (knot, rng.random_range(0.0..3.0))
            })
            .collect();
        let phi = |x: f64| slope * x + hinges.iter().map(|(k, c)| c * (x - k).max(0.0)).sum::<f64>();
        if s.expect(phi) > t.expect(phi) + tol {
            return false;
        }
    }
    true
}

/// Survival law at atom `j`: values `P(Y >= a_j | cell)` with cell weights.
fn survival_law(m: &ConditionalModel, j: usize) -> FiniteLaw {
    let values = (0..m.n_cells())
        .map(|i| if j == 0 { 1.0 } else { 1.0 - m.cond_cdf()[j - 1][i] })
        .collect();
    FiniteLaw::new(values, m.weights().to_vec())
}

/// ccx straight from the definition: at every level compare the laws of the
/// conditional survival probabilities in convex order.
pub fn ccx_bruteforce(a: &ConditionalModel, b: &ConditionalModel, tol: f64) -> ComparisonResult {
    let (ra, rb) = (range_closure(a.y()), range_closure(b.y()));
    if ra.len() != rb.len() || ra.iter().zip(&rb).any(|(x, y)| (x - y).abs() > 1e-12) {
        return ComparisonResult::mismatch(tol, "the closures of the Y ranges differ");
    }
    let mut outcomes = Vec::new();
    for j in 1..a.n_levels() {
        let (sa, sb) = (survival_law(a, j), survival_law(b, j));
        let excess = stop_loss_excess(&sa, &sb);
        let deficit = stop_loss_excess(&sb, &sa);
        let verdict = if (sa.mean() - sb.mean()).abs() > tol.max(MEAN_TOL) {
            Verdict::MarginalMismatch
        } else {
            Verdict::from_sides(excess.gap() <= tol, deficit.gap() <= tol)
        };
        outcomes.push(LevelOutcome {
            level: ra[j],
            verdict,
            excess,
            deficit,
        });
    }
    assemble(outcomes, tol, Criterion::Exact)
}

/// ξ from its product-measure form `α Σ_x Σ_y w_x p_y P(Y >= y | x)² - β`.
pub fn xi_bruteforce(m: &ConditionalModel) -> Result<f64> {
    if m.y().is_degenerate() {
        return Err(Error::Degenerate("xi is undefined for degenerate Y".into()));
    }
    let p = m.y().probs();
    let survival = |j: usize| 1.0 - m.y().cdf_left(j);
    let mut var_max = 0.0;
    let mut base = 0.0;
    for j in 0..m.n_levels() {
        let s = survival(j);
        var_max += p[j] * s * (1.0 - s);
        base += p[j] * s * s;
    }
    let alpha = 1.0 / var_max;
    let beta = alpha * base;
    let mut integral = 0.0;
    for (i, w) in m.weights().iter().enumerate() {
        for j in 0..m.n_levels() {
            let s = survival_law(m, j).values[i];
            integral += w * p[j] * s * s;
        }
    }
    Ok(alpha * integral - beta)
}
