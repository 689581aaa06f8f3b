//! Decreasing rearrangements of step functions and the Schur order.

use serde::Serialize;

use crate::dist_core::StepFunction;
use crate::error::{Error, Result};
use crate::verdict::Verdict;

/// Decreasing rearrangement: pieces sorted by value, largest first. Ties keep
/// their original order.
pub fn decreasing_rearrangement(f: &StepFunction) -> StepFunction {
    let widths: Vec<f64> = f.widths().collect();
    let mut order: Vec<usize> = (0..widths.len()).collect();
    order.sort_by(|&a, &b| f.values()[b].total_cmp(&f.values()[a]));
    let sorted_widths: Vec<f64> = order.iter().map(|&k| widths[k]).collect();
    let values = order.iter().map(|&k| f.values()[k]).collect();
    StepFunction::from_widths(&sorted_widths, values).expect("a permutation of valid pieces is valid")
}

/// `x -> ∫_0^x f*(t) dt` as a concave piecewise-linear curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RearrangementCurve {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl RearrangementCurve {
    pub fn new(f: &StepFunction) -> Self {
        let r = decreasing_rearrangement(f);
        Self::from_decreasing(&r)
    }

    /// Curve of a step function that is already nonincreasing.
    pub(crate) fn from_decreasing(r: &StepFunction) -> Self {
        let mut values = Vec::with_capacity(r.len() + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for (w, v) in r.widths().zip(r.values()) {
            acc += w * v;
            values.push(acc);
        }
        Self {
            knots: r.breaks().to_vec(),
            values,
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Curve values at the knots.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.knots.partition_point(|&t| t < x);
        if k == 0 {
            return 0.0;
        }
        if k >= self.knots.len() {
            return self.total();
        }
        let (x0, x1) = (self.knots[k - 1], self.knots[k]);
        let (y0, y1) = (self.values[k - 1], self.values[k]);
        if x >= x1 {
            return y1;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// `∫_0^x f*(t) dt` for `x` in `[0, 1]`.
pub fn integrated_rearrangement(f: &StepFunction, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
    }
    Ok(RearrangementCurve::new(f).eval(x))
}

/// A point where one curve exceeds the other; `lhs` belongs to the side
/// whose dominance is being tested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl Crossing {
    pub fn gap(&self) -> f64 {
        self.lhs - self.rhs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchurComparison {
    pub verdict: Verdict,
    /// Largest excess of `f`'s curve over `g`'s.
    pub excess: Crossing,
    /// Largest excess of `g`'s curve over `f`'s (`lhs` is `g`).
    pub deficit: Crossing,
}

/// Schur order `f ≺ g`: equal integrals and `∫_0^x f* <= ∫_0^x g*` for all
/// `x`. Both curves are piecewise linear, so checking the union of their
/// knots is exact.
pub fn schur_leq(f: &StepFunction, g: &StepFunction, tol: f64) -> SchurComparison {
    compare_curves(&RearrangementCurve::new(f), &RearrangementCurve::new(g), tol)
}

pub fn compare_curves(cf: &RearrangementCurve, cg: &RearrangementCurve, tol: f64) -> SchurComparison {
    let mut excess = Crossing {
        x: 0.0,
        lhs: 0.0,
        rhs: 0.0,
    };
    let mut deficit = excess;
    let mut visit = |x: f64, a: f64, b: f64| {
        if a - b > excess.gap() {
            excess = Crossing { x, lhs: a, rhs: b };
        }
        if b - a > deficit.gap() {
            deficit = Crossing { x, lhs: b, rhs: a };
        }
    };
    for (&x, &a) in cf.knots.iter().zip(&cf.values) {
        visit(x, a, cg.eval(x));
    }
    for (&x, &b) in cg.knots.iter().zip(&cg.values) {
        visit(x, cf.eval(x), b);
    }
    let verdict = if (cf.total() - cg.total()).abs() > tol {
        Verdict::MarginalMismatch
    } else {
        Verdict::from_sides(excess.gap() <= tol, deficit.gap() <= tol)
    };
    SchurComparison {
        verdict,
        excess,
        deficit,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quarters(v: [f64; 4]) -> StepFunction {
        StepFunction::from_widths(&[0.25; 4], v.to_vec()).unwrap()
    }

    #[test]
    fn figure_rows() {
        let r = decreasing_rearrangement(&quarters([0.7, 0.6, 0.9, 0.8]));
        assert_eq!(r.values(), &[0.9, 0.8, 0.7, 0.6]);
        let r = decreasing_rearrangement(&quarters([0.3, 0.5, 0.9, 0.3]));
        assert_eq!(r.values(), &[0.9, 0.5, 0.3, 0.3]);
        let c = StepFunction::constant(0.4);
        assert_eq!(decreasing_rearrangement(&c), c);
    }

    #[test]
    fn integrated_values() {
        let f = quarters([0.7, 0.6, 0.9, 0.8]);
        assert!((integrated_rearrangement(&f, 0.5).unwrap() - 0.425).abs() < 1e-15);
        assert_eq!(integrated_rearrangement(&f, 0.0).unwrap(), 0.0);
        assert!((integrated_rearrangement(&f, 1.0).unwrap() - f.integral()).abs() < 1e-15);
        assert!(integrated_rearrangement(&f, 1.5).is_err());
    }

    #[test]
    fn schur_examples() {
        let half = StepFunction::constant(0.5);
        let ind = StepFunction::new(vec![0.0, 0.5, 1.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(schur_leq(&half, &ind, 1e-9).verdict, Verdict::LessEq);
        assert_eq!(schur_leq(&ind, &half, 1e-9).verdict, Verdict::GreaterEq);
        assert_eq!(schur_leq(&ind, &ind, 1e-9).verdict, Verdict::Equal);
        let cmp = schur_leq(&ind, &half, 1e-9);
        assert!((cmp.excess.x - 0.5).abs() < 1e-15);
        assert!((cmp.excess.gap() - 0.25).abs() < 1e-15);
        let other = StepFunction::constant(0.6);
        assert_eq!(schur_leq(&half, &other, 1e-9).verdict, Verdict::MarginalMismatch);
    }

    #[test]
    fn crossing_curves_are_incomparable() {
        let f = StepFunction::new(vec![0.0, 0.1, 1.0], vec![1.0, 0.4]).unwrap();
        let g = StepFunction::new(vec![0.0, 0.5, 1.0], vec![0.8, 0.12]).unwrap();
        let cmp = schur_leq(&f, &g, 1e-9);
        assert_eq!(cmp.verdict, Verdict::Incomparable);
        assert!(cmp.excess.gap() > 1e-9 && cmp.deficit.gap() > 1e-9);
    }

    fn step_strategy() -> impl Strategy<Value = StepFunction> {
        prop::collection::vec((0.05f64..1.0, 0.0f64..1.0), 1..12).prop_map(|pieces| {
            let total: f64 = pieces.iter().map(|p| p.0).sum();
            let widths: Vec<f64> = pieces.iter().map(|p| p.0 / total).collect();
            StepFunction::from_widths(&widths, pieces.iter().map(|p| p.1).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn rearrangement_is_idempotent_and_measure_preserving(f in step_strategy(), ws in prop::collection::vec(0.0f64..1.0, 20)) {
            let r = decreasing_rearrangement(&f);
            prop_assert!(r.values().windows(2).all(|w| w[0] >= w[1]));
            prop_assert_eq!(decreasing_rearrangement(&r), r.clone());
            for w in ws {
                prop_assert!((f.level_set_measure(w) - r.level_set_measure(w)).abs() < 1e-12);
            }
        }

        #[test]
        fn pointwise_dominance_survives(f in step_strategy(), bumps in prop::collection::vec(0.0f64..0.5, 12)) {
            let g_vals: Vec<f64> = f.values().iter().zip(&bumps).map(|(v, b)| v + b).collect();
            let g = StepFunction::new(f.breaks().to_vec(), g_vals).unwrap();
            let (rf, rg) = (decreasing_rearrangement(&f), decreasing_rearrangement(&g));
            for k in 0..=40 {
                let t = k as f64 / 40.0;
                prop_assert!(rf.value_at(t) <= rg.value_at(t) + 1e-12);
            }
        }

        #[test]
        fn averaging_is_schur_smaller(f in step_strategy(), split in 0.0f64..1.0) {
            // Averaging f over blocks is a doubly stochastic smoothing.
            let widths: Vec<f64> = f.widths().collect();
            let cut = ((widths.len() as f64) * split) as usize;
            let mut vals = f.values().to_vec();
            for block in [0..cut, cut..widths.len()] {
                let w: f64 = widths[block.clone()].iter().sum();
                if w > 0.0 {
                    let m = block.clone().map(|k| widths[k] * vals[k]).sum::<f64>() / w;
                    block.for_each(|k| vals[k] = m);
                }
            }
            let g = StepFunction::new(f.breaks().to_vec(), vals).unwrap();
            prop_assert!(schur_leq(&g, &f, 1e-9).verdict.is_le());
        }

        #[test]
        fn transitivity(f in step_strategy(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            // f_t = t f + (1 - t) mean is Schur-increasing in t.
            let mean = f.integral();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let mix = |t: f64| StepFunction::new(f.breaks().to_vec(), f.values().iter().map(|v| t * v + (1.0 - t) * mean).collect()).unwrap();
            let (p, q) = (mix(lo), mix(hi));
            let c = StepFunction::constant(mean);
            prop_assert!(schur_leq(&c, &p, 1e-9).verdict.is_le());
            prop_assert!(schur_leq(&p, &q, 1e-9).verdict.is_le());
            prop_assert!(schur_leq(&c, &q, 1e-9).verdict.is_le());
        }
    }
}
