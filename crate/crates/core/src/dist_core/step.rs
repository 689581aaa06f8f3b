use serde::Serialize;

use crate::error::{Error, Result};

/// Right-closed step function on (0, 1]: value `values[k]` on
/// `(breaks[k], breaks[k + 1]]`, with `breaks[0] = 0` and `breaks[K] = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

const ENDPOINT_TOL: f64 = 1e-9;

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breaks.len() != values.len() + 1 {
            return Err(Error::InvalidStepFunction(format!(
                "{} breakpoints for {} values",
                breaks.len(),
                values.len()
            )));
        }
        let mut breaks = breaks;
        let k = breaks.len() - 1;
        if breaks[0].abs() > ENDPOINT_TOL || (breaks[k] - 1.0).abs() > ENDPOINT_TOL {
            return Err(Error::InvalidStepFunction(format!(
                "breakpoints must run from 0 to 1, got {} .. {}",
                breaks[0], breaks[k]
            )));
        }
        breaks[0] = 0.0;
        breaks[k] = 1.0;
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidStepFunction(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidStepFunction("non-finite value".into()));
        }
        Ok(Self { breaks, values })
    }

    /// Pieces of the given positive widths (summing to one) laid out left to right.
    pub fn from_widths(widths: &[f64], values: Vec<f64>) -> Result<Self> {
        if widths.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidStepFunction("widths must be positive".into()));
        }
        let mut breaks = Vec::with_capacity(widths.len() + 1);
        breaks.push(0.0);
        let mut acc = 0.0;
        for w in widths {
            acc += w;
            breaks.push(acc);
        }
        Self::new(breaks, values)
    }

    pub fn constant(c: f64) -> Self {
        Self {
            breaks: vec![0.0, 1.0],
            values: vec![c],
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.breaks.windows(2).map(|w| w[1] - w[0])
    }

    pub fn integral(&self) -> f64 {
        self.widths().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    /// Value at `t` in (0, 1]; pieces are right-closed.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.breaks.partition_point(|&b| b < t);
        self.values[k.clamp(1, self.values.len()) - 1]
    }

    /// Lebesgue measure of `{ t : f(t) >= w }`.
    pub fn level_set_measure(&self, w: f64) -> f64 {
        self.widths()
            .zip(&self.values)
            .filter(|(_, v)| **v >= w)
            .map(|(len, _)| len)
            .sum()
    }
}
