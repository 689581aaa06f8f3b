use crate::ccx::{ComparisonResult, Criterion};
use crate::error::{Error, Result};
use crate::reduce::{concordance_leq, verify_si, BivariateSIGrid};

/// Pointwise copula comparison of two SI grids with equally likely `Y`
/// levels. `LessEq` certifies ccx `LessEq`; the criterion is only sufficient.
pub fn si_copula_ccx(ca: &BivariateSIGrid, cb: &BivariateSIGrid, tol: f64) -> Result<ComparisonResult> {
    for (name, g) in [("first", ca), ("second", cb)] {
        if !verify_si(g, tol.max(1e-10)) {
            return Err(Error::InvalidGrid(format!(
                "the {name} grid is not stochastically increasing"
            )));
        }
        let n = g.y().len() as f64;
        if g.y().probs().iter().any(|p| (p * n - 1.0).abs() > 1e-9) {
            return Err(Error::Mode(format!(
                "the {name} grid does not have equally likely Y levels"
            )));
        }
    }
    let mut result = concordance_leq(&ca.with_cdf_labels(), &cb.with_cdf_labels(), tol);
    result.criterion = Criterion::Sufficient;
    Ok(result)
}
