//! Small floating-point helpers shared across modules.

/// Pairwise summation; fixed reduction tree so results do not depend on
/// how callers chunk the work.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Merge two sorted knot lists, dropping points closer than `eps` to the
/// previously kept one.
pub(crate) fn merge_knots(a: &[f64], b: &[f64], eps: f64) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    all.sort_by(|x, y| x.total_cmp(y));
    dedup_sorted(all, eps)
}

pub(crate) fn dedup_sorted(sorted: Vec<f64>, eps: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(sorted.len());
    for x in sorted {
        match out.last() {
            Some(&last) if x - last <= eps => {}
            _ => out.push(x),
        }
    }
    out
}
