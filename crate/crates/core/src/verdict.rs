use serde::{Deserialize, Serialize};

/// Outcome of comparing two objects in a (pre)order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    LessEq,
    GreaterEq,
    Equal,
    Incomparable,
    /// The objects live on different marginals and cannot be compared.
    MarginalMismatch,
}

impl Verdict {
    /// Verdict from the two one-sided checks `lhs <= rhs` and `rhs <= lhs`.
    pub fn from_sides(le: bool, ge: bool) -> Self {
        match (le, ge) {
            (true, true) => Verdict::Equal,
            (true, false) => Verdict::LessEq,
            (false, true) => Verdict::GreaterEq,
            (false, false) => Verdict::Incomparable,
        }
    }

    /// The verdict with the two arguments swapped.
    pub fn flip(self) -> Self {
        match self {
            Verdict::LessEq => Verdict::GreaterEq,
            Verdict::GreaterEq => Verdict::LessEq,
            v => v,
        }
    }

    /// True for `LessEq` and `Equal`.
    pub fn is_le(self) -> bool {
        matches!(self, Verdict::LessEq | Verdict::Equal)
    }

    pub fn is_ge(self) -> bool {
        matches!(self, Verdict::GreaterEq | Verdict::Equal)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::LessEq => "LessEq",
            Verdict::GreaterEq => "GreaterEq",
            Verdict::Equal => "Equal",
            Verdict::Incomparable => "Incomparable",
            Verdict::MarginalMismatch => "MarginalMismatch",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Combine per-level verdicts. `Equal` is neutral; a mix of `LessEq` and
/// `GreaterEq` is `Incomparable`; any mismatch dominates. An empty sequence
/// is `Equal`.
pub fn aggregate<I: IntoIterator<Item = Verdict>>(verdicts: I) -> Verdict {
    let mut le = true;
    let mut ge = true;
    for v in verdicts {
        match v {
            Verdict::MarginalMismatch => return Verdict::MarginalMismatch,
            Verdict::Equal => {}
            Verdict::LessEq => ge = false,
            Verdict::GreaterEq => le = false,
            Verdict::Incomparable => {
                le = false;
                ge = false;
            }
        }
    }
    Verdict::from_sides(le, ge)
}
