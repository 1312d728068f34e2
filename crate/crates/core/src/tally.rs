//! Oracle-call metering.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

/// The oracle kinds whose calls are metered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OracleKind {
    GradR,
    GradH,
    GradXF,
    GradYF,
    ProxR,
    ProxH,
    Matvec,
}

impl OracleKind {
    pub const ALL: [OracleKind; 7] = [
        OracleKind::GradR,
        OracleKind::GradH,
        OracleKind::GradXF,
        OracleKind::GradYF,
        OracleKind::ProxR,
        OracleKind::ProxH,
        OracleKind::Matvec,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            OracleKind::GradR => "grad_r",
            OracleKind::GradH => "grad_h",
            OracleKind::GradXF => "gradx_F",
            OracleKind::GradYF => "grady_F",
            OracleKind::ProxR => "prox_r",
            OracleKind::ProxH => "prox_h",
            OracleKind::Matvec => "matvecs",
        }
    }
}

/// Monotone per-kind call counters.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OracleTally {
    counts: [u64; 7],
}

impl OracleTally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(OracleKind, u64)]) -> Self {
        let mut t = Self::default();
        for &(k, n) in pairs {
            t.add_n(k, n);
        }
        t
    }

    pub fn get(&self, kind: OracleKind) -> u64 {
        self.counts[kind.index()]
    }

    pub fn record(&mut self, kind: OracleKind) {
        self.add_n(kind, 1);
    }

    pub fn add_n(&mut self, kind: OracleKind, n: u64) {
        self.counts[kind.index()] += n;
    }

    /// Componentwise sum; neither input is modified.
    pub fn merge(&self, other: &OracleTally) -> OracleTally {
        let mut out = *self;
        out += *other;
        out
    }

    /// Calls made since `earlier`, which must be a snapshot of the same counters.
    pub fn since(&self, earlier: &OracleTally) -> OracleTally {
        let mut out = OracleTally::default();
        for i in 0..7 {
            out.counts[i] = self.counts[i].saturating_sub(earlier.counts[i]);
        }
        out
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Gradient evaluations of all four kinds, excluding prox steps and matvecs.
    pub fn gradient_calls(&self) -> u64 {
        self.get(OracleKind::GradR)
            + self.get(OracleKind::GradH)
            + self.get(OracleKind::GradXF)
            + self.get(OracleKind::GradYF)
    }

    /// True if no counter of `self` is below the matching counter of `other`.
    pub fn dominates(&self, other: &OracleTally) -> bool {
        self.counts.iter().zip(other.counts.iter()).all(|(a, b)| a >= b)
    }

    pub fn iter(&self) -> impl Iterator<Item = (OracleKind, u64)> + '_ {
        OracleKind::ALL.iter().map(move |&k| (k, self.get(k)))
    }
}

/// Componentwise sum of two tallies.
pub fn tally_merge(a: &OracleTally, b: &OracleTally) -> OracleTally {
    a.merge(b)
}

impl AddAssign for OracleTally {
    fn add_assign(&mut self, rhs: OracleTally) {
        for i in 0..7 {
            self.counts[i] += rhs.counts[i];
        }
    }
}

impl Add for OracleTally {
    type Output = OracleTally;
    fn add(mut self, rhs: OracleTally) -> OracleTally {
        self += rhs;
        self
    }
}

impl Sub for OracleTally {
    type Output = OracleTally;
    fn sub(self, rhs: OracleTally) -> OracleTally {
        self.since(&rhs)
    }
}

impl fmt::Display for OracleTally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "{{")?;
        for (k, n) in self.iter().filter(|&(_, n)| n > 0) {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{}: {}", k.label(), n)?;
            first = false;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn merge_adds_same_kind() {
        let a = OracleTally::from_pairs(&[(OracleKind::GradR, 3)]);
        let b = OracleTally::from_pairs(&[(OracleKind::GradR, 4)]);
        let m = tally_merge(&a, &b);
        assert_eq!(m.get(OracleKind::GradR), 7);
        assert_eq!(a.get(OracleKind::GradR), 3);
        assert_eq!(b.get(OracleKind::GradR), 4);
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let t = OracleTally::from_pairs(&[(OracleKind::GradXF, 5), (OracleKind::Matvec, 2)]);
        assert_eq!(tally_merge(&OracleTally::new(), &t), t);
    }

    #[test]
    fn merge_disjoint_keys() {
        let a = OracleTally::from_pairs(&[(OracleKind::GradXF, 1)]);
        let b = OracleTally::from_pairs(&[(OracleKind::GradYF, 2)]);
        let m = a.merge(&b);
        assert_eq!(m.get(OracleKind::GradXF), 1);
        assert_eq!(m.get(OracleKind::GradYF), 2);
        assert_eq!(m.total(), 3);
    }

    proptest! {
        #[test]
        fn merge_is_commutative_and_monotone(a in proptest::collection::vec(0u64..1000, 7),
                                             b in proptest::collection::vec(0u64..1000, 7)) {
            let ta = OracleTally::from_pairs(&OracleKind::ALL.iter().copied().zip(a).collect::<Vec<_>>());
            let tb = OracleTally::from_pairs(&OracleKind::ALL.iter().copied().zip(b).collect::<Vec<_>>());
            let m = ta.merge(&tb);
            prop_assert_eq!(m, tb.merge(&ta));
            prop_assert!(m.dominates(&ta) && m.dominates(&tb));
            prop_assert_eq!(m.since(&ta), tb);
        }
    }
}
