//! Transfer systems: arrow sets on a subgroup lattice closed under
//! transitivity and restriction.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{Arrow, Lattice};

/// A set of comparable pairs, bit `i` standing for `lattice.pairs()[i]`.
///
/// The integer order on the underlying `u128` is the canonical order of
/// pair sets used for sorting catalogues.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairSet(pub u128);

impl PairSet {
    pub const EMPTY: PairSet = PairSet(0);

    /// All of the first `n` pairs.
    pub fn full(n: usize) -> Self {
        if n >= 128 {
            PairSet(u128::MAX)
        } else {
            PairSet((1u128 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        PairSet(1u128 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u128 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1u128 << i);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: PairSet) -> PairSet {
        PairSet(self.0 | other.0)
    }

    pub fn intersection(self, other: PairSet) -> PairSet {
        PairSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: PairSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Set bit positions in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i)
        })
    }

    pub fn from_arrows<'a>(
        lattice: &Lattice,
        arrows: impl IntoIterator<Item = &'a Arrow>,
    ) -> Result<PairSet> {
        let mut set = PairSet::EMPTY;
        for a in arrows {
            set.insert(lattice.arrow_index(a)?);
        }
        Ok(set)
    }

    pub fn fits(self, lattice: &Lattice) -> bool {
        self.is_subset(PairSet::full(lattice.pair_count()))
    }
}

impl FromIterator<usize> for PairSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = PairSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

/// A failed axiom, with vertex indices of the witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `first = (h, k)` and `second = (k, l)` are present, `(h, l)` is not.
    Transitivity {
        first: (usize, usize),
        second: (usize, usize),
        missing: (usize, usize),
    },
    /// `arrow = (h, k)` is present but `(h ∧ by, k ∧ by)` is not.
    Restriction {
        arrow: (usize, usize),
        by: usize,
        missing: (usize, usize),
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Transitivity,
    Restriction,
}

impl Violation {
    pub fn kind(&self) -> ViolationKind {
        match self {
            Violation::Transitivity { .. } => ViolationKind::Transitivity,
            Violation::Restriction { .. } => ViolationKind::Restriction,
        }
    }

    /// The arrow that the axioms demand but the set lacks.
    pub fn missing(&self) -> (usize, usize) {
        match *self {
            Violation::Transitivity { missing, .. } | Violation::Restriction { missing, .. } => {
                missing
            }
        }
    }

    /// Re-checks the witnesses against `members`.
    pub fn holds_in(&self, lattice: &Lattice, members: PairSet) -> bool {
        let has = |(a, b): (usize, usize)| lattice.pair_of(a, b).is_some_and(|i| members.contains(i));
        match *self {
            Violation::Transitivity {
                first,
                second,
                missing,
            } => {
                first.1 == second.0
                    && missing == (first.0, second.1)
                    && has(first)
                    && has(second)
                    && !has(missing)
            }
            Violation::Restriction { arrow, by, missing } => {
                let expect = (lattice.meet(arrow.0, by), lattice.meet(arrow.1, by));
                has(arrow) && expect.0 != expect.1 && missing == expect && !has(missing)
            }
        }
    }

    pub fn describe(&self, lattice: &Lattice, symbolic: bool) -> String {
        let n = |v| lattice.name(v, symbolic);
        match *self {
            Violation::Transitivity {
                first,
                second,
                missing,
            } => format!(
                "transitivity: {} -> {} and {} -> {} present but {} -> {} missing",
                n(first.0),
                n(first.1),
                n(second.0),
                n(second.1),
                n(missing.0),
                n(missing.1)
            ),
            Violation::Restriction { arrow, by, missing } => format!(
                "restriction: {} -> {} present, restricting along {} requires missing {} -> {}",
                n(arrow.0),
                n(arrow.1),
                n(by),
                n(missing.0),
                n(missing.1)
            ),
        }
    }
}

/// Checks both axioms directly. Returns the first violation found scanning
/// member arrows in canonical pair order; for each arrow, restriction along
/// every subgroup in canonical order comes before transitivity with each
/// outgoing arrow of its target.
pub fn check(lattice: &Lattice, members: PairSet) -> Result<(), Violation> {
    let n = lattice.len();
    for i in members.iter() {
        let (h, k) = lattice.pairs()[i];
        for l in 0..n {
            let (a, b) = (lattice.meet(h, l), lattice.meet(k, l));
            if a == b {
                continue;
            }
            let j = lattice.pair_of(a, b).expect("meet preserves order");
            if !members.contains(j) {
                return Err(Violation::Restriction {
                    arrow: (h, k),
                    by: l,
                    missing: (a, b),
                });
            }
        }
        for m in 0..n {
            let Some(j) = lattice.pair_of(k, m) else {
                continue;
            };
            if !members.contains(j) {
                continue;
            }
            let c = lattice.pair_of(h, m).expect("order is transitive");
            if !members.contains(c) {
                return Err(Violation::Transitivity {
                    first: (h, k),
                    second: (k, m),
                    missing: (h, m),
                });
            }
        }
    }
    Ok(())
}

/// Checks an arrow list, failing if an arrow is not a pair of `lattice`.
pub fn check_arrows(lattice: &Lattice, arrows: &[Arrow]) -> Result<Result<(), Violation>> {
    let members = PairSet::from_arrows(lattice, arrows)?;
    Ok(check(lattice, members))
}

/// The least transfer system containing `seed`, by round-based fixed-point
/// iteration of the two rules.
pub fn closure(lattice: &Lattice, seed: PairSet) -> PairSet {
    let n = lattice.len();
    let mut current = seed;
    loop {
        let mut next = current;
        for i in current.iter() {
            let (h, k) = lattice.pairs()[i];
            for l in 0..n {
                if let Some(j) = lattice.pair_of(lattice.meet(h, l), lattice.meet(k, l)) {
                    next.insert(j);
                }
            }
            for j in current.iter() {
                let (k2, m) = lattice.pairs()[j];
                if k2 == k {
                    next.insert(lattice.pair_of(h, m).expect("order is transitive"));
                }
            }
        }
        if next == current {
            return current;
        }
        current = next;
    }
}

/// A transfer system on a shared lattice. Always satisfies both axioms.
#[derive(Clone)]
pub struct TransferSystem {
    lattice: Arc<Lattice>,
    members: PairSet,
}

impl PartialEq for TransferSystem {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members && *self.lattice == *other.lattice
    }
}

impl Eq for TransferSystem {}

impl fmt::Debug for TransferSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransferSystem")
            .field("group", &self.lattice.spec().to_string())
            .field("members", &format_args!("{:#x}", self.members.0))
            .finish()
    }
}

impl TransferSystem {
    pub fn new(lattice: Arc<Lattice>, members: PairSet) -> Result<Self> {
        if !members.fits(&lattice) {
            return Err(Error::BitsOutOfRange {
                pairs: lattice.pair_count(),
            });
        }
        if let Err(v) = check(&lattice, members) {
            return Err(Error::NotTransferSystem(v.describe(&lattice, false)));
        }
        Ok(TransferSystem { lattice, members })
    }

    /// Wraps a pair set already known to satisfy the axioms.
    pub(crate) fn from_valid(lattice: Arc<Lattice>, members: PairSet) -> Self {
        debug_assert!(check(&lattice, members).is_ok());
        TransferSystem { lattice, members }
    }

    pub fn from_arrows(lattice: Arc<Lattice>, arrows: &[Arrow]) -> Result<Self> {
        let members = PairSet::from_arrows(&lattice, arrows)?;
        Self::new(lattice, members)
    }

    /// Closure of an arbitrary arrow set.
    pub fn closure_of(lattice: Arc<Lattice>, seed: PairSet) -> Result<Self> {
        if !seed.fits(&lattice) {
            return Err(Error::BitsOutOfRange {
                pairs: lattice.pair_count(),
            });
        }
        let members = closure(&lattice, seed);
        Ok(TransferSystem { lattice, members })
    }

    pub fn empty(lattice: Arc<Lattice>) -> Self {
        TransferSystem {
            lattice,
            members: PairSet::EMPTY,
        }
    }

    pub fn full(lattice: Arc<Lattice>) -> Self {
        let members = PairSet::full(lattice.pair_count());
        TransferSystem { lattice, members }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn members(&self) -> PairSet {
        self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Whether the arrow `a -> b` (vertex indices) is a member.
    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.lattice
            .pair_of(a, b)
            .is_some_and(|i| self.members.contains(i))
    }

    /// Member arrows as vertex pairs, in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.members.iter().map(|i| self.lattice.pairs()[i])
    }

    pub fn arrows(&self) -> Vec<Arrow> {
        self.members.iter().map(|i| self.lattice.arrow(i)).collect()
    }

    /// The system induced on the interval `[bottom, top]`.
    pub fn restrict(&self, bottom: usize, top: usize) -> Result<TransferSystem> {
        let iv = self.lattice.interval(bottom, top)?;
        let members = iv
            .pair_map
            .iter()
            .enumerate()
            .filter(|&(_, &p)| self.members.contains(p))
            .map(|(i, _)| i)
            .collect();
        Ok(TransferSystem {
            lattice: Arc::new(iv.lattice),
            members,
        })
    }

    /// Intersection; the greatest lower bound under inclusion.
    pub fn meet(&self, other: &TransferSystem) -> Result<TransferSystem> {
        self.same_lattice(other)?;
        let members = self.members.intersection(other.members);
        debug_assert!(check(&self.lattice, members).is_ok());
        Ok(TransferSystem {
            lattice: Arc::clone(&self.lattice),
            members,
        })
    }

    /// Closure of the union; the least upper bound under inclusion.
    pub fn join(&self, other: &TransferSystem) -> Result<TransferSystem> {
        self.same_lattice(other)?;
        let members = closure(&self.lattice, self.members.union(other.members));
        Ok(TransferSystem {
            lattice: Arc::clone(&self.lattice),
            members,
        })
    }

    pub fn is_subsystem_of(&self, other: &TransferSystem) -> bool {
        self.members.is_subset(other.members)
    }

    fn same_lattice(&self, other: &TransferSystem) -> Result<()> {
        if *self.lattice == *other.lattice {
            Ok(())
        } else {
            Err(Error::LatticeMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{GroupSpec, Subgroup};

    fn lat(s: &str) -> Arc<Lattice> {
        Arc::new(Lattice::new(s.parse::<GroupSpec>().unwrap()).unwrap())
    }

    fn pair(l: &Lattice, a: &[u32], b: &[u32]) -> usize {
        l.arrow_index(&Arrow::new(a.to_vec(), b.to_vec())).unwrap()
    }

    fn set(l: &Lattice, arrows: &[(&[u32], &[u32])]) -> PairSet {
        arrows.iter().map(|(a, b)| pair(l, a, b)).collect()
    }

    const ONE: &[u32] = &[0, 0];
    const P: &[u32] = &[1, 0];
    const Q: &[u32] = &[0, 1];
    const PQ: &[u32] = &[1, 1];

    #[test]
    fn empty_is_ok() {
        let l = lat("2,3");
        assert_eq!(check(&l, PairSet::EMPTY), Ok(()));
        assert_eq!(check_arrows(&l, &[]).unwrap(), Ok(()));
    }

    #[test]
    fn mixed_diagram_is_ok() {
        let l = lat("2,3");
        let mixed = set(&l, &[(ONE, P), (ONE, Q), (ONE, PQ)]);
        assert_eq!(check(&l, mixed), Ok(()));
    }

    #[test]
    fn lone_diagonal_violates_restriction() {
        let l = lat("2,3");
        let diag = set(&l, &[(ONE, PQ)]);
        let v = check(&l, diag).unwrap_err();
        assert_eq!(v.kind(), ViolationKind::Restriction);
        assert!(v.holds_in(&l, diag));
        // Restricting along C_p is also a genuine witness.
        let p = l.index_of(&Subgroup::new(P.to_vec())).unwrap();
        let along_p = Violation::Restriction {
            arrow: (0, l.top()),
            by: p,
            missing: (0, p),
        };
        assert!(along_p.holds_in(&l, diag));
    }

    #[test]
    fn transitivity_violation_is_reported() {
        let l = lat("2^2");
        let s = set(&l, &[(&[0], &[1]), (&[1], &[2])]);
        let v = check(&l, s).unwrap_err();
        assert_eq!(
            v,
            Violation::Transitivity {
                first: (0, 1),
                second: (1, 2),
                missing: (0, 2)
            }
        );
        assert!(v.holds_in(&l, s));
    }

    #[test]
    fn foreign_arrow_is_an_error() {
        let l = lat("2,3");
        let bad = Arrow::new(vec![1, 0], vec![0, 1]);
        assert!(matches!(check_arrows(&l, &[bad]), Err(Error::NotAnArrow { .. })));
        let outside = Arrow::new(vec![0, 0], vec![0, 2]);
        assert!(matches!(check_arrows(&l, &[outside]), Err(Error::NotInLattice(_))));
    }

    #[test]
    fn closure_examples() {
        let l = lat("2,3");
        assert_eq!(closure(&l, PairSet::EMPTY), PairSet::EMPTY);
        assert_eq!(
            closure(&l, set(&l, &[(ONE, PQ)])),
            set(&l, &[(ONE, PQ), (ONE, P), (ONE, Q)])
        );
        assert_eq!(
            closure(&l, set(&l, &[(ONE, P), (P, PQ)])),
            set(&l, &[(ONE, P), (P, PQ), (ONE, PQ), (ONE, Q)])
        );
    }

    #[test]
    fn closure_fixes_exactly_the_transfer_systems() {
        let l = lat("2,3");
        for bits in 0..1u128 << l.pair_count() {
            let s = PairSet(bits);
            assert_eq!(check(&l, s).is_ok(), closure(&l, s) == s);
        }
    }

    #[test]
    fn closure_laws_exhaustive_on_square() {
        let l = lat("2,3");
        let all: Vec<PairSet> = (0..1u128 << l.pair_count()).map(PairSet).collect();
        for &s in &all {
            let c = closure(&l, s);
            assert!(s.is_subset(c));
            assert_eq!(closure(&l, c), c);
            assert!(check(&l, c).is_ok());
            for &t in &all {
                if s.is_subset(t) {
                    assert!(c.is_subset(closure(&l, t)));
                }
            }
        }
    }

    #[test]
    fn restrict_examples() {
        let l = lat("2,3");
        let full = TransferSystem::full(Arc::clone(&l));
        assert_eq!(full.restrict(l.bottom(), l.top()).unwrap(), full);

        let mixed = TransferSystem::new(Arc::clone(&l), set(&l, &[(ONE, P), (ONE, Q), (ONE, PQ)]))
            .unwrap();
        let p = l.index_of(&Subgroup::new(P.to_vec())).unwrap();
        let edge = mixed.restrict(l.bottom(), p).unwrap();
        assert_eq!(edge.lattice().pair_count(), 1);
        assert_eq!(edge.arrows(), vec![Arrow::new(vec![0], vec![1])]);

        assert!(matches!(
            mixed.restrict(p, l.bottom()),
            Err(Error::InvalidInterval { .. })
        ));
    }

    #[test]
    fn meet_and_join_examples() {
        let l = lat("2,3");
        let full = TransferSystem::full(Arc::clone(&l));
        let empty = TransferSystem::empty(Arc::clone(&l));
        assert_eq!(full.meet(&full).unwrap(), full);
        assert_eq!(full.meet(&empty).unwrap(), empty);
        let a = TransferSystem::new(Arc::clone(&l), set(&l, &[(ONE, P)])).unwrap();
        let b = TransferSystem::new(Arc::clone(&l), set(&l, &[(ONE, Q)])).unwrap();
        assert_eq!(
            a.join(&b).unwrap().members(),
            set(&l, &[(ONE, P), (ONE, Q)])
        );
        let other = TransferSystem::empty(lat("2^2"));
        assert!(matches!(a.meet(&other), Err(Error::LatticeMismatch)));
        assert!(matches!(a.join(&other), Err(Error::LatticeMismatch)));
    }

    #[test]
    fn new_rejects_non_systems_and_stray_bits() {
        let l = lat("2,3");
        assert!(matches!(
            TransferSystem::new(Arc::clone(&l), set(&l, &[(ONE, PQ)])),
            Err(Error::NotTransferSystem(_))
        ));
        assert!(matches!(
            TransferSystem::new(Arc::clone(&l), PairSet::singleton(5)),
            Err(Error::BitsOutOfRange { pairs: 5 })
        ));
    }

    #[test]
    fn pair_set_iteration() {
        let s: PairSet = [0, 3, 127].into_iter().collect();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 3, 127]);
        assert_eq!(s.len(), 3);
        assert_eq!(PairSet::full(128).len(), 128);
        assert_eq!(PairSet::full(5), PairSet(31));
    }
}
