//! Structure of transfer systems on a squarefree cube `C_{p_1⋯p_n}`.
//!
//! For a system `T`, `G⁰` is the meet of all sources of arrows into `G` (or
//! `G` if there are none) and `T` lies in `Comp_d` where `d` is the number of
//! primes missing from `G⁰`. So `Comp_0` holds the systems with no arrow into
//! `G` and `Comp_n` those containing `1 -> G`.
//!
//! The involution `Φ` is evaluated in closed form. With `ψ(H) = G/H`:
//!
//! ```text
//! (A -> B) ∈ Φ(T)  ⟺  T has no arrow X -> ψ(A) with ψ(B) ≤ X < ψ(A)
//! ```
//!
//! i.e. the big diagonal of the sub-cube `[A, B]` is present in the image
//! exactly when the mirrored sub-cube `[ψ(B), ψ(A)]` carries no arrow into its
//! top. On cube edges this is the edge complement with vertices relabelled by
//! `ψ`; on `1 -> G` it reads "no arrow of `T` targets `G`".

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Subgroup};
use crate::transfer::{self, PairSet, TransferSystem, Violation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompClass {
    pub g_zero: Subgroup,
    pub d: usize,
}

fn require_squarefree(lattice: &Lattice, what: &'static str) -> Result<()> {
    if lattice.is_squarefree() {
        Ok(())
    } else {
        Err(Error::NotSquarefree(what))
    }
}

/// Vertex index of `G⁰` for raw members. No squarefree check.
pub(crate) fn g_zero_vertex(lattice: &Lattice, members: PairSet) -> usize {
    let top = lattice.top();
    members
        .iter()
        .map(|i| lattice.pairs()[i])
        .filter(|&(_, k)| k == top)
        .fold(top, |acc, (h, _)| lattice.meet(acc, h))
}

/// Comp index of raw members. No squarefree check.
pub(crate) fn comp_degree(lattice: &Lattice, members: PairSet) -> usize {
    let g0 = g_zero_vertex(lattice, members);
    lattice.spec().rank() - lattice.rank_of(g0) as usize
}

/// Vertex index of `G⁰`.
pub fn g_zero(t: &TransferSystem) -> Result<usize> {
    require_squarefree(t.lattice(), "G⁰")?;
    Ok(g_zero_vertex(t.lattice(), t.members()))
}

pub fn comp_index(t: &TransferSystem) -> Result<CompClass> {
    let g0 = g_zero(t)?;
    let l = t.lattice();
    Ok(CompClass {
        g_zero: l.subgroup(g0).clone(),
        d: l.spec().rank() - l.rank_of(g0) as usize,
    })
}

/// Whether every arrow lies either in `[G⁰, G]` or in one of the `n - d`
/// bottom facets `B_i` (subgroups avoiding `p_i`) for the primes `p_i`
/// dividing `G⁰`. These are exactly the bottom facets disjoint from `[G⁰, G]`.
pub fn support_check(t: &TransferSystem) -> Result<bool> {
    let g0 = g_zero(t)?;
    Ok(support_holds(t.lattice(), t.members(), g0))
}

fn support_holds(lattice: &Lattice, members: PairSet, g0: usize) -> bool {
    let g0_exp = lattice.subgroup(g0).exponents();
    let facets: Vec<usize> = (0..g0_exp.len()).filter(|&i| g0_exp[i] > 0).collect();
    members.iter().all(|p| {
        let (a, b) = lattice.pairs()[p];
        lattice.leq(g0, a)
            || facets
                .iter()
                .any(|&i| lattice.subgroup(b).exponents()[i] == 0)
    })
}

/// Closed-form `Φ` on raw members of a squarefree lattice.
pub(crate) fn phi_members(lattice: &Lattice, members: PairSet) -> PairSet {
    let top = lattice.top();
    let psi = |v: usize| top - v;
    lattice
        .pairs()
        .iter()
        .enumerate()
        .filter(|&(_, &(a, b))| {
            let (lo, hi) = (psi(b), psi(a));
            !(0..lattice.len()).any(|x| {
                lattice.leq(lo, x)
                    && lattice
                        .pair_of(x, hi)
                        .is_some_and(|j| members.contains(j))
            })
        })
        .map(|(i, _)| i)
        .collect()
}

/// The involution `Φ`, mapping `Comp_d` onto `Comp_{n-d}`.
pub fn phi(t: &TransferSystem) -> Result<TransferSystem> {
    require_squarefree(t.lattice(), "Φ")?;
    let image = phi_members(t.lattice(), t.members());
    match transfer::check(t.lattice(), image) {
        Ok(()) => Ok(TransferSystem::from_valid(std::sync::Arc::clone(t.lattice()), image)),
        Err(v) => Err(Error::NotTransferSystem(format!(
            "Φ image fails: {}",
            v.describe(t.lattice(), false)
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvolutionFailure {
    NotAnInvolution { image: PairSet, back: PairSet },
    ImageNotTransferSystem { image: PairSet, violation: Violation },
    CompNotMirrored { d: usize, image_d: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub system: PairSet,
    pub failure: InvolutionFailure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvolutionReport {
    pub systems: usize,
    pub by_comp: Vec<u64>,
    pub counterexample: Option<Counterexample>,
}

impl InvolutionReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Checks `Φ∘Φ = id`, that images are transfer systems, and `d ↦ n - d`
/// over every transfer system of `lattice`.
pub fn verify_involution(lattice: &Lattice) -> Result<InvolutionReport> {
    require_squarefree(lattice, "Φ")?;
    let systems = crate::enumerate::all_systems(lattice);
    Ok(verify_involution_on(lattice, &systems))
}

/// As [`verify_involution`], over the given systems only. Members must be
/// transfer systems of a squarefree `lattice`.
pub fn verify_involution_on(lattice: &Lattice, systems: &[PairSet]) -> InvolutionReport {
    let n = lattice.spec().rank();
    let mut by_comp = vec![0u64; n + 1];
    let mut counterexample = None;
    for &s in systems {
        let d = comp_degree(lattice, s);
        by_comp[d] += 1;
        if counterexample.is_some() {
            continue;
        }
        let image = phi_members(lattice, s);
        let failure = if let Err(violation) = transfer::check(lattice, image) {
            Some(InvolutionFailure::ImageNotTransferSystem { image, violation })
        } else if phi_members(lattice, image) != s {
            Some(InvolutionFailure::NotAnInvolution {
                image,
                back: phi_members(lattice, image),
            })
        } else {
            let image_d = comp_degree(lattice, image);
            (image_d + d != n).then_some(InvolutionFailure::CompNotMirrored { d, image_d })
        };
        counterexample = failure.map(|failure| Counterexample { system: s, failure });
    }
    InvolutionReport {
        systems: systems.len(),
        by_comp,
        counterexample,
    }
}

/// Systems among `systems` failing the support property.
pub fn support_failures(lattice: &Lattice, systems: &[PairSet]) -> Result<Vec<PairSet>> {
    require_squarefree(lattice, "support check")?;
    Ok(systems
        .iter()
        .copied()
        .filter(|&s| !support_holds(lattice, s, g_zero_vertex(lattice, s)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::all_systems;
    use crate::lattice::{Arrow, GroupSpec};
    use std::sync::Arc;

    fn cube(n: usize) -> Arc<Lattice> {
        Arc::new(Lattice::new(GroupSpec::cube(n).unwrap()).unwrap())
    }

    fn sys(l: &Arc<Lattice>, arrows: &[(&[u32], &[u32])]) -> TransferSystem {
        let arrows: Vec<Arrow> = arrows
            .iter()
            .map(|(a, b)| Arrow::new(a.to_vec(), b.to_vec()))
            .collect();
        TransferSystem::from_arrows(Arc::clone(l), &arrows).unwrap()
    }

    const ONE: &[u32] = &[0, 0];
    const P: &[u32] = &[1, 0];
    const Q: &[u32] = &[0, 1];
    const PQ: &[u32] = &[1, 1];

    #[test]
    fn g_zero_examples() {
        let l = cube(2);
        assert_eq!(g_zero(&TransferSystem::empty(Arc::clone(&l))).unwrap(), l.top());
        assert_eq!(g_zero(&TransferSystem::full(Arc::clone(&l))).unwrap(), 0);
        let mixed = sys(&l, &[(ONE, P), (ONE, Q), (ONE, PQ)]);
        assert_eq!(g_zero(&mixed).unwrap(), 0);
    }

    #[test]
    fn comp_index_examples() {
        let l = cube(3);
        assert_eq!(comp_index(&TransferSystem::empty(Arc::clone(&l))).unwrap().d, 0);
        assert_eq!(comp_index(&TransferSystem::full(Arc::clone(&l))).unwrap().d, 3);
        let t = sys(
            &l,
            &[
                (&[1, 1, 0], &[1, 1, 1]),
                (&[0, 1, 0], &[0, 1, 1]),
                (&[1, 0, 0], &[1, 0, 1]),
                (&[0, 0, 0], &[0, 0, 1]),
            ],
        );
        let c = comp_index(&t).unwrap();
        assert_eq!(c, CompClass { g_zero: Subgroup::new(vec![1, 1, 0]), d: 1 });
    }

    #[test]
    fn non_squarefree_is_rejected() {
        let l = Arc::new(Lattice::new("2^2,3".parse().unwrap()).unwrap());
        let t = TransferSystem::empty(l.clone());
        assert!(matches!(g_zero(&t), Err(Error::NotSquarefree(_))));
        assert!(matches!(comp_index(&t), Err(Error::NotSquarefree(_))));
        assert!(matches!(support_check(&t), Err(Error::NotSquarefree(_))));
        assert!(matches!(phi(&t), Err(Error::NotSquarefree(_))));
        assert!(matches!(verify_involution(&l), Err(Error::NotSquarefree(_))));
    }

    #[test]
    fn phi_base_case_swaps_empty_and_full() {
        for n in 1..=3 {
            let l = cube(n);
            let empty = TransferSystem::empty(Arc::clone(&l));
            let full = TransferSystem::full(Arc::clone(&l));
            assert_eq!(phi(&empty).unwrap(), full);
            assert_eq!(phi(&full).unwrap(), empty);
        }
    }

    #[test]
    fn phi_pairs_within_comp_one() {
        let l = cube(2);
        let t = sys(&l, &[(P, PQ), (ONE, Q)]);
        assert_eq!(phi(&t).unwrap(), sys(&l, &[(ONE, P), (Q, PQ)]));
    }

    #[test]
    fn phi_of_mixed_has_no_arrow_into_g() {
        let l = cube(2);
        let mixed = sys(&l, &[(ONE, P), (ONE, Q), (ONE, PQ)]);
        let image = phi(&mixed).unwrap();
        assert_eq!(comp_index(&image).unwrap().d, 0);
        assert!(image.edges().all(|(_, b)| b != l.top()));
    }

    #[test]
    fn support_examples() {
        let l = cube(2);
        for s in all_systems(&l) {
            let t = TransferSystem::new(Arc::clone(&l), s).unwrap();
            assert!(support_check(&t).unwrap());
        }
        assert!(support_check(&TransferSystem::empty(cube(3))).unwrap());
        // A non-system arrow set can fail it: C_p -> G alone with 1 -> C_pq.
        let l3 = cube(3);
        let g0 = l3.index_of(&Subgroup::new(vec![1, 0, 0])).unwrap();
        let stray = l3.pair_of(0, l3.index_of(&Subgroup::new(vec![1, 1, 0])).unwrap()).unwrap();
        let into_g = l3.pair_of(g0, l3.top()).unwrap();
        assert!(!support_holds(&l3, [stray, into_g].into_iter().collect(), g0));
    }

    #[test]
    fn involution_small_cubes() {
        let r1 = verify_involution(&cube(1)).unwrap();
        assert!(r1.passed());
        assert_eq!((r1.systems, r1.by_comp.clone()), (2, vec![1, 1]));
        let r2 = verify_involution(&cube(2)).unwrap();
        assert!(r2.passed());
        assert_eq!((r2.systems, r2.by_comp.clone()), (10, vec![4, 2, 4]));
    }

    #[test]
    fn edge_complement_law() {
        for n in 1..=3 {
            let l = cube(n);
            for s in all_systems(&l) {
                let image = phi_members(&l, s);
                for (i, &(a, b)) in l.pairs().iter().enumerate() {
                    if l.rank_of(b) != l.rank_of(a) + 1 {
                        continue;
                    }
                    let mirrored = l.pair_of(l.top() - b, l.top() - a).unwrap();
                    assert_eq!(image.contains(i), !s.contains(mirrored));
                }
            }
        }
    }

    #[test]
    fn g_zero_arrow_present_when_d_positive() {
        let l = cube(3);
        for s in all_systems(&l) {
            let g0 = g_zero_vertex(&l, s);
            if g0 != l.top() {
                assert!(s.contains(l.pair_of(g0, l.top()).unwrap()));
            }
        }
    }

    #[test]
    fn comp_zero_forces_diagonals_of_image() {
        let l = cube(3);
        for s in all_systems(&l) {
            if comp_degree(&l, s) != 0 {
                continue;
            }
            let t = TransferSystem::new(Arc::clone(&l), s).unwrap();
            let image = phi(&t).unwrap();
            for target in 1..l.len() {
                let facet = t.restrict(l.complement(target).unwrap(), l.top()).unwrap();
                let facet_top = facet.lattice().top();
                if facet.edges().all(|(_, b)| b != facet_top) {
                    assert!(image.contains(0, target));
                }
            }
        }
    }

    /// Facet-by-facet recursion: apply `Φ` on every facet, move facet
    /// `[lo, hi]` onto `[ψ(hi), ψ(lo)]`, and add `1 -> G` iff nothing in the
    /// input targets `G`. Panics if two facets disagree on a shared arrow.
    fn phi_recursive(l: &Lattice, s: PairSet) -> PairSet {
        let n = l.spec().rank();
        let top = l.top();
        let into_top = s.iter().any(|i| l.pairs()[i].1 == top);
        let mut out = PairSet::EMPTY;
        if n == 0 {
            return out;
        }
        if !into_top {
            out.insert(l.pair_of(0, top).unwrap());
        }
        if n == 1 {
            return out;
        }
        let mut decided: Vec<Option<bool>> = vec![None; l.pair_count()];
        for i in 0..n {
            let p = l.atom(i);
            for (lo, hi) in [(0, top - p), (p, top)] {
                let facet = l.interval(lo, hi).unwrap();
                let sub: PairSet = facet
                    .pair_map
                    .iter()
                    .enumerate()
                    .filter(|&(_, &g)| s.contains(g))
                    .map(|(j, _)| j)
                    .collect();
                let image = phi_recursive(&facet.lattice, sub);
                let mirror = l.interval(top - hi, top - lo).unwrap();
                for (j, &g) in mirror.pair_map.iter().enumerate() {
                    let v = image.contains(j);
                    match decided[g] {
                        Some(prev) => assert_eq!(prev, v, "facets disagree"),
                        None => decided[g] = Some(v),
                    }
                    if v {
                        out.insert(g);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn closed_form_matches_facet_recursion() {
        for n in 1..=3 {
            let l = cube(n);
            for s in all_systems(&l) {
                assert_eq!(phi_members(&l, s), phi_recursive(&l, s), "n = {n}, {s:?}");
            }
        }
    }
}
