//! Exhaustive enumeration of transfer systems.
//!
//! Two engines that share nothing but the [`Lattice`]:
//!
//! * the brute-force engine tests every bit pattern with [`transfer::check`];
//! * the DFS engine decides pairs one at a time, from the highest pair index
//!   down, and propagates the axioms as Horn clauses. Restriction gives unary
//!   clauses `x_(h,k) -> x_(h∧l, k∧l)`, transitivity binary clauses
//!   `x_(h,k) ∧ x_(k,m) -> x_(h,m)`. A branch dies as soon as propagation
//!   would set a pair already decided absent.
//!
//! Both engines emit pair sets in increasing integer order. The DFS engine
//! gets this for free: deciding the most significant bit first, absent
//! before present, visits leaves in numeric order.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::symmetry;
use crate::transfer::{self, PairSet};

/// Brute-force refuses lattices with more comparable pairs than this.
pub const DEFAULT_BRUTE_CEILING: usize = 25;

/// Frontier size at which the DFS tree is handed to worker threads.
const PARALLEL_FRONTIER: usize = 256;

const BRUTE_CHUNK: u128 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    Brute,
    #[default]
    Dfs,
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Engine::Brute),
            "dfs" => Ok(Engine::Dfs),
            other => Err(Error::Parse(format!("unknown engine {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub engine: Engine,
    pub brute_ceiling: usize,
    /// Keep every system, not just the counts.
    pub materialize: bool,
    /// Bucket by Comp class; squarefree lattices only.
    pub by_comp: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            engine: Engine::Dfs,
            brute_ceiling: DEFAULT_BRUTE_CEILING,
            materialize: false,
            by_comp: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationResult {
    pub total: u64,
    /// `by_comp[d]` counts systems in `Comp_d`.
    pub by_comp: Option<Vec<u64>>,
    /// Strictly increasing.
    pub systems: Option<Vec<PairSet>>,
}

/// Runs one engine over `lattice`.
pub fn enumerate(lattice: &Lattice, options: Options) -> Result<EnumerationResult> {
    if options.by_comp && !lattice.is_squarefree() {
        return Err(Error::NotSquarefree("Comp classification"));
    }
    let roots: Vec<Box<dyn Iterator<Item = PairSet> + Send>> = match options.engine {
        Engine::Brute => {
            brute_guard(lattice, options.brute_ceiling)?;
            brute_chunks(lattice)
                .map(|(start, end)| {
                    Box::new(BruteForce::range(lattice, start, end))
                        as Box<dyn Iterator<Item = PairSet> + Send>
                })
                .collect()
        }
        Engine::Dfs => {
            let tables = Arc::new(HornTables::new(lattice));
            tables
                .frontier(PARALLEL_FRONTIER)
                .into_iter()
                .map(|root| {
                    Box::new(DfsIter::from_root(Arc::clone(&tables), root))
                        as Box<dyn Iterator<Item = PairSet> + Send>
                })
                .collect()
        }
    };

    let buckets = if options.by_comp {
        lattice.spec().rank() + 1
    } else {
        0
    };
    let parts: Vec<(u64, Vec<u64>, Vec<PairSet>)> = roots
        .into_par_iter()
        .map(|iter| {
            let mut total = 0u64;
            let mut by_comp = vec![0u64; buckets];
            let mut systems = Vec::new();
            for s in iter {
                total += 1;
                if options.by_comp {
                    by_comp[symmetry::comp_degree(lattice, s)] += 1;
                }
                if options.materialize {
                    systems.push(s);
                }
            }
            (total, by_comp, systems)
        })
        .collect();

    let mut result = EnumerationResult {
        total: 0,
        by_comp: options.by_comp.then(|| vec![0; buckets]),
        systems: options.materialize.then(Vec::new),
    };
    for (total, by_comp, systems) in parts {
        result.total += total;
        if let Some(acc) = result.by_comp.as_mut() {
            acc.iter_mut().zip(by_comp).for_each(|(a, b)| *a += b);
        }
        if let Some(acc) = result.systems.as_mut() {
            acc.extend(systems);
        }
    }
    debug_assert!(result
        .systems
        .as_ref()
        .is_none_or(|s| s.windows(2).all(|w| w[0] < w[1])));
    Ok(result)
}

/// All transfer systems, sorted, via the DFS engine.
pub fn all_systems(lattice: &Lattice) -> Vec<PairSet> {
    enumerate(
        lattice,
        Options {
            materialize: true,
            ..Options::default()
        },
    )
    .expect("dfs enumeration is infallible")
    .systems
    .expect("materialized")
}

/// Counts per Comp class (DFS engine). Squarefree lattices only.
pub fn count_by_comp(lattice: &Lattice) -> Result<EnumerationResult> {
    enumerate(
        lattice,
        Options {
            by_comp: true,
            ..Options::default()
        },
    )
}

fn brute_guard(lattice: &Lattice, ceiling: usize) -> Result<()> {
    if lattice.pair_count() > ceiling {
        return Err(Error::CeilingExceeded {
            pairs: lattice.pair_count(),
            ceiling,
        });
    }
    Ok(())
}

fn brute_chunks(lattice: &Lattice) -> impl Iterator<Item = (u128, u128)> {
    let end = 1u128 << lattice.pair_count();
    (0..end.div_ceil(BRUTE_CHUNK)).map(move |c| (c * BRUTE_CHUNK, ((c + 1) * BRUTE_CHUNK).min(end)))
}

/// Brute-force stream: every bit pattern, filtered by the axiom checker.
pub struct BruteForce<'a> {
    lattice: &'a Lattice,
    next: u128,
    end: u128,
}

impl<'a> BruteForce<'a> {
    pub fn new(lattice: &'a Lattice, ceiling: usize) -> Result<Self> {
        brute_guard(lattice, ceiling)?;
        Ok(Self::range(lattice, 0, 1u128 << lattice.pair_count()))
    }

    fn range(lattice: &'a Lattice, start: u128, end: u128) -> Self {
        BruteForce {
            lattice,
            next: start,
            end,
        }
    }
}

impl Iterator for BruteForce<'_> {
    type Item = PairSet;

    fn next(&mut self) -> Option<PairSet> {
        while self.next < self.end {
            let candidate = PairSet(self.next);
            self.next += 1;
            if transfer::check(self.lattice, candidate).is_ok() {
                return Some(candidate);
            }
        }
        None
    }
}

/// Sequential brute-force stream with the default ceiling.
pub fn enumerate_brute(lattice: &Lattice) -> Result<BruteForce<'_>> {
    BruteForce::new(lattice, DEFAULT_BRUTE_CEILING)
}

/// Sequential DFS stream.
pub fn enumerate_dfs(lattice: &Lattice) -> DfsIter {
    let tables = Arc::new(HornTables::new(lattice));
    let root = tables.root();
    DfsIter::from_root(tables, root)
}

/// Horn clauses of the two axioms, as bit masks over pairs.
#[derive(Debug)]
struct HornTables {
    pairs: Vec<(usize, usize)>,
    /// `compose[h * len + m]`: pair index of `h -> m`, or `NONE`.
    compose: Vec<u8>,
    len: usize,
    /// Unary consequences of each pair.
    implies: Vec<u128>,
    /// Pairs whose unary consequences include each pair.
    implied_by: Vec<u128>,
    /// Pairs by source vertex.
    out_of: Vec<u128>,
    /// Pairs by target vertex.
    into: Vec<u128>,
}

const NONE: u8 = u8::MAX;

#[derive(Debug, Clone, Copy)]
struct Node {
    present: u128,
    absent: u128,
    decided: usize,
}

impl HornTables {
    fn new(lattice: &Lattice) -> Self {
        let len = lattice.len();
        let pairs = lattice.pairs().to_vec();
        let mut compose = vec![NONE; len * len];
        for (i, &(a, b)) in pairs.iter().enumerate() {
            compose[a * len + b] = i as u8;
        }
        let mut implies = vec![0u128; pairs.len()];
        let mut implied_by = vec![0u128; pairs.len()];
        let mut out_of = vec![0u128; len];
        let mut into = vec![0u128; len];
        for (i, &(h, k)) in pairs.iter().enumerate() {
            out_of[h] |= 1 << i;
            into[k] |= 1 << i;
            for l in 0..len {
                let (a, b) = (lattice.meet(h, l), lattice.meet(k, l));
                if a != b && (a, b) != (h, k) {
                    let j = compose[a * len + b] as usize;
                    implies[i] |= 1 << j;
                    implied_by[j] |= 1 << i;
                }
            }
        }
        HornTables {
            pairs,
            compose,
            len,
            implies,
            implied_by,
            out_of,
            into,
        }
    }

    fn vars(&self) -> usize {
        self.pairs.len()
    }

    fn root(&self) -> Node {
        Node {
            present: 0,
            absent: 0,
            decided: 0,
        }
    }

    fn compose(&self, a: usize, b: usize) -> u128 {
        1u128 << self.compose[a * self.len + b]
    }

    /// Sets `add` present and closes under both clause families.
    fn assert_present(&self, mut present: u128, absent: u128, add: u128) -> Option<u128> {
        if add & absent != 0 {
            return None;
        }
        let mut queue = add & !present;
        present |= add;
        while queue != 0 {
            let i = queue.trailing_zeros() as usize;
            queue &= queue - 1;
            let (h, k) = self.pairs[i];
            let mut forced = self.implies[i];
            let mut after = present & self.out_of[k];
            while after != 0 {
                let j = after.trailing_zeros() as usize;
                after &= after - 1;
                forced |= self.compose(h, self.pairs[j].1);
            }
            let mut before = present & self.into[h];
            while before != 0 {
                let j = before.trailing_zeros() as usize;
                before &= before - 1;
                forced |= self.compose(self.pairs[j].0, k);
            }
            let new = forced & !present;
            if new & absent != 0 {
                return None;
            }
            present |= new;
            queue |= new;
        }
        Some(present)
    }

    /// Sets pair `v` absent, along with everything that would imply it.
    fn assert_absent(&self, present: u128, absent: u128, v: usize) -> Option<u128> {
        let absent = absent | 1u128 << v | self.implied_by[v];
        (absent & present == 0).then_some(absent)
    }

    /// Children of `node` in output order: absent branch first.
    fn expand(&self, node: Node, mut emit: impl FnMut(Node)) {
        let v = self.vars() - 1 - node.decided;
        let bit = 1u128 << v;
        let decided = node.decided + 1;
        if (node.present | node.absent) & bit != 0 {
            emit(Node { decided, ..node });
            return;
        }
        if let Some(absent) = self.assert_absent(node.present, node.absent, v) {
            emit(Node {
                present: node.present,
                absent,
                decided,
            });
        }
        if let Some(present) = self.assert_present(node.present, node.absent, bit) {
            emit(Node {
                present,
                absent: node.absent,
                decided,
            });
        }
    }

    /// Ordered subtree roots covering the whole search, for parallel work.
    fn frontier(&self, target: usize) -> Vec<Node> {
        let mut layer = vec![self.root()];
        while layer.len() < target && layer.iter().any(|n| n.decided < self.vars()) {
            let mut next = Vec::with_capacity(layer.len() * 2);
            for node in layer {
                if node.decided == self.vars() {
                    next.push(node);
                } else {
                    self.expand(node, |c| next.push(c));
                }
            }
            layer = next;
        }
        layer
    }
}

/// Depth-first stream over one subtree of the DFS engine.
pub struct DfsIter {
    tables: Arc<HornTables>,
    stack: Vec<Node>,
}

impl DfsIter {
    fn from_root(tables: Arc<HornTables>, root: Node) -> Self {
        DfsIter {
            tables,
            stack: vec![root],
        }
    }
}

impl Iterator for DfsIter {
    type Item = PairSet;

    fn next(&mut self) -> Option<PairSet> {
        let vars = self.tables.vars();
        while let Some(node) = self.stack.pop() {
            if node.decided == vars {
                return Some(PairSet(node.present));
            }
            // Push in reverse so the absent branch is explored first.
            let mut children = [None, None];
            let mut n = 0;
            self.tables.expand(node, |c| {
                children[n] = Some(c);
                n += 1;
            });
            for child in children[..n].iter().rev().flatten() {
                self.stack.push(*child);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GroupSpec;

    fn lat(s: &str) -> Lattice {
        Lattice::new(s.parse::<GroupSpec>().unwrap()).unwrap()
    }

    fn count(l: &Lattice, engine: Engine) -> u64 {
        enumerate(
            l,
            Options {
                engine,
                ..Options::default()
            },
        )
        .unwrap()
        .total
    }

    #[test]
    fn small_counts() {
        assert_eq!(count(&lat("2"), Engine::Brute), 2);
        assert_eq!(count(&lat("2,3"), Engine::Brute), 10);
        assert_eq!(count(&lat("2"), Engine::Dfs), 2);
        assert_eq!(count(&lat("2,3"), Engine::Dfs), 10);
        assert_eq!(count(&lat("2^4"), Engine::Dfs), 42);
    }

    #[test]
    fn streams_match_parallel_collection() {
        for s in ["2^3", "2,3", "2^2,3"] {
            let l = lat(s);
            let seq: Vec<_> = enumerate_dfs(&l).collect();
            let brute: Vec<_> = enumerate_brute(&l).unwrap().collect();
            assert_eq!(seq, brute, "{s}");
            assert_eq!(seq, all_systems(&l), "{s}");
        }
    }

    #[test]
    fn ceiling_is_enforced() {
        let l = Lattice::new(GroupSpec::cube(4).unwrap()).unwrap();
        let brute = Options {
            engine: Engine::Brute,
            ..Options::default()
        };
        assert!(matches!(
            enumerate(&l, brute),
            Err(Error::CeilingExceeded { pairs: 65, ceiling: 25 })
        ));
        assert!(enumerate_brute(&l).is_err());
        let tight = Options {
            engine: Engine::Brute,
            brute_ceiling: 4,
            ..Options::default()
        };
        assert!(matches!(
            enumerate(&lat("2,3"), tight),
            Err(Error::CeilingExceeded { pairs: 5, ceiling: 4 })
        ));
    }

    #[test]
    fn by_comp_requires_squarefree() {
        assert!(matches!(
            count_by_comp(&lat("2^2")),
            Err(Error::NotSquarefree(_))
        ));
        let r = count_by_comp(&lat("2,3")).unwrap();
        assert_eq!(r.by_comp, Some(vec![4, 2, 4]));
        assert_eq!(r.total, 10);
        assert!(r.systems.is_none());
    }

    #[test]
    fn engine_parse() {
        assert_eq!("brute".parse::<Engine>().unwrap(), Engine::Brute);
        assert_eq!("dfs".parse::<Engine>().unwrap(), Engine::Dfs);
        assert!("bfs".parse::<Engine>().is_err());
    }
}
