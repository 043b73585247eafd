//! Subgroup lattices of cyclic groups.
//!
//! The subgroups of `C_m` are in bijection with the divisors of `m`, so a
//! subgroup is stored as its exponent vector over the prime factorisation of
//! `m`. Divisors are kept in lexicographic order of exponent vectors (first
//! prime most significant), which is the same as mixed-radix order; this makes
//! the index of a subgroup a closed-form function of its exponents.
//!
//! Strictly comparable pairs `(H, K)` with `H < K` are the possible arrows of
//! a transfer system. They are numbered by `(source index, target index)` and
//! that numbering is the bit layout of every [`PairSet`](crate::PairSet).

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Largest number of comparable pairs a lattice may have; pair sets are `u128`.
pub const MAX_PAIRS: usize = 128;

const SYMBOLIC_LETTERS: [char; 8] = ['p', 'q', 'r', 's', 't', 'u', 'v', 'w'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimePower {
    pub prime: u64,
    pub multiplicity: u32,
}

/// A cyclic group given by its prime factorisation.
///
/// Only the multiplicities influence any computation. Prime values are kept
/// for labelling output.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    factors: Vec<PrimePower>,
}

impl GroupSpec {
    /// Builds a spec from `(prime, multiplicity)` pairs in any order.
    pub fn new(factors: impl IntoIterator<Item = (u64, u32)>) -> Result<Self> {
        let mut factors: Vec<PrimePower> = factors
            .into_iter()
            .map(|(prime, multiplicity)| PrimePower {
                prime,
                multiplicity,
            })
            .collect();
        if factors.is_empty() {
            return Err(Error::InvalidSpec("empty prime list".into()));
        }
        for f in &factors {
            if !is_prime(f.prime) {
                return Err(Error::InvalidSpec(format!("{} is not prime", f.prime)));
            }
            if f.multiplicity == 0 {
                return Err(Error::InvalidSpec(format!(
                    "multiplicity of {} must be positive",
                    f.prime
                )));
            }
        }
        factors.sort_by_key(|f| f.prime);
        if let Some(w) = factors.windows(2).find(|w| w[0].prime == w[1].prime) {
            return Err(Error::InvalidSpec(format!("duplicate prime {}", w[0].prime)));
        }
        Ok(GroupSpec { factors })
    }

    /// The squarefree spec on the first `n` primes, `C_{2·3·5·…}`.
    pub fn cube(n: usize) -> Result<Self> {
        Self::new(first_primes(n).into_iter().map(|p| (p, 1)))
    }

    /// The chain `C_{2^n}`.
    pub fn chain(n: u32) -> Result<Self> {
        Self::new([(2, n)])
    }

    /// The trivial group. Only reachable through degenerate intervals.
    pub(crate) fn trivial() -> Self {
        GroupSpec {
            factors: Vec::new(),
        }
    }

    pub fn factors(&self) -> &[PrimePower] {
        &self.factors
    }

    /// Number of distinct primes.
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn multiplicities(&self) -> impl Iterator<Item = u32> + '_ {
        self.factors.iter().map(|f| f.multiplicity)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|f| f.multiplicity == 1)
    }

    /// `|G|`, or `None` on overflow.
    pub fn order(&self) -> Option<u128> {
        self.factors.iter().try_fold(1u128, |acc, f| {
            (f.prime as u128)
                .checked_pow(f.multiplicity)
                .and_then(|q| acc.checked_mul(q))
        })
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, pp) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            if pp.multiplicity == 1 {
                write!(f, "{}", pp.prime)?;
            } else {
                write!(f, "{}^{}", pp.prime, pp.multiplicity)?;
            }
        }
        Ok(())
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    /// Parses `"2,3,5"`, `"2^3"` or `"2^2,3"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidSpec("empty prime list".into()));
        }
        let mut factors = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            let (p, m) = match part.split_once('^') {
                Some((p, m)) => (p.trim(), m.trim()),
                None => (part, "1"),
            };
            let prime = p
                .parse::<u64>()
                .map_err(|_| Error::InvalidSpec(format!("bad prime {p:?}")))?;
            let multiplicity = m
                .parse::<u32>()
                .map_err(|_| Error::InvalidSpec(format!("bad exponent {m:?}")))?;
            factors.push((prime, multiplicity));
        }
        GroupSpec::new(factors)
    }
}

/// A subgroup of `C_m`, as exponents over the factorisation of `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup(Vec<u32>);

impl Subgroup {
    pub fn new(exponents: Vec<u32>) -> Self {
        Subgroup(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn leq(&self, other: &Subgroup) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn meet(&self, other: &Subgroup) -> Subgroup {
        Subgroup(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }

    pub fn join(&self, other: &Subgroup) -> Subgroup {
        Subgroup(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    /// Number of prime factors counted with multiplicity.
    pub fn rank(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl From<Vec<u32>> for Subgroup {
    fn from(v: Vec<u32>) -> Self {
        Subgroup(v)
    }
}

/// A norm map `source -> target` with `source < target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arrow {
    pub source: Subgroup,
    pub target: Subgroup,
}

impl Arrow {
    pub fn new(source: impl Into<Subgroup>, target: impl Into<Subgroup>) -> Self {
        Arrow {
            source: source.into(),
            target: target.into(),
        }
    }
}

/// The divisor lattice of a [`GroupSpec`], with precomputed order, meet, join
/// and pair tables. Vertices are addressed by their index in [`Lattice::divisors`].
#[derive(Debug, Clone)]
pub struct Lattice {
    spec: GroupSpec,
    strides: Vec<usize>,
    divisors: Vec<Subgroup>,
    leq: Vec<bool>,
    meet: Vec<usize>,
    join: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    pair_index: Vec<Option<usize>>,
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.spec.multiplicities().eq(other.spec.multiplicities())
    }
}

impl Eq for Lattice {}

impl Lattice {
    /// Builds the divisor lattice, rejecting lattices with more than
    /// [`MAX_PAIRS`] comparable pairs.
    pub fn new(spec: GroupSpec) -> Result<Self> {
        let radices: Vec<usize> = spec.multiplicities().map(|m| m as usize + 1).collect();
        let mut size = 1usize;
        let mut pair_estimate = 1usize;
        for &r in &radices {
            size = size.saturating_mul(r);
            pair_estimate = pair_estimate.saturating_mul(r * (r + 1) / 2);
        }
        let pair_count = pair_estimate.saturating_sub(size);
        if pair_count > MAX_PAIRS {
            return Err(Error::LatticeTooLarge {
                pairs: pair_count,
                max: MAX_PAIRS,
            });
        }

        let mut strides = vec![1usize; radices.len()];
        for i in (0..radices.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * radices[i + 1];
        }
        let divisors: Vec<Subgroup> = (0..size)
            .map(|idx| {
                Subgroup(
                    radices
                        .iter()
                        .zip(&strides)
                        .map(|(&r, &s)| ((idx / s) % r) as u32)
                        .collect(),
                )
            })
            .collect();

        let index = |e: &[u32]| -> usize {
            e.iter().zip(&strides).map(|(&x, &s)| x as usize * s).sum()
        };
        let mut leq = vec![false; size * size];
        let mut meet = vec![0; size * size];
        let mut join = vec![0; size * size];
        for (a, da) in divisors.iter().enumerate() {
            for (b, db) in divisors.iter().enumerate() {
                leq[a * size + b] = da.leq(db);
                meet[a * size + b] = index(&da.meet(db).0);
                join[a * size + b] = index(&da.join(db).0);
            }
        }
        let mut pairs = Vec::with_capacity(pair_count);
        let mut pair_index = vec![None; size * size];
        for a in 0..size {
            for b in 0..size {
                if a != b && leq[a * size + b] {
                    pair_index[a * size + b] = Some(pairs.len());
                    pairs.push((a, b));
                }
            }
        }
        debug_assert_eq!(pairs.len(), pair_count);

        Ok(Lattice {
            spec,
            strides,
            divisors,
            leq,
            meet,
            join,
            pairs,
            pair_index,
        })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn is_squarefree(&self) -> bool {
        self.spec.is_squarefree()
    }

    pub fn len(&self) -> usize {
        self.divisors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.divisors.is_empty()
    }

    pub fn divisors(&self) -> &[Subgroup] {
        &self.divisors
    }

    pub fn subgroup(&self, v: usize) -> &Subgroup {
        &self.divisors[v]
    }

    /// The trivial subgroup `1`; always index 0.
    pub fn bottom(&self) -> usize {
        0
    }

    /// `G` itself; always the last index.
    pub fn top(&self) -> usize {
        self.divisors.len() - 1
    }

    pub fn index_of(&self, h: &Subgroup) -> Result<usize> {
        let ok = h.0.len() == self.spec.rank()
            && h.0
                .iter()
                .zip(self.spec.multiplicities())
                .all(|(&e, m)| e <= m);
        if !ok {
            return Err(Error::NotInLattice(format!("{:?}", h.0)));
        }
        Ok(h.0.iter().zip(&self.strides).map(|(&x, &s)| x as usize * s).sum())
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.len() + b]
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.len() + b]
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.len() + b]
    }

    /// Canonically ordered strictly comparable pairs `(source, target)`.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Index of the pair `a -> b`, if `a < b`.
    pub fn pair_of(&self, a: usize, b: usize) -> Option<usize> {
        self.pair_index[a * self.len() + b]
    }

    pub fn arrow(&self, pair: usize) -> Arrow {
        let (a, b) = self.pairs[pair];
        Arrow {
            source: self.divisors[a].clone(),
            target: self.divisors[b].clone(),
        }
    }

    pub fn arrow_index(&self, arrow: &Arrow) -> Result<usize> {
        let a = self.index_of(&arrow.source)?;
        let b = self.index_of(&arrow.target)?;
        self.pair_of(a, b).ok_or_else(|| Error::NotAnArrow {
            source_name: self.name(a, false),
            target_name: self.name(b, false),
        })
    }

    /// Number of prime factors of vertex `v`, with multiplicity.
    pub fn rank_of(&self, v: usize) -> u32 {
        self.divisors[v].rank()
    }

    /// The sub-lattice `[bottom, top]`, re-indexed as a divisor lattice over
    /// the primes where `top` and `bottom` differ.
    pub fn interval(&self, bottom: usize, top: usize) -> Result<Interval> {
        if !self.leq(bottom, top) {
            return Err(Error::InvalidInterval {
                bottom: self.name(bottom, false),
                top: self.name(top, false),
            });
        }
        let lo = &self.divisors[bottom].0;
        let hi = &self.divisors[top].0;
        let kept: Vec<usize> = (0..self.spec.rank()).filter(|&i| hi[i] > lo[i]).collect();
        let spec = if kept.is_empty() {
            GroupSpec::trivial()
        } else {
            GroupSpec {
                factors: kept
                    .iter()
                    .map(|&i| PrimePower {
                        prime: self.spec.factors[i].prime,
                        multiplicity: hi[i] - lo[i],
                    })
                    .collect(),
            }
        };
        let lattice = Lattice::new(spec)?;
        let vertex_map: Vec<usize> = lattice
            .divisors
            .iter()
            .map(|d| {
                let mut e = lo.clone();
                for (k, &i) in kept.iter().enumerate() {
                    e[i] += d.0[k];
                }
                self.index_of(&Subgroup(e)).expect("interval vertex lies in lattice")
            })
            .collect();
        let pair_map = lattice
            .pairs
            .iter()
            .map(|&(a, b)| {
                self.pair_of(vertex_map[a], vertex_map[b])
                    .expect("embedding preserves strict order")
            })
            .collect();
        Ok(Interval {
            lattice,
            vertex_map,
            pair_map,
        })
    }

    /// `G/H`: the subgroup on the complementary prime set. Squarefree only.
    pub fn complement(&self, v: usize) -> Result<usize> {
        if !self.is_squarefree() {
            return Err(Error::NotSquarefree("complement"));
        }
        Ok(self.top() - v)
    }

    /// Index of the subgroup `C_{p_i}` in a squarefree lattice.
    pub fn atom(&self, i: usize) -> usize {
        self.strides[i]
    }

    /// A stable digest of the canonical pair order.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("{}|", self.spec.rank()));
        for &(a, b) in &self.pairs {
            hasher.update(format!("{:?}>{:?};", self.divisors[a].0, self.divisors[b].0));
        }
        hasher
            .finalize()
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Display name of a vertex: `1`, `C_6` or, symbolically, `C_{pq}`.
    pub fn name(&self, v: usize, symbolic: bool) -> String {
        let e = &self.divisors[v].0;
        if e.iter().all(|&x| x == 0) {
            return "1".to_string();
        }
        if !symbolic {
            let order: u128 = self
                .spec
                .factors
                .iter()
                .zip(e)
                .map(|(f, &x)| (f.prime as u128).pow(x))
                .product();
            return format!("C_{order}");
        }
        let mut body = String::new();
        for (i, &x) in e.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let letter = if self.spec.rank() <= SYMBOLIC_LETTERS.len() {
                SYMBOLIC_LETTERS[i].to_string()
            } else {
                format!("p_{}", i + 1)
            };
            body.push_str(&letter);
            if x > 1 {
                body.push_str(&format!("^{x}"));
            }
        }
        if body.chars().count() == 1 {
            format!("C_{body}")
        } else {
            format!("C_{{{body}}}")
        }
    }
}

/// A closed interval of a lattice together with its embedding.
#[derive(Debug, Clone)]
pub struct Interval {
    pub lattice: Lattice,
    /// Interval vertex index to parent vertex index.
    pub vertex_map: Vec<usize>,
    /// Interval pair index to parent pair index.
    pub pair_map: Vec<usize>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn first_primes(n: usize) -> Vec<u64> {
    (2..).filter(|&k| is_prime(k)).take(n).collect()
}
