//! The verification suite behind `norminf check`.
//!
//! Each row recomputes one numeric or structural fact from scratch, compares
//! it with the expected value, and records how long it took. Rows with a time
//! budget fail if they overrun it.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::enumerate::{self, all_systems, Engine, Options};
use crate::lattice::{GroupSpec, Lattice};
use crate::symmetry;
use crate::transfer::{self, PairSet};

/// Transfer systems on `C_{pqrs}`. Computed by the DFS engine and guarded by
/// the Comp symmetry and sampled involution checks; there is no independent
/// published value to compare against.
pub const CUBE4_TOTAL: u64 = 5_389_480;
/// Comp table on `C_{pqrs}`, recorded alongside [`CUBE4_TOTAL`].
pub const CUBE4_BY_COMP: [u64; 5] = [2_663_121, 25_568, 12_102, 25_568, 2_663_121];

/// Random subsets of the `C_{pqr}` pairs used for the closure-law sweep.
pub const CLOSURE_SAMPLES: usize = 10_000;
/// Systems sampled on `C_{pqrs}` for the involution check.
pub const CUBE4_SAMPLES: usize = 10_000;

#[derive(Debug, Clone)]
pub struct Claim {
    pub id: String,
    pub statement: String,
    pub expected: String,
    pub computed: String,
    pub passed: bool,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub rows: Vec<Claim>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let budget = r
                .budget
                .map(|b| format!(" (budget {b:?})"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "[{}] {:<14} {}\n       expected {} | computed {} | {:.3?}{}",
                if r.passed { "PASS" } else { "FAIL" },
                r.id,
                r.statement,
                r.expected,
                r.computed,
                r.elapsed,
                budget
            );
        }
        let failed = self.rows.iter().filter(|r| !r.passed).count();
        let _ = writeln!(
            out,
            "{} of {} checks passed",
            self.rows.len() - failed,
            self.rows.len()
        );
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    /// Include the four-prime sweep.
    pub deep: bool,
    pub seed: u64,
    /// Extra groups to enumerate.
    pub groups: Vec<GroupSpec>,
}

pub fn run(options: &CheckOptions) -> CheckReport {
    // Start the worker pool outside the timed rows.
    rayon::current_num_threads();
    let mut rows = vec![
        count_claim("N1", "C_p has 2 transfer systems", cube(1), 2, Engine::Dfs, ms(1)),
        count_claim("N2-brute", "C_pq has 10 transfer systems", cube(2), 10, Engine::Brute, ms(10)),
        count_claim("N2-dfs", "C_pq has 10 transfer systems", cube(2), 10, Engine::Dfs, ms(10)),
        count_claim("N3-brute", "C_pqr has 450 transfer systems", cube(3), 450, Engine::Brute, secs(10)),
        count_claim("N3-dfs", "C_pqr has 450 transfer systems", cube(3), 450, Engine::Dfs, secs(1)),
        comp_claim("comp-pq", "Comp table of C_pq", cube(2), &[4, 2, 4]),
        comp_claim("comp-pqr", "Comp table of C_pqr", cube(3), &[198, 27, 27, 198]),
        catalan_claim(),
        involution_claim(),
        support_claim(),
        engines_claim(),
        closure_claim(options.seed),
        split_claim(),
    ];
    if options.deep {
        rows.push(cube4_claim(options.seed));
    }
    for spec in &options.groups {
        rows.push(group_claim(spec));
    }
    CheckReport { rows }
}

/// `Cat(n) = C(2n, n) / (n + 1)`.
pub fn catalan(n: u64) -> u64 {
    (0..n).fold(1u64, |c, k| c * 2 * (2 * k + 1) / (k + 2))
}

/// `|N| = 2·Σ_{d < n/2} |Comp_d| + |Comp_{n/2}|` (middle term for even `n` only).
pub fn split_total(by_comp: &[u64]) -> u64 {
    let n = by_comp.len() - 1;
    let half: u64 = by_comp[..n.div_ceil(2)].iter().sum();
    2 * half + if n.is_multiple_of(2) { by_comp[n / 2] } else { 0 }
}

fn ms(n: u64) -> Option<Duration> {
    Some(Duration::from_millis(n))
}

fn secs(n: u64) -> Option<Duration> {
    Some(Duration::from_secs(n))
}

fn cube(n: usize) -> Lattice {
    Lattice::new(GroupSpec::cube(n).expect("small cube")).expect("small cube")
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn claim(
    id: &str,
    statement: &str,
    expected: String,
    computed: String,
    ok: bool,
    elapsed: Duration,
    budget: Option<Duration>,
) -> Claim {
    Claim {
        id: id.to_string(),
        statement: statement.to_string(),
        expected,
        computed,
        passed: ok && budget.is_none_or(|b| elapsed <= b),
        elapsed,
        budget,
    }
}

fn count_claim(
    id: &str,
    statement: &str,
    lattice: Lattice,
    expected: u64,
    engine: Engine,
    budget: Option<Duration>,
) -> Claim {
    let options = Options {
        engine,
        ..Options::default()
    };
    let (result, elapsed) = timed(|| enumerate::enumerate(&lattice, options));
    let computed = match &result {
        Ok(r) => r.total.to_string(),
        Err(e) => e.to_string(),
    };
    let ok = result.is_ok_and(|r| r.total == expected);
    claim(id, statement, expected.to_string(), computed, ok, elapsed, budget)
}

fn comp_claim(id: &str, statement: &str, lattice: Lattice, expected: &[u64]) -> Claim {
    let (result, elapsed) = timed(|| enumerate::count_by_comp(&lattice));
    let computed = result.ok().and_then(|r| r.by_comp).unwrap_or_default();
    let ok = computed == expected;
    claim(
        id,
        statement,
        format!("{expected:?}"),
        format!("{computed:?}"),
        ok,
        elapsed,
        None,
    )
}

fn catalan_claim() -> Claim {
    let expected: Vec<u64> = (1..=6).map(|n| catalan(n + 1)).collect();
    let (computed, elapsed) = timed(|| {
        (1..=6)
            .map(|n| {
                let l = Lattice::new(GroupSpec::chain(n).expect("chain")).expect("chain");
                enumerate::enumerate(&l, Options::default())
                    .map(|r| r.total)
                    .unwrap_or(0)
            })
            .collect::<Vec<u64>>()
    });
    let ok = computed == expected;
    claim(
        "catalan",
        "C_{p^n} has Cat(n+1) transfer systems, n = 1..6",
        format!("{expected:?}"),
        format!("{computed:?}"),
        ok,
        elapsed,
        secs(30),
    )
}

fn involution_claim() -> Claim {
    let (reports, elapsed) = timed(|| {
        (1..=3)
            .map(|n| symmetry::verify_involution(&cube(n)).expect("squarefree"))
            .collect::<Vec<_>>()
    });
    let checked: usize = reports.iter().map(|r| r.systems).sum();
    let failures = reports.iter().filter(|r| !r.passed()).count();
    claim(
        "involution",
        "Φ∘Φ = id, Φ(T) is a transfer system, Comp_d ↦ Comp_{n-d}; n = 1, 2, 3",
        "0 counterexamples over 462 systems".into(),
        format!("{failures} counterexamples over {checked} systems"),
        failures == 0 && checked == 462,
        elapsed,
        secs(5),
    )
}

fn support_claim() -> Claim {
    let l = cube(3);
    let (result, elapsed) = timed(|| {
        let systems = all_systems(&l);
        let failures = symmetry::support_failures(&l, &systems).expect("squarefree");
        (systems.len(), failures.len())
    });
    let (checked, failures) = result;
    claim(
        "support",
        "every arrow of a C_pqr system lies in [G⁰, G] or a bottom facet avoiding a prime of G⁰",
        "0 failures over 450 systems".into(),
        format!("{failures} failures over {checked} systems"),
        failures == 0 && checked == 450,
        elapsed,
        None,
    )
}

/// Every lattice with at most `max_pairs` comparable pairs, up to relabelling
/// primes, with multiplicities listed in every order.
pub fn small_lattices(max_pairs: usize) -> Vec<GroupSpec> {
    fn pairs(ms: &[u32]) -> usize {
        let (mut all, mut size) = (1usize, 1usize);
        for &m in ms {
            let r = m as usize + 1;
            all *= r * (r + 1) / 2;
            size *= r;
        }
        all - size
    }
    fn extend(prefix: &mut Vec<u32>, max_pairs: usize, out: &mut Vec<Vec<u32>>) {
        for m in 1.. {
            prefix.push(m);
            if pairs(prefix) > max_pairs {
                prefix.pop();
                break;
            }
            out.push(prefix.clone());
            extend(prefix, max_pairs, out);
            prefix.pop();
        }
    }
    let mut shapes = Vec::new();
    extend(&mut Vec::new(), max_pairs, &mut shapes);
    shapes
        .into_iter()
        .map(|ms| {
            let primes = [2u64, 3, 5, 7, 11, 13, 17, 19];
            GroupSpec::new(primes.into_iter().zip(ms)).expect("valid shape")
        })
        .collect()
}

fn engines_claim() -> Claim {
    let specs = small_lattices(19);
    let (mismatches, elapsed) = timed(|| {
        specs
            .iter()
            .filter(|spec| {
                let l = Lattice::new((*spec).clone()).expect("small");
                let run = |engine| {
                    enumerate::enumerate(
                        &l,
                        Options {
                            engine,
                            materialize: true,
                            ..Options::default()
                        },
                    )
                    .ok()
                    .and_then(|r| r.systems)
                };
                run(Engine::Brute) != run(Engine::Dfs)
            })
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
    });
    claim(
        "engines",
        "brute and DFS engines emit identical sorted lists on every lattice with ≤ 19 pairs",
        format!("0 mismatches over {} lattices", specs.len()),
        format!("{} mismatches {:?}", mismatches.len(), mismatches),
        mismatches.is_empty(),
        elapsed,
        None,
    )
}

/// Counts closure-law and intersection failures; see `closure_claim`.
pub fn closure_law_failures(seed: u64) -> (usize, usize) {
    let mut law_failures = 0;
    let sq = cube(2);
    let all: Vec<PairSet> = (0..1u128 << sq.pair_count()).map(PairSet).collect();
    let closed: Vec<PairSet> = all.iter().map(|&s| transfer::closure(&sq, s)).collect();
    for (i, &s) in all.iter().enumerate() {
        let c = closed[i];
        if !s.is_subset(c) || transfer::closure(&sq, c) != c || transfer::check(&sq, c).is_err() {
            law_failures += 1;
        }
        for (j, &t) in all.iter().enumerate() {
            if s.is_subset(t) && !c.is_subset(closed[j]) {
                law_failures += 1;
            }
        }
    }

    let l3 = cube(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask = PairSet::full(l3.pair_count()).0;
    for _ in 0..CLOSURE_SAMPLES {
        let s = PairSet(rng.gen::<u128>() & mask & rng.gen::<u128>());
        let t = s.union(PairSet(rng.gen::<u128>() & mask & rng.gen::<u128>()));
        let (cs, ct) = (transfer::closure(&l3, s), transfer::closure(&l3, t));
        if !s.is_subset(cs)
            || transfer::closure(&l3, cs) != cs
            || transfer::check(&l3, cs).is_err()
            || !cs.is_subset(ct)
        {
            law_failures += 1;
        }
    }

    let mut meet_failures = 0;
    for n in 1..=3 {
        let l = cube(n);
        let systems = all_systems(&l);
        for &a in &systems {
            for &b in &systems {
                if transfer::check(&l, a.intersection(b)).is_err() {
                    meet_failures += 1;
                }
            }
        }
    }
    (law_failures, meet_failures)
}

fn closure_claim(seed: u64) -> Claim {
    let ((laws, meets), elapsed) = timed(|| closure_law_failures(seed));
    claim(
        "closure",
        "closure is extensive, monotone, idempotent; transfer systems are closed under intersection",
        "0 failures".into(),
        format!("{laws} law failures, {meets} intersection failures (seed {seed})"),
        laws == 0 && meets == 0,
        elapsed,
        None,
    )
}

fn split_claim() -> Claim {
    let (rows, elapsed) = timed(|| {
        (1..=3)
            .map(|n| {
                let r = enumerate::count_by_comp(&cube(n)).expect("squarefree");
                (r.total, split_total(&r.by_comp.expect("by_comp")))
            })
            .collect::<Vec<_>>()
    });
    let ok = rows.iter().all(|(t, s)| t == s);
    claim(
        "split",
        "|N_n| = 2·Σ_{d<n/2}|Comp_d| (+ |Comp_{n/2}| for even n), n = 1..3",
        "[2, 10, 450]".into(),
        format!("{:?}", rows.iter().map(|r| r.1).collect::<Vec<_>>()),
        ok,
        elapsed,
        None,
    )
}

fn cube4_claim(seed: u64) -> Claim {
    let l = cube(4);
    let (outcome, elapsed) = timed(|| {
        let r = enumerate::count_by_comp(&l).expect("squarefree");
        let by_comp = r.by_comp.expect("by_comp");
        let symmetric = (0..=4).all(|d| by_comp[d] == by_comp[4 - d]);
        let sample = sample_systems(&l, r.total, CUBE4_SAMPLES, seed);
        let report = symmetry::verify_involution_on(&l, &sample);
        let support = symmetry::support_failures(&l, &sample).expect("squarefree");
        (r.total, by_comp, symmetric, report.passed() && support.is_empty())
    });
    let (total, by_comp, symmetric, sampled_ok) = outcome;
    claim(
        "cube4",
        "C_pqrs: Comp symmetry, sampled Φ and support checks, pinned total",
        format!("{CUBE4_TOTAL} {CUBE4_BY_COMP:?}, symmetric, samples pass"),
        format!(
            "{total} {by_comp:?}, {}, samples {}",
            if symmetric { "symmetric" } else { "asymmetric" },
            if sampled_ok { "pass" } else { "fail" }
        ),
        total == CUBE4_TOTAL && by_comp == CUBE4_BY_COMP && symmetric && sampled_ok,
        elapsed,
        None,
    )
}

/// `count` systems chosen uniformly without replacement by the DFS stream
/// position, for a lattice with `total` systems.
pub fn sample_systems(lattice: &Lattice, total: u64, count: usize, seed: u64) -> Vec<PairSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = count.min(total as usize);
    let mut picks = index::sample(&mut rng, total as usize, count).into_vec();
    picks.sort_unstable();
    let mut out = Vec::with_capacity(count);
    let mut next = picks.into_iter().peekable();
    for (i, s) in enumerate::enumerate_dfs(lattice).enumerate() {
        match next.peek() {
            Some(&p) if p == i => {
                out.push(s);
                next.next();
            }
            Some(_) => {}
            None => break,
        }
    }
    out
}

fn group_claim(spec: &GroupSpec) -> Claim {
    let id = format!("group {spec}");
    let lattice = match Lattice::new(spec.clone()) {
        Ok(l) => l,
        Err(e) => {
            return claim(&id, "enumerate", "-".into(), e.to_string(), false, Duration::ZERO, None)
        }
    };
    let expected = if spec.rank() == 1 {
        Some(catalan(spec.factors()[0].multiplicity as u64 + 1))
    } else if spec.is_squarefree() {
        match spec.rank() {
            2 => Some(10),
            3 => Some(450),
            4 => Some(CUBE4_TOTAL),
            _ => None,
        }
    } else {
        None
    };
    let (result, elapsed) = timed(|| {
        let dfs = enumerate::enumerate(&lattice, Options::default()).map(|r| r.total);
        let brute = (lattice.pair_count() <= 19).then(|| {
            enumerate::enumerate(
                &lattice,
                Options {
                    engine: Engine::Brute,
                    ..Options::default()
                },
            )
            .map(|r| r.total)
            .ok()
        });
        (dfs.ok(), brute.flatten())
    });
    let (dfs, brute) = result;
    let engines_agree = brute.is_none_or(|b| Some(b) == dfs);
    let ok = dfs.is_some() && engines_agree && expected.is_none_or(|e| Some(e) == dfs);
    claim(
        &id,
        "transfer system count",
        expected.map_or("engines agree".into(), |e| e.to_string()),
        match (dfs, brute) {
            (Some(d), Some(b)) => format!("{d} (brute {b})"),
            (Some(d), None) => d.to_string(),
            _ => "failed".into(),
        },
        ok,
        elapsed,
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalan_numbers() {
        let got: Vec<u64> = (0..=7).map(catalan).collect();
        assert_eq!(got, vec![1, 1, 2, 5, 14, 42, 132, 429]);
    }

    #[test]
    fn split_formula() {
        assert_eq!(split_total(&[1, 1]), 2);
        assert_eq!(split_total(&[4, 2, 4]), 10);
        assert_eq!(split_total(&[198, 27, 27, 198]), 450);
        assert_eq!(split_total(&CUBE4_BY_COMP), CUBE4_TOTAL);
    }

    #[test]
    fn small_lattice_list() {
        let names: Vec<String> = small_lattices(19).iter().map(|s| s.to_string()).collect();
        assert_eq!(
            names,
            vec!["2", "2,3", "2,3,5", "2,3^2", "2^2", "2^2,3", "2^3", "2^4", "2^5"]
        );
    }

    #[test]
    fn sampling_is_deterministic() {
        let l = cube(3);
        let a = sample_systems(&l, 450, 20, 7);
        let b = sample_systems(&l, 450, 20, 7);
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(sample_systems(&l, 450, 1000, 0).len(), 450);
    }

    #[test]
    fn group_rows() {
        let row = group_claim(&"2^5".parse().unwrap());
        assert!(row.passed, "{row:?}");
        assert_eq!(row.computed, "132 (brute 132)");
        let row = group_claim(&"2^2,3".parse().unwrap());
        assert!(row.passed, "{row:?}");
    }
}
