//! File formats: JSON systems, hex bit vectors, catalogues, DOT and CSV.
//!
//! A catalogue is line-oriented text:
//!
//! ```text
//! # norminf catalogue
//! group 2,3
//! pairs 5
//! fingerprint 3f0c9a1d2b7e4410
//! version 0.1.0
//! count 10
//! 00
//! 01 d=0
//! ```
//!
//! Entries are hex bit vectors, strictly increasing, optionally followed by a
//! `d=` Comp annotation. The fingerprint digests the canonical pair order and
//! is compared against the rebuilt lattice before any entry is decoded.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Arrow, GroupSpec, Lattice, Subgroup};
use crate::transfer::{PairSet, TransferSystem};

pub const CATALOGUE_MAGIC: &str = "# norminf catalogue";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemJson {
    pub group: String,
    pub arrows: Vec<(Vec<u32>, Vec<u32>)>,
}

/// Canonical single-line JSON, arrows in pair order.
pub fn to_json(t: &TransferSystem) -> String {
    pairs_to_json(t.lattice(), t.members())
}

pub fn pairs_to_json(lattice: &Lattice, members: PairSet) -> String {
    let doc = SystemJson {
        group: lattice.spec().to_string(),
        arrows: members
            .iter()
            .map(|i| {
                let a = lattice.arrow(i);
                (a.source.exponents().to_vec(), a.target.exponents().to_vec())
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("plain data serialises")
}

/// Parses a JSON arrow list without checking the axioms.
pub fn arrows_from_json(text: &str) -> Result<(Arc<Lattice>, PairSet)> {
    let doc: SystemJson = serde_json::from_str(text)?;
    let spec: GroupSpec = doc.group.parse()?;
    let lattice = Lattice::new(spec)?;
    let arrows: Vec<Arrow> = doc
        .arrows
        .into_iter()
        .map(|(s, t)| Arrow::new(Subgroup::new(s), Subgroup::new(t)))
        .collect();
    let members = PairSet::from_arrows(&lattice, &arrows)?;
    Ok((Arc::new(lattice), members))
}

pub fn system_from_json(text: &str) -> Result<TransferSystem> {
    let (lattice, members) = arrows_from_json(text)?;
    TransferSystem::new(lattice, members)
}

fn hex_width(lattice: &Lattice) -> usize {
    lattice.pair_count().div_ceil(4).max(1)
}

/// Lowercase hex of the bit vector, zero-padded to `⌈pairs / 4⌉` digits.
pub fn to_hex(lattice: &Lattice, members: PairSet) -> String {
    format!("{:0width$x}", members.0, width = hex_width(lattice))
}

pub fn from_hex(lattice: &Lattice, text: &str) -> Result<PairSet> {
    let text = text.trim();
    let text = text.strip_prefix("0x").unwrap_or(text);
    let bits = u128::from_str_radix(text, 16)
        .map_err(|e| Error::Parse(format!("bad hex {text:?}: {e}")))?;
    let set = PairSet(bits);
    if !set.fits(lattice) {
        return Err(Error::BitsOutOfRange {
            pairs: lattice.pair_count(),
        });
    }
    Ok(set)
}

#[derive(Debug, Clone)]
pub struct Catalogue {
    pub lattice: Arc<Lattice>,
    pub version: String,
    pub entries: Vec<CatalogueEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogueEntry {
    pub members: PairSet,
    pub comp: Option<usize>,
}

/// Renders a catalogue. `entries` must be strictly increasing.
pub fn write_catalogue(lattice: &Lattice, entries: &[CatalogueEntry]) -> String {
    debug_assert!(entries.windows(2).all(|w| w[0].members < w[1].members));
    let mut out = String::new();
    let _ = writeln!(out, "{CATALOGUE_MAGIC}");
    let _ = writeln!(out, "group {}", lattice.spec());
    let _ = writeln!(out, "pairs {}", lattice.pair_count());
    let _ = writeln!(out, "fingerprint {}", lattice.fingerprint());
    let _ = writeln!(out, "version {VERSION}");
    let _ = writeln!(out, "count {}", entries.len());
    for e in entries {
        out.push_str(&to_hex(lattice, e.members));
        if let Some(d) = e.comp {
            let _ = write!(out, " d={d}");
        }
        out.push('\n');
    }
    out
}

pub fn read_catalogue(text: &str) -> Result<Catalogue> {
    let mut lines = text.lines();
    let bad = |msg: &str| Error::Parse(format!("catalogue: {msg}"));
    if lines.next().map(str::trim) != Some(CATALOGUE_MAGIC) {
        return Err(bad("missing header line"));
    }
    let mut field = |name: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| bad(&format!("missing {name}")))?;
        line.strip_prefix(name)
            .and_then(|rest| rest.strip_prefix(' '))
            .map(|v| v.trim().to_string())
            .ok_or_else(|| bad(&format!("expected {name} line, found {line:?}")))
    };
    let spec: GroupSpec = field("group")?.parse()?;
    let pairs: usize = field("pairs")?
        .parse()
        .map_err(|_| bad("pairs is not a number"))?;
    let fingerprint = field("fingerprint")?;
    let version = field("version")?;
    let count: usize = field("count")?
        .parse()
        .map_err(|_| bad("count is not a number"))?;

    let lattice = Lattice::new(spec)?;
    if lattice.fingerprint() != fingerprint {
        return Err(Error::FingerprintMismatch {
            expected: lattice.fingerprint(),
            found: fingerprint,
        });
    }
    if lattice.pair_count() != pairs {
        return Err(bad("pair count does not match group"));
    }

    let mut entries = Vec::with_capacity(count);
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let members = from_hex(&lattice, parts.next().expect("non-empty line"))?;
        let comp = match parts.next() {
            None => None,
            Some(tag) => Some(
                tag.strip_prefix("d=")
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| bad(&format!("bad annotation {tag:?}")))?,
            ),
        };
        if let Some(prev) = entries.last().map(|e: &CatalogueEntry| e.members) {
            if prev >= members {
                return Err(bad("entries not strictly increasing"));
            }
        }
        entries.push(CatalogueEntry { members, comp });
    }
    if entries.len() != count {
        return Err(bad(&format!(
            "header says {count} entries, found {}",
            entries.len()
        )));
    }
    Ok(Catalogue {
        lattice: Arc::new(lattice),
        version,
        entries,
    })
}

/// Graphviz digraph: one node per subgroup, ranked by number of prime
/// factors, one edge per arrow.
pub fn to_dot(lattice: &Lattice, members: PairSet, symbolic: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", lattice.name(lattice.top(), symbolic));
    out.push_str("  rankdir=BT;\n  node [shape=plaintext];\n");
    for v in 0..lattice.len() {
        let _ = writeln!(out, "  v{v} [label=\"{}\"];", lattice.name(v, symbolic));
    }
    let max_rank = lattice.rank_of(lattice.top());
    for r in 0..=max_rank {
        let row: Vec<String> = (0..lattice.len())
            .filter(|&v| lattice.rank_of(v) == r)
            .map(|v| format!("v{v};"))
            .collect();
        let _ = writeln!(out, "  {{ rank=same; {} }}", row.join(" "));
    }
    for i in members.iter() {
        let (a, b) = lattice.pairs()[i];
        let _ = writeln!(out, "  v{a} -> v{b};");
    }
    out.push_str("}\n");
    out
}

/// `d,count` table.
pub fn comp_csv(by_comp: &[u64]) -> String {
    let mut out = String::from("d,count\n");
    for (d, c) in by_comp.iter().enumerate() {
        let _ = writeln!(out, "{d},{c}");
    }
    out
}

/// Reads a system given either as JSON or as hex for `lattice`'s group.
pub fn parse_members(text: &str, lattice: Option<&Arc<Lattice>>) -> Result<(Arc<Lattice>, PairSet)> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let (parsed, members) = arrows_from_json(trimmed)?;
        match lattice {
            Some(l) if **l != *parsed => Err(Error::LatticeMismatch),
            Some(l) => Ok((Arc::clone(l), members)),
            None => Ok((parsed, members)),
        }
    } else {
        let lattice =
            lattice.ok_or_else(|| Error::Parse("hex input needs a group".to_string()))?;
        Ok((Arc::clone(lattice), from_hex(lattice, trimmed)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::all_systems;
    use proptest::prelude::*;

    fn lat(s: &str) -> Arc<Lattice> {
        Arc::new(Lattice::new(s.parse::<GroupSpec>().unwrap()).unwrap())
    }

    #[test]
    fn json_shape() {
        let l = lat("2,3");
        let t = TransferSystem::closure_of(Arc::clone(&l), PairSet::singleton(2)).unwrap();
        assert_eq!(
            to_json(&t),
            r#"{"group":"2,3","arrows":[[[0,0],[0,1]],[[0,0],[1,0]],[[0,0],[1,1]]]}"#
        );
        assert_eq!(system_from_json(&to_json(&t)).unwrap(), t);
    }

    #[test]
    fn json_rejects_non_systems_and_garbage() {
        assert!(matches!(
            system_from_json(r#"{"group":"2,3","arrows":[[[0,0],[1,1]]]}"#),
            Err(Error::NotTransferSystem(_))
        ));
        assert!(matches!(
            system_from_json(r#"{"group":"2,3","arrows":[[[1,1],[0,0]]]}"#),
            Err(Error::NotAnArrow { .. })
        ));
        assert!(matches!(system_from_json("{"), Err(Error::Json(_))));
        assert!(matches!(
            system_from_json(r#"{"group":"4","arrows":[]}"#),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn hex_width_and_range() {
        let l = lat("2,3,5");
        assert_eq!(to_hex(&l, PairSet::EMPTY), "00000");
        assert_eq!(to_hex(&l, PairSet::full(19)), "7ffff");
        assert_eq!(from_hex(&l, "7ffff").unwrap(), PairSet::full(19));
        assert!(matches!(from_hex(&l, "80000"), Err(Error::BitsOutOfRange { .. })));
        assert!(matches!(from_hex(&l, "zz"), Err(Error::Parse(_))));
        assert_eq!(to_hex(&lat("2"), PairSet::full(1)), "1");
    }

    #[test]
    fn catalogue_round_trip() {
        let l = lat("2,3");
        let entries: Vec<CatalogueEntry> = all_systems(&l)
            .into_iter()
            .map(|members| CatalogueEntry {
                members,
                comp: Some(crate::symmetry::comp_degree(&l, members)),
            })
            .collect();
        let text = write_catalogue(&l, &entries);
        let back = read_catalogue(&text).unwrap();
        assert_eq!(back.entries, entries);
        assert_eq!(write_catalogue(&back.lattice, &back.entries), text);
    }

    #[test]
    fn catalogue_rejects_bad_fingerprint_and_order() {
        let l = lat("2,3");
        let entries: Vec<CatalogueEntry> = all_systems(&l)
            .into_iter()
            .map(|members| CatalogueEntry { members, comp: None })
            .collect();
        let text = write_catalogue(&l, &entries);
        let tampered = text.replace(&l.fingerprint(), "0000000000000000");
        assert!(matches!(
            read_catalogue(&tampered),
            Err(Error::FingerprintMismatch { .. })
        ));
        let mut lines: Vec<&str> = text.lines().collect();
        lines.swap(6, 7);
        assert!(matches!(read_catalogue(&lines.join("\n")), Err(Error::Parse(_))));
        let regrouped = text.replace("group 2,3", "group 2^2");
        assert!(read_catalogue(&regrouped).is_err());
    }

    #[test]
    fn dot_counts() {
        let l = lat("2,3");
        let empty = to_dot(&l, PairSet::EMPTY, false);
        assert_eq!(empty.matches("[label=").count(), 4);
        assert_eq!(empty.matches("->").count(), 0);
        let full3 = lat("2,3,5");
        assert_eq!(to_dot(&full3, PairSet::full(19), true).matches("->").count(), 19);
    }

    #[test]
    fn csv_table() {
        assert_eq!(comp_csv(&[4, 2, 4]), "d,count\n0,4\n1,2\n2,4\n");
    }

    #[test]
    fn parse_members_dispatch() {
        let l = lat("2,3");
        let (_, m) = parse_members("1f", Some(&l)).unwrap();
        assert_eq!(m, PairSet::full(5));
        assert!(parse_members("1f", None).is_err());
        let json = r#"{"group":"2^2","arrows":[]}"#;
        assert!(matches!(parse_members(json, Some(&l)), Err(Error::LatticeMismatch)));
        // Prime labels do not matter, only the shape.
        let json = r#"{"group":"5,7","arrows":[]}"#;
        assert!(parse_members(json, Some(&l)).is_ok());
    }

    proptest! {
        #[test]
        fn hex_and_json_agree(idx in 0usize..450) {
            let l = lat("2,3,5");
            let systems = all_systems(&l);
            let s = systems[idx];
            let t = TransferSystem::new(Arc::clone(&l), s).unwrap();
            let via_json = system_from_json(&to_json(&t)).unwrap().members();
            let via_hex = from_hex(&l, &to_hex(&l, s)).unwrap();
            prop_assert_eq!(via_json, s);
            prop_assert_eq!(via_hex, s);
        }
    }
}
