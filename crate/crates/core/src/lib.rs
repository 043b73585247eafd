//! Transfer systems on the subgroup lattice of a finite cyclic group.
//!
//! A transfer system is a set of arrows `H -> K` between subgroups `H < K`
//! that is closed under
//!
//! * transitivity: `H -> K` and `K -> L` give `H -> L`;
//! * restriction: `H -> K` gives `H ∩ L -> K ∩ L` for every subgroup `L`
//!   (when the two differ).
//!
//! The crate builds the divisor lattice ([`lattice`]), checks and closes arrow
//! sets ([`transfer`]), enumerates all systems with two independent engines
//! ([`enumerate`]), computes the Comp decomposition and the involution `Φ` on
//! squarefree cubes ([`symmetry`]), and reads and writes the file formats used
//! by the command-line tool ([`io`]). [`report`] bundles the numeric claims
//! the tool verifies.

pub mod enumerate;
pub mod error;
pub mod io;
pub mod lattice;
pub mod report;
pub mod symmetry;
pub mod transfer;

pub use enumerate::{Engine, EnumerationResult, Options};
pub use error::{Error, Result};
pub use lattice::{Arrow, GroupSpec, Interval, Lattice, Subgroup};
pub use symmetry::CompClass;
pub use transfer::{PairSet, TransferSystem, Violation, ViolationKind};
