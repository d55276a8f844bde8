//! A finite-scale workbench for sites, pro-sites and their topologies.
//!
//! Everything here runs on explicit finite snapshots: categories are either
//! given by composition tables or generated on demand (finite G-sets) under
//! a size budget, and every universal statement is checked exhaustively on
//! the snapshot, reporting `UNVERIFIED` where a construction leaves it.
//!
//! Module map:
//!
//! * [`fincat`] categories, functors, chosen limits and coproducts
//! * [`site`] covering families, sieves, coherence and admissibility checks
//! * [`sheaf`] set-valued presheaves, sheafification, Yoneda, transport
//! * [`pro`] pro-objects over finite cofiltered posets and their hom-sets
//! * [`tower`] finite towers, pullback/concatenation/product, splittings
//! * [`protop`] weak and transfinite topologies on the pro-category
//! * [`contract`] weak contractibility, the `P(U)` construction, dc-topology
//! * [`cohom`] Čech complexes and group cohomology over the integers
//! * [`workbench`] fixture files, suites and replayable reports
//! * [`linalg`] exact integer linear algebra (Smith normal form)

#![allow(clippy::type_complexity, clippy::needless_range_loop)]

pub mod cohom;
pub mod contract;
pub mod error;
pub mod fincat;
pub mod linalg;
pub mod pro;
pub mod protop;
pub mod sheaf;
pub mod site;
pub mod tower;
pub mod verdict;
pub mod workbench;

pub use error::{Error, Result};
pub use verdict::{Check, Verdict};
