//! Frequent pattern based search (FPBS) for the quadratic assignment problem.
//!
//! The solver keeps an elite pool of distinct, locally optimized permutations,
//! mines maximal frequent facility/location assignments from it with FPmax*,
//! and builds new starting points for breakout local search from the mined
//! patterns. Re-mining happens whenever the pool stops accepting new members.
//!
//! Facilities and locations are 0-indexed everywhere inside the crate; the
//! text formats in [`qaplib`] and the item encoding in [`fpmine`] are 1-indexed.

pub mod bench;
pub mod bls;
pub mod construct;
pub mod driver;
pub mod elite;
pub mod error;
pub mod fpmine;
pub mod qap;
pub mod qaplib;
pub mod seed;

pub use bls::{bls_run, BlsParams, PerturbationKind};
pub use construct::{build_solution, ConstructParams};
pub use driver::{run, xpd, Budget, FpbsParams, RunRecord};
pub use elite::ElitePool;
pub use error::{Error, Result};
pub use fpmine::{mine_patterns, Pattern};
pub use qap::{full_evaluate, Assignment, DeltaTable, SwapMove};
pub use qaplib::{parse_instance, BkvRegistry, QapInstance};
