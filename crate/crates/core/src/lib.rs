//! Aperiodic tiling complements in cyclic groups: rhythms, characteristic
//! polynomials, the binary Master Problem, a cutting enumeration driver and
//! a brute-force oracle.

pub mod csa;
pub mod error;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod polynomial;
pub mod rhythm;
pub mod solver;

pub use csa::{
    exists_aperiodic_complement, exists_aperiodic_complement_with, run_csa, run_csa_with, ClassInfo, CsaOptions,
    CutBatch, Existence, Limits, Status, TilingEnumeration,
};
pub use error::{Error, Result};
pub use lp::export_lp;
pub use model::{build_master_problem, BuildOptions, ConstraintSystem, LinearRow, Relation, RowTag, SystemSummary};
pub use oracle::{enumerate_complements_bruteforce, verify_tiling};
pub use polynomial::{classify_order, cm_report, CMReport, CandidateRange, GroupOrderClass, IntPolynomial, OrderKind};
pub use rhythm::{EquivalenceMode, Rhythm};
pub use solver::{SearchStats, Solver, SolverOptions};
