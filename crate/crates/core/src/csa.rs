//! Cutting sequential enumeration: solve, record the complement, block its
//! whole orbit with `Σ_{i∈I} b_i ≤ n_B − 1` rows, and solve again until the
//! model is infeasible.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{build_master_problem, cuts_for_solution, orbit_cut, BuildOptions, ConstraintSystem, LinearRow};
use crate::oracle::verify_tiling;
use crate::rhythm::{units, EquivalenceMode, Rhythm};
use crate::solver::{Outcome, SearchStats, Solver, SolverOptions};

/// Stopping rules for an enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_solutions: Option<usize>,
    pub max_time: Option<Duration>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_solutions: None, max_time: Some(Duration::from_secs(3600)) }
    }
}

impl Limits {
    pub fn unlimited() -> Self {
        Limits { max_solutions: None, max_time: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutBatch {
    /// Block every anchored member of the solution's orbit at once.
    FullOrbit,
    /// Block only the solution itself; for comparison runs.
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsaOptions {
    pub build: BuildOptions,
    pub solver: SolverOptions,
    pub batch: CutBatch,
    /// Keep one search alive and feed it the cuts. When false every
    /// iteration rebuilds the solver on the grown system.
    pub incremental: bool,
}

impl Default for CsaOptions {
    fn default() -> Self {
        CsaOptions {
            build: BuildOptions::default(),
            solver: SolverOptions::default(),
            batch: CutBatch::FullOrbit,
            incremental: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Complete,
    LimitReached,
}

/// One equivalence class of complements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassInfo {
    /// Canonical representative under the enumeration mode.
    pub representative: Rhythm,
    /// Anchored members of the orbit, i.e. cut rows added for it.
    pub orbit_size: usize,
    /// Translation classes of complements of `A` inside this class.
    pub translation_classes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilingEnumeration {
    pub inner: Rhythm,
    pub mode: EquivalenceMode,
    /// Complements in discovery order, each anchored at 0.
    pub solutions: Vec<Rhythm>,
    /// Sorted by representative.
    pub classes: Vec<ClassInfo>,
    /// Wall-clock time of every solve, the final infeasible one included.
    pub iteration_times: Vec<Duration>,
    pub status: Status,
    pub initial_rows: usize,
    /// Cut rows appended after each solution.
    pub cuts_per_iteration: Vec<usize>,
    pub stats: SearchStats,
}

impl TilingEnumeration {
    /// Total complements counted up to translation.
    pub fn translation_count(&self) -> usize {
        self.classes.iter().map(|c| c.translation_classes).sum()
    }

    /// Row count of the model after iteration `i` (0-based).
    pub fn rows_after(&self, i: usize) -> usize {
        self.initial_rows + self.cuts_per_iteration[..=i].iter().sum::<usize>()
    }
}

/// Number of translation classes of complements of `a` among the affine images of `b`.
pub fn translation_classes_in_affine_orbit(a: &Rhythm, b: &Rhythm) -> usize {
    let mut reps = BTreeSet::new();
    for u in units(b.period()) {
        let image = b.affine_image(u as i64, 0).expect("units are invertible");
        let rep = image.canonical_representative(EquivalenceMode::Translation);
        if !reps.contains(&rep) && verify_tiling(a, &rep).expect("same period") {
            reps.insert(rep);
        }
    }
    reps.len()
}

/// Enumerates the aperiodic complements of `a` up to `mode`.
pub fn run_csa(a: &Rhythm, mode: EquivalenceMode, limits: Limits) -> Result<TilingEnumeration> {
    run_csa_with(a, mode, limits, CsaOptions::default())
}

pub fn run_csa_with(a: &Rhythm, mode: EquivalenceMode, limits: Limits, opts: CsaOptions) -> Result<TilingEnumeration> {
    let sys = build_master_problem(a, opts.build)?;
    let deadline = limits.max_time.map(|d| Instant::now() + d);
    let mut driver = Driver::new(&sys, opts);

    let mut out = TilingEnumeration {
        inner: a.clone(),
        mode,
        solutions: Vec::new(),
        classes: Vec::new(),
        iteration_times: Vec::new(),
        status: Status::Complete,
        initial_rows: sys.rows.len(),
        cuts_per_iteration: Vec::new(),
        stats: SearchStats::default(),
    };
    let mut seen = BTreeSet::new();
    loop {
        let started = Instant::now();
        let outcome = driver.next(deadline);
        out.iteration_times.push(started.elapsed());
        match outcome {
            Outcome::Sat(assignment) => {
                let violated = sys.violated_rows(&assignment.values);
                assert!(violated.is_empty(), "solver returned a point violating rows {violated:?}");
                let b = sys.outer_rhythm(&assignment.values)?;
                let cuts = match opts.batch {
                    CutBatch::FullOrbit => cuts_for_solution(&b, mode)?,
                    CutBatch::Single => vec![orbit_cut(&b, b.len())?],
                };
                let representative = b.canonical_representative(mode);
                if seen.insert(representative.clone()) {
                    let translation_classes = match mode {
                        EquivalenceMode::Translation => 1,
                        EquivalenceMode::Affine => translation_classes_in_affine_orbit(a, &b),
                    };
                    let orbit_size = b.orbit_index_sets(mode)?.len();
                    out.classes.push(ClassInfo { representative, orbit_size, translation_classes });
                } else {
                    debug_assert_eq!(opts.batch, CutBatch::Single, "orbit cuts let a class repeat");
                }
                out.cuts_per_iteration.push(cuts.len());
                driver.add_cuts(cuts)?;
                out.solutions.push(b);
                if limits.max_solutions.is_some_and(|m| out.solutions.len() >= m) {
                    out.status = Status::LimitReached;
                    break;
                }
            }
            Outcome::Unsat => break,
            Outcome::Unknown => {
                out.status = Status::LimitReached;
                break;
            }
        }
    }
    out.stats = driver.stats;
    out.classes.sort_by(|x, y| x.representative.cmp(&y.representative));
    Ok(out)
}

/// Either one live solver, or a rebuild per iteration.
struct Driver<'a> {
    sys: &'a ConstraintSystem,
    opts: CsaOptions,
    live: Solver,
    cuts: Vec<LinearRow>,
    stats: SearchStats,
}

impl<'a> Driver<'a> {
    fn new(sys: &'a ConstraintSystem, opts: CsaOptions) -> Self {
        Driver { sys, opts, live: Solver::new(sys, opts.solver), cuts: Vec::new(), stats: SearchStats::default() }
    }

    fn next(&mut self, deadline: Option<Instant>) -> Outcome {
        if self.opts.incremental {
            let before = self.live.stats();
            let out = self.live.next_solution(deadline);
            let after = self.live.stats();
            self.stats.decisions += after.decisions - before.decisions;
            self.stats.propagations += after.propagations - before.propagations;
            self.stats.conflicts += after.conflicts - before.conflicts;
            self.stats.elapsed += after.elapsed - before.elapsed;
            out
        } else {
            let sys = self.sys.with_rows(&self.cuts).expect("cuts reference b variables");
            let mut fresh = Solver::new(&sys, self.opts.solver);
            let out = fresh.next_solution(deadline);
            self.stats.accumulate(&fresh.stats());
            out
        }
    }

    fn add_cuts(&mut self, cuts: Vec<LinearRow>) -> Result<()> {
        if self.opts.incremental {
            for c in &cuts {
                self.live.add_row(c)?;
            }
        } else {
            self.sys.with_rows(&cuts)?;
            self.cuts.extend(cuts);
        }
        Ok(())
    }
}

/// Result of a single Master Problem solve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "answer", content = "witness", rename_all = "lowercase")]
pub enum Existence {
    Yes(Rhythm),
    No,
    Unknown,
}

/// Does `a` have an aperiodic complement? One solve, no cuts.
pub fn exists_aperiodic_complement(a: &Rhythm, limits: Limits) -> Result<(Existence, SearchStats)> {
    exists_aperiodic_complement_with(a, limits, CsaOptions::default())
}

pub fn exists_aperiodic_complement_with(
    a: &Rhythm,
    limits: Limits,
    opts: CsaOptions,
) -> Result<(Existence, SearchStats)> {
    let sys = build_master_problem(a, opts.build)?;
    let deadline = limits.max_time.map(|d| Instant::now() + d);
    let mut solver = Solver::new(&sys, opts.solver);
    let answer = match solver.next_solution(deadline) {
        Outcome::Sat(assignment) => {
            assert!(sys.violated_rows(&assignment.values).is_empty());
            Existence::Yes(sys.outer_rhythm(&assignment.values)?)
        }
        Outcome::Unsat => Existence::No,
        Outcome::Unknown => Existence::Unknown,
    };
    Ok((answer, solver.stats()))
}
