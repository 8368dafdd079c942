//! Depth-first 0/1 feasibility search with integer bound propagation.
//!
//! Every row keeps the minimum and maximum its left side can still reach
//! over the unassigned variables. A row is in conflict when its bounds rule
//! out the relation; a variable is fixed when flipping it would push the row
//! past its slack. Branching takes the lowest-id unassigned primary variable
//! (`b` in a Master Problem), then anything left, trying 1 before 0, and
//! backtracks chronologically.
//!
//! With that branching order the first solution found is the
//! lexicographically greatest `b` vector, which is what lets the enumeration
//! resume the search after adding blocking rows instead of restarting: every
//! vector visited before the last solution was already infeasible.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConstraintSystem, LinearRow, Relation, VarId};

/// Total 0/1 valuation of a system's variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub values: Vec<bool>,
}

impl Assignment {
    pub fn value(&self, v: VarId) -> bool {
        self.values[v.0]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    #[serde(with = "secs")]
    pub elapsed: Duration,
}

impl SearchStats {
    pub fn accumulate(&mut self, other: &SearchStats) {
        self.decisions += other.decisions;
        self.propagations += other.propagations;
        self.conflicts += other.conflicts;
        self.elapsed += other.elapsed;
    }
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Try value 1 before 0 on branching variables.
    pub one_first: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { one_first: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Sat(Assignment),
    Unsat,
    /// The deadline passed before the search settled.
    Unknown,
}

const UNASSIGNED: i8 = -1;

#[derive(Debug, Clone)]
struct Row {
    terms: Vec<(i64, u32)>,
    relation: Relation,
    rhs: i64,
    min: i64,
    max: i64,
    max_abs: i64,
}

#[derive(Debug, Clone, Copy)]
struct Decision {
    var: u32,
    value: bool,
    flipped: bool,
    trail_start: usize,
}

/// Incremental search state over one constraint system.
#[derive(Debug, Clone)]
pub struct Solver {
    values: Vec<i8>,
    rows: Vec<Row>,
    occurrences: Vec<Vec<(u32, i64)>>,
    /// Primary variables first, then the rest, each in id order.
    branch_order: Vec<u32>,
    position: Vec<u32>,
    trail: Vec<u32>,
    queue_head: usize,
    decisions: Vec<Decision>,
    /// Rows added since the last search call, not yet checked.
    fresh_rows: Vec<usize>,
    /// The current full assignment was returned as a solution.
    at_solution: bool,
    /// No decisions were taken and the root is infeasible.
    exhausted: bool,
    started: bool,
    options: SolverOptions,
    stats: SearchStats,
}

impl Solver {
    pub fn new(sys: &ConstraintSystem, options: SolverOptions) -> Self {
        let n = sys.num_variables();
        let mut branch_order: Vec<u32> =
            sys.variables.iter().filter(|v| v.is_primary()).map(|v| v.id.0 as u32).collect();
        branch_order.extend(sys.variables.iter().filter(|v| !v.is_primary()).map(|v| v.id.0 as u32));
        let mut position = vec![0u32; n];
        for (k, &v) in branch_order.iter().enumerate() {
            position[v as usize] = k as u32;
        }
        let mut solver = Solver {
            values: vec![UNASSIGNED; n],
            rows: Vec::with_capacity(sys.rows.len()),
            occurrences: vec![Vec::new(); n],
            branch_order,
            position,
            trail: Vec::with_capacity(n),
            queue_head: 0,
            decisions: Vec::new(),
            fresh_rows: Vec::new(),
            at_solution: false,
            exhausted: false,
            started: false,
            options,
            stats: SearchStats::default(),
        };
        for row in &sys.rows {
            solver.attach(row);
        }
        solver
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a row to the live search. The next call to
    /// [`Solver::next_solution`] backtracks until the row is consistent with
    /// the partial assignment.
    pub fn add_row(&mut self, row: &LinearRow) -> Result<()> {
        if let Some((_, v)) = row.terms.iter().find(|(_, v)| v.0 >= self.values.len()) {
            return Err(Error::InvalidCut(format!("unknown variable id {}", v.0)));
        }
        let idx = self.attach(row);
        self.fresh_rows.push(idx);
        Ok(())
    }

    fn attach(&mut self, row: &LinearRow) -> usize {
        let idx = self.rows.len();
        let mut min = 0;
        let mut max = 0;
        let mut max_abs = 0;
        let mut terms = Vec::with_capacity(row.terms.len());
        for &(c, v) in &row.terms {
            let val = self.values[v.0];
            if val == 1 || (val == UNASSIGNED && c < 0) {
                min += c;
            }
            if val == 1 || (val == UNASSIGNED && c > 0) {
                max += c;
            }
            max_abs = max_abs.max(c.abs());
            terms.push((c, v.0 as u32));
            self.occurrences[v.0].push((idx as u32, c));
        }
        self.rows.push(Row { terms, relation: row.relation, rhs: row.rhs, min, max, max_abs });
        idx
    }

    fn assign(&mut self, var: u32, value: bool) {
        let v = var as usize;
        debug_assert_eq!(self.values[v], UNASSIGNED);
        self.values[v] = value as i8;
        self.trail.push(var);
        for &(r, c) in &self.occurrences[v] {
            let row = &mut self.rows[r as usize];
            match (value, c > 0) {
                (true, true) => row.min += c,
                (true, false) => row.max += c,
                (false, true) => row.max -= c,
                (false, false) => row.min -= c,
            }
        }
    }

    fn unassign_to(&mut self, trail_len: usize) {
        while self.trail.len() > trail_len {
            let var = self.trail.pop().unwrap();
            let v = var as usize;
            let value = self.values[v] == 1;
            self.values[v] = UNASSIGNED;
            for &(r, c) in &self.occurrences[v] {
                let row = &mut self.rows[r as usize];
                match (value, c > 0) {
                    (true, true) => row.min -= c,
                    (true, false) => row.max -= c,
                    (false, true) => row.max += c,
                    (false, false) => row.min += c,
                }
            }
        }
        self.queue_head = self.queue_head.min(self.trail.len());
    }

    /// Returns false on conflict. May assign forced variables.
    fn check_row(&mut self, idx: usize) -> bool {
        let (relation, rhs, min, max, max_abs) = {
            let r = &self.rows[idx];
            (r.relation, r.rhs, r.min, r.max, r.max_abs)
        };
        let upper = matches!(relation, Relation::Le | Relation::Eq);
        let lower = matches!(relation, Relation::Ge | Relation::Eq);
        if (upper && min > rhs) || (lower && max < rhs) {
            return false;
        }
        let up_slack = if upper { rhs - min } else { i64::MAX };
        let low_slack = if lower { max - rhs } else { i64::MAX };
        if up_slack >= max_abs && low_slack >= max_abs {
            return true;
        }
        for k in 0..self.rows[idx].terms.len() {
            let (c, v) = self.rows[idx].terms[k];
            if self.values[v as usize] != UNASSIGNED {
                continue;
            }
            let a = c.abs();
            // setting v against the bound would overshoot the remaining slack
            let forced = if a > up_slack {
                Some(c < 0)
            } else if a > low_slack {
                Some(c > 0)
            } else {
                None
            };
            if let Some(value) = forced {
                self.stats.propagations += 1;
                self.assign(v, value);
            }
        }
        // an Eq row may now be violated on the other side; recheck bounds
        let r = &self.rows[idx];
        !((upper && r.min > rhs) || (lower && r.max < rhs))
    }

    fn propagate(&mut self) -> bool {
        while self.queue_head < self.trail.len() {
            let v = self.trail[self.queue_head] as usize;
            self.queue_head += 1;
            for k in 0..self.occurrences[v].len() {
                let r = self.occurrences[v][k].0 as usize;
                if !self.check_row(r) {
                    return false;
                }
            }
        }
        true
    }

    fn root(&mut self) -> bool {
        for idx in 0..self.rows.len() {
            if !self.check_row(idx) {
                return false;
            }
        }
        self.propagate()
    }

    fn pick_branch(&self) -> Option<u32> {
        let start = self.decisions.last().map_or(0, |d| self.position[d.var as usize] as usize);
        self.branch_order[start..].iter().copied().find(|&v| self.values[v as usize] == UNASSIGNED)
    }

    /// Undo to the deepest untried alternative and take it.
    fn backtrack(&mut self) -> bool {
        while let Some(d) = self.decisions.pop() {
            self.unassign_to(d.trail_start);
            if !d.flipped {
                self.decisions.push(Decision { flipped: true, value: !d.value, ..d });
                self.assign(d.var, !d.value);
                return true;
            }
        }
        false
    }

    /// Continues the search and returns the next solution in search order.
    ///
    /// After a `Sat` result the returned point is treated as refuted, so
    /// repeated calls enumerate every solution. Rows added in between with
    /// [`Solver::add_row`] only shrink the remaining space.
    pub fn next_solution(&mut self, deadline: Option<Instant>) -> Outcome {
        let start = Instant::now();
        let out = self.search(deadline);
        self.stats.elapsed += start.elapsed();
        out
    }

    fn search(&mut self, deadline: Option<Instant>) -> Outcome {
        if self.exhausted {
            return Outcome::Unsat;
        }
        let mut conflict = if !self.started {
            self.started = true;
            self.fresh_rows.clear();
            !self.root()
        } else {
            self.at_solution
        };
        self.at_solution = false;
        let mut steps: u64 = 0;
        loop {
            if conflict {
                self.stats.conflicts += 1;
                if !self.backtrack() {
                    self.exhausted = true;
                    return Outcome::Unsat;
                }
            }
            if !self.fresh_rows.is_empty() {
                // rows whose variables were all fixed below the current level
                // are never revisited by propagation, so settle them here
                let mut ok = true;
                for k in 0..self.fresh_rows.len() {
                    let r = self.fresh_rows[k];
                    if !self.check_row(r) {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    conflict = true;
                    continue;
                }
                self.fresh_rows.clear();
            }
            if !self.propagate() {
                conflict = true;
                continue;
            }
            conflict = false;
            steps += 1;
            if steps.is_multiple_of(256) && deadline.is_some_and(|d| Instant::now() >= d) {
                return Outcome::Unknown;
            }
            match self.pick_branch() {
                None => {
                    let values = self.values.iter().map(|&v| v == 1).collect();
                    self.at_solution = true;
                    return Outcome::Sat(Assignment { values });
                }
                Some(var) => {
                    self.stats.decisions += 1;
                    let value = self.options.one_first;
                    self.decisions.push(Decision { var, value, flipped: false, trail_start: self.trail.len() });
                    self.assign(var, value);
                }
            }
        }
    }
}

/// First solution in search order, if any.
pub fn solve(sys: &ConstraintSystem) -> (Option<Assignment>, SearchStats) {
    solve_with(sys, SolverOptions::default())
}

pub fn solve_with(sys: &ConstraintSystem, options: SolverOptions) -> (Option<Assignment>, SearchStats) {
    let mut solver = Solver::new(sys, options);
    match solver.next_solution(None) {
        Outcome::Sat(a) => (Some(a), solver.stats()),
        _ => (None, solver.stats()),
    }
}

/// [`solve`] on `sys` with `cuts` appended, rebuilt from scratch.
pub fn solve_with_cuts(sys: &ConstraintSystem, cuts: &[LinearRow]) -> Result<(Option<Assignment>, SearchStats)> {
    let augmented = sys.with_rows(cuts)?;
    Ok(solve(&augmented))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_master_problem, orbit_cut, BuildOptions, RowTag};
    use crate::rhythm::Rhythm;
    use proptest::prelude::*;

    fn rh(n: usize, xs: &[i64]) -> Rhythm {
        Rhythm::new(n, xs.iter().copied()).unwrap()
    }

    fn b_vector(sys: &ConstraintSystem, a: &Assignment) -> Vec<bool> {
        a.values[..sys.n].to_vec()
    }

    #[test]
    fn z4_without_aperiodicity() {
        let a = rh(4, &[0, 2]);
        let sys = build_master_problem(&a, BuildOptions { aperiodicity: false, ..Default::default() }).unwrap();
        let (sol, stats) = solve(&sys);
        let sol = sol.unwrap();
        assert_eq!(b_vector(&sys, &sol), vec![true, true, false, false]);
        assert!(sys.violated_rows(&sol.values).is_empty());
        assert!(stats.decisions >= 1);

        let cut = orbit_cut(&rh(4, &[0, 1]), 2).unwrap();
        let (sol, _) = solve_with_cuts(&sys, std::slice::from_ref(&cut)).unwrap();
        assert_eq!(b_vector(&sys, &sol.unwrap()), vec![true, false, false, true]);

        let cut2 = orbit_cut(&rh(4, &[0, 3]), 2).unwrap();
        let (sol, _) = solve_with_cuts(&sys, &[cut, cut2]).unwrap();
        assert!(sol.is_none());
    }

    #[test]
    fn good_order_is_infeasible() {
        // aperiodic inner rhythms of Z_12 have only periodic complements
        for a in [vec![0i64, 1, 5], vec![0, 1, 3, 7], vec![0, 4, 5]] {
            let a = rh(12, &a);
            assert!(a.is_aperiodic());
            let sys = build_master_problem(&a, BuildOptions::default()).unwrap();
            assert!(solve(&sys).0.is_none(), "{a}");
        }
    }

    #[test]
    fn z72_finds_an_aperiodic_complement() {
        let a = rh(72, &[0, 8, 16, 18, 26, 34]);
        let sys = build_master_problem(&a, BuildOptions::default()).unwrap();
        let (sol, _) = solve(&sys);
        let sol = sol.unwrap();
        assert!(sys.violated_rows(&sol.values).is_empty());
        let b = sys.outer_rhythm(&sol.values).unwrap();
        assert_eq!(b.len(), 12);
        assert!(b.is_aperiodic());
        let prod = crate::polynomial::product_mod_cycle(
            &crate::polynomial::char_poly(&a),
            &crate::polynomial::char_poly(&b),
            72,
        )
        .unwrap();
        assert!(prod.iter().all(|c| *c == 1.into()));
    }

    #[test]
    fn deterministic() {
        let a = rh(72, &[0, 8, 16, 18, 26, 34]);
        let sys = build_master_problem(&a, BuildOptions::default()).unwrap();
        let (s1, st1) = solve(&sys);
        let (s2, st2) = solve(&sys);
        assert_eq!(s1, s2);
        assert_eq!(st1.decisions, st2.decisions);
        assert_eq!(st1.propagations, st2.propagations);
    }

    #[test]
    fn unknown_variable_in_cut() {
        let sys = build_master_problem(&rh(4, &[0, 2]), BuildOptions::default()).unwrap();
        let bad = LinearRow::new(vec![(1, VarId(99))], Relation::Le, 0, RowTag::Cut);
        assert!(matches!(solve_with_cuts(&sys, std::slice::from_ref(&bad)), Err(Error::InvalidCut(_))));
        let mut s = Solver::new(&sys, SolverOptions::default());
        assert!(s.add_row(&bad).is_err());
    }

    #[test]
    fn deadline_in_the_past_gives_unknown_or_answer() {
        let a = rh(72, &[0, 8, 16, 18, 26, 34]);
        let sys = build_master_problem(&a, BuildOptions::default()).unwrap();
        let mut s = Solver::new(&sys, SolverOptions::default());
        let out = s.next_solution(Some(Instant::now()));
        assert!(matches!(out, Outcome::Unknown | Outcome::Sat(_)));
    }

    /// Every solution of `sys`, by enumerating all 2^k vectors.
    fn brute_force(sys: &ConstraintSystem) -> Vec<Vec<bool>> {
        let k = sys.num_variables();
        assert!(k <= 20);
        let mut out = Vec::new();
        for mask in 0u32..(1 << k) {
            let v: Vec<bool> = (0..k).map(|i| mask >> i & 1 == 1).collect();
            if sys.violated_rows(&v).is_empty() {
                out.push(v);
            }
        }
        out.sort();
        out
    }

    fn enumerate(sys: &ConstraintSystem) -> Vec<Vec<bool>> {
        let mut s = Solver::new(sys, SolverOptions::default());
        let mut out = Vec::new();
        while let Outcome::Sat(a) = s.next_solution(None) {
            assert!(sys.violated_rows(&a.values).is_empty());
            out.push(a.values);
        }
        out
    }

    fn arb_system() -> impl Strategy<Value = ConstraintSystem> {
        (1usize..=10).prop_flat_map(|k| {
            let term = (-3i64..=3, 0..k);
            let row = (prop::collection::vec(term, 1..=5), 0u8..3, -4i64..=6);
            prop::collection::vec(row, 0..=6).prop_map(move |rows| {
                let mut sys = ConstraintSystem::with_free_variables(k);
                for (terms, rel, rhs) in rows {
                    let relation = [Relation::Le, Relation::Ge, Relation::Eq][rel as usize];
                    let terms = terms.into_iter().map(|(c, v)| (c, VarId(v))).collect();
                    sys.push_row(LinearRow::new(terms, relation, rhs, RowTag::Cut)).unwrap();
                }
                sys
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn enumeration_matches_brute_force(sys in arb_system()) {
            let mut found = enumerate(&sys);
            let expected = brute_force(&sys);
            // 1-first lowest-id branching visits vectors in descending lexicographic order
            let mut sorted = found.clone();
            sorted.sort_by(|a, b| b.cmp(a));
            prop_assert_eq!(&found, &sorted);
            found.sort();
            prop_assert_eq!(found, expected);
        }

        #[test]
        fn first_solution_is_lexicographic_max(sys in arb_system()) {
            let expected = brute_force(&sys).into_iter().max();
            prop_assert_eq!(solve(&sys).0.map(|a| a.values), expected);
        }

        #[test]
        fn propagation_is_sound(sys in arb_system()) {
            // every value fixed at the root holds in every solution
            let mut s = Solver::new(&sys, SolverOptions::default());
            s.started = true;
            let root_ok = s.root();
            let sols = brute_force(&sys);
            if !root_ok {
                prop_assert!(sols.is_empty());
            } else {
                for &v in &s.trail {
                    let val = s.values[v as usize] == 1;
                    prop_assert!(sols.iter().all(|sol| sol[v as usize] == val));
                }
            }
        }

        #[test]
        fn incremental_rows_match_rebuild(sys in arb_system(), extra in prop::collection::vec((prop::collection::vec((-2i64..=2, 0usize..10), 1..=4), -1i64..=3), 1..=3)) {
            let k = sys.num_variables();
            let extra: Vec<LinearRow> = extra.into_iter().map(|(terms, rhs)| {
                let terms = terms.into_iter().map(|(c, v)| (c, VarId(v % k))).collect();
                LinearRow::new(terms, Relation::Le, rhs, RowTag::Cut)
            }).collect();
            let mut s = Solver::new(&sys, SolverOptions::default());
            if let Outcome::Sat(first) = s.next_solution(None) {
                // the enumeration always blocks the point it just found
                let ones = first.values.iter().filter(|&&x| x).count() as i64;
                let block = first.values.iter().enumerate()
                    .map(|(i, &x)| (if x { 1 } else { -1 }, VarId(i))).collect();
                let mut extra = extra;
                extra.push(LinearRow::new(block, Relation::Le, ones - 1, RowTag::Cut));
                for row in &extra {
                    s.add_row(row).unwrap();
                }
                let resumed = match s.next_solution(None) { Outcome::Sat(a) => Some(a), _ => None };
                let (scratch, _) = solve_with_cuts(&sys, &extra).unwrap();
                prop_assert_eq!(resumed, scratch);
            }
        }
    }
}
