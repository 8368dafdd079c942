//! The binary linear Master Problem for aperiodic tiling complements.
//!
//! Given an inner rhythm `A ⊂ Z_n` containing 0, the unknowns are
//! `b_0..b_{n-1}` (the indicator of `B`), `r_0..r_{2n-2}` (the coefficients of
//! `p_A·p_B`) and one family of auxiliary binaries `u{j}_i` per prime `p_j`
//! dividing `n_B`. Rows:
//!
//! * `c1`, `c2`: `r` is the product `p_A·p_B`, low and wrapped halves;
//! * `c3`: `r_i + r_{i+n} = 1`, i.e. `p_A·p_B ≡ Δ_n mod x^n − 1`;
//! * `c5`–`c7`: `B` is not `n/p_j`-periodic;
//! * `c4`: optional single-row stand-in for one `c5`–`c7` family;
//! * `anchor`: `b_0 = 1`; `cardinality`: `Σ b_i = n_B`;
//! * `cut`: blocking rows added by the enumeration.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rhythm::{maximal_divisors, EquivalenceMode, Rhythm};

/// Index of a variable inside its [`ConstraintSystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    /// `b_i`: indicator of the outer rhythm.
    B { i: usize },
    /// `r_i`: coefficient of `x^i` in `p_A·p_B`.
    R { i: usize },
    /// `U_i^(j)`: residue class `i` mod `m_j` is full in `B`.
    U { j: usize, i: usize },
    /// Plain binary, used by hand-built systems.
    Free { i: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub id: VarId,
    pub kind: VarKind,
}

impl Variable {
    /// LP-format name.
    pub fn name(&self) -> String {
        match self.kind {
            VarKind::B { i } => format!("b{i}"),
            VarKind::R { i } => format!("r{i}"),
            VarKind::U { j, i } => format!("u{j}_{i}"),
            VarKind::Free { i } => format!("x{i}"),
        }
    }

    /// Solvers branch on these before anything else.
    pub fn is_primary(&self) -> bool {
        matches!(self.kind, VarKind::B { .. } | VarKind::Free { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Relation::Eq => lhs == rhs,
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        }
    }
}

/// Provenance of a row. The derived order is the LP export order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowTag {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    Anchor,
    Cardinality,
    Cut,
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RowTag::C1 => "c1",
            RowTag::C2 => "c2",
            RowTag::C3 => "c3",
            RowTag::C4 => "c4",
            RowTag::C5 => "c5",
            RowTag::C6 => "c6",
            RowTag::C7 => "c7",
            RowTag::Anchor => "anchor",
            RowTag::Cardinality => "cardinality",
            RowTag::Cut => "cut",
        };
        f.write_str(s)
    }
}

/// `Σ coef·var  (=|<=|>=)  rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearRow {
    pub terms: Vec<(i64, VarId)>,
    pub relation: Relation,
    pub rhs: i64,
    pub tag: RowTag,
}

impl LinearRow {
    /// Drops zero coefficients and merges repeated variables.
    pub fn new(terms: Vec<(i64, VarId)>, relation: Relation, rhs: i64, tag: RowTag) -> Self {
        let mut merged: BTreeMap<VarId, i64> = BTreeMap::new();
        for (c, v) in terms {
            *merged.entry(v).or_default() += c;
        }
        let terms = merged.into_iter().filter(|&(_, c)| c != 0).map(|(v, c)| (c, v)).collect();
        LinearRow { terms, relation, rhs, tag }
    }

    pub fn lhs(&self, values: &[bool]) -> i64 {
        self.terms.iter().filter(|(_, v)| values[v.0]).map(|(c, _)| c).sum()
    }

    pub fn is_satisfied(&self, values: &[bool]) -> bool {
        self.relation.holds(self.lhs(values), self.rhs)
    }
}

/// Options for [`build_master_problem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Add `Σ b_i = n_B`.
    pub include_cardinality: bool,
    /// Replace the largest auxiliary family by the single `c4` row.
    /// Combined with the anchor `b_0 = 1` this can drop valid complements,
    /// so it is off by default.
    pub replace_first_family: bool,
    /// Add the `c4`–`c7` rows. Off only for diagnostics.
    pub aperiodicity: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { include_cardinality: true, replace_first_family: false, aperiodicity: true }
    }
}

/// An auxiliary family `U^(j)` laid out contiguously from `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UFamily {
    /// 1-based index of the prime among the prime factors of `n`.
    pub j: usize,
    pub prime: usize,
    pub modulus: usize,
    pub offset: usize,
}

/// Binary variables plus integer linear rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSystem {
    pub n: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub variables: Vec<Variable>,
    pub rows: Vec<LinearRow>,
    pub families: Vec<UFamily>,
}

/// Counts reported by `vuza export --summary` and the JSON outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSummary {
    pub n: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub rows_by_tag: BTreeMap<String, usize>,
    pub variables: usize,
}

impl ConstraintSystem {
    /// A system of `count` plain binaries `x0..` and no rows.
    pub fn with_free_variables(count: usize) -> Self {
        let variables = (0..count).map(|i| Variable { id: VarId(i), kind: VarKind::Free { i } }).collect();
        ConstraintSystem { n: 0, n_a: 0, n_b: 0, variables, rows: Vec::new(), families: Vec::new() }
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn b(&self, i: usize) -> VarId {
        debug_assert!(i < self.n);
        VarId(i)
    }

    pub fn r(&self, i: usize) -> VarId {
        debug_assert!(i < 2 * self.n - 1);
        VarId(self.n + i)
    }

    pub fn u(&self, j: usize, i: usize) -> Option<VarId> {
        self.families.iter().find(|f| f.j == j).filter(|f| i < f.modulus).map(|f| VarId(f.offset + i))
    }

    pub fn push_row(&mut self, row: LinearRow) -> Result<()> {
        self.check_row(&row)?;
        self.rows.push(row);
        Ok(())
    }

    pub fn check_row(&self, row: &LinearRow) -> Result<()> {
        match row.terms.iter().find(|(_, v)| v.0 >= self.variables.len()) {
            Some((_, v)) => Err(Error::InvalidCut(format!("unknown variable id {}", v.0))),
            None => Ok(()),
        }
    }

    /// The system with `cuts` appended.
    pub fn with_rows(&self, cuts: &[LinearRow]) -> Result<ConstraintSystem> {
        let mut out = self.clone();
        for c in cuts {
            out.push_row(c.clone())?;
        }
        Ok(out)
    }

    pub fn rows_by_tag(&self) -> BTreeMap<RowTag, usize> {
        let mut m = BTreeMap::new();
        for r in &self.rows {
            *m.entry(r.tag).or_default() += 1;
        }
        m
    }

    pub fn num_u_variables(&self) -> usize {
        self.families.iter().map(|f| f.modulus).sum()
    }

    pub fn summary(&self) -> SystemSummary {
        SystemSummary {
            n: self.n,
            n_a: self.n_a,
            n_b: self.n_b,
            rows_by_tag: self.rows_by_tag().into_iter().map(|(t, c)| (t.to_string(), c)).collect(),
            variables: self.variables.len(),
        }
    }

    /// Indices of the failing rows, by exact integer evaluation.
    pub fn violated_rows(&self, values: &[bool]) -> Vec<usize> {
        assert_eq!(values.len(), self.variables.len());
        (0..self.rows.len()).filter(|&k| !self.rows[k].is_satisfied(values)).collect()
    }

    /// The outer rhythm encoded by the `b` part of an assignment.
    pub fn outer_rhythm(&self, values: &[bool]) -> Result<Rhythm> {
        Rhythm::from_indicator(&values[..self.n])
    }
}

pub fn build_master_problem(a: &Rhythm, opts: BuildOptions) -> Result<ConstraintSystem> {
    if !a.contains(0) {
        return Err(Error::UnanchoredRhythm);
    }
    let n = a.period();
    let n_a = a.len();
    let n_b = a.complement_size()?;
    let in_a = a.indicator();

    let mut variables = Vec::with_capacity(3 * n);
    for i in 0..n {
        variables.push(Variable { id: VarId(variables.len()), kind: VarKind::B { i } });
    }
    for i in 0..2 * n - 1 {
        variables.push(Variable { id: VarId(variables.len()), kind: VarKind::R { i } });
    }
    let b = |i: usize| VarId(i);
    let r = |i: usize| VarId(n + i);

    let mut rows = Vec::new();
    // coefficient of x^i, i < n: Σ_{j ≤ i} a_{i-j} b_j
    for i in 0..n {
        let mut terms: Vec<(i64, VarId)> = (0..=i).filter(|&j| in_a[i - j]).map(|j| (1, b(j))).collect();
        terms.push((-1, r(i)));
        rows.push(LinearRow::new(terms, Relation::Eq, 0, RowTag::C1));
    }
    // coefficient of x^{i+n}: Σ_{j > i} a_{i+n-j} b_j
    for i in 0..n - 1 {
        let mut terms: Vec<(i64, VarId)> = (i + 1..n).filter(|&j| in_a[i + n - j]).map(|j| (1, b(j))).collect();
        terms.push((-1, r(i + n)));
        rows.push(LinearRow::new(terms, Relation::Eq, 0, RowTag::C2));
    }
    for j in 0..n {
        let mut terms = vec![(1, r(j))];
        if j + n < 2 * n - 1 {
            terms.push((1, r(j + n)));
        }
        rows.push(LinearRow::new(terms, Relation::Eq, 1, RowTag::C3));
    }

    let mut families = Vec::new();
    if opts.aperiodicity && n >= 2 {
        let md = maximal_divisors(n as u64)?;
        let dividing: Vec<(usize, usize, usize)> = md
            .primes
            .iter()
            .zip(&md.divisors)
            .enumerate()
            .filter(|(_, (&p, _))| n_b % p as usize == 0)
            .map(|(k, (&p, &m))| (k + 1, p as usize, m as usize))
            .collect();
        let replaced = if opts.replace_first_family { dividing.first().map(|&(j, _, _)| j) } else { None };
        let mut c5 = Vec::new();
        let mut c6 = Vec::new();
        let mut c7 = Vec::new();
        for &(j, p, m) in &dividing {
            if Some(j) == replaced {
                // n_B·m/n − 1 = n_B/p − 1
                let terms = (0..m).map(|i| (1, b(i))).collect();
                rows.push(LinearRow::new(terms, Relation::Le, (n_b / p) as i64 - 1, RowTag::C4));
                continue;
            }
            let offset = variables.len();
            for i in 0..m {
                variables.push(Variable { id: VarId(variables.len()), kind: VarKind::U { j, i } });
            }
            families.push(UFamily { j, prime: p, modulus: m, offset });
            for i in 0..m {
                let mut terms: Vec<(i64, VarId)> = (0..p).map(|k| (1, b(i + k * m))).collect();
                terms.push((-(p as i64), VarId(offset + i)));
                c5.push(LinearRow::new(terms.clone(), Relation::Le, p as i64 - 1, RowTag::C5));
                c6.push(LinearRow::new(terms, Relation::Ge, 0, RowTag::C6));
            }
            let terms = (0..m).map(|i| (1, VarId(offset + i))).collect();
            c7.push(LinearRow::new(terms, Relation::Le, (n_b / p) as i64 - 1, RowTag::C7));
        }
        rows.extend(c5);
        rows.extend(c6);
        rows.extend(c7);
    }

    rows.push(LinearRow::new(vec![(1, b(0))], Relation::Eq, 1, RowTag::Anchor));
    if opts.include_cardinality {
        let terms = (0..n).map(|i| (1, b(i))).collect();
        rows.push(LinearRow::new(terms, Relation::Eq, n_b as i64, RowTag::Cardinality));
    }

    Ok(ConstraintSystem { n, n_a, n_b, variables, rows, families })
}

/// `Σ_{i ∈ index_set} b_i ≤ n_B − 1`.
pub fn orbit_cut(index_set: &Rhythm, n_b: usize) -> Result<LinearRow> {
    if index_set.len() != n_b {
        return Err(Error::InvalidCut(format!("index set has {} elements, expected n_B = {n_b}", index_set.len())));
    }
    if !index_set.contains(0) {
        return Err(Error::InvalidCut("index set does not contain 0".into()));
    }
    let terms = index_set.elements().iter().map(|&i| (1, VarId(i))).collect();
    Ok(LinearRow::new(terms, Relation::Le, n_b as i64 - 1, RowTag::Cut))
}

/// One blocking row per anchored member of the orbit of `b_set`.
pub fn cuts_for_solution(b_set: &Rhythm, mode: EquivalenceMode) -> Result<Vec<LinearRow>> {
    b_set
        .orbit_index_sets(mode)
        .map_err(|_| Error::InvalidCut("solution does not contain 0".into()))?
        .iter()
        .map(|s| orbit_cut(s, b_set.len()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::euler_phi;

    fn rh(n: usize, xs: &[i64]) -> Rhythm {
        Rhythm::new(n, xs.iter().copied()).unwrap()
    }

    #[test]
    fn variable_counts() {
        let sys =
            build_master_problem(&rh(4, &[0, 1]), BuildOptions { replace_first_family: true, ..Default::default() })
                .unwrap();
        assert_eq!(sys.num_u_variables(), 0);
        assert_eq!(sys.num_variables(), 3 * 4 - 1);

        let a = rh(72, &[0, 8, 16, 18, 26, 34]);
        let sys = build_master_problem(&a, BuildOptions { replace_first_family: true, ..Default::default() }).unwrap();
        assert_eq!(sys.num_u_variables(), 24);
        assert_eq!(sys.num_variables(), 3 * 72 - 1 + 24);
        // σ_n minus the smallest prime's family
        let sigma: usize = [2usize, 3].iter().skip(1).map(|p| 72 / p).sum();
        assert_eq!(sys.num_u_variables(), sigma);
        let tags = sys.rows_by_tag();
        assert_eq!(tags[&RowTag::C4], 1);
        assert_eq!(tags[&RowTag::C5], 24);
        assert_eq!(tags[&RowTag::C7], 1);

        let full = build_master_problem(&a, BuildOptions::default()).unwrap();
        assert_eq!(full.num_u_variables(), 36 + 24);
        assert!(!full.rows_by_tag().contains_key(&RowTag::C4));
    }

    #[test]
    fn families_only_for_primes_dividing_n_b() {
        // n_B = 12/4 = 3: only p = 3 contributes
        let sys = build_master_problem(&rh(12, &[0, 1, 2, 3]), BuildOptions::default()).unwrap();
        assert_eq!(sys.families.len(), 1);
        assert_eq!((sys.families[0].j, sys.families[0].prime, sys.families[0].modulus), (2, 3, 4));
        // n_B = 1: nothing to exclude
        let sys = build_master_problem(&rh(4, &[0, 1, 2, 3]), BuildOptions::default()).unwrap();
        assert!(sys.families.is_empty());
    }

    #[test]
    fn row_shapes() {
        let sys = build_master_problem(&rh(4, &[0, 2]), BuildOptions::default()).unwrap();
        let tags = sys.rows_by_tag();
        assert_eq!(tags[&RowTag::C1], 4);
        assert_eq!(tags[&RowTag::C2], 3);
        assert_eq!(tags[&RowTag::C3], 4);
        assert_eq!(tags[&RowTag::Anchor], 1);
        assert_eq!(tags[&RowTag::Cardinality], 1);
        let c3_last = sys.rows.iter().rfind(|r| r.tag == RowTag::C3).unwrap();
        assert_eq!(c3_last.terms, vec![(1, sys.r(3))]);
    }

    #[test]
    fn builder_errors() {
        assert_eq!(build_master_problem(&rh(4, &[1, 2]), BuildOptions::default()), Err(Error::UnanchoredRhythm));
        assert_eq!(
            build_master_problem(&rh(6, &[0, 1, 2, 3]), BuildOptions::default()),
            Err(Error::NonDivisibleCardinality { cardinality: 4, period: 6 })
        );
    }

    /// Brute force over all 0/1 vectors of small `b`: with `r` and `u` set to
    /// their forced values the system holds exactly for anchored complements,
    /// and aperiodic ones when the `c5`–`c7` rows are present.
    #[test]
    fn feasible_points_are_anchored_aperiodic_complements() {
        for (n, a) in [
            (8usize, vec![0i64, 1]),
            (12, vec![0, 4, 8]),
            (12, vec![0, 1, 2]),
            (12, vec![0, 3]),
            (16, vec![0, 2, 8, 10]),
        ] {
            let a = rh(n, &a);
            for aperiodicity in [false, true] {
                let sys = build_master_problem(&a, BuildOptions { aperiodicity, ..Default::default() }).unwrap();
                for mask in 0u32..(1 << n) {
                    let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
                    let values = completed(&sys, &a, &bits);
                    let feasible = sys.violated_rows(&values).is_empty();
                    let expected = bits[0]
                        && Rhythm::from_indicator(&bits)
                            .map(|b| tiles(&a, &b) && (!aperiodicity || b.is_aperiodic()))
                            .unwrap_or(false);
                    assert_eq!(feasible, expected, "{a} mask {mask:b} aper {aperiodicity}");
                }
            }
        }
    }

    /// `r` from the product, `u` from full residue classes.
    fn completed(sys: &ConstraintSystem, a: &Rhythm, bits: &[bool]) -> Vec<bool> {
        let n = sys.n;
        let mut values = vec![false; sys.num_variables()];
        values[..n].copy_from_slice(bits);
        let mut prod = vec![0u32; 2 * n - 1];
        for &x in a.elements() {
            for (y, &on) in bits.iter().enumerate() {
                if on {
                    prod[x + y] += 1;
                }
            }
        }
        for (i, &c) in prod.iter().enumerate() {
            // a coefficient of 2+ cannot be encoded; leave r at 1 so c1/c2 fail
            values[n + i] = c >= 1;
        }
        for f in &sys.families {
            for i in 0..f.modulus {
                values[f.offset + i] = (0..f.prime).all(|k| bits[i + k * f.modulus]);
            }
        }
        values
    }

    fn tiles(a: &Rhythm, b: &Rhythm) -> bool {
        let n = a.period();
        let mut hit = vec![0; n];
        for &x in a.elements() {
            for &y in b.elements() {
                hit[(x + y) % n] += 1;
            }
        }
        hit.iter().all(|&h| h == 1)
    }

    #[test]
    fn u_rows_force_full_class_indicator() {
        // c5 and c6 together: U = 1 iff every b in the residue class is 1
        for p in [2usize, 3, 5] {
            let mut sys = ConstraintSystem::with_free_variables(p + 1);
            let u = VarId(p);
            let mut terms: Vec<(i64, VarId)> = (0..p).map(|k| (1, VarId(k))).collect();
            terms.push((-(p as i64), u));
            sys.push_row(LinearRow::new(terms.clone(), Relation::Le, p as i64 - 1, RowTag::C5)).unwrap();
            sys.push_row(LinearRow::new(terms, Relation::Ge, 0, RowTag::C6)).unwrap();
            for mask in 0u32..(1 << (p + 1)) {
                let v: Vec<bool> = (0..=p).map(|i| mask >> i & 1 == 1).collect();
                let full = v[..p].iter().all(|&x| x);
                assert_eq!(sys.violated_rows(&v).is_empty(), v[p] == full);
            }
        }
    }

    #[test]
    fn orbit_cut_examples() {
        let row = orbit_cut(&rh(4, &[0, 1]), 2).unwrap();
        assert_eq!(row.terms, vec![(1, VarId(0)), (1, VarId(1))]);
        assert_eq!((row.relation, row.rhs, row.tag), (Relation::Le, 1, RowTag::Cut));
        let row = orbit_cut(&rh(4, &[0, 2]), 2).unwrap();
        assert_eq!(row.terms, vec![(1, VarId(0)), (1, VarId(2))]);
        assert!(orbit_cut(&rh(4, &[0, 2]), 3).is_err());
        assert!(orbit_cut(&rh(4, &[1, 2]), 2).is_err());
    }

    #[test]
    fn cuts_per_solution() {
        assert_eq!(cuts_for_solution(&rh(4, &[0, 1]), EquivalenceMode::Translation).unwrap().len(), 2);
        assert_eq!(cuts_for_solution(&rh(4, &[0, 1]), EquivalenceMode::Affine).unwrap().len(), 2);
        let b = rh(72, &[0, 1, 5, 6, 12, 25, 29, 36, 42, 48, 49, 53]);
        assert_eq!(cuts_for_solution(&b, EquivalenceMode::Translation).unwrap().len(), 12);
        let affine = cuts_for_solution(&b, EquivalenceMode::Affine).unwrap();
        assert!(affine.len() <= 12 * euler_phi(72) as usize);
        assert!(affine.iter().all(|c| c.terms.len() == 12 && c.rhs == 11));
    }

    #[test]
    fn unknown_variable_in_cut_is_rejected() {
        let sys = build_master_problem(&rh(4, &[0, 2]), BuildOptions::default()).unwrap();
        let bad = LinearRow::new(vec![(1, VarId(10_000))], Relation::Le, 0, RowTag::Cut);
        assert!(matches!(sys.with_rows(&[bad]), Err(Error::InvalidCut(_))));
    }
}
