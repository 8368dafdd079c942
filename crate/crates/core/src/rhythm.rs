//! Rhythms as subsets of the cyclic group Z_n.
//!
//! A [`Rhythm`] stores its elements reduced modulo the period and sorted, so
//! set equality is plain sequence equality and ordering is lexicographic on
//! the element sequence. Periodicity, affine maps and the orbit machinery used
//! to build blocking cuts all live here.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which symmetry group identifies two complements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquivalenceMode {
    /// `B ~ B + t`.
    Translation,
    /// `B ~ a·B + t` with `gcd(a, n) = 1`.
    Affine,
}

impl fmt::Display for EquivalenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivalenceMode::Translation => f.write_str("translation"),
            EquivalenceMode::Affine => f.write_str("affine"),
        }
    }
}

impl FromStr for EquivalenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "translation" => Ok(EquivalenceMode::Translation),
            "affine" => Ok(EquivalenceMode::Affine),
            other => Err(Error::Parse(format!("unknown equivalence mode `{other}`"))),
        }
    }
}

/// A non-empty subset of Z_n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rhythm {
    period: usize,
    elements: Vec<usize>,
}

impl Rhythm {
    /// Builds a rhythm from arbitrary integers, reducing them modulo `period`.
    ///
    /// Two inputs that collide after reduction are rejected rather than merged.
    pub fn new<I>(period: usize, elements: I) -> Result<Self>
    where
        I: IntoIterator<Item = i64>,
    {
        if period == 0 {
            return Err(Error::InvalidPeriod(0));
        }
        let n = period as i64;
        let mut set = BTreeSet::new();
        for x in elements {
            let reduced = x.rem_euclid(n) as usize;
            if !set.insert(reduced) {
                return Err(Error::InvalidRhythm(format!("element {x} repeats residue {reduced} modulo {period}")));
            }
        }
        if set.is_empty() {
            return Err(Error::InvalidRhythm("a rhythm needs at least one element".into()));
        }
        Ok(Rhythm { period, elements: set.into_iter().collect() })
    }

    /// Builds a rhythm from already reduced residues, deduplicating silently.
    pub(crate) fn from_residues(period: usize, mut elements: Vec<usize>) -> Self {
        debug_assert!(elements.iter().all(|&x| x < period));
        elements.sort_unstable();
        elements.dedup();
        debug_assert!(!elements.is_empty());
        Rhythm { period, elements }
    }

    /// Rhythm whose elements are the indices of the ones in `indicator`.
    pub fn from_indicator(indicator: &[bool]) -> Result<Self> {
        let elements: Vec<usize> = indicator.iter().enumerate().filter(|(_, &on)| on).map(|(i, _)| i).collect();
        if indicator.is_empty() {
            return Err(Error::InvalidPeriod(0));
        }
        if elements.is_empty() {
            return Err(Error::InvalidRhythm("indicator has no ones".into()));
        }
        Ok(Rhythm { period: indicator.len(), elements })
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// Always false; rhythms are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn max_element(&self) -> usize {
        *self.elements.last().expect("rhythms are non-empty")
    }

    /// 0/1 vector of length `period`.
    pub fn indicator(&self) -> Vec<bool> {
        let mut v = vec![false; self.period];
        for &x in &self.elements {
            v[x] = true;
        }
        v
    }

    /// Translate by `t` (mod n).
    pub fn translate(&self, t: i64) -> Rhythm {
        let n = self.period as i64;
        let shifted = self.elements.iter().map(|&x| (x as i64 + t).rem_euclid(n) as usize).collect();
        Rhythm::from_residues(self.period, shifted)
    }

    /// Checks the inner-rhythm preconditions of a tiling query and returns `n_B = n / |A|`.
    pub fn complement_size(&self) -> Result<usize> {
        if !self.period.is_multiple_of(self.len()) {
            return Err(Error::NonDivisibleCardinality { cardinality: self.len(), period: self.period });
        }
        Ok(self.period / self.len())
    }

    /// True iff `k + r = r` in Z_n.
    pub fn is_periodic_mod(&self, k: usize) -> Result<bool> {
        if k == 0 || k >= self.period {
            return Err(Error::InvalidArgument(format!("shift {k} is outside (0, {})", self.period)));
        }
        Ok(self.is_periodic_unchecked(k))
    }

    fn is_periodic_unchecked(&self, k: usize) -> bool {
        let n = self.period;
        self.elements.iter().all(|&x| self.contains((x + k) % n))
    }

    /// True iff no non-trivial translation fixes the rhythm.
    ///
    /// Only the maximal divisors `n / p` need to be tested: a period `k`
    /// of a subset of Z_n can always be taken to divide `n`, and every proper
    /// divisor of `n` divides one of the maximal ones.
    pub fn is_aperiodic(&self) -> bool {
        if self.period < 2 {
            return true;
        }
        let divisors = maximal_divisors(self.period as u64).expect("period >= 2");
        divisors.divisors.iter().all(|&m| !self.is_periodic_unchecked(m as usize))
    }

    /// `{ (a·x + t) mod n : x ∈ r }`.
    pub fn affine_image(&self, a: i64, t: i64) -> Result<Rhythm> {
        let n = self.period as i64;
        let a = a.rem_euclid(n);
        if gcd(a as u64, n as u64) != 1 {
            return Err(Error::NonInvertibleMultiplier { multiplier: a as u64, period: n as u64 });
        }
        let mapped = self
            .elements
            .iter()
            .map(|&x| ((a as i128 * x as i128 + t as i128).rem_euclid(n as i128)) as usize)
            .collect();
        Ok(Rhythm::from_residues(self.period, mapped))
    }

    /// All distinct sets `a·(r + k)` containing 0, sorted lexicographically.
    ///
    /// Translation mode uses `a = 1` and `k ∈ -r`, giving exactly `|r|` sets
    /// when `r` is aperiodic. Affine mode lets `a` range over the units of Z_n.
    pub fn orbit_index_sets(&self, mode: EquivalenceMode) -> Result<Vec<Rhythm>> {
        if !self.contains(0) {
            return Err(Error::UnanchoredRhythm);
        }
        let multipliers = match mode {
            EquivalenceMode::Translation => vec![1],
            EquivalenceMode::Affine => units(self.period),
        };
        let n = self.period;
        let mut out = BTreeSet::new();
        for &x in &self.elements {
            let shift = n - x;
            for &a in &multipliers {
                let image: Vec<usize> = self.elements.iter().map(|&y| (a * ((y + shift) % n)) % n).collect();
                out.insert(Rhythm::from_residues(n, image));
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Lexicographically least anchored member of the orbit of `r`.
    pub fn canonical_representative(&self, mode: EquivalenceMode) -> Rhythm {
        let anchored = self.translate(-(self.elements[0] as i64));
        anchored
            .orbit_index_sets(mode)
            .expect("translate contains 0")
            .into_iter()
            .next()
            .expect("orbit contains the rhythm itself")
    }
}

impl fmt::Display for Rhythm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.period)?;
        for (i, x) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl FromStr for Rhythm {
    type Err = Error;

    /// Parses `"n: e1,e2,...,ek"`.
    fn from_str(s: &str) -> Result<Self> {
        let (period, body) =
            s.split_once(':').ok_or_else(|| Error::Parse(format!("expected `n: e1,e2,...`, got `{}`", s.trim())))?;
        let period: usize =
            period.trim().parse().map_err(|_| Error::Parse(format!("bad period `{}`", period.trim())))?;
        let elements = parse_element_list(body)?;
        Rhythm::new(period, elements)
    }
}

/// Parses a comma separated list of integers (whitespace tolerant).
pub fn parse_element_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(str::trim)
        .filter(|tok| !tok.is_empty())
        .map(|tok| tok.parse::<i64>().map_err(|_| Error::Parse(format!("bad element `{tok}`"))))
        .collect()
}

/// Prime factors of `n` and the maximal divisors `m_k = n / p_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaximalDivisors {
    /// Distinct primes, ascending.
    pub primes: Vec<u64>,
    /// `n / p_k` in the same order, hence descending.
    pub divisors: Vec<u64>,
}

pub fn maximal_divisors(n: u64) -> Result<MaximalDivisors> {
    if n < 2 {
        return Err(Error::InvalidPeriod(n));
    }
    let primes: Vec<u64> = factorize(n).into_iter().map(|(p, _)| p).collect();
    let divisors = primes.iter().map(|p| n / p).collect();
    Ok(MaximalDivisors { primes, divisors })
}

/// Trial-division factorization, primes ascending with exponents.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Units of Z_n in ascending order.
pub fn units(n: usize) -> Vec<usize> {
    if n == 1 {
        return vec![0];
    }
    (1..n).filter(|&a| gcd(a as u64, n as u64) == 1).collect()
}

/// Divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: usize, xs: &[i64]) -> Rhythm {
        Rhythm::new(n, xs.iter().copied()).unwrap()
    }

    #[test]
    fn maximal_divisor_examples() {
        let m = maximal_divisors(72).unwrap();
        assert_eq!(m.primes, vec![2, 3]);
        assert_eq!(m.divisors, vec![36, 24]);
        let m = maximal_divisors(30).unwrap();
        assert_eq!(m.primes, vec![2, 3, 5]);
        assert_eq!(m.divisors, vec![15, 10, 6]);
        let m = maximal_divisors(7).unwrap();
        assert_eq!((m.primes, m.divisors), (vec![7], vec![1]));
        assert_eq!(maximal_divisors(1), Err(Error::InvalidPeriod(1)));
        assert_eq!(maximal_divisors(0), Err(Error::InvalidPeriod(0)));
    }

    #[test]
    fn periodicity_examples() {
        assert!(r(4, &[0, 2]).is_periodic_mod(2).unwrap());
        assert!(!r(8, &[0, 1, 4]).is_periodic_mod(4).unwrap());
        assert!(r(6, &[0, 3]).is_periodic_mod(3).unwrap());
        assert!(r(6, &[0, 3]).is_periodic_mod(0).is_err());
        assert!(r(6, &[0, 3]).is_periodic_mod(6).is_err());
    }

    #[test]
    fn aperiodicity_examples() {
        assert!(!r(6, &[0, 3]).is_aperiodic());
        assert!(r(6, &[0, 1, 5]).is_aperiodic());
        let a = r(72, &[0, 8, 16, 18, 26, 34]);
        assert!(!a.is_periodic_mod(36).unwrap());
        assert!(!a.is_periodic_mod(24).unwrap());
        assert!(a.is_aperiodic());
    }

    #[test]
    fn affine_examples() {
        assert_eq!(r(4, &[0, 2]).affine_image(1, 1).unwrap(), r(4, &[1, 3]));
        assert_eq!(r(72, &[0, 8, 16, 18, 26, 34]).affine_image(5, 0).unwrap(), r(72, &[0, 8, 18, 26, 40, 58]));
        assert_eq!(r(4, &[0, 1]).affine_image(3, 0).unwrap(), r(4, &[0, 3]));
        assert_eq!(r(4, &[0, 1]).affine_image(2, 0), Err(Error::NonInvertibleMultiplier { multiplier: 2, period: 4 }));
    }

    #[test]
    fn orbit_examples() {
        assert_eq!(r(4, &[0, 2]).orbit_index_sets(EquivalenceMode::Translation).unwrap(), vec![r(4, &[0, 2])]);
        assert_eq!(
            r(4, &[0, 1]).orbit_index_sets(EquivalenceMode::Translation).unwrap(),
            vec![r(4, &[0, 1]), r(4, &[0, 3])]
        );
        assert_eq!(
            r(4, &[0, 1]).orbit_index_sets(EquivalenceMode::Affine).unwrap(),
            vec![r(4, &[0, 1]), r(4, &[0, 3])]
        );
        assert_eq!(r(4, &[1, 3]).orbit_index_sets(EquivalenceMode::Affine), Err(Error::UnanchoredRhythm));
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(r(4, &[1, 3]).canonical_representative(EquivalenceMode::Translation), r(4, &[0, 2]));
        assert_eq!(r(4, &[0, 3]).canonical_representative(EquivalenceMode::Translation), r(4, &[0, 1]));
        let a = r(72, &[0, 8, 16, 18, 26, 34]);
        let b = r(72, &[0, 8, 18, 26, 40, 58]);
        assert_eq!(
            a.canonical_representative(EquivalenceMode::Affine),
            b.canonical_representative(EquivalenceMode::Affine)
        );
    }

    #[test]
    fn rejects_bad_rhythms() {
        assert!(Rhythm::new(4, [0, 4]).is_err());
        assert!(Rhythm::new(4, std::iter::empty()).is_err());
        assert!(Rhythm::new(0, [0]).is_err());
        assert_eq!(Rhythm::new(4, [-1, 5]).unwrap(), r(4, &[1, 3]));
    }

    #[test]
    fn text_format() {
        let a: Rhythm = "72: 0,8,16,18,26,34".parse().unwrap();
        assert_eq!(a, r(72, &[0, 8, 16, 18, 26, 34]));
        assert_eq!(a.to_string(), "72: 0,8,16,18,26,34");
        assert!("72 0,8".parse::<Rhythm>().is_err());
        assert!("x: 0".parse::<Rhythm>().is_err());
        assert!("4: 0,a".parse::<Rhythm>().is_err());
    }

    /// Oracle: naive orbit, every translate and unit, no dedup shortcuts.
    fn brute_canonical(x: &Rhythm, mode: EquivalenceMode) -> Rhythm {
        let n = x.period();
        let mults: Vec<usize> = match mode {
            EquivalenceMode::Translation => vec![1],
            EquivalenceMode::Affine => (1..n.max(2)).filter(|&a| gcd(a as u64, n as u64) == 1).collect(),
        };
        let mut best: Option<Rhythm> = None;
        for &a in &mults {
            for t in 0..n {
                let img = x.affine_image(a as i64, t as i64).unwrap();
                if img.contains(0) && best.as_ref().is_none_or(|b| img < *b) {
                    best = Some(img);
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn aperiodicity_matches_all_shifts() {
        for n in 2..=100usize {
            // a deterministic family of subsets per n
            for seed in 0..40u64 {
                let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(n as u64);
                let mut elems = vec![0i64];
                for x in 1..n {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    if (state >> 33) % 3 == 0 {
                        elems.push(x as i64);
                    }
                }
                let rh = Rhythm::new(n, elems).unwrap();
                let brute = (1..n).all(|k| !rh.is_periodic_mod(k).unwrap());
                assert_eq!(rh.is_aperiodic(), brute, "{rh}");
            }
            // periodic sets must be caught too
            for d in divisors(n as u64).into_iter().filter(|&d| (d as usize) < n) {
                let rh = Rhythm::new(n, (0..n as i64).step_by(d as usize)).unwrap();
                assert!(!rh.is_aperiodic() || rh.len() == 1);
            }
        }
    }

    #[test]
    fn canonical_constant_on_orbits_exhaustive() {
        for n in [5usize, 8, 9, 12] {
            for mask in 1u32..(1 << n) {
                let elems: Vec<i64> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i as i64).collect();
                let x = Rhythm::new(n, elems).unwrap();
                for mode in [EquivalenceMode::Translation, EquivalenceMode::Affine] {
                    let c = x.canonical_representative(mode);
                    assert_eq!(c, brute_canonical(&x, mode));
                    assert_eq!(c.canonical_representative(mode), c);
                }
            }
        }
    }

    fn arb_rhythm(max_n: usize) -> impl Strategy<Value = Rhythm> {
        (2..=max_n).prop_flat_map(|n| {
            prop::collection::btree_set(0..n, 1..=n)
                .prop_map(move |s| Rhythm::from_residues(n, s.into_iter().collect()))
        })
    }

    proptest! {
        #[test]
        fn periodic_implies_multiples(x in arb_rhythm(60)) {
            let n = x.period();
            for k in 1..n {
                if n % k == 0 && x.is_periodic_mod(k).unwrap() {
                    for kk in (2 * k..n).step_by(k) {
                        if n % kk == 0 {
                            prop_assert!(x.is_periodic_mod(kk).unwrap());
                        }
                    }
                }
            }
        }

        #[test]
        fn affine_identity_and_composition(x in arb_rhythm(40), a in 1i64..200, t in -50i64..50, a2 in 1i64..200, t2 in -50i64..50) {
            let n = x.period() as i64;
            prop_assert_eq!(x.affine_image(1, 0).unwrap(), x.clone());
            if gcd(a.rem_euclid(n) as u64, n as u64) == 1 && gcd(a2.rem_euclid(n) as u64, n as u64) == 1 {
                let two_step = x.affine_image(a, t).unwrap().affine_image(a2, t2).unwrap();
                let one_step = x.affine_image((a2 * a).rem_euclid(n), (a2 * t + t2).rem_euclid(n)).unwrap();
                prop_assert_eq!(two_step, one_step);
            }
        }

        #[test]
        fn orbit_sets_are_anchored(x in arb_rhythm(40), affine in any::<bool>()) {
            let x = x.translate(-(x.elements()[0] as i64));
            let mode = if affine { EquivalenceMode::Affine } else { EquivalenceMode::Translation };
            let sets = x.orbit_index_sets(mode).unwrap();
            for s in &sets {
                prop_assert!(s.contains(0));
                prop_assert_eq!(s.len(), x.len());
            }
            if !affine && x.is_aperiodic() {
                prop_assert_eq!(sets.len(), x.len());
            }
            prop_assert!(sets.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
