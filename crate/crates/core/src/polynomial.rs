//! Exact integer polynomials, cyclotomic polynomials and the
//! Coven–Meyerowitz conditions.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rhythm::{divisors, factorize, Rhythm};

/// Dense polynomial with arbitrary precision integer coefficients.
///
/// `coefficients[i]` multiplies `x^i`; trailing zeros are always trimmed, so
/// the zero polynomial has no coefficients at all.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coefficients: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(coefficients: Vec<BigInt>) -> Self {
        let mut p = IntPolynomial { coefficients };
        p.trim();
        p
    }

    pub fn from_i64(coefficients: &[i64]) -> Self {
        Self::new(coefficients.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPolynomial { coefficients: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(0, 1)
    }

    pub fn monomial(degree: usize, coefficient: i64) -> Self {
        let mut c = vec![BigInt::zero(); degree + 1];
        c[degree] = BigInt::from(coefficient);
        Self::new(c)
    }

    /// `x^n - 1`.
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut c = vec![BigInt::zero(); n + 1];
        c[0] = BigInt::from(-1);
        c[n] += BigInt::one();
        Self::new(c)
    }

    /// `Δ_n(x) = 1 + x + … + x^{n-1}`.
    pub fn delta(n: usize) -> Self {
        Self::new(vec![BigInt::one(); n])
    }

    fn trim(&mut self) {
        while self.coefficients.last().is_some_and(Zero::is_zero) {
            self.coefficients.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coefficients
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coefficients.last()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coefficients.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// Quotient and remainder of exact division over Z.
    ///
    /// Returns `None` when some step needs a non-integral quotient
    /// coefficient; such a pair has no division with remainder in Z[x].
    pub fn div_rem(&self, divisor: &IntPolynomial) -> Result<Option<(IntPolynomial, IntPolynomial)>> {
        let dd = divisor.degree().ok_or(Error::InvalidDivisor)?;
        let lead = divisor.leading().expect("nonzero").clone();
        let mut rem = self.coefficients.clone();
        let Some(nd) = self.degree() else {
            return Ok(Some((IntPolynomial::zero(), IntPolynomial::zero())));
        };
        if nd < dd {
            return Ok(Some((IntPolynomial::zero(), self.clone())));
        }
        let mut quot = vec![BigInt::zero(); nd - dd + 1];
        let monic = lead.is_one();
        for i in (0..=nd - dd).rev() {
            let top = &rem[i + dd];
            if top.is_zero() {
                continue;
            }
            let q = if monic {
                top.clone()
            } else {
                let (q, r) = top.div_rem(&lead);
                if !r.is_zero() {
                    return Ok(None);
                }
                q
            };
            for (j, c) in divisor.coefficients.iter().enumerate() {
                if !c.is_zero() {
                    rem[i + j] -= &q * c;
                }
            }
            quot[i] = q;
        }
        Ok(Some((IntPolynomial::new(quot), IntPolynomial::new(rem))))
    }

    /// Exact quotient, or `None` when `divisor` does not divide `self`.
    pub fn exact_div(&self, divisor: &IntPolynomial) -> Result<Option<IntPolynomial>> {
        Ok(match self.div_rem(divisor)? {
            Some((q, r)) if r.is_zero() => Some(q),
            _ => None,
        })
    }
}

impl Mul for &IntPolynomial {
    type Output = IntPolynomial;

    fn mul(self, rhs: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return IntPolynomial::zero();
        }
        let mut out = vec![BigInt::zero(); self.coefficients.len() + rhs.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coefficients.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        IntPolynomial::new(out)
    }
}

impl Sub for &IntPolynomial {
    type Output = IntPolynomial;

    fn sub(self, rhs: &IntPolynomial) -> IntPolynomial {
        let len = self.coefficients.len().max(rhs.coefficients.len());
        let out = (0..len)
            .map(|i| {
                let a = self.coefficients.get(i).cloned().unwrap_or_default();
                let b = rhs.coefficients.get(i).cloned().unwrap_or_default();
                a - b
            })
            .collect();
        IntPolynomial::new(out)
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => f.write_str("x")?,
                (1, false) => write!(f, "{mag}x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{mag}x^{i}")?,
            }
        }
        Ok(())
    }
}

/// `p_A(x) = Σ_{k∈A} x^k`.
pub fn char_poly(r: &Rhythm) -> IntPolynomial {
    let mut c = vec![BigInt::zero(); r.max_element() + 1];
    for &x in r.elements() {
        c[x] = BigInt::one();
    }
    IntPolynomial::new(c)
}

/// Memo table of cyclotomic polynomials.
#[derive(Debug, Default, Clone)]
pub struct Cyclotomics {
    table: HashMap<u64, IntPolynomial>,
}

impl Cyclotomics {
    pub fn new() -> Self {
        Self::default()
    }

    /// `Φ_d = (x^d − 1) / ∏_{e | d, e < d} Φ_e`, by exact division.
    pub fn get(&mut self, d: u64) -> &IntPolynomial {
        assert!(d >= 1, "cyclotomic index must be positive");
        if !self.table.contains_key(&d) {
            let mut product = IntPolynomial::one();
            for e in divisors(d).into_iter().filter(|&e| e < d) {
                product = &product * self.get(e);
            }
            let phi = IntPolynomial::x_pow_minus_one(d as usize)
                .exact_div(&product)
                .expect("product of cyclotomics is nonzero")
                .expect("x^d - 1 is divisible by its proper cyclotomic factors");
            self.table.insert(d, phi);
        }
        &self.table[&d]
    }
}

/// The `d`-th cyclotomic polynomial.
pub fn cyclotomic(d: u64) -> IntPolynomial {
    Cyclotomics::new().get(d).clone()
}

/// True iff `q` is an exact multiple of `p` in Z[x].
pub fn divides(p: &IntPolynomial, q: &IntPolynomial) -> Result<bool> {
    if p.is_zero() {
        return Err(Error::InvalidDivisor);
    }
    Ok(q.exact_div(p)?.is_some())
}

/// Coefficients of `p·q mod (x^n − 1)`, a vector of length `n`.
pub fn product_mod_cycle(p: &IntPolynomial, q: &IntPolynomial, n: usize) -> Result<Vec<BigInt>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    for (name, poly) in [("first", p), ("second", q)] {
        if poly.degree().is_some_and(|d| d >= n) {
            return Err(Error::InvalidArgument(format!("{name} factor has degree >= {n}")));
        }
    }
    let mut out = vec![BigInt::zero(); n];
    for (i, a) in p.coefficients().iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in q.coefficients().iter().enumerate() {
            if !b.is_zero() {
                out[(i + j) % n] += a * b;
            }
        }
    }
    Ok(out)
}

/// Which indices `d` are tested for `Φ_d | p_A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateRange {
    /// Divisors `d ≥ 2` of the period; enough for tiles of Z_n.
    DivisorsOfPeriod,
    /// Every `2 ≤ d ≤ deg(p_A) + n`.
    Full,
}

/// R_A, S_A and the (T1)/(T2) verdicts of a rhythm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CMReport {
    #[serde(rename = "R_A")]
    pub r_a: Vec<u64>,
    #[serde(rename = "S_A")]
    pub s_a: Vec<u64>,
    pub t1: bool,
    pub t2: bool,
    /// First failing set of prime powers (lexicographic), present iff `!t2`.
    pub t2_witness: Option<Vec<u64>>,
}

/// `Some((p, α))` when `d = p^α` with `α ≥ 1`.
pub fn prime_power(d: u64) -> Option<(u64, u32)> {
    match factorize(d).as_slice() {
        [(p, e)] => Some((*p, *e)),
        _ => None,
    }
}

pub fn cm_report(r: &Rhythm, range: CandidateRange) -> CMReport {
    let mut cache = Cyclotomics::new();
    cm_report_with(r, range, &mut cache)
}

/// As [`cm_report`], reusing a cyclotomic table across calls.
pub fn cm_report_with(r: &Rhythm, range: CandidateRange, cache: &mut Cyclotomics) -> CMReport {
    let p_a = char_poly(r);
    let deg = p_a.degree().expect("rhythms are non-empty");
    let n = r.period() as u64;
    let candidates: Vec<u64> = match range {
        CandidateRange::DivisorsOfPeriod => divisors(n).into_iter().filter(|&d| d >= 2).collect(),
        CandidateRange::Full => (2..=deg as u64 + n).collect(),
    };
    let mut r_a = Vec::new();
    for d in candidates {
        // deg Φ_d = φ(d); a nonzero polynomial of smaller degree cannot be a multiple
        if euler_phi(d) as usize > deg {
            continue;
        }
        if divides(cache.get(d), &p_a).expect("cyclotomics are nonzero") {
            r_a.push(d);
        }
    }
    let s_a: Vec<u64> = r_a.iter().copied().filter(|&d| prime_power(d).is_some()).collect();
    let prime_product: u64 = s_a.iter().map(|&d| prime_power(d).unwrap().0).product();
    let t1 = prime_product == r.len() as u64;
    let t2_witness = t2_failure(&s_a, &r_a);
    CMReport { t2: t2_witness.is_none(), r_a, s_a, t1, t2_witness }
}

/// Lexicographically first set of powers of distinct primes in `s_a` whose
/// product is missing from `r_a`.
fn t2_failure(s_a: &[u64], r_a: &[u64]) -> Option<Vec<u64>> {
    let mut by_prime: Vec<(u64, Vec<u64>)> = Vec::new();
    for &d in s_a {
        let (p, _) = prime_power(d).expect("S_A holds prime powers");
        match by_prime.iter_mut().find(|(q, _)| *q == p) {
            Some((_, v)) => v.push(d),
            None => by_prime.push((p, vec![d])),
        }
    }
    // every choice of at most one power per prime; singletons are trivially in R_A
    let mut subsets: Vec<Vec<u64>> = vec![Vec::new()];
    for (_, powers) in &by_prime {
        let mut next = Vec::with_capacity(subsets.len() * (powers.len() + 1));
        for s in &subsets {
            next.push(s.clone());
            for &q in powers {
                let mut t = s.clone();
                t.push(q);
                next.push(t);
            }
        }
        subsets = next;
    }
    let mut failing: Vec<Vec<u64>> = subsets
        .into_iter()
        .filter(|s| s.len() >= 2)
        .map(|mut s| {
            s.sort_unstable();
            s
        })
        .filter(|s| r_a.binary_search(&s.iter().product()).is_err())
        .collect();
    failing.sort();
    failing.into_iter().next()
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n).into_iter().fold(n, |acc, (p, _)| acc / p * (p - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    /// Every tiling has a periodic factor.
    Good,
    /// Admits a tiling by two aperiodic factors.
    Bad,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupOrderClass {
    pub order: u64,
    pub kind: OrderKind,
    pub pattern: String,
}

/// Good iff the exponent pattern is one of
/// `p^a, p^a q, p^2 q^2, pqr, p^2 qr, pqrs`.
pub fn classify_order(n: u64) -> GroupOrderClass {
    let mut exps: Vec<u32> = factorize(n).into_iter().map(|(_, e)| e).collect();
    exps.sort_unstable_by(|a, b| b.cmp(a));
    let good = match exps.as_slice() {
        [] => Some("1".to_string()),
        [a] => Some(format!("p^{a}")),
        [a, 1] => Some(format!("p^{a} q")),
        [2, 2] => Some("p^2 q^2".into()),
        [1, 1, 1] => Some("pqr".into()),
        [2, 1, 1] => Some("p^2 qr".into()),
        [1, 1, 1, 1] => Some("pqrs".into()),
        _ => None,
    };
    match good {
        Some(pattern) => GroupOrderClass { order: n, kind: OrderKind::Good, pattern },
        None => {
            let pattern = match bad_decomposition(n) {
                Some(BadDecomposition { n1, n2, m1, m2, k }) => {
                    format!("nmk: n = {n1}*{n2}, m = {m1}*{m2}, k = {k}")
                }
                None => "nmk".into(),
            };
            GroupOrderClass { order: n, kind: OrderKind::Bad, pattern }
        }
    }
}

/// Witness `N = (n1·n2)(m1·m2)k` with `gcd(n1·n2, m1·m2) = 1`, all factors ≥ 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BadDecomposition {
    pub n1: u64,
    pub n2: u64,
    pub m1: u64,
    pub m2: u64,
    pub k: u64,
}

/// Searches the divisor lattice for an `nmk` factorization.
pub fn bad_decomposition(order: u64) -> Option<BadDecomposition> {
    let split = |x: u64| divisors(x).into_iter().find(|&d| d >= 2 && x / d >= 2).map(|d| (d, x / d));
    for n in divisors(order) {
        let Some((n1, n2)) = split(n) else { continue };
        for m in divisors(order / n) {
            if num_integer::gcd(n, m) != 1 || order / n / m < 2 {
                continue;
            }
            if let Some((m1, m2)) = split(m) {
                return Some(BadDecomposition { n1, n2, m1, m2, k: order / n / m });
            }
        }
    }
    None
}
