//! Ground truth independent of the linear model: a direct tiling check and
//! an exact-cover enumeration of every complement of `A`.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::polynomial::{char_poly, product_mod_cycle};
use crate::rhythm::Rhythm;

/// Largest period the exhaustive enumeration accepts by default.
pub const DEFAULT_SIZE_GUARD: usize = 200;

/// True iff every residue of Z_n is `x + y` for exactly one `x ∈ a`, `y ∈ b`.
///
/// Runs both the sum-counting check and the polynomial identity
/// `p_A·p_B ≡ Δ_n mod x^n − 1`, and panics if they disagree.
pub fn verify_tiling(a: &Rhythm, b: &Rhythm) -> Result<bool> {
    let n = a.period();
    if b.period() != n {
        return Err(Error::InvalidPair(n, b.period()));
    }
    let mut hits = vec![0u32; n];
    for &x in a.elements() {
        for &y in b.elements() {
            hits[(x + y) % n] += 1;
        }
    }
    let direct = hits.iter().all(|&h| h == 1);
    let product = product_mod_cycle(&char_poly(a), &char_poly(b), n)?;
    let algebraic = product.iter().all(BigInt::is_one);
    assert_eq!(direct, algebraic, "tiling checks disagree for {a} and {b}");
    Ok(direct)
}

/// Every `B` with `A ⊕ B = Z_n`, sorted; with `anchored` only those containing 0.
pub fn enumerate_complements_bruteforce(a: &Rhythm, anchored: bool) -> Result<Vec<Rhythm>> {
    enumerate_complements_guarded(a, anchored, DEFAULT_SIZE_GUARD)
}

pub fn enumerate_complements_guarded(a: &Rhythm, anchored: bool, guard: usize) -> Result<Vec<Rhythm>> {
    let n = a.period();
    if n > guard {
        return Err(Error::OracleTooLarge { period: n, guard });
    }
    a.complement_size()?;
    let mut search = Cover { a: a.elements(), n, covered: vec![false; n], shifts: Vec::new(), found: Vec::new() };
    if anchored {
        let placed = search.place(0);
        debug_assert!(placed);
    }
    search.recurse();
    let mut found: Vec<Rhythm> = search.found.into_iter().map(|s| Rhythm::from_residues(n, s)).collect();
    found.sort();
    found.dedup();
    for b in &found {
        debug_assert!(verify_tiling(a, b).unwrap());
    }
    Ok(found)
}

struct Cover<'a> {
    a: &'a [usize],
    n: usize,
    covered: Vec<bool>,
    shifts: Vec<usize>,
    found: Vec<Vec<usize>>,
}

impl Cover<'_> {
    fn place(&mut self, s: usize) -> bool {
        if self.a.iter().any(|&x| self.covered[(x + s) % self.n]) {
            return false;
        }
        for &x in self.a {
            self.covered[(x + s) % self.n] = true;
        }
        self.shifts.push(s);
        true
    }

    fn remove(&mut self, s: usize) {
        for &x in self.a {
            self.covered[(x + s) % self.n] = false;
        }
        self.shifts.pop();
    }

    /// Cover the smallest uncovered residue `t` by each translate `a + s` that contains it.
    fn recurse(&mut self) {
        let Some(t) = self.covered.iter().position(|&c| !c) else {
            self.found.push(self.shifts.clone());
            return;
        };
        for k in 0..self.a.len() {
            let s = (t + self.n - self.a[k]) % self.n;
            if self.place(s) {
                self.recurse();
                self.remove(s);
            }
        }
    }
}
