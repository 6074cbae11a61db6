//! Dense univariate polynomials over Q and exact rational root extraction.
//!
//! Characteristic polynomials of update matrices land here. We only ever
//! need their rational roots (with multiplicities); anything that does not
//! split over Q is returned as a non-splitting cofactor so the caller can
//! report which variable is affected.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::rat::{lcm_bigint, rat_int, Rat};

/// Dense univariate polynomial over Q; `coeffs[i]` multiplies `x^i`.
/// Invariant: the last coefficient is nonzero (empty vector = zero poly).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<Rat>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        UniPoly::new(vec![rat_int(1)])
    }

    pub fn constant(c: Rat) -> Self {
        UniPoly::new(vec![c])
    }

    /// The monomial x.
    pub fn x() -> Self {
        UniPoly::new(vec![rat_int(0), rat_int(1)])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(|| rat_int(0))
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn leading(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(|| rat_int(0))
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + other.coeff(i));
        }
        UniPoly::new(out)
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) - other.coeff(i));
        }
        UniPoly::new(out)
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    pub fn scale(&self, c: &Rat) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> UniPoly {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let lead = self.leading();
        self.scale(&lead.recip())
    }

    /// Long division: (quotient, remainder) with deg rem < deg divisor.
    pub fn divrem(&self, div: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!div.is_zero(), "division by the zero polynomial");
        let mut rem = self.coeffs.clone();
        let dd = div.degree();
        if self.is_zero() || self.degree() < dd {
            return (UniPoly::zero(), self.clone());
        }
        let mut quot = vec![Rat::zero(); self.degree() - dd + 1];
        let lead = div.leading();
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if c.is_zero() {
                continue;
            }
            quot[k] = c.clone();
            for (j, dc) in div.coeffs.iter().enumerate() {
                let t = dc * &c;
                rem[k + j] -= t;
            }
        }
        (UniPoly::new(quot), UniPoly::new(rem))
    }

    /// Monic greatest common divisor (Euclid).
    pub fn gcd(a: &UniPoly, b: &UniPoly) -> UniPoly {
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            let (_, r) = x.divrem(&y);
            x = y;
            y = r;
        }
        if x.is_zero() {
            UniPoly::zero()
        } else {
            x.monic()
        }
    }

    /// p(x + k), computed by Horner in (x + k).
    pub fn shift(&self, k: &Rat) -> UniPoly {
        let mut acc = UniPoly::zero();
        for c in self.coeffs.iter().rev() {
            // acc = acc * (x + k) + c
            let mut shifted = vec![Rat::zero()];
            shifted.extend(acc.coeffs.iter().cloned());
            let mut next = UniPoly::new(shifted);
            next = next.add(&acc.scale(k));
            next = next.add(&UniPoly::constant(c.clone()));
            acc = next;
        }
        acc
    }

    /// Synthetic division by (x - root): Some(quotient) iff the remainder is 0.
    pub fn deflate(&self, root: &Rat) -> Option<UniPoly> {
        if self.is_zero() {
            return None;
        }
        let mut quot = vec![Rat::zero(); self.coeffs.len() - 1];
        let mut carry = Rat::zero();
        for i in (0..self.coeffs.len()).rev() {
            let v = &self.coeffs[i] + &carry * root;
            if i == 0 {
                if !v.is_zero() {
                    return None;
                }
            } else {
                quot[i - 1] = v.clone();
                carry = v;
            }
        }
        Some(UniPoly::new(quot))
    }

    /// Clear denominators and content: the primitive integer coefficient list.
    fn primitive_integer(&self) -> Vec<BigInt> {
        let mut den = BigInt::from(1);
        for c in &self.coeffs {
            den = lcm_bigint(&den, c.denom());
        }
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        let mut content = BigInt::zero();
        for v in &ints {
            content = content.gcd(v);
        }
        if content.is_zero() {
            return ints;
        }
        ints.iter().map(|v| v / &content).collect()
    }
}

/// Positive divisors of |n|, or None when |n| is too large to enumerate
/// exactly (beyond 10^12 the sqrt scan is no longer desk-scale).
fn divisors(n: &BigInt) -> Option<Vec<u64>> {
    let v = n.abs().to_u64()?;
    if v == 0 || v > 1_000_000_000_000 {
        return None;
    }
    let mut out = Vec::new();
    let mut i = 1u64;
    while i.saturating_mul(i) <= v {
        if v % i == 0 {
            out.push(i);
            out.push(v / i);
        }
        i += 1;
    }
    out.sort_unstable();
    out.dedup();
    Some(out)
}

/// All rational roots with multiplicities (sorted ascending), plus the monic
/// cofactor that has no rational roots. Splitting over Q is exactly
/// "cofactor is the constant 1".
pub fn rational_roots(p: &UniPoly) -> (Vec<(Rat, usize)>, UniPoly) {
    assert!(!p.is_zero(), "rational_roots of the zero polynomial");
    let mut roots: Vec<(Rat, usize)> = Vec::new();

    // Root 0 first: strip the power of x.
    let mu = p.coeffs.iter().take_while(|c| c.is_zero()).count();
    let mut work = UniPoly::new(p.coeffs[mu..].to_vec());
    if mu > 0 {
        roots.push((Rat::zero(), mu));
    }
    if work.degree() == 0 {
        roots.sort_by(|a, b| a.0.cmp(&b.0));
        return (roots, UniPoly::one());
    }

    // Rational root theorem candidates from the primitive integer form.
    let ints = work.primitive_integer();
    let cand: Option<BTreeSet<Rat>> = (|| {
        let ps = divisors(&ints[0])?;
        let qs = divisors(ints.last().unwrap())?;
        if ps.len().saturating_mul(qs.len()) > 1_000_000 {
            return None;
        }
        let mut set = BTreeSet::new();
        for pnum in &ps {
            for qden in &qs {
                let r = Rat::new(BigInt::from(*pnum), BigInt::from(*qden));
                set.insert(-r.clone());
                set.insert(r);
            }
        }
        Some(set)
    })();

    // Candidate enumeration failed: give up and hand back the whole cofactor.
    let Some(cand) = cand else {
        roots.sort_by(|a, b| a.0.cmp(&b.0));
        return (roots, work.monic());
    };

    // One pass suffices: by Gauss's lemma the candidate set only shrinks
    // under deflation.
    for r in cand {
        let mut mult = 0usize;
        while let Some(q) = work.deflate(&r) {
            work = q;
            mult += 1;
            if work.degree() == 0 {
                break;
            }
        }
        if mult > 0 {
            roots.push((r, mult));
        }
        if work.degree() == 0 {
            break;
        }
    }

    roots.sort_by(|a, b| a.0.cmp(&b.0));
    (roots, work.monic())
}
