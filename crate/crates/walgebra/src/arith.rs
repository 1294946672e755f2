//! Coefficient rings and small closed-form identities.
//!
//! All higher modules are generic over [`Ring`], so the same code path
//! computes over `F_p`, over the arbitrary-precision integers (the integral
//! forms), and over univariate polynomial rings (symbolic parameters).

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;

use crate::{Error, Result};

/// A commutative ring given as a context object; elements are plain data.
///
/// `from_int` / `from_bigint` give the canonical image of an integer, so
/// integer structure constants can be used with any coefficient ring.
pub trait Ring: Clone + fmt::Debug + PartialEq {
    type Elem: Clone + fmt::Debug + PartialEq + Eq + Ord;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn from_int(&self, n: i64) -> Self::Elem;
    fn from_bigint(&self, n: &BigInt) -> Self::Elem;
    /// Multiplicative inverse, when one exists.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// Displayed form; `atomic` distinguishes elements that need no parens.
    fn show(&self, a: &Self::Elem) -> String;
    fn is_atomic(&self, a: &Self::Elem) -> bool;

    fn pow(&self, a: &Self::Elem, mut k: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        acc
    }
}

/// Deterministic trial-division primality test; moduli here are tiny.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The field of `p` elements; elements are residues in `0..p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fp {
    p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Result<Fp> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Fp { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The balanced integer lift in `(-p/2, p/2]`, used by dumps.
    pub fn lift(&self, a: u64) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }
}

impl Ring for Fp {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.p - b) % self.p
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.p - a) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn from_int(&self, n: i64) -> u64 {
        n.rem_euclid(self.p as i64) as u64
    }
    fn from_bigint(&self, n: &BigInt) -> u64 {
        let m = n % BigInt::from(self.p);
        let m = if m.is_negative() { m + BigInt::from(self.p) } else { m };
        m.to_u64().expect("residue fits u64")
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }
    fn show(&self, a: &u64) -> String {
        self.lift(*a).to_string()
    }
    fn is_atomic(&self, _a: &u64) -> bool {
        true
    }
}

/// The ring of arbitrary-precision integers.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Integers;

impl Ring for Integers {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::from(1)
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn from_int(&self, n: i64) -> BigInt {
        BigInt::from(n)
    }
    fn from_bigint(&self, n: &BigInt) -> BigInt {
        n.clone()
    }
    fn inv(&self, a: &BigInt) -> Option<BigInt> {
        if a == &BigInt::from(1) || a == &BigInt::from(-1) {
            Some(a.clone())
        } else {
            None
        }
    }
    fn show(&self, a: &BigInt) -> String {
        a.to_string()
    }
    fn is_atomic(&self, _a: &BigInt) -> bool {
        true
    }
}

/// A dense univariate polynomial; `coeffs[i]` is the coefficient of degree
/// `i` and no trailing zero is stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct UniPoly<E> {
    pub coeffs: Vec<E>,
}

impl<E> UniPoly<E> {
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }
}

/// The polynomial ring `R[var]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyRing<R: Ring> {
    pub base: R,
    pub var: String,
}

impl<R: Ring> PolyRing<R> {
    pub fn new(base: R, var: &str) -> Self {
        PolyRing { base, var: var.to_string() }
    }

    fn trim(&self, mut coeffs: Vec<R::Elem>) -> UniPoly<R::Elem> {
        while coeffs.last().is_some_and(|c| self.base.is_zero(c)) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn constant(&self, c: R::Elem) -> UniPoly<R::Elem> {
        self.trim(vec![c])
    }

    /// The generator `var`.
    pub fn gen(&self) -> UniPoly<R::Elem> {
        UniPoly { coeffs: vec![self.base.zero(), self.base.one()] }
    }

    pub fn coeff(&self, a: &UniPoly<R::Elem>, d: usize) -> R::Elem {
        a.coeffs.get(d).cloned().unwrap_or_else(|| self.base.zero())
    }

    /// Evaluate at a base-ring point by Horner's rule.
    pub fn eval(&self, a: &UniPoly<R::Elem>, x: &R::Elem) -> R::Elem {
        let mut acc = self.base.zero();
        for c in a.coeffs.iter().rev() {
            acc = self.base.add(&self.base.mul(&acc, x), c);
        }
        acc
    }
}

impl<R: Ring> Ring for PolyRing<R> {
    type Elem = UniPoly<R::Elem>;

    fn zero(&self) -> Self::Elem {
        UniPoly { coeffs: vec![] }
    }
    fn one(&self) -> Self::Elem {
        self.trim(vec![self.base.one()])
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.coeffs.is_empty()
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let n = a.coeffs.len().max(b.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.base.add(&self.coeff(a, i), &self.coeff(b, i)));
        }
        self.trim(out)
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        UniPoly { coeffs: a.coeffs.iter().map(|c| self.base.neg(c)).collect() }
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        if self.is_zero(a) || self.is_zero(b) {
            return self.zero();
        }
        let mut out = vec![self.base.zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, ca) in a.coeffs.iter().enumerate() {
            for (j, cb) in b.coeffs.iter().enumerate() {
                out[i + j] = self.base.add(&out[i + j], &self.base.mul(ca, cb));
            }
        }
        self.trim(out)
    }
    fn from_int(&self, n: i64) -> Self::Elem {
        self.constant(self.base.from_int(n))
    }
    fn from_bigint(&self, n: &BigInt) -> Self::Elem {
        self.constant(self.base.from_bigint(n))
    }
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        if a.coeffs.len() == 1 {
            self.base.inv(&a.coeffs[0]).map(|c| self.constant(c))
        } else {
            None
        }
    }
    fn show(&self, a: &Self::Elem) -> String {
        if self.is_zero(a) {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (d, c) in a.coeffs.iter().enumerate().rev() {
            if self.base.is_zero(c) {
                continue;
            }
            let var = match d {
                0 => String::new(),
                1 => self.var.clone(),
                _ => format!("{}^{}", self.var, d),
            };
            let cs = self.base.show(c);
            let part = if d == 0 {
                cs
            } else if cs == "1" {
                var
            } else if cs == "-1" {
                format!("-{var}")
            } else {
                format!("{cs}*{var}")
            };
            parts.push(part);
        }
        let mut out = parts[0].clone();
        for part in &parts[1..] {
            if let Some(rest) = part.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(part);
            }
        }
        out
    }
    fn is_atomic(&self, a: &Self::Elem) -> bool {
        a.coeffs.iter().filter(|c| !self.base.is_zero(c)).count() <= 1
            && a.coeffs.last().map(|c| self.base.is_atomic(c)).unwrap_or(true)
    }
}

/// `prod_{j=0}^{p-1} (t - j)` over `F_p`, by naive expansion.
///
/// Coefficientwise this equals `t^p - t`.
pub fn wilson_poly(p: u64) -> Result<UniPoly<u64>> {
    let fp = Fp::new(p)?;
    let ring = PolyRing::new(fp.clone(), "t");
    let mut acc = ring.one();
    for j in 0..p as i64 {
        let factor = ring.sub(&ring.gen(), &ring.from_int(j));
        acc = ring.mul(&acc, &factor);
    }
    Ok(acc)
}

/// `prod_{j=0}^{p-1} (t - a - j)` over `R[t]`, for any ring element `a`
/// whose ring has characteristic `p`.  Equals `t^p - t - (a^p - a)`.
pub fn shifted_wilson_poly<R: Ring>(ring: &R, p: u64, a: &R::Elem) -> Result<UniPoly<R::Elem>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let pr = PolyRing::new(ring.clone(), "t");
    let mut acc = pr.one();
    for j in 0..p as i64 {
        let c = ring.add(a, &ring.from_int(j));
        let factor = pr.sub(&pr.gen(), &pr.constant(c));
        acc = pr.mul(&acc, &factor);
    }
    Ok(acc)
}

/// The elementary symmetric polynomial `e_r` of the given values, by the
/// standard one-pass recurrence.  `e_0 = 1`, and `e_r = 0` for
/// `r > values.len()`.
pub fn elem_sym<R: Ring>(ring: &R, r: usize, values: &[R::Elem]) -> R::Elem {
    if r > values.len() {
        return ring.zero();
    }
    let mut e = vec![ring.zero(); r + 1];
    e[0] = ring.one();
    for v in values {
        for k in (1..=r).rev() {
            let t = ring.mul(v, &e[k - 1]);
            e[k] = ring.add(&e[k], &t);
        }
    }
    e[r].clone()
}

/// Exact binomial coefficient over the integers.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_from_ints(fp: &Fp, cs: &[i64]) -> UniPoly<u64> {
        let pr = PolyRing::new(fp.clone(), "t");
        pr.trim(cs.iter().map(|&c| fp.from_int(c)).collect())
    }

    #[test]
    fn wilson_poly_equals_tp_minus_t() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            let fp = Fp::new(p).unwrap();
            let got = wilson_poly(p).unwrap();
            let mut want = vec![0i64; p as usize + 1];
            want[1] = -1;
            want[p as usize] = 1;
            assert_eq!(got, poly_from_ints(&fp, &want), "p = {p}");
        }
    }

    #[test]
    fn wilson_poly_rejects_composite() {
        assert_eq!(wilson_poly(6).unwrap_err(), Error::NotPrime(6));
        assert_eq!(wilson_poly(1).unwrap_err(), Error::NotPrime(1));
    }

    #[test]
    fn shifted_wilson_over_fp_points() {
        // For a in F_p the shift is invisible: a^p - a = 0.
        for p in [2u64, 3, 5, 7, 11, 13] {
            let fp = Fp::new(p).unwrap();
            let expect = wilson_poly(p).unwrap();
            for a in 0..p.min(20) {
                let got = shifted_wilson_poly(&fp, p, &a).unwrap();
                assert_eq!(got, expect, "p = {p}, a = {a}");
            }
        }
    }

    #[test]
    fn shifted_wilson_symbolic() {
        // Over F_p[a] with a an indeterminate: t^p - t - (a^p - a).
        for p in [2u64, 3, 5] {
            let fp = Fp::new(p).unwrap();
            let ra = PolyRing::new(fp.clone(), "a");
            let a = ra.gen();
            let got = shifted_wilson_poly(&ra, p, &a).unwrap();
            let pt = PolyRing::new(ra.clone(), "t");
            let ap = ra.sub(&ra.pow(&a, p), &a);
            let tp = pt.pow(&pt.gen(), p);
            let want = pt.sub(&pt.sub(&tp, &pt.gen()), &pt.constant(ap));
            assert_eq!(got, want, "p = {p}");
        }
    }

    #[test]
    fn elem_sym_of_all_residues() {
        // e_r(0,1,...,p-1) = 0 for 1 <= r <= p-2, and e_{p-1} = -1: these are
        // the middle and trailing coefficients of prod (t - j) = t^p - t.
        for p in [3u64, 5, 7, 11, 13] {
            let fp = Fp::new(p).unwrap();
            let values: Vec<u64> = (0..p).collect();
            assert_eq!(elem_sym(&fp, 0, &values), 1);
            for r in 1..=(p - 2) as usize {
                assert_eq!(elem_sym(&fp, r, &values), 0, "p = {p}, r = {r}");
            }
            assert_eq!(elem_sym(&fp, (p - 1) as usize, &values), fp.from_int(-1), "p = {p}");
        }
    }

    #[test]
    fn elem_sym_conventions() {
        let fp = Fp::new(7).unwrap();
        assert_eq!(elem_sym(&fp, 0, &[]), 1);
        assert_eq!(elem_sym(&fp, 3, &[1, 2]), 0);
        assert_eq!(elem_sym(&fp, 2, &[2, 3, 4]), (2 * 3 + 2 * 4 + 3 * 4) % 7);
    }

    #[test]
    fn fp_inverses() {
        let fp = Fp::new(13).unwrap();
        for a in 1..13u64 {
            let inv = fp.inv(&a).unwrap();
            assert_eq!(fp.mul(&a, &inv), 1);
        }
        assert_eq!(fp.inv(&0), None);
    }

    #[test]
    fn bigint_ring_roundtrip() {
        let z = Integers;
        let a = z.from_int(-17);
        assert_eq!(z.show(&a), "-17");
        assert_eq!(z.mul(&a, &a), BigInt::from(289));
    }

    #[test]
    fn poly_show_and_eval() {
        let fp = Fp::new(5).unwrap();
        let pr = PolyRing::new(fp.clone(), "t");
        // t^2 - t
        let p = pr.sub(&pr.mul(&pr.gen(), &pr.gen()), &pr.gen());
        assert_eq!(pr.show(&p), "t^2 - t");
        assert_eq!(pr.eval(&p, &3), fp.from_int(6));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(0, 0), BigInt::from(1));
        assert_eq!(binomial(3, 5), BigInt::from(0));
        assert_eq!(binomial(39, 20), BigInt::parse_bytes(b"68923264410", 10).unwrap());
    }
}
