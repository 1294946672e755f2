//! Truncated Laurent series in `u^{-1}` with enveloping-algebra coefficients.
//!
//! Truncation is tracked, never silent: reading a coefficient below the
//! known range is an error, so "provably zero" and "not computed" stay
//! distinct.

use crate::arith::{binomial, Ring};
use crate::uea::{EnvElement, Uea};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::sync::Arc;

/// A series `sum_e A_e u^e` whose coefficients are known exactly for
/// exponents `e >= -trunc` (all of them when `trunc` is `None`), with
/// `topdeg` an upper bound for the nonzero exponents.
#[derive(Clone)]
pub struct LaurentSeriesU<R: Ring> {
    uea: Arc<Uea<R>>,
    coeffs: BTreeMap<i64, EnvElement<R>>,
    trunc: Option<i64>,
    topdeg: i64,
}

impl<R: Ring> LaurentSeriesU<R> {
    /// The constant series 1, known to all orders.
    pub fn one(uea: &Arc<Uea<R>>) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, uea.one());
        LaurentSeriesU { uea: Arc::clone(uea), coeffs, trunc: None, topdeg: 0 }
    }

    /// A series from explicit coefficients, known for exponents `>= -trunc`.
    pub fn new(
        uea: &Arc<Uea<R>>,
        coeffs: Vec<(i64, EnvElement<R>)>,
        trunc: Option<i64>,
        topdeg: i64,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (e, c) in coeffs {
            if c.is_zero() {
                continue;
            }
            if e > topdeg {
                return Err(Error::InvalidArgument(format!(
                    "coefficient at u^{e} above the declared top degree {topdeg}"
                )));
            }
            if let Some(k) = trunc {
                if e < -k {
                    return Err(Error::InvalidArgument(format!(
                        "coefficient at u^{e} below the declared truncation {k}"
                    )));
                }
            }
            if map.insert(e, c).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate coefficient at u^{e}")));
            }
        }
        Ok(LaurentSeriesU { uea: Arc::clone(uea), coeffs: map, trunc, topdeg })
    }

    pub fn trunc(&self) -> Option<i64> {
        self.trunc
    }

    pub fn topdeg(&self) -> i64 {
        self.topdeg
    }

    pub fn uea(&self) -> &Arc<Uea<R>> {
        &self.uea
    }

    fn known(&self, e: i64) -> bool {
        match self.trunc {
            None => true,
            Some(k) => e >= -k,
        }
    }

    /// The coefficient of `u^e`; an error if it lies below the truncation.
    pub fn coeff(&self, e: i64) -> Result<EnvElement<R>> {
        if !self.known(e) {
            return Err(Error::UnknownCoefficient { exponent: e, trunc: self.trunc.unwrap() });
        }
        Ok(self.coeffs.get(&e).cloned().unwrap_or_else(|| self.uea.zero()))
    }

    /// Cauchy product; the result is known at `u^e` exactly when every
    /// contributing product uses only known coefficients.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let trunc = match (self.trunc, other.trunc) {
            (None, None) => None,
            (Some(ka), None) => Some(ka - other.topdeg),
            (None, Some(kb)) => Some(kb - self.topdeg),
            (Some(ka), Some(kb)) => Some((ka - other.topdeg).min(kb - self.topdeg)),
        };
        let topdeg = self.topdeg + other.topdeg;
        let mut out: BTreeMap<i64, EnvElement<R>> = BTreeMap::new();
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &other.coeffs {
                let e = ea + eb;
                if let Some(k) = trunc {
                    if e < -k {
                        continue;
                    }
                }
                let prod = ca.mul(cb)?;
                match out.entry(e) {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(prod);
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        let sum = o.get().add(&prod)?;
                        if sum.is_zero() {
                            o.remove();
                        } else {
                            *o.get_mut() = sum;
                        }
                    }
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(LaurentSeriesU { uea: Arc::clone(&self.uea), coeffs: out, trunc, topdeg })
    }

    /// Substitute `u -> u - c`, expanding each power binomially; exact on
    /// the known range.
    pub fn shift_u(&self, c: &R::Elem) -> Result<Self> {
        let ring = self.uea.ring.clone();
        if ring.is_zero(c) {
            return Ok(self.clone());
        }
        let mut out: BTreeMap<i64, EnvElement<R>> = BTreeMap::new();
        let mut add = |e: i64, v: EnvElement<R>| -> Result<()> {
            if v.is_zero() {
                return Ok(());
            }
            match out.entry(e) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(v);
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    let sum = o.get().add(&v)?;
                    if sum.is_zero() {
                        o.remove();
                    } else {
                        *o.get_mut() = sum;
                    }
                }
            }
            Ok(())
        };
        for (&e, coeff) in &self.coeffs {
            if e >= 0 {
                // (u - c)^e = sum_k binom(e,k) (-c)^(e-k) u^k
                for k in 0..=e {
                    let b = ring.from_bigint(&binomial(e as u64, k as u64));
                    let s = ring.mul(&b, &ring.pow(&ring.neg(c), (e - k) as u64));
                    add(k, coeff.scale(&s))?;
                }
            } else {
                // (u - c)^{-r} = sum_k binom(r+k-1, k) c^k u^{-r-k}
                let r = -e;
                let k_max = match self.trunc {
                    None => {
                        return Err(Error::InvalidArgument(
                            "cannot shift an exact series with negative exponents".into(),
                        ))
                    }
                    Some(t) => t + e, // keep exponents e - k >= -t
                };
                for k in 0..=k_max.max(-1) {
                    let b = ring.from_bigint(&binomial((r + k - 1) as u64, k as u64));
                    let s = ring.mul(&b, &ring.pow(c, k as u64));
                    add(e - k, coeff.scale(&s))?;
                }
            }
        }
        Ok(LaurentSeriesU {
            uea: Arc::clone(&self.uea),
            coeffs: out,
            trunc: self.trunc,
            topdeg: self.topdeg,
        })
    }

    /// Multiply by `u^{p_1} (u-1)^{p_2} ... (u-(n-1))^{p_n}`, exactly.
    pub fn polynomial_prefactor(&self, exponents: &[usize]) -> Result<Self> {
        let ring = self.uea.ring.clone();
        let mut poly = LaurentSeriesU::one(&self.uea);
        for (i, &e) in exponents.iter().enumerate() {
            // u - (i - 1) as an exact series
            let linear = LaurentSeriesU::new(
                &self.uea,
                vec![
                    (1, self.uea.one()),
                    (0, self.uea.scalar(ring.from_int(-(i as i64)))),
                ],
                None,
                1,
            )?;
            for _ in 0..e {
                poly = poly.mul(&linear)?;
            }
        }
        poly.mul(self)
    }
}

/// Lucas evaluation of `binom(n,k) mod p`, an independent oracle for the
/// binomial tables used in `shift_u`.
pub fn lucas_binomial_mod_p(mut n: u64, mut k: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while n > 0 || k > 0 {
        let (nd, kd) = (n % p, k % p);
        if kd > nd {
            return 0;
        }
        // binomial of digits via a small Pascal triangle mod p
        let mut row = vec![0u64; (nd + 1) as usize];
        row[0] = 1;
        for _ in 0..nd {
            for j in (1..row.len()).rev() {
                row[j] = (row[j] + row[j - 1]) % p;
            }
        }
        acc = acc * row[kd as usize] % p;
        n /= p;
        k /= p;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Fp;
    use crate::combin::Pyramid;
    use crate::liealg::{BasisLabel, LieAlgebra};
    use crate::suite::SplitMix64;
    use num_traits::ToPrimitive;

    fn setup(p: u64) -> Arc<Uea<Fp>> {
        let pyr = Pyramid::from_heights(&[1, 1]).unwrap();
        let gl = LieAlgebra::gl_for(&pyr);
        Uea::pyramid_order(Fp::new(p).unwrap(), gl).unwrap()
    }

    fn gen_of(uea: &Arc<Uea<Fp>>, i: usize, j: usize) -> EnvElement<Fp> {
        uea.gen(uea.algebra.index_of(BasisLabel::E { i, j }).unwrap())
    }

    #[test]
    fn multiplying_by_one_is_identity() {
        let uea = setup(5);
        let a = LaurentSeriesU::new(
            &uea,
            vec![(0, uea.one()), (-1, gen_of(&uea, 1, 2)), (-2, gen_of(&uea, 2, 1))],
            Some(4),
            0,
        )
        .unwrap();
        let one = LaurentSeriesU::one(&uea);
        let prod = one.mul(&a).unwrap();
        for e in -4..=0 {
            assert_eq!(prod.coeff(e).unwrap(), a.coeff(e).unwrap());
        }
        assert_eq!(prod.trunc(), Some(4));
    }

    #[test]
    fn simple_product_lands_at_exponent_sum() {
        let uea = setup(5);
        let x = gen_of(&uea, 1, 2);
        let y = gen_of(&uea, 2, 1);
        let a = LaurentSeriesU::new(&uea, vec![(-1, x.clone())], Some(3), 0).unwrap();
        let b = LaurentSeriesU::new(&uea, vec![(-1, y.clone())], Some(3), 0).unwrap();
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.coeff(-2).unwrap(), x.mul(&y).unwrap());
        assert_eq!(prod.trunc(), Some(3));
    }

    #[test]
    fn product_against_brute_force_convolution() {
        let uea = setup(7);
        let mut rng = SplitMix64::new(99);
        let gens = [gen_of(&uea, 1, 1), gen_of(&uea, 1, 2), gen_of(&uea, 2, 1), uea.one()];
        for _ in 0..20 {
            let mut mk = |top: i64, k: i64, rng: &mut SplitMix64| {
                let coeffs: Vec<(i64, EnvElement<Fp>)> = (-k..=top)
                    .map(|e| {
                        (e, gens[(rng.next_u64() % 4) as usize].scale(&(rng.next_u64() % 7)))
                    })
                    .collect();
                LaurentSeriesU::new(&uea, coeffs, Some(k), top).unwrap()
            };
            let a = mk(1, 4, &mut rng);
            let b = mk(0, 3, &mut rng);
            let prod = a.mul(&b).unwrap();
            // brute-force each known coefficient of the product
            let k_prod = prod.trunc().unwrap();
            assert_eq!(k_prod, (4 - 0).min(3 - 1));
            for e in -k_prod..=prod.topdeg() {
                let mut want = uea.zero();
                for ea in -4..=1i64 {
                    let eb = e - ea;
                    if !(-3..=0).contains(&eb) {
                        continue;
                    }
                    want = want
                        .add(&a.coeff(ea).unwrap().mul(&b.coeff(eb).unwrap()).unwrap())
                        .unwrap();
                }
                assert_eq!(prod.coeff(e).unwrap(), want, "exponent {e}");
            }
        }
    }

    #[test]
    fn reading_below_truncation_errors() {
        let uea = setup(5);
        let a = LaurentSeriesU::new(&uea, vec![(0, uea.one())], Some(2), 0).unwrap();
        assert!(a.coeff(-2).is_ok());
        assert!(matches!(
            a.coeff(-3),
            Err(Error::UnknownCoefficient { exponent: -3, trunc: 2 })
        ));
    }

    #[test]
    fn shift_examples() {
        let uea = setup(5);
        let one = LaurentSeriesU::one(&uea);
        let shifted = one.shift_u(&3).unwrap();
        assert_eq!(shifted.coeff(0).unwrap(), uea.one());
        let a = LaurentSeriesU::new(
            &uea,
            vec![(0, uea.one()), (-1, gen_of(&uea, 1, 2)), (-3, gen_of(&uea, 1, 1))],
            Some(6),
            0,
        )
        .unwrap();
        assert_eq!(a.shift_u(&0).unwrap().coeff(-3).unwrap(), a.coeff(-3).unwrap());
        // shifting by c then -c is the identity on the known range
        let fp = uea.ring.clone();
        let back = a.shift_u(&2).unwrap().shift_u(&fp.neg(&2)).unwrap();
        for e in -6..=0 {
            assert_eq!(back.coeff(e).unwrap(), a.coeff(e).unwrap(), "exponent {e}");
        }
    }

    #[test]
    fn shift_distributes_over_product() {
        let uea = setup(7);
        let a = LaurentSeriesU::new(
            &uea,
            vec![(0, uea.one()), (-1, gen_of(&uea, 1, 2))],
            Some(5),
            0,
        )
        .unwrap();
        let b = LaurentSeriesU::new(
            &uea,
            vec![(0, uea.one()), (-2, gen_of(&uea, 2, 1))],
            Some(5),
            0,
        )
        .unwrap();
        let lhs = a.mul(&b).unwrap().shift_u(&4).unwrap();
        let rhs = a.shift_u(&4).unwrap().mul(&b.shift_u(&4).unwrap()).unwrap();
        assert_eq!(lhs.trunc(), rhs.trunc());
        for e in -lhs.trunc().unwrap()..=lhs.topdeg() {
            assert_eq!(lhs.coeff(e).unwrap(), rhs.coeff(e).unwrap(), "exponent {e}");
        }
    }

    #[test]
    fn prefactor_bookkeeping() {
        let uea = setup(5);
        let one = LaurentSeriesU::one(&uea);
        // n = 1, exponents (1): multiply by u
        let p = one.polynomial_prefactor(&[1]).unwrap();
        assert_eq!(p.coeff(1).unwrap(), uea.one());
        assert!(p.coeff(0).unwrap().is_zero());
        // prefactor of 1 is the polynomial itself: u^1 (u-1)^2
        let p = one.polynomial_prefactor(&[1, 2]).unwrap();
        assert_eq!(p.topdeg(), 3);
        assert_eq!(p.coeff(3).unwrap(), uea.one());
        assert_eq!(p.coeff(2).unwrap(), uea.scalar(uea.ring.from_int(-2)));
        assert_eq!(p.coeff(1).unwrap(), uea.one());
        // truncated input keeps its knowledge window shifted by the degree
        let a = LaurentSeriesU::new(&uea, vec![(0, uea.one())], Some(6), 0).unwrap();
        let pa = a.polynomial_prefactor(&[1, 2]).unwrap();
        assert_eq!(pa.trunc(), Some(3));
    }

    #[test]
    fn binomials_match_lucas_oracle() {
        for p in [2u64, 3, 5] {
            for r in 1..=20u64 {
                for k in 0..=20u64 {
                    let exact = crate::arith::binomial(r + k - 1, k);
                    let reduced = (exact % num_bigint::BigInt::from(p)).to_u64().unwrap();
                    assert_eq!(
                        reduced,
                        lucas_binomial_mod_p(r + k - 1, k, p),
                        "p={p} r={r} k={k}"
                    );
                }
            }
        }
    }
}
