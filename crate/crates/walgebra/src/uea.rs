//! Exact arithmetic in universal enveloping algebras.
//!
//! Elements are sparse combinations of ordered PBW monomials over a fixed
//! total order of the Lie algebra basis.  Products are straightened with
//! `xy = yx + [x,y]`; normal forms of words are memoized, which is where
//! nearly all the runtime goes.

use crate::arith::Ring;
use crate::liealg::{chi_of_unit, eta_of, mat_mul_ring, BasisLabel, LieAlgebra};
use crate::{Error, Result};
use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::{Arc, RwLock};

pub type Pos = u16;

/// An ordered PBW monomial: factors `(position, exponent)` sorted by
/// position, zero exponents never stored.  The empty monomial is 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    factors: Vec<(Pos, u32)>,
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial::default()
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(Pos, u32)] {
        &self.factors
    }

    pub fn total_degree(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64).sum()
    }

    /// Build from `(position, exponent)` factors, which must be strictly
    /// increasing in position with positive exponents.
    pub fn from_factors(factors: Vec<(Pos, u32)>) -> Result<Monomial> {
        for w in factors.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidArgument("factors not strictly increasing".into()));
            }
        }
        if factors.iter().any(|&(_, e)| e == 0) {
            return Err(Error::InvalidArgument("zero exponent".into()));
        }
        Ok(Monomial { factors })
    }

    fn from_sorted_word(word: &[Pos]) -> Monomial {
        let mut factors: Vec<(Pos, u32)> = Vec::new();
        for &p in word {
            match factors.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
        Monomial { factors }
    }

    fn word(&self) -> Vec<Pos> {
        let mut w = Vec::with_capacity(self.total_degree() as usize);
        for &(p, e) in &self.factors {
            for _ in 0..e {
                w.push(p);
            }
        }
        w
    }
}

/// Boundaries of the basis groups in a pyramid ordering.  Positions in
/// `[0, lowering_end)` are the within-column lowering operators, then the
/// diagonal, then within-column raising, then the rest of the parabolic's
/// nilradical, then the opposite nilradical `m` as a tail.
#[derive(Clone, Copy, Debug)]
pub struct PyramidGroups {
    pub lowering_end: usize,
    pub cartan_end: usize,
    pub raising_end: usize,
    pub p_end: usize,
}

type Terms<E> = Vec<(Monomial, E)>;

/// An enveloping algebra: a coefficient ring, a Lie algebra and a fixed
/// basis order, plus the straightening cache.
pub struct Uea<R: Ring> {
    pub ring: R,
    pub algebra: Arc<LieAlgebra>,
    order: Vec<usize>,
    pos_of: Vec<Pos>,
    groups: Option<PyramidGroups>,
    cache: RwLock<HashMap<Box<[Pos]>, Arc<Terms<R::Elem>>>>,
    id: u64,
}

static NEXT_UEA_ID: AtomicU64 = AtomicU64::new(1);

impl<R: Ring> Uea<R> {
    /// An enveloping algebra over the basis in its natural label order.
    pub fn natural(ring: R, algebra: Arc<LieAlgebra>) -> Arc<Uea<R>> {
        let order: Vec<usize> = (0..algebra.dim()).collect();
        Uea::with_order(ring, algebra, order, None)
    }

    /// The ordering used for a pyramid's `gl_N`: within-column lowering
    /// first, then diagonal, then within-column raising, then the rest of
    /// the parabolic, with all of `m` at the tail (as the projection to
    /// `U(p)` requires).
    pub fn pyramid_order(ring: R, algebra: Arc<LieAlgebra>) -> Result<Arc<Uea<R>>> {
        let pyr = algebra
            .pyramid()
            .ok_or_else(|| Error::OrderingViolation("algebra lacks a pyramid".into()))?
            .clone();
        let mut groups: [Vec<usize>; 5] = Default::default();
        for idx in 0..algebra.dim() {
            let BasisLabel::E { i, j } = algebra.label(idx) else { unreachable!() };
            let d = pyr.col(j) as i64 - pyr.col(i) as i64;
            let g = if d < 0 {
                4
            } else if d > 0 {
                3
            } else if i == j {
                1
            } else if pyr.row(i) > pyr.row(j) {
                0
            } else {
                2
            };
            groups[g].push(idx);
        }
        let bounds = PyramidGroups {
            lowering_end: groups[0].len(),
            cartan_end: groups[0].len() + groups[1].len(),
            raising_end: groups[0].len() + groups[1].len() + groups[2].len(),
            p_end: algebra.dim() - groups[4].len(),
        };
        let order: Vec<usize> = groups.into_iter().flatten().collect();
        Ok(Uea::with_order(ring, algebra, order, Some(bounds)))
    }

    /// An enveloping algebra with an explicitly given basis order.
    pub fn ordered(ring: R, algebra: Arc<LieAlgebra>, order: Vec<usize>) -> Result<Arc<Uea<R>>> {
        if order.len() != algebra.dim() {
            return Err(Error::OrderingViolation("order has the wrong length".into()));
        }
        let mut seen = vec![false; algebra.dim()];
        for &idx in &order {
            if idx >= algebra.dim() || seen[idx] {
                return Err(Error::OrderingViolation("order is not a permutation".into()));
            }
            seen[idx] = true;
        }
        Ok(Uea::with_order(ring, algebra, order, None))
    }

    fn with_order(
        ring: R,
        algebra: Arc<LieAlgebra>,
        order: Vec<usize>,
        groups: Option<PyramidGroups>,
    ) -> Arc<Uea<R>> {
        let mut pos_of = vec![0 as Pos; order.len()];
        for (pos, &idx) in order.iter().enumerate() {
            pos_of[idx] = pos as Pos;
        }
        Arc::new(Uea {
            ring,
            algebra,
            order,
            pos_of,
            groups,
            cache: RwLock::new(HashMap::new()),
            id: NEXT_UEA_ID.fetch_add(1, AtomicOrdering::Relaxed),
        })
    }

    pub fn groups(&self) -> Option<PyramidGroups> {
        self.groups
    }

    pub fn basis_at(&self, pos: Pos) -> usize {
        self.order[pos as usize]
    }

    pub fn pos_of(&self, basis: usize) -> Pos {
        self.pos_of[basis]
    }

    /// Straighten a word of basis positions into PBW normal form.
    fn nf_word(self: &Arc<Self>, word: &[Pos]) -> Result<Arc<Terms<R::Elem>>> {
        let Some(k) = word.windows(2).position(|w| w[0] > w[1]) else {
            return Ok(Arc::new(vec![(Monomial::from_sorted_word(word), self.ring.one())]));
        };
        if let Some(hit) = self.cache.read().unwrap().get(word) {
            return Ok(Arc::clone(hit));
        }
        let mut acc: BTreeMap<Monomial, R::Elem> = BTreeMap::new();
        let mut swapped = word.to_vec();
        swapped.swap(k, k + 1);
        for (m, c) in self.nf_word(&swapped)?.iter() {
            add_term(&self.ring, &mut acc, m.clone(), c.clone());
        }
        let bracket =
            self.algebra.bracket(self.order[word[k] as usize], self.order[word[k + 1] as usize])?;
        for (bidx, sc) in bracket {
            let mut shorter = Vec::with_capacity(word.len() - 1);
            shorter.extend_from_slice(&word[..k]);
            shorter.push(self.pos_of[bidx]);
            shorter.extend_from_slice(&word[k + 2..]);
            let scale = self.ring.from_int(sc);
            for (m, c) in self.nf_word(&shorter)?.iter() {
                add_term(&self.ring, &mut acc, m.clone(), self.ring.mul(c, &scale));
            }
        }
        let result = Arc::new(acc.into_iter().collect::<Terms<R::Elem>>());
        self.cache.write().unwrap().insert(word.into(), Arc::clone(&result));
        Ok(result)
    }

    pub fn zero(self: &Arc<Self>) -> EnvElement<R> {
        EnvElement { uea: Arc::clone(self), terms: BTreeMap::new() }
    }

    pub fn scalar(self: &Arc<Self>, c: R::Elem) -> EnvElement<R> {
        let mut terms = BTreeMap::new();
        if !self.ring.is_zero(&c) {
            terms.insert(Monomial::one(), c);
        }
        EnvElement { uea: Arc::clone(self), terms }
    }

    pub fn one(self: &Arc<Self>) -> EnvElement<R> {
        self.scalar(self.ring.one())
    }

    /// The generator for a Lie algebra basis index.
    pub fn gen(self: &Arc<Self>, basis: usize) -> EnvElement<R> {
        let mut terms = BTreeMap::new();
        terms.insert(
            Monomial { factors: vec![(self.pos_of[basis], 1)] },
            self.ring.one(),
        );
        EnvElement { uea: Arc::clone(self), terms }
    }

    /// A Lie element given as a combination of basis indices.
    pub fn from_lie(self: &Arc<Self>, combo: &[(usize, R::Elem)]) -> EnvElement<R> {
        let mut out = self.zero();
        for (basis, c) in combo {
            if self.ring.is_zero(c) {
                continue;
            }
            add_term(
                &self.ring,
                &mut out.terms,
                Monomial { factors: vec![(self.pos_of[*basis], 1)] },
                c.clone(),
            );
        }
        out
    }

    pub fn from_int_combo(self: &Arc<Self>, combo: &[(usize, i64)]) -> EnvElement<R> {
        let lifted: Vec<(usize, R::Elem)> =
            combo.iter().map(|&(b, c)| (b, self.ring.from_int(c))).collect();
        self.from_lie(&lifted)
    }

    /// Assemble an element from prebuilt monomials, pruning zeros.
    pub fn element_from_terms(
        self: &Arc<Self>,
        terms: impl IntoIterator<Item = (Monomial, R::Elem)>,
    ) -> EnvElement<R> {
        let mut out = self.zero();
        for (m, c) in terms {
            add_term(&self.ring, &mut out.terms, m, c);
        }
        out
    }

    pub fn cache_len(&self) -> usize {
        self.cache.read().unwrap().len()
    }
}

fn add_term<R: Ring>(ring: &R, map: &mut BTreeMap<Monomial, R::Elem>, m: Monomial, c: R::Elem) {
    if ring.is_zero(&c) {
        return;
    }
    match map.entry(m) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = ring.add(o.get(), &c);
            if ring.is_zero(&sum) {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

/// Which filtration a degree refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeKind {
    /// Column-difference degree of each Lie factor.
    Loop,
    /// Column difference plus one per Lie factor.
    Kazhdan,
}

/// A sparse element of an enveloping algebra in PBW normal form.
#[derive(Clone)]
pub struct EnvElement<R: Ring> {
    uea: Arc<Uea<R>>,
    terms: BTreeMap<Monomial, R::Elem>,
}

impl<R: Ring> PartialEq for EnvElement<R> {
    fn eq(&self, other: &Self) -> bool {
        self.uea.id == other.uea.id && self.terms == other.terms
    }
}

impl<R: Ring> std::fmt::Debug for EnvElement<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "EnvElement({})", self.show())
    }
}

impl<R: Ring> EnvElement<R> {
    pub fn uea(&self) -> &Arc<Uea<R>> {
        &self.uea
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &R::Elem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> R::Elem {
        self.terms.get(m).cloned().unwrap_or_else(|| self.uea.ring.zero())
    }

    /// The coefficient of the empty monomial.
    pub fn scalar_part(&self) -> R::Elem {
        self.coefficient(&Monomial::one())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.uea.id != other.uea.id {
            return Err(Error::MixedAlgebra);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            add_term(&self.uea.ring, &mut out.terms, m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let ring = &self.uea.ring;
        EnvElement {
            uea: Arc::clone(&self.uea),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), ring.neg(c))).collect(),
        }
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let ring = &self.uea.ring;
        let mut out = self.uea.zero();
        for (m, x) in &self.terms {
            add_term(ring, &mut out.terms, m.clone(), ring.mul(x, c));
        }
        out
    }

    /// Product in PBW normal form.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let ring = self.uea.ring.clone();
        let mut out = self.uea.zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let cab = ring.mul(ca, cb);
                if ma.is_one() {
                    add_term(&ring, &mut out.terms, mb.clone(), cab);
                    continue;
                }
                if mb.is_one() {
                    add_term(&ring, &mut out.terms, ma.clone(), cab);
                    continue;
                }
                let mut word = ma.word();
                word.extend(mb.word());
                for (m, c) in self.uea.nf_word(&word)?.iter() {
                    add_term(&ring, &mut out.terms, m.clone(), ring.mul(&cab, c));
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u64) -> Result<Self> {
        let mut acc = self.uea.one();
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// `ad(x) u = xu - ux` for a basis element `x`.
    pub fn ad_by_basis(&self, basis: usize) -> Result<Self> {
        let x = self.uea.gen(basis);
        x.commutator(self)
    }

    /// True iff every Lie factor lies in the parabolic (grading >= 0).
    pub fn lies_in_parabolic(&self) -> bool {
        self.terms.keys().all(|m| {
            m.factors.iter().all(|&(pos, _)| {
                self.uea.algebra.grading(self.uea.basis_at(pos)).is_some_and(|d| d >= 0)
            })
        })
    }

    /// The projection `U(g) -> U(p)` along `U(g) m_chi`: trailing factors
    /// from `m` are evaluated at `chi`.
    pub fn pr(&self) -> Result<Self> {
        let groups = self
            .uea
            .groups()
            .ok_or_else(|| Error::OrderingViolation("projection needs the pyramid order".into()))?;
        let pyr = self.uea.algebra.pyramid().unwrap().clone();
        let ring = self.uea.ring.clone();
        let mut out = self.uea.zero();
        'term: for (m, c) in &self.terms {
            let mut prefix = Vec::new();
            for &(pos, e) in &m.factors {
                if (pos as usize) < groups.p_end {
                    prefix.push((pos, e));
                } else {
                    let BasisLabel::E { i, j } = self.uea.algebra.label(self.uea.basis_at(pos))
                    else {
                        unreachable!()
                    };
                    if chi_of_unit(&pyr, i, j) == 0 {
                        continue 'term;
                    }
                }
            }
            add_term(&ring, &mut out.terms, Monomial { factors: prefix }, c.clone());
        }
        Ok(out)
    }

    /// Degree for the chosen filtration; undefined on zero.
    pub fn degree(&self, kind: DegreeKind) -> Result<i64> {
        self.term_degrees(kind)?.into_iter().max().ok_or(Error::ZeroDegree)
    }

    fn term_degrees(&self, kind: DegreeKind) -> Result<Vec<i64>> {
        self.terms
            .keys()
            .map(|m| {
                let mut d = 0i64;
                for &(pos, e) in &m.factors {
                    let g = self.uea.algebra.grading(self.uea.basis_at(pos)).ok_or_else(|| {
                        Error::InvalidArgument("degree needs a graded algebra".into())
                    })?;
                    let per = match kind {
                        DegreeKind::Loop => g,
                        DegreeKind::Kazhdan => g + 1,
                    };
                    d += per * e as i64;
                }
                Ok(d)
            })
            .collect()
    }

    /// The sum of the terms of maximal degree.
    pub fn gr_top(&self, kind: DegreeKind) -> Result<Self> {
        let degrees = self.term_degrees(kind)?;
        let top = *degrees.iter().max().ok_or(Error::ZeroDegree)?;
        let mut out = self.uea.zero();
        for ((m, c), d) in self.terms.iter().zip(degrees) {
            if d == top {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        Ok(out)
    }

    /// The automorphism generated by `x -> x + w(x)` on Lie factors, for a
    /// character `w` given by its values on basis elements.
    pub fn shift_cartan(&self, w: &[i64]) -> Result<Self> {
        let ring = self.uea.ring.clone();
        let mut out = self.uea.zero();
        for (m, c) in &self.terms {
            let mut term = self.uea.scalar(c.clone());
            for &(pos, e) in &m.factors {
                let basis = self.uea.basis_at(pos);
                let shifted = self
                    .uea
                    .gen(basis)
                    .add(&self.uea.scalar(ring.from_int(w[basis])))?;
                term = term.mul(&shifted.pow(e as u64)?)?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// The shift automorphism `x -> x - eta(x)` on `U(p)`.
    pub fn s_minus_eta(&self) -> Result<Self> {
        if !self.lies_in_parabolic() {
            return Err(Error::InvalidArgument(
                "shift by eta is defined on the parabolic's enveloping algebra".into(),
            ));
        }
        let pyr = self
            .uea
            .algebra
            .pyramid()
            .ok_or_else(|| Error::InvalidArgument("algebra lacks a pyramid".into()))?;
        let eta = eta_of(pyr);
        let mut w = vec![0i64; self.uea.algebra.dim()];
        for idx in 0..self.uea.algebra.dim() {
            if let BasisLabel::E { i, j } = self.uea.algebra.label(idx) {
                if i == j {
                    w[idx] = -eta[i - 1];
                }
            }
        }
        self.shift_cartan(&w)
    }

    /// Conjugation by the root element `1 + t e[a,b]` applied to every Lie
    /// factor; exact because `e[a,b]^2 = 0` off the diagonal.
    pub fn conjugate_by_root_element(&self, a: usize, b: usize, t: &R::Elem) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidArgument("root element needs a != b".into()));
        }
        let alg = &self.uea.algebra;
        let n = alg
            .gl_size()
            .ok_or_else(|| Error::InvalidArgument("conjugation needs a gl algebra".into()))?;
        if a > n || b > n {
            return Err(Error::InvalidArgument("box index out of range".into()));
        }
        if let Some(pyr) = alg.pyramid() {
            if pyr.col(b) >= pyr.col(a) {
                return Err(Error::InvalidArgument(
                    "root element must come from the opposite nilradical (col(b) < col(a))".into(),
                ));
            }
        }
        let ring = self.uea.ring.clone();
        let t2 = ring.mul(t, t);
        let eab = alg.index_of(BasisLabel::E { i: a, j: b }).unwrap();
        let mut images: HashMap<usize, EnvElement<R>> = HashMap::new();
        let mut out = self.uea.zero();
        for (m, c) in &self.terms {
            let mut term = self.uea.scalar(c.clone());
            for &(pos, e) in &m.factors {
                let basis = self.uea.basis_at(pos);
                let image = images.entry(basis).or_insert_with(|| {
                    let BasisLabel::E { i, j } = alg.label(basis) else { unreachable!() };
                    // (1 + tE)x(1 - tE) = x + t(d_{b,i} e[a,j] - d_{j,a} e[i,b])
                    //                       - t^2 d_{b,i} d_{j,a} e[a,b]
                    let mut combo: Vec<(usize, R::Elem)> = vec![(basis, ring.one())];
                    if b == i {
                        combo.push((alg.index_of(BasisLabel::E { i: a, j }).unwrap(), t.clone()));
                    }
                    if j == a {
                        combo.push((
                            alg.index_of(BasisLabel::E { i, j: b }).unwrap(),
                            ring.neg(t),
                        ));
                    }
                    if b == i && j == a {
                        combo.push((eab, ring.neg(&t2)));
                    }
                    self.uea.from_lie(&combo)
                });
                term = term.mul(&image.pow(e as u64)?)?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Carry the element into another enveloping algebra over the same Lie
    /// algebra and ordering, mapping each coefficient through `f`.
    pub fn map_coefficients<R2: Ring>(
        &self,
        target: &Arc<Uea<R2>>,
        f: impl Fn(&R::Elem) -> R2::Elem,
    ) -> Result<EnvElement<R2>> {
        if !Arc::ptr_eq(&self.uea.algebra, &target.algebra) || self.uea.order != target.order {
            return Err(Error::MixedAlgebra);
        }
        let mut out = target.zero();
        for (m, c) in &self.terms {
            add_term(&target.ring, &mut out.terms, m.clone(), f(c));
        }
        Ok(out)
    }

    /// Deterministic dump: terms in monomial order, balanced coefficients.
    pub fn show(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let ring = &self.uea.ring;
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let coeff = ring.show(c);
            let coeff = if ring.is_atomic(c) { coeff } else { format!("({coeff})") };
            let factors: Vec<String> = m
                .factors
                .iter()
                .map(|&(pos, e)| {
                    let label = self.uea.algebra.label(self.uea.basis_at(pos)).show();
                    if e == 1 {
                        label
                    } else {
                        format!("{label}^{e}")
                    }
                })
                .collect();
            let part = if factors.is_empty() {
                coeff
            } else if coeff == "1" {
                factors.join("*")
            } else if coeff == "-1" {
                format!("-{}", factors.join("*"))
            } else {
                format!("{coeff}*{}", factors.join("*"))
            };
            parts.push(part);
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            if let Some(rest) = p.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(p);
            }
        }
        out
    }
}

/// `xi(x) = x^p - x^[p]` for a Lie element.  For basis elements the p-power
/// map is read off the algebra; for sums over a `gl` kind it is the p-th
/// power of the concrete matrix.
pub fn xi_p<R: Ring>(
    uea: &Arc<Uea<R>>,
    combo: &[(usize, R::Elem)],
    p: u64,
) -> Result<EnvElement<R>> {
    let x = uea.from_lie(combo);
    let xp = x.pow(p)?;
    let pth = lie_p_power(uea, combo, p)?;
    xp.sub(&pth)
}

/// The `[p]`-power of a Lie element as an element of degree <= 1.
pub fn lie_p_power<R: Ring>(
    uea: &Arc<Uea<R>>,
    combo: &[(usize, R::Elem)],
    p: u64,
) -> Result<EnvElement<R>> {
    let ring = uea.ring.clone();
    if combo.len() <= 1 {
        let mut out = uea.zero();
        for (basis, c) in combo {
            let image = uea.algebra.pmap(*basis, p)?;
            let cp = ring.pow(c, p);
            for (b2, s) in image {
                out = out.add(&uea.gen(b2).scale(&ring.mul(&cp, &ring.from_int(s))))?;
            }
        }
        return Ok(out);
    }
    let n = uea.algebra.gl_size().ok_or_else(|| {
        Error::InvalidArgument("p-power of a sum needs a matrix realization".into())
    })?;
    let mut mat = vec![vec![ring.zero(); n]; n];
    for (basis, c) in combo {
        let BasisLabel::E { i, j } = uea.algebra.label(*basis) else { unreachable!() };
        mat[i - 1][j - 1] = ring.add(&mat[i - 1][j - 1], c);
    }
    let mut power: Vec<Vec<R::Elem>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { ring.one() } else { ring.zero() }).collect()).collect();
    for _ in 0..p {
        power = mat_mul_ring(&ring, &power, &mat);
    }
    let mut out = uea.zero();
    for (i, row) in power.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if !ring.is_zero(c) {
                let basis = uea.algebra.index_of(BasisLabel::E { i: i + 1, j: j + 1 }).unwrap();
                out = out.add(&uea.gen(basis).scale(c))?;
            }
        }
    }
    Ok(out)
}

impl EnvElement<crate::arith::Fp> {
    /// Normal form in the restricted quotient: every occurrence of `x^p` for
    /// a basis element `x` is replaced by `x^[p]` until all exponents are
    /// below `p`.
    pub fn restricted_reduce(&self) -> Result<Self> {
        let p = self.uea.ring.p();
        let ring = self.uea.ring.clone();
        let mut out = self.uea.zero();
        let mut work: Vec<(Monomial, u64)> =
            self.terms.iter().map(|(m, c)| (m.clone(), *c)).collect();
        while let Some((m, c)) = work.pop() {
            let Some(hot) = m.factors.iter().position(|&(_, e)| e as u64 >= p) else {
                add_term(&ring, &mut out.terms, m, c);
                continue;
            };
            let (pos, e) = m.factors[hot];
            let basis = self.uea.basis_at(pos);
            let image = self.uea.algebra.pmap(basis, p)?;
            // rebuild the monomial with x^p replaced in place by x^[p]
            for (b2, s) in image {
                let mut word: Vec<Pos> = Vec::new();
                for &(q, eq) in &m.factors[..hot] {
                    for _ in 0..eq {
                        word.push(q);
                    }
                }
                for _ in 0..(e as u64 - p) {
                    word.push(pos);
                }
                word.push(self.uea.pos_of(b2));
                for &(q, eq) in &m.factors[hot + 1..] {
                    for _ in 0..eq {
                        word.push(q);
                    }
                }
                let scale = ring.mul(&c, &ring.from_int(s));
                for (m2, c2) in self.uea.nf_word(&word)?.iter() {
                    let cc = ring.mul(&scale, c2);
                    if !ring.is_zero(&cc) {
                        work.push((m2.clone(), cc));
                    }
                }
            }
            // the [p]-image may be empty (off-diagonal), dropping the term
        }
        Ok(out)
    }
}

// ---- parsing of the dump grammar -------------------------------------------

/// Parse an element dump such as `2*e[1,2]^3*c[1,1;0] - 5` back into an
/// element; inverse to [`EnvElement::show`] on its image.
pub fn parse_element<R: Ring>(uea: &Arc<Uea<R>>, text: &str) -> Result<EnvElement<R>> {
    let mut out = uea.zero();
    let text = text.trim();
    if text.is_empty() || text == "0" {
        return Ok(out);
    }
    for (sign, term) in split_terms(text)? {
        let mut acc = uea.scalar(uea.ring.from_int(sign));
        for factor in term.split('*') {
            let factor = factor.trim();
            if factor.is_empty() {
                return Err(Error::Parse(format!("empty factor in {term:?}")));
            }
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (
                    b.trim(),
                    e.trim().parse::<u64>().map_err(|e| Error::Parse(e.to_string()))?,
                ),
                None => (factor, 1),
            };
            let piece = if let Ok(n) = base.parse::<i64>() {
                uea.scalar(uea.ring.from_int(n))
            } else {
                uea.gen(parse_label(uea, base)?)
            };
            acc = acc.mul(&piece.pow(exp)?)?;
        }
        out = out.add(&acc)?;
    }
    Ok(out)
}

fn split_terms(text: &str) -> Result<Vec<(i64, String)>> {
    let mut out = Vec::new();
    let mut sign = 1i64;
    let mut current = String::new();
    let mut depth = 0i32;
    for ch in text.chars() {
        match ch {
            '(' => {
                depth += 1;
                current.push(ch);
            }
            ')' => {
                depth -= 1;
                current.push(ch);
            }
            '+' | '-' if depth == 0 => {
                if !current.trim().is_empty() {
                    out.push((sign, current.trim().to_string()));
                }
                sign = if ch == '-' { -1 } else { 1 };
                current = String::new();
            }
            _ => current.push(ch),
        }
    }
    if !current.trim().is_empty() {
        out.push((sign, current.trim().to_string()));
    }
    if out.is_empty() {
        return Err(Error::Parse(format!("no terms in {text:?}")));
    }
    Ok(out)
}

fn parse_label<R: Ring>(uea: &Arc<Uea<R>>, text: &str) -> Result<usize> {
    let err = || Error::Parse(format!("bad basis label {text:?}"));
    let (name, rest) = text.split_once('[').ok_or_else(err)?;
    let body = rest.strip_suffix(']').ok_or_else(err)?;
    let label = match name {
        "e" => {
            let (i, j) = body.split_once(',').ok_or_else(err)?;
            BasisLabel::E {
                i: i.trim().parse().map_err(|_| err())?,
                j: j.trim().parse().map_err(|_| err())?,
            }
        }
        "c" | "et" => {
            let (ij, r) = body.split_once(';').ok_or_else(err)?;
            let (i, j) = ij.split_once(',').ok_or_else(err)?;
            let i = i.trim().parse().map_err(|_| err())?;
            let j = j.trim().parse().map_err(|_| err())?;
            let r = r.trim().parse().map_err(|_| err())?;
            if name == "c" {
                BasisLabel::C { i, j, r }
            } else {
                BasisLabel::T { i, j, r }
            }
        }
        _ => return Err(err()),
    };
    uea.algebra
        .index_of(label)
        .ok_or_else(|| Error::Parse(format!("label {text:?} not in the algebra's basis")))
}
