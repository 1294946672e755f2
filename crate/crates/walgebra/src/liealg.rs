//! Structure-constant Lie algebras with p-power maps.
//!
//! Four families are provided: `gl_N` (optionally graded by a pyramid), the
//! abstract centralizer of the pyramid's nilpotent element, and the shifted
//! current algebra with either a hard degree cap or the level truncation.
//! Structure constants are small integers; coefficient rings only enter in
//! the enveloping algebra layer.

use crate::arith::Ring;
use crate::combin::{Pyramid, ShiftMatrix};
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::Arc;

/// A basis label; `E` is a matrix unit, `C` a centralizer element
/// `c[i,j;r]`, `T` a current-algebra element `et[i,j;r]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisLabel {
    E { i: usize, j: usize },
    C { i: usize, j: usize, r: usize },
    T { i: usize, j: usize, r: usize },
}

impl BasisLabel {
    pub fn show(&self) -> String {
        match self {
            BasisLabel::E { i, j } => format!("e[{i},{j}]"),
            BasisLabel::C { i, j, r } => format!("c[{i},{j};{r}]"),
            BasisLabel::T { i, j, r } => format!("et[{i},{j};{r}]"),
        }
    }
}

#[derive(Debug)]
enum Kind {
    Gl { n: usize, pyramid: Option<Arc<Pyramid>> },
    Centralizer { sigma: ShiftMatrix, parts: Vec<usize> },
    Current { sigma: ShiftMatrix, cap: usize },
    TruncatedCurrent { sigma: ShiftMatrix, parts: Vec<usize> },
}

/// A Lie algebra presented by a labelled basis with computed structure
/// constants, a `[p]`-map on basis elements, and an optional integer grading.
#[derive(Debug)]
pub struct LieAlgebra {
    kind: Kind,
    labels: Vec<BasisLabel>,
    index: HashMap<BasisLabel, usize>,
}

/// A linear combination of basis elements with integer coefficients.
pub type IntCombo = Vec<(usize, i64)>;

fn combine(terms: Vec<(usize, i64)>) -> IntCombo {
    let mut map: HashMap<usize, i64> = HashMap::new();
    for (idx, c) in terms {
        *map.entry(idx).or_insert(0) += c;
    }
    let mut out: IntCombo = map.into_iter().filter(|&(_, c)| c != 0).collect();
    out.sort_unstable();
    out
}

impl LieAlgebra {
    fn build(kind: Kind, labels: Vec<BasisLabel>) -> Arc<LieAlgebra> {
        let index = labels.iter().enumerate().map(|(k, &l)| (l, k)).collect();
        Arc::new(LieAlgebra { kind, labels, index })
    }

    /// `gl_N` with basis the matrix units, ungraded.
    pub fn gl(n: usize) -> Arc<LieAlgebra> {
        let mut labels = Vec::with_capacity(n * n);
        for i in 1..=n {
            for j in 1..=n {
                labels.push(BasisLabel::E { i, j });
            }
        }
        LieAlgebra::build(Kind::Gl { n, pyramid: None }, labels)
    }

    /// `gl_N` for the pyramid's boxes, graded by column difference.
    pub fn gl_for(pyramid: &Arc<Pyramid>) -> Arc<LieAlgebra> {
        let n = pyramid.boxes();
        let mut labels = Vec::with_capacity(n * n);
        for i in 1..=n {
            for j in 1..=n {
                labels.push(BasisLabel::E { i, j });
            }
        }
        LieAlgebra::build(Kind::Gl { n, pyramid: Some(Arc::clone(pyramid)) }, labels)
    }

    /// The centralizer of the pyramid's nilpotent element, with its abstract
    /// basis `c[i,j;r]`, `s[i,j] <= r < s[i,j] + p_min(i,j)`, graded by `r`.
    pub fn centralizer(pyramid: &Arc<Pyramid>) -> Arc<LieAlgebra> {
        let sigma = pyramid.shift_matrix();
        let parts = pyramid.parts().to_vec();
        let n = pyramid.n();
        let mut labels = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                let s = sigma.get(i, j);
                for r in s..s + parts[i.min(j) - 1] {
                    labels.push(BasisLabel::C { i, j, r });
                }
            }
        }
        LieAlgebra::build(Kind::Centralizer { sigma, parts }, labels)
    }

    /// The shifted current algebra, truncated at a hard degree cap; bracket
    /// or p-power results beyond the cap are errors.
    pub fn current(sigma: ShiftMatrix, cap: usize) -> Result<Arc<LieAlgebra>> {
        let n = sigma.n();
        let max_shift = (1..=n)
            .flat_map(|i| (1..=n).map(move |j| (i, j)))
            .map(|(i, j)| sigma.get(i, j))
            .max()
            .unwrap_or(0);
        if cap < max_shift {
            return Err(Error::TruncationExceeded(format!(
                "cap {cap} below the largest shift {max_shift}"
            )));
        }
        let mut labels = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                for r in sigma.get(i, j)..=cap {
                    labels.push(BasisLabel::T { i, j, r });
                }
            }
        }
        Ok(LieAlgebra::build(Kind::Current { sigma, cap }, labels))
    }

    /// The level-`l` truncation of the shifted current algebra, with basis
    /// `et[i,j;r]`, `s[i,j] <= r < s[i,j] + p_min(i,j)`.
    pub fn truncated_current(sigma: ShiftMatrix, level: usize) -> Result<Arc<LieAlgebra>> {
        let parts = sigma.partition_at_level(level)?;
        let n = sigma.n();
        let mut labels = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                let s = sigma.get(i, j);
                for r in s..s + parts[i.min(j) - 1] {
                    labels.push(BasisLabel::T { i, j, r });
                }
            }
        }
        Ok(LieAlgebra::build(Kind::TruncatedCurrent { sigma, parts }, labels))
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, idx: usize) -> BasisLabel {
        self.labels[idx]
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn index_of(&self, label: BasisLabel) -> Option<usize> {
        self.index.get(&label).copied()
    }

    pub fn pyramid(&self) -> Option<&Arc<Pyramid>> {
        match &self.kind {
            Kind::Gl { pyramid, .. } => pyramid.as_ref(),
            _ => None,
        }
    }

    /// Matrix size for `gl` kinds.
    pub fn gl_size(&self) -> Option<usize> {
        match &self.kind {
            Kind::Gl { n, .. } => Some(*n),
            _ => None,
        }
    }

    /// The grading degree of a basis element, when the algebra is graded.
    pub fn grading(&self, idx: usize) -> Option<i64> {
        match (&self.kind, self.labels[idx]) {
            (Kind::Gl { pyramid: Some(p), .. }, BasisLabel::E { i, j }) => {
                Some(p.col(j) as i64 - p.col(i) as i64)
            }
            (Kind::Gl { pyramid: None, .. }, _) => None,
            (_, BasisLabel::C { r, .. }) | (_, BasisLabel::T { r, .. }) => Some(r as i64),
            _ => None,
        }
    }

    /// The bracket `[x_a, x_b]` as an integer combination of basis elements.
    pub fn bracket(&self, a: usize, b: usize) -> Result<IntCombo> {
        match &self.kind {
            Kind::Gl { .. } => {
                let (BasisLabel::E { i: a1, j: b1 }, BasisLabel::E { i: c1, j: d1 }) =
                    (self.labels[a], self.labels[b])
                else {
                    unreachable!()
                };
                let mut terms = Vec::new();
                if b1 == c1 {
                    terms.push((self.index[&BasisLabel::E { i: a1, j: d1 }], 1));
                }
                if d1 == a1 {
                    terms.push((self.index[&BasisLabel::E { i: c1, j: b1 }], -1));
                }
                Ok(combine(terms))
            }
            Kind::Centralizer { sigma, parts } => {
                let (BasisLabel::C { i, j, r }, BasisLabel::C { i: k, j: l, r: s }) =
                    (self.labels[a], self.labels[b])
                else {
                    unreachable!()
                };
                let mut terms = Vec::new();
                if j == k {
                    if let Some(idx) = self.c_or_absorbed(sigma, parts, i, l, r + s)? {
                        terms.push((idx, 1));
                    }
                }
                if i == l {
                    if let Some(idx) = self.c_or_absorbed(sigma, parts, k, j, r + s)? {
                        terms.push((idx, -1));
                    }
                }
                Ok(combine(terms))
            }
            Kind::Current { sigma, cap } => {
                let (BasisLabel::T { i, j, r }, BasisLabel::T { i: k, j: l, r: s }) =
                    (self.labels[a], self.labels[b])
                else {
                    unreachable!()
                };
                let mut terms = Vec::new();
                if j == k || i == l {
                    if r + s > *cap {
                        return Err(Error::TruncationExceeded(format!(
                            "bracket lands in degree {} > cap {cap}",
                            r + s
                        )));
                    }
                }
                if j == k {
                    debug_assert!(r + s >= sigma.get(i, l));
                    terms.push((self.index[&BasisLabel::T { i, j: l, r: r + s }], 1));
                }
                if i == l {
                    debug_assert!(r + s >= sigma.get(k, j));
                    terms.push((self.index[&BasisLabel::T { i: k, j, r: r + s }], -1));
                }
                Ok(combine(terms))
            }
            Kind::TruncatedCurrent { sigma, parts } => {
                let (BasisLabel::T { i, j, r }, BasisLabel::T { i: k, j: l, r: s }) =
                    (self.labels[a], self.labels[b])
                else {
                    unreachable!()
                };
                let mut terms = Vec::new();
                if j == k {
                    if let Some(idx) = self.t_or_absorbed(sigma, parts, i, l, r + s)? {
                        terms.push((idx, 1));
                    }
                }
                if i == l {
                    if let Some(idx) = self.t_or_absorbed(sigma, parts, k, j, r + s)? {
                        terms.push((idx, -1));
                    }
                }
                Ok(combine(terms))
            }
        }
    }

    fn c_or_absorbed(
        &self,
        sigma: &ShiftMatrix,
        parts: &[usize],
        i: usize,
        j: usize,
        r: usize,
    ) -> Result<Option<usize>> {
        let s = sigma.get(i, j);
        if r >= s + parts[i.min(j) - 1] {
            return Ok(None); // zero by convention
        }
        if r < s {
            return Err(Error::InvalidArgument(format!(
                "c[{i},{j};{r}] below shift {s}; shift matrix violates subadditivity"
            )));
        }
        Ok(Some(self.index[&BasisLabel::C { i, j, r }]))
    }

    fn t_or_absorbed(
        &self,
        sigma: &ShiftMatrix,
        parts: &[usize],
        i: usize,
        j: usize,
        r: usize,
    ) -> Result<Option<usize>> {
        let s = sigma.get(i, j);
        if r >= s + parts[i.min(j) - 1] {
            return Ok(None); // lies in the truncation ideal
        }
        if r < s {
            return Err(Error::InvalidArgument(format!(
                "et[{i},{j};{r}] below shift {s}; shift matrix violates subadditivity"
            )));
        }
        Ok(Some(self.index[&BasisLabel::T { i, j, r }]))
    }

    /// The `[p]`-map on a basis element, as an integer combination.
    pub fn pmap(&self, idx: usize, p: u64) -> Result<IntCombo> {
        match (&self.kind, self.labels[idx]) {
            (Kind::Gl { .. }, BasisLabel::E { i, j }) => {
                Ok(if i == j { vec![(idx, 1)] } else { vec![] })
            }
            (Kind::Centralizer { sigma, parts }, BasisLabel::C { i, j, r }) => {
                if i != j {
                    return Ok(vec![]);
                }
                Ok(self.c_or_absorbed(sigma, parts, i, j, r * p as usize)?
                    .map(|k| vec![(k, 1)])
                    .unwrap_or_default())
            }
            (Kind::Current { cap, .. }, BasisLabel::T { i, j, r }) => {
                if i != j {
                    return Ok(vec![]);
                }
                let rp = r * p as usize;
                if rp > *cap {
                    return Err(Error::TruncationExceeded(format!(
                        "p-power lands in degree {rp} > cap {cap}"
                    )));
                }
                Ok(vec![(self.index[&BasisLabel::T { i, j, r: rp }], 1)])
            }
            (Kind::TruncatedCurrent { sigma, parts }, BasisLabel::T { i, j, r }) => {
                if i != j {
                    return Ok(vec![]);
                }
                Ok(self.t_or_absorbed(sigma, parts, i, j, r * p as usize)?
                    .map(|k| vec![(k, 1)])
                    .unwrap_or_default())
            }
            _ => unreachable!(),
        }
    }
}

/// The nilpotent element of the pyramid: the sum of `e[i,j]` over
/// horizontally adjacent boxes in the same row.
pub fn nilpotent_pairs(pyramid: &Pyramid) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 1..=pyramid.boxes() {
        for j in 1..=pyramid.boxes() {
            if pyramid.row(i) == pyramid.row(j) && pyramid.col(i) + 1 == pyramid.col(j) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// `chi(e[i,j]) = trace(e * e[i,j])`: equals 1 exactly when `(j,i)` is an
/// adjacent pair of the nilpotent element.
pub fn chi_of_unit(pyramid: &Pyramid, i: usize, j: usize) -> i64 {
    (pyramid.row(i) == pyramid.row(j) && pyramid.col(i) == pyramid.col(j) + 1) as i64
}

/// The weight values `eta(e[k,k]) = n - (q_col(k) + ... + q_l)`, one per box;
/// `eta` vanishes off the diagonal.
pub fn eta_of(pyramid: &Pyramid) -> Vec<i64> {
    let q = pyramid.heights();
    (1..=pyramid.boxes())
        .map(|k| {
            let tail: usize = q[pyramid.col(k) - 1..].iter().sum();
            pyramid.n() as i64 - tail as i64
        })
        .collect()
}

/// Indices of the `gl` basis split by the column grading: `p` (nonnegative),
/// `h` (zero) and `m` (negative).
#[derive(Debug, Clone)]
pub struct Parabolic {
    pub p: Vec<usize>,
    pub h: Vec<usize>,
    pub m: Vec<usize>,
}

pub fn parabolic_split(gl: &LieAlgebra) -> Result<Parabolic> {
    let mut out = Parabolic { p: vec![], h: vec![], m: vec![] };
    for idx in 0..gl.dim() {
        let d = gl
            .grading(idx)
            .ok_or_else(|| Error::InvalidArgument("gl algebra lacks a pyramid grading".into()))?;
        if d >= 0 {
            out.p.push(idx);
        }
        if d == 0 {
            out.h.push(idx);
        }
        if d < 0 {
            out.m.push(idx);
        }
    }
    Ok(out)
}

/// Concrete expansion of the centralizer element `c[i,j;r]` into matrix
/// units of `gl_N`: the sum of `e[h,k]` over boxes with `row(h) = i`,
/// `row(k) = j`, `col(k) - col(h) = r`.
pub fn centralizer_expansion(pyramid: &Pyramid, i: usize, j: usize, r: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for h in 1..=pyramid.boxes() {
        if pyramid.row(h) != i {
            continue;
        }
        for k in 1..=pyramid.boxes() {
            if pyramid.row(k) == j && pyramid.col(k) == pyramid.col(h) + r {
                pairs.push((h, k));
            }
        }
    }
    pairs
}

// ---- dense matrix oracles -------------------------------------------------

/// Dense integer matrix of a combination of `gl` basis elements.
pub fn to_matrix(gl: &LieAlgebra, combo: &[(usize, i64)]) -> Vec<Vec<i64>> {
    let n = gl.gl_size().expect("matrix oracle needs a gl algebra");
    let mut m = vec![vec![0i64; n]; n];
    for &(idx, c) in combo {
        let BasisLabel::E { i, j } = gl.label(idx) else { unreachable!() };
        m[i - 1][j - 1] += c;
    }
    m
}

pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let mut out = vec![vec![0i64; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn mat_commutator(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let ab = mat_mul(a, b);
    let ba = mat_mul(b, a);
    ab.iter()
        .zip(&ba)
        .map(|(r1, r2)| r1.iter().zip(r2).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn mat_pow(a: &[Vec<i64>], k: u64) -> Vec<Vec<i64>> {
    let n = a.len();
    let mut out: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    for _ in 0..k {
        out = mat_mul(&out, a);
    }
    out
}

/// Express an integer gl_N matrix back as a basis combination.
pub fn matrix_to_combo(gl: &LieAlgebra, m: &[Vec<i64>]) -> IntCombo {
    let mut out = Vec::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c != 0 {
                out.push((gl.index_of(BasisLabel::E { i: i + 1, j: j + 1 }).unwrap(), c));
            }
        }
    }
    out
}

/// Rank of an integer matrix reduced mod `p`.
pub fn rank_mod_p(m: &[Vec<i64>], p: u64) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<u64>> =
        m.iter().map(|r| r.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect()).collect();
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, pivot);
        let inv = mod_inv(a[rank][c], p);
        for x in a[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..rows {
            if r != rank && a[r][c] != 0 {
                let f = a[r][c];
                for cc in 0..cols {
                    a[r][cc] = (a[r][cc] + (p - f) * a[rank][cc]) % p;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

fn mod_inv(a: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

/// Jordan type of a nilpotent integer matrix over `F_p`, from the ranks of
/// its powers; parts are returned in increasing order.
pub fn jordan_type(m: &[Vec<i64>], p: u64) -> Vec<usize> {
    let n = m.len();
    let mut ranks = vec![n];
    let mut power: Vec<Vec<i64>> = m.to_vec();
    loop {
        let r = rank_mod_p(&power, p);
        ranks.push(r);
        if r == 0 {
            break;
        }
        power = mat_mul(&power, m);
    }
    // blocks of size >= k: rank(m^{k-1}) - rank(m^k); exactly k: difference
    // of consecutive counts
    let mut sizes = Vec::new();
    for k in 1..ranks.len() {
        let ge_k = ranks[k - 1] - ranks[k];
        let ge_k1 = if k + 1 < ranks.len() { ranks[k] - ranks[k + 1] } else { 0 };
        for _ in 0..ge_k.saturating_sub(ge_k1) {
            sizes.push(k);
        }
    }
    sizes.sort_unstable();
    sizes
}

/// Dense matrices over an arbitrary ring, for exact conjugation oracles.
pub fn mat_mul_ring<R: Ring>(ring: &R, a: &[Vec<R::Elem>], b: &[Vec<R::Elem>]) -> Vec<Vec<R::Elem>> {
    let n = a.len();
    let mut out = vec![vec![ring.zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if ring.is_zero(&a[i][k]) {
                continue;
            }
            for j in 0..n {
                let t = ring.mul(&a[i][k], &b[k][j]);
                out[i][j] = ring.add(&out[i][j], &t);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combin::pyramids_up_to;
    use crate::suite::SplitMix64;

    fn gl2() -> Arc<LieAlgebra> {
        LieAlgebra::gl(2)
    }

    fn idx(gl: &LieAlgebra, i: usize, j: usize) -> usize {
        gl.index_of(BasisLabel::E { i, j }).unwrap()
    }

    #[test]
    fn gl_bracket_sl2_relations() {
        let gl = gl2();
        let e = idx(&gl, 1, 2);
        let f = idx(&gl, 2, 1);
        let h1 = idx(&gl, 1, 1);
        let h2 = idx(&gl, 2, 2);
        assert_eq!(gl.bracket(e, f).unwrap(), vec![(h1, 1), (h2, -1)]);
        assert_eq!(gl.bracket(h1, e).unwrap(), vec![(e, 1)]);
        assert_eq!(gl.bracket(e, e).unwrap(), vec![]);
    }

    #[test]
    fn gl_bracket_matches_dense_commutator() {
        let gl = LieAlgebra::gl(4);
        let mut rng = SplitMix64::new(7);
        for _ in 0..200 {
            let a = (rng.next_u64() % 16) as usize;
            let b = (rng.next_u64() % 16) as usize;
            let abstract_bracket = to_matrix(&gl, &gl.bracket(a, b).unwrap());
            let dense =
                mat_commutator(&to_matrix(&gl, &[(a, 1)]), &to_matrix(&gl, &[(b, 1)]));
            assert_eq!(abstract_bracket, dense);
        }
    }

    #[test]
    fn jacobi_holds_on_constructed_algebras() {
        let pyr = Pyramid::from_heights(&[1, 2, 1]).unwrap();
        let algebras = vec![
            LieAlgebra::gl(3),
            LieAlgebra::centralizer(&pyr),
            LieAlgebra::truncated_current(pyr.shift_matrix(), pyr.level()).unwrap(),
        ];
        for alg in algebras {
            let d = alg.dim();
            assert!(d <= 40);
            for a in 0..d {
                for b in 0..d {
                    // antisymmetry
                    let ab = alg.bracket(a, b).unwrap();
                    let ba = alg.bracket(b, a).unwrap();
                    let neg_ba: IntCombo = ba.iter().map(|&(i, c)| (i, -c)).collect();
                    assert_eq!(ab, neg_ba);
                    for c in 0..d {
                        let mut acc: HashMap<usize, i64> = HashMap::new();
                        for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                            for (m, cm) in alg.bracket(y, z).unwrap() {
                                for (t, ct) in alg.bracket(x, m).unwrap() {
                                    *acc.entry(t).or_insert(0) += cm * ct;
                                }
                            }
                        }
                        assert!(acc.values().all(|&v| v == 0), "jacobi fails");
                    }
                }
            }
        }
    }

    #[test]
    fn nilpotent_element_shape() {
        // single row of two boxes: e = e[1,2]
        let pyr = Pyramid::from_heights(&[1, 1]).unwrap();
        assert_eq!(nilpotent_pairs(&pyr), vec![(1, 2)]);
        // single column: no adjacent pairs
        let pyr = Pyramid::from_heights(&[2]).unwrap();
        assert!(nilpotent_pairs(&pyr).is_empty());
    }

    #[test]
    fn nilpotent_jordan_type_matches_partition() {
        for q in [vec![1usize, 3, 3, 2, 1], vec![2, 2], vec![1, 2, 2]] {
            let pyr = Pyramid::from_heights(&q).unwrap();
            let gl = LieAlgebra::gl_for(&pyr);
            let combo: IntCombo = nilpotent_pairs(&pyr)
                .into_iter()
                .map(|(i, j)| (gl.index_of(BasisLabel::E { i, j }).unwrap(), 1))
                .collect();
            let e = to_matrix(&gl, &combo);
            for p in [2u64, 3, 5] {
                assert_eq!(jordan_type(&e, p), pyr.parts().to_vec(), "q = {q:?}, p = {p}");
            }
        }
    }

    #[test]
    fn chi_values() {
        let pyr = Pyramid::from_heights(&[1, 1]).unwrap();
        assert_eq!(chi_of_unit(&pyr, 2, 1), 1);
        assert_eq!(chi_of_unit(&pyr, 1, 2), 0);
        assert_eq!(chi_of_unit(&pyr, 1, 1), 0);
    }

    #[test]
    fn chi_vanishes_off_degree_minus_one() {
        let pyr = Pyramid::from_heights(&[1, 3, 3, 2, 1]).unwrap();
        let gl = LieAlgebra::gl_for(&pyr);
        for idx in 0..gl.dim() {
            let BasisLabel::E { i, j } = gl.label(idx) else { unreachable!() };
            if gl.grading(idx).unwrap() != -1 {
                assert_eq!(chi_of_unit(&pyr, i, j), 0, "chi(e[{i},{j}])");
            }
        }
    }

    #[test]
    fn eta_values_on_paper_pyramid() {
        let pyr = Pyramid::from_heights(&[1, 3, 3, 2, 1]).unwrap();
        let eta = eta_of(&pyr);
        // box 1 sits in column 2: eta = 3 - (3+3+2+1) = -6
        assert_eq!(eta[0], -6);
        // eta is constant along columns
        for a in 1..=pyr.boxes() {
            for b in 1..=pyr.boxes() {
                if pyr.col(a) == pyr.col(b) {
                    assert_eq!(eta[a - 1], eta[b - 1]);
                }
            }
        }
    }

    #[test]
    fn parabolic_split_small() {
        let pyr = Pyramid::from_heights(&[1, 1]).unwrap();
        let gl = LieAlgebra::gl_for(&pyr);
        let parab = parabolic_split(&gl).unwrap();
        assert_eq!(parab.p.len(), 3);
        assert_eq!(parab.m.len(), 1);
        let pyr = Pyramid::from_heights(&[2]).unwrap();
        let gl = LieAlgebra::gl_for(&pyr);
        let parab = parabolic_split(&gl).unwrap();
        assert_eq!(parab.p.len(), 4);
        assert!(parab.m.is_empty());
    }

    #[test]
    fn parabolic_partitions_the_basis() {
        for pyr in pyramids_up_to(6) {
            let gl = LieAlgebra::gl_for(&pyr);
            let parab = parabolic_split(&gl).unwrap();
            let n2 = pyr.boxes() * pyr.boxes();
            assert_eq!(parab.p.len() + parab.m.len(), n2);
        }
    }

    #[test]
    fn grading_is_multiplicative_under_bracket() {
        let pyr = Pyramid::from_heights(&[1, 2, 2]).unwrap();
        let gl = LieAlgebra::gl_for(&pyr);
        for a in 0..gl.dim() {
            for b in 0..gl.dim() {
                let expect = gl.grading(a).unwrap() + gl.grading(b).unwrap();
                for (t, _) in gl.bracket(a, b).unwrap() {
                    assert_eq!(gl.grading(t).unwrap(), expect);
                }
            }
        }
    }

    #[test]
    fn centralizer_bracket_example() {
        // [c[1,2;r], c[2,1;s]] = c[1,1;r+s] - c[2,2;r+s]
        let pyr = Pyramid::from_heights(&[2, 2]).unwrap();
        let ge = LieAlgebra::centralizer(&pyr);
        let a = ge.index_of(BasisLabel::C { i: 1, j: 2, r: 0 }).unwrap();
        let b = ge.index_of(BasisLabel::C { i: 2, j: 1, r: 0 }).unwrap();
        let c11 = ge.index_of(BasisLabel::C { i: 1, j: 1, r: 0 }).unwrap();
        let c22 = ge.index_of(BasisLabel::C { i: 2, j: 2, r: 0 }).unwrap();
        let got = ge.bracket(a, b).unwrap();
        assert_eq!(got, combine(vec![(c11, 1), (c22, -1)]));
        // diagonal brackets vanish
        assert_eq!(ge.bracket(c11, c11).unwrap(), vec![]);
    }

    #[test]
    fn centralizer_dimension_count() {
        for pyr in pyramids_up_to(8) {
            let ge = LieAlgebra::centralizer(&pyr);
            let n = pyr.n();
            let expect: usize = (1..=n)
                .flat_map(|i| (1..=n).map(move |j| (i, j)))
                .map(|(i, j)| pyr.parts()[i.min(j) - 1])
                .sum();
            assert_eq!(ge.dim(), expect);
        }
    }

    #[test]
    fn centralizer_expansion_commutes_with_e() {
        for q in [vec![1usize, 3, 3, 2, 1], vec![1, 2, 2]] {
            let pyr = Pyramid::from_heights(&q).unwrap();
            let gl = LieAlgebra::gl_for(&pyr);
            let ge = LieAlgebra::centralizer(&pyr);
            let e_combo: IntCombo = nilpotent_pairs(&pyr)
                .into_iter()
                .map(|(i, j)| (gl.index_of(BasisLabel::E { i, j }).unwrap(), 1))
                .collect();
            let e_mat = to_matrix(&gl, &e_combo);
            for idx in 0..ge.dim() {
                let BasisLabel::C { i, j, r } = ge.label(idx) else { unreachable!() };
                let pairs = centralizer_expansion(&pyr, i, j, r);
                assert!(!pairs.is_empty(), "c[{i},{j};{r}] expands to zero");
                let combo: IntCombo = pairs
                    .into_iter()
                    .map(|(h, k)| (gl.index_of(BasisLabel::E { i: h, j: k }).unwrap(), 1))
                    .collect();
                let c_mat = to_matrix(&gl, &combo);
                let comm = mat_commutator(&c_mat, &e_mat);
                assert!(comm.iter().all(|row| row.iter().all(|&x| x == 0)));
            }
        }
    }

    #[test]
    fn current_bracket_and_cap() {
        let pyr = Pyramid::from_heights(&[1, 2, 2]).unwrap();
        let sigma = pyr.shift_matrix();
        let cur = LieAlgebra::current(sigma, 4).unwrap();
        let a = cur.index_of(BasisLabel::T { i: 1, j: 1, r: 2 }).unwrap();
        let b = cur.index_of(BasisLabel::T { i: 1, j: 1, r: 3 }).unwrap();
        assert!(cur.bracket(a, b).is_err(), "cap exceeded must error");
        assert_eq!(cur.bracket(a, a).unwrap(), vec![]);
        // (e_{i,i} t^2)^[p] with p = 2 stays within cap 4
        let sq = cur.pmap(a, 2).unwrap();
        assert_eq!(sq, vec![(cur.index_of(BasisLabel::T { i: 1, j: 1, r: 4 }).unwrap(), 1)]);
        assert!(cur.pmap(b, 2).is_err());
    }

    #[test]
    fn truncation_ideal_basis_shape() {
        // the truncated current algebra has exactly the centralizer's
        // index ranges
        let pyr = Pyramid::from_heights(&[1, 3, 3, 2, 1]).unwrap();
        let tc = LieAlgebra::truncated_current(pyr.shift_matrix(), pyr.level()).unwrap();
        let ge = LieAlgebra::centralizer(&pyr);
        assert_eq!(tc.dim(), ge.dim());
        for idx in 0..tc.dim() {
            let BasisLabel::T { i, j, r } = tc.label(idx) else { unreachable!() };
            assert!(ge.index_of(BasisLabel::C { i, j, r }).is_some());
        }
    }
}
