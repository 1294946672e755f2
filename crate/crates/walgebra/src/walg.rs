//! The special elements attached to a pyramid and a prime: diagonal
//! generators of the commutative subalgebra in `U(p)`, their products as
//! series in `u^{-1}`, the Capelli determinant, p-centre generators, central
//! elements of the centralizer's enveloping algebra, torus weights and
//! twisted invariance.

use crate::arith::{Fp, Integers, PolyRing, Ring};
use crate::combin::{Pyramid, ShiftMatrix};
use crate::liealg::{centralizer_expansion, eta_of, nilpotent_pairs, parabolic_split, BasisLabel, LieAlgebra, Parabolic};
use crate::series::LaurentSeriesU;
use crate::uea::{xi_p, EnvElement, Uea};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::One;
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

/// Everything derived from a pyramid and a prime: the graded `gl_N`, its
/// enveloping algebras over `F_p` and over the integers, the abstract
/// centralizer, and the weight values.
pub struct WContext {
    pub pyramid: Arc<Pyramid>,
    pub sigma: ShiftMatrix,
    pub p: u64,
    pub fp: Fp,
    pub gl: Arc<LieAlgebra>,
    pub parab: Parabolic,
    pub eta: Vec<i64>,
    pub uea: Arc<Uea<Fp>>,
    pub uea_z: Arc<Uea<Integers>>,
    pub ge: Arc<LieAlgebra>,
    pub uge: Arc<Uea<Fp>>,
    pub trunc: i64,
    polyt: OnceLock<Arc<Uea<PolyRing<Fp>>>>,
    d_cache: RwLock<HashMap<(usize, usize), EnvElement<Fp>>>,
}

impl WContext {
    pub fn new(pyramid: Arc<Pyramid>, p: u64) -> Result<Arc<WContext>> {
        let trunc = pyramid.boxes() as i64 + 2 * p as i64;
        WContext::with_trunc(pyramid, p, trunc)
    }

    pub fn with_trunc(pyramid: Arc<Pyramid>, p: u64, trunc: i64) -> Result<Arc<WContext>> {
        let fp = Fp::new(p)?;
        let sigma = pyramid.shift_matrix();
        let gl = LieAlgebra::gl_for(&pyramid);
        let parab = parabolic_split(&gl)?;
        let eta = eta_of(&pyramid);
        let uea = Uea::pyramid_order(fp.clone(), Arc::clone(&gl))?;
        let uea_z = Uea::pyramid_order(Integers, Arc::clone(&gl))?;
        let ge = LieAlgebra::centralizer(&pyramid);
        let uge = Uea::ordered(fp.clone(), Arc::clone(&ge), centralizer_order(&ge))?;
        Ok(Arc::new(WContext {
            pyramid,
            sigma,
            p,
            fp,
            gl,
            parab,
            eta,
            uea,
            uea_z,
            ge,
            uge,
            trunc,
            polyt: OnceLock::new(),
            d_cache: RwLock::new(HashMap::new()),
        }))
    }

    /// Enveloping algebra over `F_p[t]`, for conjugation with a symbolic
    /// parameter.
    pub fn uea_polyt(&self) -> &Arc<Uea<PolyRing<Fp>>> {
        self.polyt.get_or_init(|| {
            Uea::pyramid_order(PolyRing::new(self.fp.clone(), "t"), Arc::clone(&self.gl))
                .expect("pyramid order exists")
        })
    }

    pub fn unit(&self, i: usize, j: usize) -> usize {
        self.gl.index_of(BasisLabel::E { i, j }).unwrap()
    }

    /// The nilpotent element as an element of `U(g)`.
    pub fn nilpotent_env(&self) -> EnvElement<Fp> {
        let combo: Vec<(usize, i64)> =
            nilpotent_pairs(&self.pyramid).into_iter().map(|(i, j)| (self.unit(i, j), 1)).collect();
        self.uea.from_int_combo(&combo)
    }

    /// The concrete expansion of `c[i,j;r]` as a Lie element of `U(g)`.
    pub fn centralizer_env(&self, i: usize, j: usize, r: usize) -> EnvElement<Fp> {
        let combo: Vec<(usize, i64)> = centralizer_expansion(&self.pyramid, i, j, r)
            .into_iter()
            .map(|(h, k)| (self.unit(h, k), 1))
            .collect();
        self.uea.from_int_combo(&combo)
    }

    /// `eta` applied to the expansion of `c[i,i;r]` (nonzero only at `r = 0`).
    pub fn eta_of_centralizer(&self, i: usize, j: usize, r: usize) -> i64 {
        centralizer_expansion(&self.pyramid, i, j, r)
            .into_iter()
            .filter(|&(h, k)| h == k)
            .map(|(h, _)| self.eta[h - 1])
            .sum()
    }

    /// The diagonal generator, cached.
    pub fn d_gen(&self, i: usize, r: usize) -> Result<EnvElement<Fp>> {
        if let Some(hit) = self.d_cache.read().unwrap().get(&(i, r)) {
            return Ok(hit.clone());
        }
        let v = d_generator_in(&self.uea, &self.pyramid, &self.eta, i, r)?;
        self.d_cache.write().unwrap().insert((i, r), v.clone());
        Ok(v)
    }

    /// The same element over the integers (the integral form).
    pub fn d_gen_integral(&self, i: usize, r: usize) -> Result<EnvElement<Integers>> {
        d_generator_in(&self.uea_z, &self.pyramid, &self.eta, i, r)
    }

    pub fn reduce_mod_p(&self, u: &EnvElement<Integers>) -> Result<EnvElement<Fp>> {
        let fp = self.fp.clone();
        u.map_coefficients(&self.uea, |c| fp.from_bigint(c))
    }
}

/// Basis order for the centralizer's enveloping algebra: strictly-lower
/// labels first, diagonal in the middle, strictly-upper last, each block
/// lexicographic in `(i, j, r)`.
fn centralizer_order(ge: &LieAlgebra) -> Vec<usize> {
    let mut lower = Vec::new();
    let mut diag = Vec::new();
    let mut upper = Vec::new();
    let mut keyed: Vec<(usize, usize, usize, usize)> = Vec::new();
    for idx in 0..ge.dim() {
        let BasisLabel::C { i, j, r } = ge.label(idx) else { unreachable!() };
        keyed.push((i, j, r, idx));
    }
    keyed.sort_unstable();
    for (i, j, _r, idx) in keyed {
        if i > j {
            lower.push(idx);
        } else if i == j {
            diag.push(idx);
        } else {
            upper.push(idx);
        }
    }
    lower.into_iter().chain(diag).chain(upper).collect()
}

// ---- the diagonal generators ------------------------------------------------

/// Index chains of the defining sum: pairs `(i_t, j_t)` of boxes satisfying
/// the walk conditions, together with the overall sign of the summand.
pub fn dir_chains(pyr: &Pyramid, row: usize, r: usize) -> Vec<(i64, Vec<(usize, usize)>)> {
    let n_boxes = pyr.boxes();
    let mut out = Vec::new();
    for s in 1..=r {
        let budget = r - s;
        let lead_sign = if (r - s) % 2 == 0 { 1 } else { -1 };
        let mut chain: Vec<(usize, usize)> = Vec::with_capacity(s);
        dfs(pyr, row, s, budget, n_boxes, lead_sign, 0, &mut chain, &mut out);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    pyr: &Pyramid,
    row: usize,
    s: usize,
    budget_left: usize,
    n_boxes: usize,
    lead_sign: i64,
    row_sign_count: usize,
    chain: &mut Vec<(usize, usize)>,
    out: &mut Vec<(i64, Vec<(usize, usize)>)>,
) {
    let t = chain.len() + 1;
    for i_t in 1..=n_boxes {
        if t == 1 {
            if pyr.row(i_t) != row {
                continue;
            }
        } else {
            let prev_j = chain[t - 2].1;
            if pyr.row(i_t) != pyr.row(prev_j) {
                continue;
            }
            if pyr.row(prev_j) >= row {
                if pyr.col(i_t) <= pyr.col(prev_j) {
                    continue;
                }
            } else if pyr.col(i_t) > pyr.col(prev_j) {
                continue;
            }
        }
        for j_t in 1..=n_boxes {
            if pyr.col(j_t) < pyr.col(i_t) {
                continue;
            }
            let step = pyr.col(j_t) - pyr.col(i_t);
            if step > budget_left {
                continue;
            }
            if t == s {
                if pyr.row(j_t) != row || step != budget_left {
                    continue;
                }
                let sign = lead_sign * if row_sign_count % 2 == 0 { 1 } else { -1 };
                chain.push((i_t, j_t));
                out.push((sign, chain.clone()));
                chain.pop();
            } else {
                let extra = (pyr.row(j_t) < row) as usize;
                chain.push((i_t, j_t));
                dfs(
                    pyr,
                    row,
                    s,
                    budget_left - step,
                    n_boxes,
                    lead_sign,
                    row_sign_count + extra,
                    chain,
                    out,
                );
                chain.pop();
            }
        }
    }
}

/// The diagonal generator `D_i^{(r)}` in `U(p)`: the signed chain sum of
/// products of `e[i,j] + eta(e[i,j])`, in PBW normal form.
pub fn d_generator_in<R: Ring>(
    uea: &Arc<Uea<R>>,
    pyr: &Arc<Pyramid>,
    eta: &[i64],
    i: usize,
    r: usize,
) -> Result<EnvElement<R>> {
    if i == 0 || i > pyr.n() {
        return Err(Error::InvalidArgument(format!("row {i} out of range 1..={}", pyr.n())));
    }
    if r == 0 {
        return Ok(uea.one());
    }
    let ring = uea.ring.clone();
    let mut out = uea.zero();
    for (sign, chain) in dir_chains(pyr, i, r) {
        let mut term = uea.scalar(ring.from_int(sign));
        for (a, b) in chain {
            let basis = uea.algebra.index_of(BasisLabel::E { i: a, j: b }).unwrap();
            let mut factor = uea.gen(basis);
            if a == b {
                factor = factor.add(&uea.scalar(ring.from_int(eta[a - 1])))?;
            }
            term = term.mul(&factor)?;
        }
        out = out.add(&term)?;
    }
    Ok(out)
}

/// The p-centre generator: the same chain sum with each factor replaced by
/// `e^p - e^[p]`; the factors are central in `U(p)`.
pub fn p_centre_d(ctx: &WContext, i: usize, r: usize) -> Result<EnvElement<Fp>> {
    if i == 0 || i > ctx.pyramid.n() {
        return Err(Error::InvalidArgument(format!("row {i} out of range",)));
    }
    let uea = &ctx.uea;
    let ring = uea.ring.clone();
    let mut out = uea.zero();
    for (sign, chain) in dir_chains(&ctx.pyramid, i, r) {
        let mut term = uea.scalar(ring.from_int(sign));
        for (a, b) in chain {
            let basis = ctx.unit(a, b);
            let factor = xi_p(uea, &[(basis, ring.one())], ctx.p)?;
            term = term.mul(&factor)?;
        }
        out = out.add(&term)?;
    }
    Ok(out)
}

// ---- twisted invariance ------------------------------------------------------

/// True iff `pr(Ad(1 + t e[a,b]) u) = u` identically in the polynomial
/// variable `t`, for every root pair with `col(b) < col(a)`.
pub fn tw_invariance_check(ctx: &WContext, u: &EnvElement<Fp>) -> Result<bool> {
    if !u.lies_in_parabolic() {
        return Err(Error::InvalidArgument("twisted action is defined on U(p)".into()));
    }
    let up = ctx.uea_polyt();
    let ring = up.ring.clone();
    let ut = u.map_coefficients(up, |c| ring.constant(*c))?;
    let t = ring.gen();
    let n = ctx.pyramid.boxes();
    for a in 1..=n {
        for b in 1..=n {
            if ctx.pyramid.col(b) >= ctx.pyramid.col(a) {
                continue;
            }
            let conj = ut.conjugate_by_root_element(a, b, &t)?;
            if conj.pr()? != ut {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---- series -------------------------------------------------------------------

/// The series `D_i(u) = 1 + sum_{r >= 1} D_i^{(r)} u^{-r}` truncated at `K`.
pub fn d_series(ctx: &WContext, i: usize, k: i64) -> Result<LaurentSeriesU<Fp>> {
    let mut coeffs = vec![(0i64, ctx.uea.one())];
    for r in 1..=k {
        coeffs.push((-r, ctx.d_gen(i, r as usize)?));
    }
    LaurentSeriesU::new(&ctx.uea, coeffs, Some(k), 0)
}

/// `C(u) = D_1(u) D_2(u-1) ... D_n(u-(n-1))`.
pub fn c_series(ctx: &WContext, k: i64) -> Result<LaurentSeriesU<Fp>> {
    let mut acc = LaurentSeriesU::one(&ctx.uea);
    for i in 1..=ctx.pyramid.n() {
        let shifted = d_series(ctx, i, k)?.shift_u(&ctx.fp.from_int(i as i64 - 1))?;
        acc = acc.mul(&shifted)?;
    }
    Ok(acc)
}

/// `B_i(u) = D_i(u) D_i(u-1) ... D_i(u-(p-1))`.
pub fn b_series(ctx: &WContext, i: usize, k: i64) -> Result<LaurentSeriesU<Fp>> {
    let base = d_series(ctx, i, k)?;
    let mut acc = LaurentSeriesU::one(&ctx.uea);
    for j in 0..ctx.p {
        acc = acc.mul(&base.shift_u(&ctx.fp.from_int(j as i64))?)?;
    }
    Ok(acc)
}

/// The `u^{-m}` coefficient of `B_i(u)`.
pub fn b_coeff(ctx: &WContext, i: usize, m: i64) -> Result<EnvElement<Fp>> {
    b_series(ctx, i, m)?.coeff(-m)
}

/// Coefficients `Z_0 .. Z_{N+k'}` of `u^{p_1}(u-1)^{p_2}...(u-(n-1))^{p_n} C(u)`
/// at the powers `u^{N-r}`.
pub fn z_coeffs(ctx: &WContext, kprime: i64) -> Result<Vec<EnvElement<Fp>>> {
    let n_boxes = ctx.pyramid.boxes() as i64;
    let k = n_boxes + kprime;
    if k > ctx.trunc {
        return Err(Error::TruncationExceeded(format!(
            "needs series truncation {k}, context provides {}",
            ctx.trunc
        )));
    }
    let c = c_series(ctx, k)?;
    let z = c.polynomial_prefactor(ctx.pyramid.parts())?;
    (0..=n_boxes + kprime).map(|r| z.coeff(n_boxes - r)).collect()
}

// ---- the Capelli determinant ---------------------------------------------------

/// Coefficients `Z^(1) .. Z^(N)` of the column determinant of
/// `(e[i,j] + d_ij (u - i + 1))`, collected at `u^{N-r}`.  Expansion is by
/// columns with memoization on the set of used rows.
pub fn capelli<R: Ring>(uea: &Arc<Uea<R>>) -> Result<Vec<EnvElement<R>>> {
    let n = uea
        .algebra
        .gl_size()
        .ok_or_else(|| Error::InvalidArgument("Capelli determinant needs a gl algebra".into()))?;
    let ring = uea.ring.clone();
    let full: u32 = (1u32 << n) - 1;
    let mut memo: HashMap<u32, Vec<EnvElement<R>>> = HashMap::new();
    memo.insert(full, vec![uea.one()]);
    let det = capelli_rec(uea, n, 0, &mut memo)?;
    debug_assert_eq!(det.len(), n + 1);
    debug_assert_eq!(det[n], uea.one());
    let _ = ring;
    Ok((1..=n).map(|r| det[n - r].clone()).collect())
}

fn capelli_rec<R: Ring>(
    uea: &Arc<Uea<R>>,
    n: usize,
    mask: u32,
    memo: &mut HashMap<u32, Vec<EnvElement<R>>>,
) -> Result<Vec<EnvElement<R>>> {
    if let Some(hit) = memo.get(&mask) {
        return Ok(hit.clone());
    }
    let ring = uea.ring.clone();
    let col = mask.count_ones() as usize + 1;
    let mut acc: Vec<EnvElement<R>> = Vec::new();
    let mut smaller_unused = 0u32;
    for row in 1..=n {
        if mask & (1 << (row - 1)) != 0 {
            continue;
        }
        let sign = if smaller_unused % 2 == 0 { 1 } else { -1 };
        smaller_unused += 1;
        let sub = capelli_rec(uea, n, mask | (1 << (row - 1)), memo)?;
        // entry a[row, col] = e[row,col] + d (u - row + 1): degree <= 1 in u
        let unit = uea.gen(uea.algebra.index_of(BasisLabel::E { i: row, j: col }).unwrap());
        let constant = if row == col {
            unit.add(&uea.scalar(ring.from_int(1 - row as i64)))?
        } else {
            unit
        };
        let signed = |x: &EnvElement<R>| if sign == 1 { x.clone() } else { x.neg() };
        for (d, coeff) in sub.iter().enumerate() {
            // constant part of the entry
            accumulate(&mut acc, d, &signed(&constant.mul(coeff)?), uea)?;
            // u part of the entry (diagonal only)
            if row == col {
                accumulate(&mut acc, d + 1, &signed(coeff), uea)?;
            }
        }
    }
    memo.insert(mask, acc.clone());
    Ok(acc)
}

fn accumulate<R: Ring>(
    acc: &mut Vec<EnvElement<R>>,
    degree: usize,
    value: &EnvElement<R>,
    uea: &Arc<Uea<R>>,
) -> Result<()> {
    while acc.len() <= degree {
        acc.push(uea.zero());
    }
    acc[degree] = acc[degree].add(value)?;
    Ok(())
}

/// True iff the projection of every Capelli coefficient to `U(p)` equals the
/// corresponding series coefficient `Z_r`.
pub fn hc_match(ctx: &WContext) -> Result<bool> {
    let caps = capelli(&ctx.uea)?;
    let zs = z_coeffs(ctx, 0)?;
    if !zs[0].eq(&ctx.uea.one()) {
        return Ok(false);
    }
    for r in 1..=ctx.pyramid.boxes() {
        if caps[r - 1].pr()? != zs[r] {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---- central elements of U(g^e) ------------------------------------------------

/// `(d_1, ..., d_N)`: `1` repeated `p_n` times, then `2` repeated `p_{n-1}`
/// times, and so on.
pub fn invariant_degrees(parts: &[usize]) -> Vec<usize> {
    let n = parts.len();
    let mut out = Vec::with_capacity(parts.iter().sum());
    for k in 0..n {
        for _ in 0..parts[n - 1 - k] {
            out.push(k + 1);
        }
    }
    out
}

/// `z_s`: the sum over subcompositions `m` of `p` with `|m| = s` and
/// `l(m) = d_s` of the m-column determinants of the shifted centralizer
/// generators; an element of `U(g^e)`, for left-justified pyramids.
pub fn z_central(ctx: &WContext, s: usize) -> Result<EnvElement<Fp>> {
    if !ctx.sigma.is_upper_triangular() {
        return Err(Error::NotLeftJustified(format!("shift matrix {:?}", ctx.sigma.rows())));
    }
    let parts = ctx.pyramid.parts();
    let n_boxes = ctx.pyramid.boxes();
    if s == 0 || s > n_boxes {
        return Err(Error::InvalidArgument(format!("s must lie in 1..={n_boxes}")));
    }
    let degrees = invariant_degrees(parts);
    let d = degrees[s - 1];
    let mut out = ctx.uge.zero();
    for m in subcompositions(parts, s, d) {
        out = out.add(&cdet_m(ctx, &m)?)?;
    }
    Ok(out)
}

fn subcompositions(parts: &[usize], total: usize, length: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        parts: &[usize],
        i: usize,
        total_left: usize,
        len_left: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == parts.len() {
            if total_left == 0 && len_left == 0 {
                out.push(current.clone());
            }
            return;
        }
        if len_left > parts.len() - i {
            return;
        }
        // zero entry
        current.push(0);
        rec(parts, i + 1, total_left, len_left, current, out);
        current.pop();
        // nonzero entries
        if len_left > 0 {
            for v in 1..=parts[i].min(total_left) {
                current.push(v);
                rec(parts, i + 1, total_left - v, len_left - 1, current, out);
                current.pop();
            }
        }
    }
    rec(parts, 0, total, length, &mut current, &mut out);
    out
}

/// The shifted generator `c[i,j;r] - d_{r,0} d_{i,j} (i-1) p_i`.
fn c_hat(ctx: &WContext, i: usize, j: usize, r: usize) -> Result<EnvElement<Fp>> {
    let idx = ctx.ge.index_of(BasisLabel::C { i, j, r }).ok_or_else(|| {
        Error::InvalidArgument(format!("c[{i},{j};{r}] outside the basis range"))
    })?;
    let mut out = ctx.uge.gen(idx);
    if r == 0 && i == j {
        let shift = (i as i64 - 1) * ctx.pyramid.parts()[i - 1] as i64;
        out = out.sub(&ctx.uge.scalar(ctx.fp.from_int(shift)))?;
    }
    Ok(out)
}

fn cdet_m(ctx: &WContext, m: &[usize]) -> Result<EnvElement<Fp>> {
    let support: Vec<usize> =
        (0..m.len()).filter(|&i| m[i] > 0).map(|i| i + 1).collect();
    let d = support.len();
    let mut perm: Vec<usize> = (0..d).collect();
    let mut out = ctx.uge.zero();
    loop {
        let mut term = ctx.uge.scalar(perm_sign(&perm, ctx));
        for (a, &wa) in perm.iter().enumerate() {
            let row = support[wa];
            let col = support[a];
            let factor = c_hat(ctx, row, col, m[col - 1] - 1)?;
            term = term.mul(&factor)?;
        }
        out = out.add(&term)?;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}

fn perm_sign(perm: &[usize], ctx: &WContext) -> u64 {
    let mut inv = 0;
    for a in 0..perm.len() {
        for b in a + 1..perm.len() {
            if perm[a] > perm[b] {
                inv += 1;
            }
        }
    }
    ctx.fp.from_int(if inv % 2 == 0 { 1 } else { -1 })
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

// ---- p-centre change of basis ----------------------------------------------------

/// The exponent sequences `(d_0, ..., d_s)` with `sum d_j = row_length` and
/// `rp = sum_{j>=1} d_j (jp - j + 1)`.
pub fn d_sequences(p: u64, row_length: usize, r: usize) -> Vec<Vec<usize>> {
    let s = r + (r - 1) / (p as usize - 1).max(1);
    let target = r * p as usize;
    let mut out = Vec::new();
    let mut d = vec![0usize; s + 1];
    fn rec(
        j: usize,
        s: usize,
        p: usize,
        row_length: usize,
        used: usize,
        weight_left: usize,
        d: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if j > s {
            if weight_left == 0 {
                d[0] = row_length - used;
                out.push(d.clone());
            }
            return;
        }
        let per = j * p - j + 1;
        let max_dj = (row_length - used).min(weight_left / per);
        for dj in 0..=max_dj {
            d[j] = dj;
            rec(j + 1, s, p, row_length, used + dj, weight_left - dj * per, d, out);
        }
        d[j] = 0;
    }
    rec(1, s, p as usize, row_length, 0, target, &mut d, &mut out);
    out
}

/// The unitriangular matrix `c[s',r]` expressing how the `B`-coefficients
/// act in terms of elementary symmetric values, together with its inverse;
/// both are `(row_length x row_length)` over `F_p`, 1-based logical indices.
pub fn hat_b_matrix(ctx: &WContext, i: usize) -> Result<(Vec<Vec<u64>>, Vec<Vec<u64>>)> {
    let pi = ctx.pyramid.parts()[i - 1];
    let fp = &ctx.fp;
    let mut c = vec![vec![0u64; pi + 1]; pi + 1];
    for r in 1..=pi {
        for d in d_sequences(ctx.p, pi, r) {
            let s_prime: usize = d[1..].iter().sum();
            let coeff = multinomial_tail(&d);
            c[s_prime][r] = fp.add(&c[s_prime][r], &fp.from_bigint(&coeff));
        }
    }
    for r in 1..=pi {
        if c[r][r] != 1 {
            return Err(Error::InvalidArgument(format!(
                "change of basis is not unitriangular at ({r},{r})"
            )));
        }
        for s in r + 1..=pi {
            if c[s][r] != 0 {
                return Err(Error::InvalidArgument("change of basis is not triangular".into()));
            }
        }
    }
    // invert the unitriangular matrix by back substitution
    let mut inv = vec![vec![0u64; pi + 1]; pi + 1];
    for r in 1..=pi {
        inv[r][r] = 1;
        for s in (1..r).rev() {
            let mut acc = 0u64;
            for t in s + 1..=r {
                acc = fp.add(&acc, &fp.mul(&c[s][t], &inv[t][r]));
            }
            inv[s][r] = fp.neg(&acc);
        }
    }
    Ok((c, inv))
}

/// `(sum_{j>=1} d_j)! / prod_{j>=1} d_j!`, exactly over the integers.
pub fn multinomial_tail(d: &[usize]) -> BigInt {
    let total: usize = d[1..].iter().sum();
    let mut acc = BigInt::one();
    for k in 2..=total {
        acc *= BigInt::from(k);
    }
    for &dj in &d[1..] {
        for k in 2..=dj {
            acc /= BigInt::from(k);
        }
    }
    acc
}

// ---- torus weights -----------------------------------------------------------------

/// The common torus weight of all terms (in `Z^n`, by row indices), `None`
/// when the terms carry different weights.
pub fn tn_weight(ctx: &WContext, u: &EnvElement<Fp>) -> Option<Vec<i64>> {
    let n = ctx.pyramid.n();
    if u.is_zero() {
        return Some(vec![0; n]);
    }
    let mut common: Option<Vec<i64>> = None;
    for (m, _) in u.terms() {
        let mut w = vec![0i64; n];
        for &(pos, e) in m.factors() {
            let BasisLabel::E { i, j } = ctx.gl.label(ctx.uea.basis_at(pos)) else {
                unreachable!()
            };
            w[ctx.pyramid.row(i) - 1] += e as i64;
            w[ctx.pyramid.row(j) - 1] -= e as i64;
        }
        match &common {
            None => common = Some(w),
            Some(c) if *c == w => {}
            _ => return None,
        }
    }
    common
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uea::DegreeKind;

    fn ctx(q: &[usize], p: u64) -> Arc<WContext> {
        WContext::new(Pyramid::from_heights(q).unwrap(), p).unwrap()
    }

    #[test]
    fn d1_is_the_shifted_row_trace() {
        let ctx = ctx(&[1, 1], 3);
        let d = ctx.d_gen(1, 1).unwrap();
        // sum of (e[k,k] + eta_k) over the single row: eta = (-1, 0)
        let want = ctx
            .uea
            .gen(ctx.unit(1, 1))
            .add(&ctx.uea.gen(ctx.unit(2, 2)))
            .unwrap()
            .add(&ctx.uea.scalar(ctx.fp.from_int(-1)))
            .unwrap();
        assert_eq!(d, want);
    }

    #[test]
    fn d1_vanishes_above_the_top_row_length() {
        for (q, p) in [(vec![1usize, 1], 3u64), (vec![1, 2, 2], 3), (vec![2, 2], 2)] {
            let ctx = ctx(&q, p);
            let p1 = ctx.pyramid.parts()[0];
            for r in p1 + 1..=p1 + 3 {
                assert!(ctx.d_gen(1, r).unwrap().is_zero(), "D_1^({r}) for q={q:?}");
            }
        }
    }

    #[test]
    fn d_generators_commute() {
        let ctx = ctx(&[1, 2, 2], 3);
        let mut gens = Vec::new();
        for i in 1..=ctx.pyramid.n() {
            for r in 1..=ctx.pyramid.parts()[i - 1] {
                gens.push(ctx.d_gen(i, r).unwrap());
            }
        }
        for a in &gens {
            for b in &gens {
                assert!(a.commutator(b).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn d_loop_top_matches_centralizer_symbol() {
        let ctx = ctx(&[1, 2, 2], 3);
        for i in 1..=ctx.pyramid.n() {
            for r in 0..ctx.pyramid.parts()[i - 1] {
                let d = ctx.d_gen(i, r + 1).unwrap();
                let top = d.gr_top(DegreeKind::Loop).unwrap();
                assert_eq!(d.degree(DegreeKind::Loop).unwrap(), r as i64);
                let symbol = ctx
                    .centralizer_env(i, i, r)
                    .add(&ctx.uea.scalar(ctx.fp.from_int(ctx.eta_of_centralizer(i, i, r))))
                    .unwrap();
                let want = if r % 2 == 0 { symbol } else { symbol.neg() };
                assert_eq!(top, want, "i={i}, r={r}");
            }
        }
    }

    #[test]
    fn d_kazhdan_degree_is_r() {
        let ctx = ctx(&[1, 2, 2], 3);
        for i in 1..=2 {
            for r in 1..=ctx.pyramid.parts()[i - 1] {
                let d = ctx.d_gen(i, r).unwrap();
                assert_eq!(d.degree(DegreeKind::Kazhdan).unwrap(), r as i64);
            }
        }
    }

    #[test]
    fn integral_form_reduces_to_fp_form() {
        let ctx = ctx(&[1, 2, 2], 3);
        for i in 1..=2 {
            for r in 1..=ctx.pyramid.parts()[i - 1] + 1 {
                let dz = ctx.d_gen_integral(i, r).unwrap();
                assert_eq!(ctx.reduce_mod_p(&dz).unwrap(), ctx.d_gen(i, r).unwrap());
            }
        }
    }

    #[test]
    fn d_generators_are_twisted_invariant() {
        let ctx = ctx(&[1, 1], 2);
        for r in 1..=2 {
            let d = ctx.d_gen(1, r).unwrap();
            assert!(tw_invariance_check(&ctx, &d).unwrap(), "r={r}");
        }
        // a bare Cartan unit is not invariant when m is nonzero
        let h = ctx.uea.gen(ctx.unit(1, 1));
        assert!(!tw_invariance_check(&ctx, &h).unwrap());
        assert!(tw_invariance_check(&ctx, &ctx.uea.one()).unwrap());
    }

    #[test]
    fn capelli_small_cases() {
        let ctx1 = ctx(&[1], 5);
        let z = capelli(&ctx1.uea).unwrap();
        assert_eq!(z.len(), 1);
        assert_eq!(z[0], ctx1.uea.gen(ctx1.unit(1, 1)));

        let ctx2 = ctx(&[1, 1], 5);
        let z = capelli(&ctx2.uea).unwrap();
        let e = |i, j| ctx2.uea.gen(ctx2.unit(i, j));
        let want1 = e(1, 1).add(&e(2, 2)).unwrap().sub(&ctx2.uea.one()).unwrap();
        assert_eq!(z[0], want1);
        let want2 = e(1, 1)
            .mul(&e(2, 2))
            .unwrap()
            .sub(&e(1, 1))
            .unwrap()
            .sub(&e(2, 1).mul(&e(1, 2)).unwrap())
            .unwrap();
        assert_eq!(z[1], want2);
    }

    #[test]
    fn capelli_coefficients_are_central() {
        for p in [2u64, 3] {
            let ctx3 = ctx(&[1, 1, 1], p);
            for z in capelli(&ctx3.uea).unwrap() {
                for b in 0..ctx3.gl.dim() {
                    assert!(z.ad_by_basis(b).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn z_series_polynomiality_small() {
        let ctx = ctx(&[1, 1], 3);
        let zs = z_coeffs(&ctx, 3).unwrap();
        assert_eq!(zs[0], ctx.uea.one());
        for r in 3..=5usize {
            assert!(zs[r].is_zero(), "Z_{r} should vanish");
        }
    }

    #[test]
    fn hc_match_single_row() {
        let ctx = ctx(&[1, 1], 3);
        assert!(hc_match(&ctx).unwrap());
    }

    #[test]
    fn invariant_degree_sequence() {
        assert_eq!(invariant_degrees(&[2, 3, 5]), vec![1, 1, 1, 1, 1, 2, 2, 2, 3, 3]);
        assert_eq!(invariant_degrees(&[1, 1, 1]), vec![1, 2, 3]);
    }

    #[test]
    fn z_central_matches_capelli_when_e_is_zero() {
        // single left-justified column: U(g^e) is U(gl_n) with c[i,j;0]
        // playing the matrix units
        let ctx = ctx(&[3], 3);
        let caps = capelli(&ctx.uea).unwrap();
        for s in 1..=3usize {
            let z = z_central(&ctx, s).unwrap();
            let translated = z.show().replace(";0]", "]").replace("c[", "e[");
            let in_gl = crate::uea::parse_element(&ctx.uea, &translated).unwrap();
            assert_eq!(in_gl, caps[s - 1], "s = {s}");
        }
    }

    #[test]
    fn z_central_commutes_with_centralizer() {
        let ctx = ctx(&[2, 2], 3);
        for s in 1..=ctx.pyramid.boxes() {
            let z = z_central(&ctx, s).unwrap();
            for b in 0..ctx.ge.dim() {
                assert!(z.ad_by_basis(b).unwrap().is_zero(), "s={s}, b={b}");
            }
        }
    }

    #[test]
    fn z_central_needs_left_justified() {
        let ctx = ctx(&[1, 3, 3, 2, 1], 3);
        assert!(matches!(z_central(&ctx, 1), Err(Error::NotLeftJustified(_))));
    }

    #[test]
    fn d_sequence_enumeration() {
        // p = 2, r = 2: two sequences
        let seqs = d_sequences(2, 3, 2);
        assert_eq!(seqs.len(), 2);
        assert!(seqs.contains(&vec![1, 2, 0, 0]));
        assert!(seqs.contains(&vec![2, 0, 0, 1]));
        // p > r: only the distinguished sequence
        let seqs = d_sequences(5, 4, 2);
        assert_eq!(seqs.len(), 1);
        assert_eq!(seqs[0][0], 2);
        assert_eq!(seqs[0][1], 2);
        assert!(seqs[0][2..].iter().all(|&d| d == 0));
    }

    #[test]
    fn distinguished_sequence_maximizes_tail_sum() {
        for p in [2u64, 3, 5] {
            for pi in 1..=4usize {
                for r in 1..=pi {
                    let seqs = d_sequences(p, pi, r);
                    let best: Vec<_> = seqs
                        .iter()
                        .filter(|d| d[1..].iter().sum::<usize>() == r)
                        .collect();
                    assert_eq!(best.len(), 1, "p={p}, pi={pi}, r={r}");
                    assert_eq!(best[0][0], pi - r);
                    assert_eq!(best[0][1], r);
                }
            }
        }
    }

    #[test]
    fn hat_b_matrix_unitriangular_and_inverse() {
        let ctx = ctx(&[1, 2, 2], 2);
        let (c, inv) = hat_b_matrix(&ctx, 2).unwrap();
        let pi = 3;
        let fp = &ctx.fp;
        for r in 1..=pi {
            for s in 1..=pi {
                let mut acc = 0u64;
                for t in 1..=pi {
                    acc = fp.add(&acc, &fp.mul(&c[s][t], &inv[t][r]));
                }
                assert_eq!(acc, (s == r) as u64);
            }
        }
    }

    #[test]
    fn torus_weights() {
        let ctx = ctx(&[1, 2, 2], 3);
        for i in 1..=2 {
            for r in 1..=ctx.pyramid.parts()[i - 1] {
                let d = ctx.d_gen(i, r).unwrap();
                assert_eq!(tn_weight(&ctx, &d), Some(vec![0, 0]), "i={i}, r={r}");
            }
        }
        // a unit crossing rows has weight eps_1 - eps_2
        let x = ctx.uea.gen(ctx.unit(1, 4));
        assert_eq!(tn_weight(&ctx, &x), Some(vec![1, -1]));
        // products add weights
        let y = ctx.uea.gen(ctx.unit(4, 5));
        assert_eq!(tn_weight(&ctx, &x.mul(&y).unwrap()), Some(vec![1, -1]));
        // mixed weights are reported
        assert_eq!(tn_weight(&ctx, &x.add(&ctx.uea.one()).unwrap()), None);
    }

    #[test]
    fn p_centre_basic_shape() {
        let ctx = ctx(&[1, 1], 2);
        let xi = p_centre_d(&ctx, 1, 1).unwrap();
        // sum of e[k,k]^p - e[k,k] over the row
        let e = |i: usize| ctx.uea.gen(ctx.unit(i, i));
        let want = e(1)
            .pow(2)
            .unwrap()
            .sub(&e(1))
            .unwrap()
            .add(&e(2).pow(2).unwrap().sub(&e(2)).unwrap())
            .unwrap();
        assert_eq!(xi, want);
        // central in U(p) and killed by the restricted quotient
        for &b in &ctx.parab.p {
            assert!(xi.ad_by_basis(b).unwrap().is_zero());
        }
        assert!(xi.restricted_reduce().unwrap().is_zero());
    }
}
