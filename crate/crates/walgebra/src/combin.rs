//! Pyramids, shift matrices, partitions and tableaux.
//!
//! A pyramid is a column-unimodal stack of boxes; it is equivalent data to a
//! shift matrix together with a level, and everything downstream (the
//! nilpotent element, the grading, the centralizer basis) is derived from it.

use crate::arith::Ring;
use crate::{Error, Result};
use std::sync::Arc;

/// An `n x n` matrix of nonnegative integers with `s[i,k] + s[k,j] = s[i,j]`
/// along monotone index triples.  Indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftMatrix {
    n: usize,
    s: Vec<Vec<usize>>,
}

impl ShiftMatrix {
    pub fn new(s: Vec<Vec<usize>>) -> Result<ShiftMatrix> {
        let n = s.len();
        if s.iter().any(|row| row.len() != n) {
            return Err(Error::ShiftMatrix("matrix is not square".into()));
        }
        let m = ShiftMatrix { n, s };
        m.validate()?;
        Ok(m)
    }

    /// Build from the superdiagonal `s[i,i+1]` and subdiagonal `s[i+1,i]`
    /// entries, which determine the whole matrix.
    pub fn from_diagonals(upper: &[usize], lower: &[usize]) -> Result<ShiftMatrix> {
        if upper.len() != lower.len() {
            return Err(Error::ShiftMatrix("diagonal lists differ in length".into()));
        }
        let n = upper.len() + 1;
        let mut s = vec![vec![0usize; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                s[i][j] = upper[i..j].iter().sum();
                s[j][i] = lower[i..j].iter().sum();
            }
        }
        ShiftMatrix::new(s)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 1..=n {
            if self.get(i, i) != 0 {
                return Err(Error::ShiftMatrix(format!("s[{i},{i}] must be 0")));
            }
        }
        for i in 1..=n {
            for k in 1..=n {
                for j in 1..=n {
                    let monotone = (i <= k && k <= j) || (i >= k && k >= j);
                    if monotone && self.get(i, j) != self.get(i, k) + self.get(k, j) {
                        return Err(Error::ShiftMatrix(format!(
                            "s[{i},{j}] != s[{i},{k}] + s[{k},{j}]"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `s[i,j]`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.s[i - 1][j - 1]
    }

    pub fn is_upper_triangular(&self) -> bool {
        (1..=self.n).all(|i| (1..i).all(|j| self.get(i, j) == 0))
    }

    /// Row lengths recovered by `p_i = l - s[i,n] - s[n,i]`.
    pub fn partition_at_level(&self, level: usize) -> Result<Vec<usize>> {
        let n = self.n;
        let bound = self.get(1, n) + self.get(n, 1);
        if level <= bound {
            return Err(Error::LevelTooSmall { level, bound });
        }
        let parts: Vec<usize> =
            (1..=n).map(|i| level - self.get(i, n) - self.get(n, i)).collect();
        for w in parts.windows(2) {
            if w[0] > w[1] {
                return Err(Error::ShiftMatrix("recovered row lengths not nondecreasing".into()));
            }
        }
        Ok(parts)
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.s
    }
}

/// A pyramid: `N` boxes stacked bottom-aligned in columns of heights
/// `q_1,...,q_l`, with `q` unimodal.  Boxes are numbered `1..=N` along rows,
/// left to right, top to bottom; rows are numbered `1..=n` from the top.
#[derive(Debug, PartialEq, Eq)]
pub struct Pyramid {
    q: Vec<usize>,
    n: usize,
    l: usize,
    parts: Vec<usize>,
    row_of: Vec<usize>,
    col_of: Vec<usize>,
    /// Column interval `(first, last)` occupied by each row, 1-based.
    spans: Vec<(usize, usize)>,
}

impl Pyramid {
    pub fn from_heights(q: &[usize]) -> Result<Arc<Pyramid>> {
        if q.is_empty() {
            return Err(Error::InvalidPyramid("no columns".into()));
        }
        if q.iter().any(|&h| h == 0) {
            return Err(Error::InvalidPyramid("zero column height".into()));
        }
        let peak = q.iter().enumerate().max_by_key(|(_, &h)| h).unwrap().0;
        if !q[..=peak].windows(2).all(|w| w[0] <= w[1])
            || !q[peak..].windows(2).all(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidPyramid(format!("heights {q:?} are not unimodal")));
        }
        let n = q[peak];
        let l = q.len();
        let mut parts = Vec::with_capacity(n);
        let mut spans = Vec::with_capacity(n);
        for i in 1..=n {
            // Row i (from the top) meets the columns of height >= n - i + 1.
            let h = n - i + 1;
            let first = q.iter().position(|&x| x >= h).unwrap() + 1;
            let last = q.iter().rposition(|&x| x >= h).unwrap() + 1;
            parts.push(last - first + 1);
            spans.push((first, last));
        }
        let mut row_of = Vec::new();
        let mut col_of = Vec::new();
        for (i, &(first, last)) in spans.iter().enumerate() {
            for c in first..=last {
                row_of.push(i + 1);
                col_of.push(c);
            }
        }
        Ok(Arc::new(Pyramid { q: q.to_vec(), n, l, parts, row_of, col_of, spans }))
    }

    /// Rebuild the pyramid from a shift matrix and a level: a bottom row of
    /// length `l`, higher rows indented according to the matrix.
    pub fn from_shift(sigma: &ShiftMatrix, level: usize) -> Result<Arc<Pyramid>> {
        let n = sigma.n();
        let bound = sigma.get(1, n) + sigma.get(n, 1);
        if level <= bound {
            return Err(Error::LevelTooSmall { level, bound });
        }
        let mut q = vec![0usize; level];
        for i in 1..=n {
            let first = 1 + sigma.get(n, i);
            let last = level - sigma.get(i, n);
            if first > last {
                return Err(Error::LevelTooSmall { level, bound });
            }
            for c in first..=last {
                q[c - 1] += 1;
            }
        }
        let pyr = Pyramid::from_heights(&q)?;
        if &pyr.shift_matrix() != sigma {
            return Err(Error::ShiftMatrix(
                "matrix does not arise from a pyramid at this level".into(),
            ));
        }
        Ok(pyr)
    }

    /// Parse the textual form "1,3,3,2,1".
    pub fn parse(text: &str) -> Result<Arc<Pyramid>> {
        let q: Vec<usize> = text
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<_>>()?;
        Pyramid::from_heights(&q)
    }

    pub fn heights(&self) -> &[usize] {
        &self.q
    }
    /// Number of rows (the largest column height).
    pub fn n(&self) -> usize {
        self.n
    }
    /// Number of columns; equals the bottom row length `p_n`.
    pub fn level(&self) -> usize {
        self.l
    }
    /// Row lengths `p_1 <= ... <= p_n`, top to bottom.
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }
    /// Total number of boxes.
    pub fn boxes(&self) -> usize {
        self.row_of.len()
    }
    /// Row of the `i`th box, 1-based.
    pub fn row(&self, i: usize) -> usize {
        self.row_of[i - 1]
    }
    /// Column of the `i`th box, 1-based.
    pub fn col(&self, i: usize) -> usize {
        self.col_of[i - 1]
    }
    /// The boxes of row `i`, left to right.
    pub fn row_boxes(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        let start: usize = self.parts[..i - 1].iter().sum();
        (start + 1)..=(start + self.parts[i - 1])
    }

    /// Shift matrix of this pyramid: for rows `i <= j`, `s[j,i]` is the left
    /// indentation and `s[i,j]` the right indentation of row `i` relative to
    /// row `j`.
    pub fn shift_matrix(&self) -> ShiftMatrix {
        let n = self.n;
        let mut s = vec![vec![0usize; n]; n];
        for i in 1..=n {
            for j in i..=n {
                let (ai, bi) = self.spans[i - 1];
                let (aj, bj) = self.spans[j - 1];
                s[i - 1][j - 1] = bj - bi;
                s[j - 1][i - 1] = ai - aj;
            }
        }
        ShiftMatrix { n, s }
    }

    /// Multiline diagram with box numbers, '.' for absent positions.
    pub fn diagram(&self) -> String {
        let width = self.boxes().to_string().len().max(1);
        let mut out = String::new();
        for i in 1..=self.n {
            let (first, last) = self.spans[i - 1];
            let mut row = Vec::with_capacity(self.l);
            let mut b = *self.row_boxes(i).start();
            for c in 1..=self.l {
                if c >= first && c <= last {
                    row.push(format!("{b:>width$}"));
                    b += 1;
                } else {
                    row.push(format!("{:>width$}", "."));
                }
            }
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// A filling of a pyramid's boxes by ring elements; entries are listed in
/// box order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau<R: Ring> {
    pub pyramid: Arc<Pyramid>,
    pub entries: Vec<R::Elem>,
}

impl<R: Ring> Tableau<R> {
    pub fn new(pyramid: Arc<Pyramid>, entries: Vec<R::Elem>) -> Result<Tableau<R>> {
        if entries.len() != pyramid.boxes() {
            return Err(Error::InvalidArgument(format!(
                "tableau needs {} entries, got {}",
                pyramid.boxes(),
                entries.len()
            )));
        }
        Ok(Tableau { pyramid, entries })
    }

    /// Parse "r1=a,b;r2=c,d,e" with integer entries mapped through the ring.
    pub fn parse(ring: &R, pyramid: Arc<Pyramid>, text: &str) -> Result<Tableau<R>> {
        let mut rows: Vec<Option<Vec<R::Elem>>> = vec![None; pyramid.n()];
        for chunk in text.split(';') {
            let (name, vals) = chunk
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("row chunk {chunk:?} lacks '='")))?;
            let name = name.trim();
            let i: usize = name
                .strip_prefix('r')
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad row name {name:?}")))?;
            if i == 0 || i > pyramid.n() {
                return Err(Error::Parse(format!("row {i} out of range")));
            }
            let entries: Vec<R::Elem> = vals
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<i64>()
                        .map(|v| ring.from_int(v))
                        .map_err(|e| Error::Parse(format!("{t:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            if entries.len() != pyramid.parts()[i - 1] {
                return Err(Error::Parse(format!(
                    "row {i} needs {} entries, got {}",
                    pyramid.parts()[i - 1],
                    entries.len()
                )));
            }
            rows[i - 1] = Some(entries);
        }
        let mut flat = Vec::with_capacity(pyramid.boxes());
        for (i, row) in rows.into_iter().enumerate() {
            let row = row.ok_or_else(|| Error::Parse(format!("row {} missing", i + 1)))?;
            flat.extend(row);
        }
        Tableau::new(pyramid, flat)
    }

    /// Entry of box `i`, 1-based.
    pub fn entry(&self, i: usize) -> &R::Elem {
        &self.entries[i - 1]
    }

    /// Entries of row `i`, left to right.
    pub fn row(&self, i: usize) -> Vec<R::Elem> {
        self.pyramid.row_boxes(i).map(|b| self.entries[b - 1].clone()).collect()
    }

    /// Canonical representative of the row-equivalence class: each row
    /// sorted ascending in the fixed order on ring elements.
    pub fn canonical(&self) -> Tableau<R> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for i in 1..=self.pyramid.n() {
            let mut row = self.row(i);
            row.sort();
            entries.extend(row);
        }
        Tableau { pyramid: Arc::clone(&self.pyramid), entries }
    }
}

/// True iff the two fillings of the same pyramid agree up to permuting
/// entries within rows.
pub fn row_equivalent<R: Ring>(a: &Tableau<R>, b: &Tableau<R>) -> Result<bool> {
    if !Arc::ptr_eq(&a.pyramid, &b.pyramid) && a.pyramid != b.pyramid {
        return Err(Error::InvalidArgument("tableaux on different pyramids".into()));
    }
    Ok(a.canonical().entries == b.canonical().entries)
}

/// All unimodal positive compositions summing to at most `max_boxes`
/// (every pyramid shape with at most that many boxes).
pub fn pyramids_up_to(max_boxes: usize) -> Vec<Arc<Pyramid>> {
    let mut out = Vec::new();
    for total in 1..=max_boxes {
        let mut comp = Vec::new();
        gen_compositions(total, &mut comp, &mut out);
    }
    out
}

fn gen_compositions(remaining: usize, comp: &mut Vec<usize>, out: &mut Vec<Arc<Pyramid>>) {
    if remaining == 0 {
        if let Ok(p) = Pyramid::from_heights(comp) {
            out.push(p);
        }
        return;
    }
    for part in 1..=remaining {
        comp.push(part);
        gen_compositions(remaining - part, comp, out);
        comp.pop();
    }
}
