//! Dense linear algebra over GF(2).
//!
//! Matrices are stored row-major with each row packed into `u64` words,
//! least-significant bit first: column `c` of a row lives in word `c / 64`
//! at bit `c % 64`. Padding bits past the last column are always zero, so
//! whole-word comparisons and XORs are exact.
//!
//! Elimination routines never modify their input; they work on a copy.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const WORD_BITS: usize = 64;

#[inline]
fn words_for(cols: usize) -> usize {
    cols.div_ceil(WORD_BITS)
}

#[inline]
fn tail_mask(cols: usize) -> u64 {
    match cols % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A dense `rows × cols` matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    /// Builds a matrix from rows of booleans. All rows must have length `cols`.
    pub fn from_bool_rows(rows: &[Vec<bool>], cols: usize) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (c, &bit) in row.iter().enumerate() {
                if bit {
                    m.set(r, c, true);
                }
            }
        }
        Ok(m)
    }

    /// A `1 × len` matrix holding `bits`.
    pub fn row_vector(bits: &[bool]) -> Self {
        let mut m = Self::zeros(1, bits.len());
        for (c, &b) in bits.iter().enumerate() {
            if b {
                m.set(0, c, true);
            }
        }
        m
    }

    /// Parses rows of `'0'`/`'1'` characters. `cols` is needed because an
    /// empty row list (or rows of zero width) cannot carry it.
    pub fn from_row_strings<S: AsRef<str>>(rows: &[S], cols: usize) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, line) in rows.iter().enumerate() {
            let line = line.as_ref();
            if line.len() != cols {
                return Err(Error::Parse(format!(
                    "row {r} has {} characters, expected {cols}",
                    line.len()
                )));
            }
            for (c, ch) in line.bytes().enumerate() {
                match ch {
                    b'0' => {}
                    b'1' => m.set(r, c, true),
                    other => {
                        return Err(Error::Parse(format!(
                            "row {r}: unexpected character {:?}",
                            other as char
                        )))
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn to_row_strings(&self) -> Vec<String> {
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| if self.get(r, c) { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of `u64` words per packed row.
    #[inline]
    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "({r}, {c}) out of bounds");
        (self.data[r * self.stride + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "({r}, {c}) out of bounds");
        let w = &mut self.data[r * self.stride + c / WORD_BITS];
        let bit = 1u64 << (c % WORD_BITS);
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row_bits(&self, r: usize) -> Vec<bool> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn column_bits(&self, c: usize) -> Vec<bool> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row_words(r).iter().all(|&w| w == 0)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// Number of ones in row `r`.
    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Checks that every padding bit is zero.
    pub fn padding_is_clean(&self) -> bool {
        if self.stride == 0 {
            return true;
        }
        let mask = tail_mask(self.cols);
        (0..self.rows).all(|r| self.data[r * self.stride + self.stride - 1] & !mask == 0)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let s = self.stride;
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * s);
        head[lo * s..(lo + 1) * s].swap_with_slice(&mut tail[..s]);
    }

    /// `row[dst] ^= row[src]`, touching only words from `from_word` on.
    #[inline]
    fn xor_row(&mut self, src: usize, dst: usize, from_word: usize) {
        let s = self.stride;
        let (src_row, dst_row) = if src < dst {
            let (head, tail) = self.data.split_at_mut(dst * s);
            (&head[src * s..(src + 1) * s], &mut tail[..s])
        } else {
            let (head, tail) = self.data.split_at_mut(src * s);
            (&tail[..s] as &[u64], &mut head[dst * s..(dst + 1) * s])
        };
        for (d, &w) in dst_row[from_word..].iter_mut().zip(&src_row[from_word..]) {
            *d ^= w;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for (wi, &word) in self.row_words(r).iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    let c = wi * WORD_BITS + w.trailing_zeros() as usize;
                    t.set(c, r, true);
                    w &= w - 1;
                }
            }
        }
        t
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} columns on {} columns",
                other.cols, self.cols
            )));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            stride: self.stride,
            data,
        })
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot join {} rows beside {} rows",
                other.rows, self.rows
            )));
        }
        let mut m = Self::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            m.row_words_mut(r)[..self.stride].copy_from_slice(self.row_words(r));
            for c in 0..other.cols {
                if other.get(r, c) {
                    m.set(r, self.cols + c, true);
                }
            }
        }
        Ok(m)
    }

    /// Gaussian elimination in place. With `full` the result is in reduced
    /// row-echelon form; otherwise only entries below each pivot are cleared.
    /// Returns the pivot columns, one per nonzero leading row.
    fn eliminate(&mut self, full: bool) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let w = c / WORD_BITS;
            let bit = 1u64 << (c % WORD_BITS);
            let Some(p) = (r..self.rows).find(|&i| self.data[i * self.stride + w] & bit != 0) else {
                continue;
            };
            self.swap_rows(p, r);
            let start = if full { 0 } else { r + 1 };
            for i in start..self.rows {
                if i != r && self.data[i * self.stride + w] & bit != 0 {
                    self.xor_row(r, i, w);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Dimension of the row space.
    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        self.clone().eliminate(false).len()
    }

    /// Reduced row-echelon basis of the row space.
    pub fn row_reduce(&self) -> RowBasis {
        let mut m = self.clone();
        let pivots = m.eliminate(true);
        m.rows = pivots.len();
        m.data.truncate(pivots.len() * m.stride);
        RowBasis {
            matrix: m,
            pivot_cols: pivots,
        }
    }

    /// Matrix product over GF(2).
    pub fn multiply(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let dst = r * out.stride;
            for (wi, &word) in self.row_words(r).iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    let k = wi * WORD_BITS + w.trailing_zeros() as usize;
                    for (d, &s) in out.data[dst..dst + out.stride].iter_mut().zip(rhs.row_words(k)) {
                        *d ^= s;
                    }
                    w &= w - 1;
                }
            }
        }
        Ok(out)
    }

    pub fn invert(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot invert non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut aug = self.hstack(&Self::identity(n))?;
        let pivots = aug.eliminate(true);
        let rank = pivots.iter().take_while(|&&c| c < n).count();
        if rank < n {
            return Err(Error::SingularMatrix { rank, size: n });
        }
        let mut inv = Self::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                if aug.get(r, n + c) {
                    inv.set(r, c, true);
                }
            }
        }
        Ok(inv)
    }

    /// Copies the rows `row_idx` and columns `col_idx`, in the order given.
    pub fn select(&self, row_idx: &[usize], col_idx: &[usize]) -> Result<Self> {
        check_indices(row_idx, self.rows)?;
        check_indices(col_idx, self.cols)?;
        let mut out = Self::zeros(row_idx.len(), col_idx.len());
        for (i, &r) in row_idx.iter().enumerate() {
            let src = self.row_words(r);
            let dst = i * out.stride;
            for (j, &c) in col_idx.iter().enumerate() {
                if (src[c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1 {
                    out.data[dst + j / WORD_BITS] |= 1u64 << (j % WORD_BITS);
                }
            }
        }
        Ok(out)
    }

    /// Copies the listed columns, keeping every row.
    pub fn select_columns(&self, col_idx: &[usize]) -> Result<Self> {
        let all: Vec<usize> = (0..self.rows).collect();
        self.select(&all, col_idx)
    }

    /// Renders the text matrix format: a `rows cols` header, then one line of
    /// `0`/`1` characters per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for row in self.to_row_strings() {
            s.push_str(&row);
            s.push('\n');
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header line".into()))?;
        let mut dims = header.split_whitespace().map(str::parse::<usize>);
        let (rows, cols) = match (dims.next(), dims.next(), dims.next()) {
            (Some(Ok(r)), Some(Ok(c)), None) => (r, c),
            _ => return Err(Error::Parse(format!("bad header {header:?}"))),
        };
        let body: Vec<&str> = lines.take(rows).collect();
        if body.len() != rows {
            return Err(Error::Parse(format!(
                "expected {rows} rows, found {}",
                body.len()
            )));
        }
        Self::from_row_strings(&body, cols)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for (i, row) in self.to_row_strings().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(row)?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for BitMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_text(s)
    }
}

pub(crate) fn check_indices(idx: &[usize], bound: usize) -> Result<()> {
    let mut seen = vec![false; bound];
    for &i in idx {
        if i >= bound {
            return Err(Error::IndexOutOfRange { index: i, bound });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    Ok(())
}

/// A row space in reduced row-echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowBasis {
    matrix: BitMatrix,
    pivot_cols: Vec<usize>,
}

impl RowBasis {
    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn pivot_cols(&self) -> &[usize] {
        &self.pivot_cols
    }

    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    /// Width of the ambient row-vector space.
    pub fn dim(&self) -> usize {
        self.matrix.cols
    }

    pub fn into_matrix(self) -> BitMatrix {
        self.matrix
    }

    /// Whether a packed row vector lies in the span.
    pub fn contains(&self, row: &[u64]) -> bool {
        let mut v = row.to_vec();
        for (i, &c) in self.pivot_cols.iter().enumerate() {
            if (v[c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1 {
                for (d, &s) in v.iter_mut().zip(self.matrix.row_words(i)) {
                    *d ^= s;
                }
            }
        }
        v.iter().all(|&w| w == 0)
    }
}

/// Echelon accumulator: vectors are reduced against everything inserted so
/// far, so `insert` reports whether a vector raised the rank.
///
/// Each stored row has the pivots of all earlier rows cleared, which makes a
/// single forward pass in insertion order a complete reduction.
#[derive(Clone, Debug)]
pub(crate) struct EchelonAccumulator {
    stride: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl EchelonAccumulator {
    pub(crate) fn new(cols: usize) -> Self {
        Self {
            stride: words_for(cols),
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    fn reduce(&self, v: &mut [u64]) {
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            if (v[c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1 {
                for (d, &s) in v.iter_mut().zip(row) {
                    *d ^= s;
                }
            }
        }
    }

    /// Inserts `v` and returns true iff it was independent of the stored rows.
    pub(crate) fn insert(&mut self, v: &[u64]) -> bool {
        debug_assert_eq!(v.len(), self.stride);
        let mut v = v.to_vec();
        self.reduce(&mut v);
        match v.iter().position(|&w| w != 0) {
            Some(wi) => {
                let c = wi * WORD_BITS + v[wi].trailing_zeros() as usize;
                self.rows.push(v);
                self.pivots.push(c);
                true
            }
            None => false,
        }
    }
}

/// Picks rows of `q` (in order) that extend `v` to a basis of `span(q)`.
///
/// A row of `q` is accepted iff it raises the rank of `v` plus the rows
/// accepted so far, so the result has `rank(q) - rank(v)` rows.
pub fn extend_basis(v: &RowBasis, q: &RowBasis) -> Result<BitMatrix> {
    if v.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspace lives in dimension {}, ambient basis in {}",
            v.dim(),
            q.dim()
        )));
    }
    for r in 0..v.rank() {
        if !q.contains(v.matrix.row_words(r)) {
            return Err(Error::NotASubspace);
        }
    }
    let mut acc = EchelonAccumulator::new(q.dim());
    for r in 0..v.rank() {
        acc.insert(v.matrix.row_words(r));
    }
    let mut picked = Vec::new();
    for r in 0..q.rank() {
        if acc.insert(q.matrix.row_words(r)) {
            picked.push(r);
        }
    }
    q.matrix.select(&picked, &(0..q.dim()).collect::<Vec<_>>())
}
