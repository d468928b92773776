//! Exact dense linear algebra over arbitrary-precision rationals.
//!
//! Every rank, kernel and solve in the crate goes through [`RationalMatrix`].
//! Arithmetic never rounds; entries are kept in lowest terms by
//! [`num_rational::BigRational`]. A small floating backend, [`FloatMatrix`],
//! exists only for incidence systems whose angles have irrational cosines.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Column vector of rationals.
pub type RationalVector = Vec<Rational>;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d`, reduced. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

/// Parses `"p/q"` or `"p"` (surrounding whitespace allowed).
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let t = text.trim();
    let err = || ParseRationalError(text.to_string());
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(Rational::new(n, d))
        }
        None => BigInt::from_str(t).map(Rational::from_integer).map_err(|_| err()),
    }
}

/// Canonical text form: `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("rank tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

/// Dense row-major matrix of rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

/// Output of [`RationalMatrix::rref_rank`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub reduced: RationalMatrix,
    pub rank: usize,
    pub pivot_columns: Vec<usize>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                context: "from_flat",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from nested rows; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, LinalgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(LinalgError::DimensionMismatch {
                    context: "from_rows",
                    expected: ncols,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    /// Integer literal constructor, mostly for tests and fixtures.
    pub fn from_i64<const C: usize>(rows: &[[i64; C]]) -> Self {
        Self::from_fn(rows.len(), C, |i, j| rat(rows[i][j]))
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[RationalVector]) -> Result<Self, LinalgError> {
        for c in columns {
            if c.len() != rows {
                return Err(LinalgError::DimensionMismatch {
                    context: "from_columns",
                    expected: rows,
                    found: c.len(),
                });
            }
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i].clone()))
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.data
    }

    pub fn into_flat(self) -> Vec<Rational> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> RationalVector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = &self[(i, j)];
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn trace(&self) -> Result<Rational, LinalgError> {
        self.require_square()?;
        Ok((0..self.rows).map(|i| self[(i, i)].clone()).sum())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|e| e * s).collect(),
        }
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                context: "matrix product",
                expected: self.cols,
                found: rhs.rows,
            });
        }
        // Integer accumulation over per-row and per-column common denominators
        // avoids a gcd at every addition.
        let row_den: Vec<BigInt> = (0..self.rows).map(|i| common_denominator(self.row(i).iter())).collect();
        let col_den: Vec<BigInt> = (0..rhs.cols)
            .map(|j| common_denominator((0..rhs.rows).map(|k| &rhs[(k, j)])))
            .collect();
        let scaled = |x: &Rational, den: &BigInt| -> BigInt { x.numer() * (den / x.denom()) };
        let a: Vec<BigInt> = (0..self.rows * self.cols)
            .map(|idx| scaled(&self.data[idx], &row_den[idx / self.cols]))
            .collect();
        let b: Vec<BigInt> = (0..rhs.rows * rhs.cols)
            .map(|idx| scaled(&rhs.data[idx], &col_den[idx % rhs.cols]))
            .collect();
        let mut acc = vec![BigInt::zero(); self.rows * rhs.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let x = &a[i * self.cols + k];
                if x.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let y = &b[k * rhs.cols + j];
                    if !y.is_zero() {
                        acc[i * rhs.cols + j] += x * y;
                    }
                }
            }
        }
        let data = acc
            .into_iter()
            .enumerate()
            .map(|(idx, n)| {
                if n.is_zero() {
                    Rational::zero()
                } else {
                    Rational::new(n, &row_den[idx / rhs.cols] * &col_den[idx % rhs.cols])
                }
            })
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: rhs.cols,
            data,
        })
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<RationalVector, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    fn checked_zip(&self, rhs: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<Self, LinalgError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(LinalgError::DimensionMismatch {
                context: "elementwise operation",
                expected: self.rows * self.cols,
                found: rhs.rows * rhs.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.checked_zip(rhs, |a, b| a + b)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.checked_zip(rhs, |a, b| a - b)
    }

    pub fn pow(&self, k: u32) -> Result<Self, LinalgError> {
        self.require_square()?;
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = acc.checked_mul(self)?;
        }
        Ok(acc)
    }

    /// Horizontal concatenation; all blocks must share the row count.
    pub fn hstack(blocks: &[&Self]) -> Result<Self, LinalgError> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut c0 = 0;
        for b in blocks {
            if b.rows != rows {
                return Err(LinalgError::DimensionMismatch {
                    context: "hstack",
                    expected: rows,
                    found: b.rows,
                });
            }
            out.set_block(0, c0, b);
            c0 += b.cols;
        }
        Ok(out)
    }

    /// Vertical concatenation; all blocks must share the column count.
    pub fn vstack(blocks: &[&Self]) -> Result<Self, LinalgError> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            if b.cols != cols {
                return Err(LinalgError::DimensionMismatch {
                    context: "vstack",
                    expected: cols,
                    found: b.cols,
                });
            }
            data.extend(b.data.iter().cloned());
            rows += b.rows;
        }
        Ok(Self { rows, cols, data })
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    /// Panics if the block does not fit.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols, "block out of range");
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)].clone();
            }
        }
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    fn require_square(&self) -> Result<(), LinalgError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Reduced row echelon form, rank and pivot columns.
    ///
    /// Pivots are the first nonzero entry at or below the current row, scanning
    /// columns left to right.
    pub fn rref_rank(&self) -> Rref {
        let (rows, cols) = (self.rows, self.cols);
        // Fraction-free Gauss-Jordan on primitive integer rows; rows are
        // divided by their pivots only at the end.
        let mut a: Vec<Vec<BigInt>> = (0..rows)
            .map(|i| {
                let row = self.row(i);
                let den = common_denominator(row.iter());
                let mut ints: Vec<BigInt> = row.iter().map(|x| x.numer() * (&den / x.denom())).collect();
                make_primitive(&mut ints);
                ints
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).filter(|&i| !a[i][c].is_zero()).min_by_key(|&i| a[i][c].magnitude().clone()) else {
                continue;
            };
            a.swap(r, p);
            let pivot_row = a[r].clone();
            let pv = &pivot_row[c];
            for (i, row) in a.iter_mut().enumerate() {
                if i == r || row[c].is_zero() {
                    continue;
                }
                let g = num_integer::Integer::gcd(pv, &row[c]);
                let (mr, mp) = (pv / &g, &row[c] / &g);
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x = &*x * &mr - y * &mp;
                }
                make_primitive(row);
            }
            pivots.push(c);
            r += 1;
        }
        let mut data = Vec::with_capacity(rows * cols);
        for (i, row) in a.into_iter().enumerate() {
            match pivots.get(i) {
                Some(&c) => {
                    let pv = row[c].clone();
                    data.extend(row.into_iter().map(|x| Rational::new(x, pv.clone())));
                }
                None => data.extend(row.into_iter().map(Rational::from_integer)),
            }
        }
        Rref {
            reduced: Self { rows, cols, data },
            rank: pivots.len(),
            pivot_columns: pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref_rank().rank
    }

    /// Basis of the right kernel, one vector per free column of the RREF.
    ///
    /// Each basis vector has a 1 at its free column and 0 at every other free
    /// column.
    pub fn nullspace(&self) -> Vec<RationalVector> {
        let rref = self.rref_rank();
        let free = free_columns(self.cols, &rref.pivot_columns);
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (k, &pc) in rref.pivot_columns.iter().enumerate() {
                    v[pc] = -rref.reduced[(k, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Returns `x` with `self · x = b` when `b` lies in the column space.
    ///
    /// The solution sets every free variable to zero.
    pub fn in_column_space(&self, b: &[Rational]) -> Result<Option<RationalVector>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch {
                context: "in_column_space",
                expected: self.rows,
                found: b.len(),
            });
        }
        let rhs = Self::from_columns(self.rows, &[b.to_vec()])?;
        let aug = Self::hstack(&[self, &rhs])?;
        let rref = aug.rref_rank();
        if rref.pivot_columns.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (k, &pc) in rref.pivot_columns.iter().enumerate() {
            x[pc] = rref.reduced[(k, self.cols)].clone();
        }
        Ok(Some(x))
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        self.require_square()?;
        let n = self.rows;
        let aug = Self::hstack(&[self, &Self::identity(n)])?;
        let rref = aug.rref_rank();
        if rref.pivot_columns.iter().take_while(|&&c| c < n).count() < n {
            return Err(LinalgError::Singular);
        }
        Ok(rref.reduced.submatrix(0, n, n, n))
    }

    pub fn determinant(&self) -> Result<Rational, LinalgError> {
        self.require_square()?;
        let mut a = self.clone();
        let n = a.rows;
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !a[(i, c)].is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != c {
                a.swap_rows(p, c);
                det = -det;
            }
            let pivot = a[(c, c)].clone();
            det *= &pivot;
            for i in c + 1..n {
                if a[(i, c)].is_zero() {
                    continue;
                }
                let factor = &a[(i, c)] / &pivot;
                for j in c..n {
                    let t = &factor * &a[(c, j)];
                    a.data[i * n + j] -= t;
                }
            }
        }
        Ok(det)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.cols {
            self.data.swap(i * self.cols + k, j * self.cols + k);
        }
    }

    /// Entries as canonical rational strings, row by row.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(format_rational).collect())
            .collect()
    }

    pub fn from_string_rows<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self, MatrixParseError> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| parse_rational(s.as_ref())).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_rows(parsed)?)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixParseError {
    #[error(transparent)]
    Entry(#[from] ParseRationalError),
    #[error(transparent)]
    Shape(#[from] LinalgError),
}

fn free_columns(cols: usize, pivots: &[usize]) -> Vec<usize> {
    let mut is_pivot = vec![false; cols];
    for &p in pivots {
        is_pivot[p] = true;
    }
    (0..cols).filter(|&c| !is_pivot[c]).collect()
}

/// Free-function form of [`RationalMatrix::rref_rank`].
pub fn rref_rank(m: &RationalMatrix) -> Rref {
    m.rref_rank()
}

pub fn nullspace(m: &RationalMatrix) -> Vec<RationalVector> {
    m.nullspace()
}

pub fn in_column_space(a: &RationalMatrix, b: &[Rational]) -> Result<Option<RationalVector>, LinalgError> {
    a.in_column_space(b)
}

/// Divides an integer row by the gcd of its entries.
fn make_primitive(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |acc, x| num_integer::Integer::gcd(&acc, x));
    if !g.is_zero() && !g.is_one() {
        for x in row.iter_mut() {
            *x = &*x / &g;
        }
    }
}

fn common_denominator<'a>(entries: impl Iterator<Item = &'a Rational>) -> BigInt {
    entries.fold(BigInt::one(), |acc, x| {
        if x.denom().is_one() {
            acc
        } else {
            num_integer::Integer::lcm(&acc, x.denom())
        }
    })
}

/// Rank of the span of a list of equal-length vectors.
pub fn span_rank(len: usize, vectors: &[RationalVector]) -> Result<usize, LinalgError> {
    Ok(RationalMatrix::from_columns(len, vectors)?.rank())
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &mut self.data[i * self.cols + j]
    }
}

// Operator forms panic on shape mismatch, like the checked_* methods would error.
impl Mul for &RationalMatrix {
    type Output = RationalMatrix;

    fn mul(self, rhs: &RationalMatrix) -> RationalMatrix {
        self.checked_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &RationalMatrix {
    type Output = RationalMatrix;

    fn add(self, rhs: &RationalMatrix) -> RationalMatrix {
        self.checked_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &RationalMatrix {
    type Output = RationalMatrix;

    fn sub(self, rhs: &RationalMatrix) -> RationalMatrix {
        self.checked_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl Neg for &RationalMatrix {
    type Output = RationalMatrix;

    fn neg(self) -> RationalMatrix {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|e| -e).collect(),
        }
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalMatrix{}x{} ", self.rows, self.cols)?;
        f.debug_list().entries(self.to_string_rows()).finish()
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.to_string_rows().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Negates a vector.
pub fn neg_vec(v: &[Rational]) -> RationalVector {
    v.iter().map(|e| -e).collect()
}

pub fn add_vec(a: &[Rational], b: &[Rational]) -> RationalVector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[Rational], b: &[Rational]) -> RationalVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Default relative tolerance for [`FloatMatrix`] ranks.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-9;

/// Dense `f64` matrix with a relative rank tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    rank_tolerance: f64,
}

impl FloatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>, rank_tolerance: f64) -> Result<Self, LinalgError> {
        if !(rank_tolerance > 0.0) {
            return Err(LinalgError::BadTolerance(rank_tolerance));
        }
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                context: "FloatMatrix::new",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            data,
            rank_tolerance,
        })
    }

    pub fn from_rational(m: &RationalMatrix, rank_tolerance: f64) -> Result<Self, LinalgError> {
        let data = m.as_slice().iter().map(rational_to_f64).collect();
        Self::new(m.rows(), m.cols(), data, rank_tolerance)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Rank by fully pivoted elimination; a pivot counts when it exceeds
    /// `rank_tolerance` times the first (largest) pivot.
    pub fn rank(&self) -> usize {
        let mut a = self.data.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut row_perm: Vec<usize> = (0..rows).collect();
        let mut col_perm: Vec<usize> = (0..cols).collect();
        let mut first_pivot = None;
        let mut rank = 0;
        for step in 0..rows.min(cols) {
            let mut best = (0.0f64, step, step);
            for i in step..rows {
                for j in step..cols {
                    let v = a[row_perm[i] * cols + col_perm[j]].abs();
                    if v > best.0 {
                        best = (v, i, j);
                    }
                }
            }
            let scale = *first_pivot.get_or_insert(best.0);
            if best.0 == 0.0 || best.0 <= self.rank_tolerance * scale {
                break;
            }
            row_perm.swap(step, best.1);
            col_perm.swap(step, best.2);
            let pr = row_perm[step];
            let pc = col_perm[step];
            let pivot = a[pr * cols + pc];
            for i in step + 1..rows {
                let r = row_perm[i];
                let factor = a[r * cols + pc] / pivot;
                if factor == 0.0 {
                    continue;
                }
                for j in step..cols {
                    let c = col_perm[j];
                    a[r * cols + c] -= factor * a[pr * cols + c];
                }
            }
            rank += 1;
        }
        rank
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: fall back to ratio of logs-safe parts.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Absolute value of a rational, for callers that only have `Signed` in scope.
pub fn abs(r: &Rational) -> Rational {
    r.abs()
}
