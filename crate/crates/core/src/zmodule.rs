//! Exact integer linear algebra: Smith and Hermite normal forms, kernel and
//! image lattices, finitely generated abelian groups, exactness checking,
//! and cokernels with finite coefficient groups.
//!
//! All arithmetic is arbitrary precision. Normal-form pivoting can blow up
//! intermediate entries well past the native word size even for small
//! inputs, so fixed-width integers are never used for matrix entries.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

/// Default tuple budget for the brute-force enumeration oracle.
pub const DEFAULT_ORACLE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum ZModuleError {
    #[error("entry list has {got} elements, expected {rows}x{cols} = {expected}")]
    EntryCount {
        rows: usize,
        cols: usize,
        got: usize,
        expected: usize,
    },
    #[error("dimension mismatch: f lands in Z^{f_rows} but g is defined on Z^{g_cols}")]
    DimensionMismatch { f_rows: usize, g_cols: usize },
    #[error("enumeration budget exceeded: {needed} tuples needed, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("group order does not fit in working precision")]
    OrderOverflow,
    #[error("cyclic order {0} is not a valid group order")]
    InvalidOrder(u64),
}

/// Dense matrix over Z with arbitrary-precision entries, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self, ZModuleError> {
        if entries.len() != rows * cols {
            return Err(ZModuleError::EntryCount {
                rows,
                cols,
                got: entries.len(),
                expected: rows * cols,
            });
        }
        Ok(IntegerMatrix { rows, cols, entries })
    }

    /// Test and construction convenience; panics on a bad entry count.
    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        IntegerMatrix {
            rows,
            cols,
            entries: entries.iter().map(|&e| BigInt::from(e)).collect(),
        }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        IntegerMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigInt) {
        self.entries[i * self.cols + j] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zero(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, e) in col.iter().enumerate() {
                m.set(i, j, e.clone());
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Matrix product; panics when the inner dimensions disagree.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out = Self::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = BigInt::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k) * rhs.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn remove_row(&self, row: usize) -> Self {
        assert!(row < self.rows);
        let mut entries = Vec::with_capacity((self.rows - 1) * self.cols);
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            for j in 0..self.cols {
                entries.push(self.get(i, j).clone());
            }
        }
        IntegerMatrix {
            rows: self.rows - 1,
            cols: self.cols,
            entries,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    /// Panics when the matrix is not square.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| self.row_vec(i)).collect();
        let mut sign = 1i8;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = num / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        if sign < 0 {
            -a[n - 1][n - 1].clone()
        } else {
            a[n - 1][n - 1].clone()
        }
    }

    fn row_vec(&self, i: usize) -> Vec<BigInt> {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }
}

impl fmt::Debug for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntegerMatrix({}x{})", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, " [")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let widths: Vec<usize> = (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .map(|i| self.get(i, j).to_string().len())
                    .max()
                    .unwrap_or(1)
            })
            .collect();
        for i in 0..self.rows {
            write!(f, "[")?;
            for (j, width) in widths.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:>width$}", self.get(i, j).to_string())?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// `u * m * v = d` with `u`, `v` unimodular and `d` diagonal satisfying the
/// divisibility chain `d1 | d2 | ... | dr`, all diagonal entries positive.
#[derive(Clone, Debug)]
pub struct SNFDecomposition {
    u: IntegerMatrix,
    d: IntegerMatrix,
    v: IntegerMatrix,
}

impl SNFDecomposition {
    pub fn u(&self) -> &IntegerMatrix {
        &self.u
    }

    pub fn d(&self) -> &IntegerMatrix {
        &self.d
    }

    pub fn v(&self) -> &IntegerMatrix {
        &self.v
    }

    /// Nonzero diagonal entries, in chain order.
    pub fn diagonal(&self) -> Vec<BigInt> {
        let n = self.d.rows().min(self.d.cols());
        (0..n)
            .map(|i| self.d.get(i, i).clone())
            .filter(|e| !e.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().len()
    }
}

/// Mutable elimination state: row operations accumulate in `u`, column
/// operations in `v`, so `u * m * v = a` holds throughout.
struct SnfWorker {
    a: IntegerMatrix,
    u: IntegerMatrix,
    v: IntegerMatrix,
}

impl SnfWorker {
    fn new(m: &IntegerMatrix) -> Self {
        SnfWorker {
            a: m.clone(),
            u: IntegerMatrix::identity(m.rows()),
            v: IntegerMatrix::identity(m.cols()),
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.a.cols() {
            let (x, y) = (self.a.get(i, c).clone(), self.a.get(j, c).clone());
            self.a.set(i, c, y);
            self.a.set(j, c, x);
        }
        for c in 0..self.u.cols() {
            let (x, y) = (self.u.get(i, c).clone(), self.u.get(j, c).clone());
            self.u.set(i, c, y);
            self.u.set(j, c, x);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.a.rows() {
            let (x, y) = (self.a.get(r, i).clone(), self.a.get(r, j).clone());
            self.a.set(r, i, y);
            self.a.set(r, j, x);
        }
        for r in 0..self.v.rows() {
            let (x, y) = (self.v.get(r, i).clone(), self.v.get(r, j).clone());
            self.v.set(r, i, y);
            self.v.set(r, j, x);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.a.cols() {
            let x = -self.a.get(i, c).clone();
            self.a.set(i, c, x);
        }
        for c in 0..self.u.cols() {
            let x = -self.u.get(i, c).clone();
            self.u.set(i, c, x);
        }
    }

    // Rows (i, j) <- (p*row_i + q*row_j, r*row_i + s*row_j); p*s - q*r = ±1.
    fn row_combine(&mut self, i: usize, j: usize, p: &BigInt, q: &BigInt, r: &BigInt, s: &BigInt) {
        for c in 0..self.a.cols() {
            let (x, y) = (self.a.get(i, c).clone(), self.a.get(j, c).clone());
            self.a.set(i, c, p * &x + q * &y);
            self.a.set(j, c, r * &x + s * &y);
        }
        for c in 0..self.u.cols() {
            let (x, y) = (self.u.get(i, c).clone(), self.u.get(j, c).clone());
            self.u.set(i, c, p * &x + q * &y);
            self.u.set(j, c, r * &x + s * &y);
        }
    }

    // Cols (i, j) <- (p*col_i + q*col_j, r*col_i + s*col_j); p*s - q*r = ±1.
    fn col_combine(&mut self, i: usize, j: usize, p: &BigInt, q: &BigInt, r: &BigInt, s: &BigInt) {
        for row in 0..self.a.rows() {
            let (x, y) = (self.a.get(row, i).clone(), self.a.get(row, j).clone());
            self.a.set(row, i, p * &x + q * &y);
            self.a.set(row, j, r * &x + s * &y);
        }
        for row in 0..self.v.rows() {
            let (x, y) = (self.v.get(row, i).clone(), self.v.get(row, j).clone());
            self.v.set(row, i, p * &x + q * &y);
            self.v.set(row, j, r * &x + s * &y);
        }
    }

    // row_i += c * row_j
    fn row_addmul(&mut self, i: usize, j: usize, c: &BigInt) {
        for col in 0..self.a.cols() {
            let x = self.a.get(i, col) + c * self.a.get(j, col);
            self.a.set(i, col, x);
        }
        for col in 0..self.u.cols() {
            let x = self.u.get(i, col) + c * self.u.get(j, col);
            self.u.set(i, col, x);
        }
    }

    // col_i += c * col_j
    fn col_addmul(&mut self, i: usize, j: usize, c: &BigInt) {
        for row in 0..self.a.rows() {
            let x = self.a.get(row, i) + c * self.a.get(row, j);
            self.a.set(row, i, x);
        }
        for row in 0..self.v.rows() {
            let x = self.v.get(row, i) + c * self.v.get(row, j);
            self.v.set(row, i, x);
        }
    }

    /// Smallest-magnitude nonzero entry of the trailing submatrix at (k, k).
    fn find_pivot(&self, k: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in k..self.a.rows() {
            for j in k..self.a.cols() {
                let e = self.a.get(i, j);
                if e.is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if self.a.get(bi, bj).abs() <= e.abs() => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        best
    }

    // When the pivot divides the entry a plain subtraction suffices and
    // leaves the pivot row alone; the full Bezout combination would rewrite
    // the pivot row and can re-dirty entries already cleared.
    fn clear_col_below(&mut self, k: usize) {
        for i in k + 1..self.a.rows() {
            if self.a.get(i, k).is_zero() {
                continue;
            }
            let x = self.a.get(k, k).clone();
            let y = self.a.get(i, k).clone();
            if (&y % &x).is_zero() {
                let q = &y / &x;
                self.row_addmul(i, k, &-q);
            } else {
                let (g, s, t) = xgcd(&x, &y);
                let (xd, yd) = (&x / &g, &y / &g);
                self.row_combine(k, i, &s, &t, &-yd, &xd);
            }
        }
    }

    fn clear_row_right(&mut self, k: usize) {
        for j in k + 1..self.a.cols() {
            if self.a.get(k, j).is_zero() {
                continue;
            }
            let x = self.a.get(k, k).clone();
            let y = self.a.get(k, j).clone();
            if (&y % &x).is_zero() {
                let q = &y / &x;
                self.col_addmul(j, k, &-q);
            } else {
                let (g, s, t) = xgcd(&x, &y);
                let (xd, yd) = (&x / &g, &y / &g);
                self.col_combine(k, j, &s, &t, &-yd, &xd);
            }
        }
    }

    fn row_dirty(&self, k: usize) -> bool {
        (k + 1..self.a.cols()).any(|j| !self.a.get(k, j).is_zero())
    }

    fn col_dirty(&self, k: usize) -> bool {
        (k + 1..self.a.rows()).any(|i| !self.a.get(i, k).is_zero())
    }

    fn diagonalize(&mut self) -> usize {
        let n = self.a.rows().min(self.a.cols());
        let mut rank = 0;
        for k in 0..n {
            let Some((pi, pj)) = self.find_pivot(k) else {
                break;
            };
            self.swap_rows(k, pi);
            self.swap_cols(k, pj);
            // Clearing the row can reintroduce entries in the column and
            // vice versa; iterate until both are clean. Terminates because
            // each pass strictly divides the pivot.
            loop {
                self.clear_col_below(k);
                self.clear_row_right(k);
                if !self.col_dirty(k) && !self.row_dirty(k) {
                    break;
                }
            }
            rank += 1;
        }
        rank
    }

    fn normalize_signs(&mut self, rank: usize) {
        for i in 0..rank {
            if self.a.get(i, i).is_negative() {
                self.negate_row(i);
            }
        }
    }

    fn enforce_divisibility(&mut self, rank: usize) {
        if rank < 2 {
            return;
        }
        loop {
            let mut fixed = false;
            for i in 0..rank - 1 {
                let x = self.a.get(i, i).clone();
                let y = self.a.get(i + 1, i + 1).clone();
                if (&y % &x).is_zero() {
                    continue;
                }
                // diag(x, y) -> diag(gcd, x*y/gcd) by one row and one
                // column combination, both of determinant 1.
                let (g, s, t) = xgcd(&x, &y);
                let (xd, yd) = (&x / &g, &y / &g);
                let one = BigInt::one();
                self.row_combine(i, i + 1, &one, &one, &(-&t * &yd), &(&s * &xd));
                self.col_combine(i, i + 1, &s, &t, &-&yd, &xd);
                fixed = true;
            }
            if !fixed {
                break;
            }
        }
    }
}

/// Extended gcd with g > 0 and g = s*x + t*y.
fn xgcd(x: &BigInt, y: &BigInt) -> (BigInt, BigInt, BigInt) {
    let ext = x.extended_gcd(y);
    let (mut g, mut s, mut t) = (ext.gcd, ext.x, ext.y);
    if g.is_negative() {
        g = -g;
        s = -s;
        t = -t;
    }
    debug_assert!(!g.is_zero());
    (g, s, t)
}

/// Smith normal form. Total: every integer matrix, including empty ones,
/// has a decomposition.
pub fn smith_normal_form(m: &IntegerMatrix) -> SNFDecomposition {
    let mut w = SnfWorker::new(m);
    let rank = w.diagonalize();
    w.normalize_signs(rank);
    w.enforce_divisibility(rank);
    SNFDecomposition {
        u: w.u,
        d: w.a,
        v: w.v,
    }
}

/// Canonical row Hermite form: row operations only, pivots positive with
/// strictly increasing pivot columns, entries above each pivot reduced into
/// `[0, pivot)`, zero rows last.
pub fn row_hermite_form(m: &IntegerMatrix) -> IntegerMatrix {
    let mut h = m.clone();
    let (rows, cols) = (h.rows(), h.cols());
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pivot_row) = (r..rows).find(|&i| !h.get(i, c).is_zero()) else {
            continue;
        };
        if pivot_row != r {
            for j in 0..cols {
                let (x, y) = (h.get(r, j).clone(), h.get(pivot_row, j).clone());
                h.set(r, j, y);
                h.set(pivot_row, j, x);
            }
        }
        for i in r + 1..rows {
            if h.get(i, c).is_zero() {
                continue;
            }
            let x = h.get(r, c).clone();
            let y = h.get(i, c).clone();
            let (g, s, t) = xgcd(&x, &y);
            let (xd, yd) = (&x / &g, &y / &g);
            for j in 0..cols {
                let (a, b) = (h.get(r, j).clone(), h.get(i, j).clone());
                h.set(r, j, &s * &a + &t * &b);
                h.set(i, j, -&yd * &a + &xd * &b);
            }
        }
        if h.get(r, c).is_negative() {
            for j in 0..cols {
                let x = -h.get(r, j).clone();
                h.set(r, j, x);
            }
        }
        let pivot = h.get(r, c).clone();
        for i in 0..r {
            let q = h.get(i, c).div_floor(&pivot);
            if q.is_zero() {
                continue;
            }
            for j in 0..cols {
                let x = h.get(i, j) - &q * h.get(r, j);
                h.set(i, j, x);
            }
        }
        r += 1;
    }
    h
}

/// Canonical column Hermite form (the transpose convention of
/// [`row_hermite_form`]); zero columns last.
pub fn column_hermite_form(m: &IntegerMatrix) -> IntegerMatrix {
    row_hermite_form(&m.transpose()).transpose()
}

/// Z-basis of the column span of `m`, as the nonzero columns of the
/// canonical column Hermite form. Sublattices of Z^rows are equal exactly
/// when their bases agree under this normal form.
pub fn image_lattice(m: &IntegerMatrix) -> IntegerMatrix {
    let h = column_hermite_form(m);
    let nonzero: Vec<Vec<BigInt>> = (0..h.cols())
        .map(|j| h.column(j))
        .filter(|col| col.iter().any(|e| !e.is_zero()))
        .collect();
    IntegerMatrix::from_columns(m.rows(), &nonzero)
}

/// Z-basis of `{x : m x = 0}`, in canonical column Hermite form.
pub fn kernel_lattice(m: &IntegerMatrix) -> IntegerMatrix {
    let snf = smith_normal_form(m);
    let rank = snf.rank();
    let basis: Vec<Vec<BigInt>> = (rank..m.cols()).map(|j| snf.v().column(j)).collect();
    let raw = IntegerMatrix::from_columns(m.cols(), &basis);
    column_hermite_form(&raw)
}

/// Sublattice equality via matching canonical column Hermite forms.
pub fn lattice_eq(a: &IntegerMatrix, b: &IntegerMatrix) -> bool {
    assert_eq!(a.rows(), b.rows(), "lattices live in different ambient groups");
    image_lattice(a) == image_lattice(b)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactnessFailure {
    /// g∘f is not the zero map.
    CompositeNonzero,
    /// ker g and im f differ as sublattices.
    KernelImageMismatch,
}

impl fmt::Display for ExactnessFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactnessFailure::CompositeNonzero => write!(f, "composite g∘f is nonzero"),
            ExactnessFailure::KernelImageMismatch => {
                write!(f, "kernel lattice of g differs from image lattice of f")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExactnessCheck {
    pub exact: bool,
    pub failure: Option<ExactnessFailure>,
}

/// Exactness of `Z^a --f--> Z^b --g--> Z^c` at the middle node: the
/// composite must vanish and `ker g = im f` inside `Z^b`.
pub fn is_exact_at(f: &IntegerMatrix, g: &IntegerMatrix) -> Result<ExactnessCheck, ZModuleError> {
    if f.rows() != g.cols() {
        return Err(ZModuleError::DimensionMismatch {
            f_rows: f.rows(),
            g_cols: g.cols(),
        });
    }
    if !g.mul(f).is_zero() {
        return Ok(ExactnessCheck {
            exact: false,
            failure: Some(ExactnessFailure::CompositeNonzero),
        });
    }
    if !lattice_eq(&kernel_lattice(g), &image_lattice(f)) {
        return Ok(ExactnessCheck {
            exact: false,
            failure: Some(ExactnessFailure::KernelImageMismatch),
        });
    }
    Ok(ExactnessCheck {
        exact: true,
        failure: None,
    })
}

/// Finitely generated abelian group in canonical form: free rank plus
/// invariant factors, each at least 2 and each dividing the next. Equality
/// of values is isomorphism of groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FGAbelianGroup {
    free_rank: usize,
    invariant_factors: Vec<BigUint>,
}

impl FGAbelianGroup {
    /// Canonical constructor; factors equal to 1 are dropped. The input
    /// must already satisfy the divisibility chain (as SNF diagonals do).
    pub fn new(free_rank: usize, factors: Vec<BigUint>) -> Self {
        let invariant_factors: Vec<BigUint> =
            factors.into_iter().filter(|f| !f.is_one()).collect();
        for w in invariant_factors.windows(2) {
            debug_assert!((&w[1] % &w[0]).is_zero(), "divisibility chain violated");
        }
        FGAbelianGroup {
            free_rank,
            invariant_factors,
        }
    }

    pub fn free(rank: usize) -> Self {
        FGAbelianGroup {
            free_rank: rank,
            invariant_factors: Vec::new(),
        }
    }

    pub fn trivial() -> Self {
        Self::free(0)
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn invariant_factors(&self) -> &[BigUint] {
        &self.invariant_factors
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.invariant_factors.is_empty()
    }

    /// `None` when the group is infinite.
    pub fn order(&self) -> Option<BigUint> {
        if self.free_rank > 0 {
            return None;
        }
        Some(
            self.invariant_factors
                .iter()
                .fold(BigUint::one(), |acc, f| acc * f),
        )
    }
}

impl fmt::Display for FGAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for d in &self.invariant_factors {
            parts.push(format!("Z/{d}"));
        }
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

/// `Z^rows / column-span(m)` in canonical form.
pub fn cokernel(m: &IntegerMatrix) -> FGAbelianGroup {
    let snf = smith_normal_form(m);
    let factors = snf
        .diagonal()
        .into_iter()
        .map(|d| d.to_biguint().expect("SNF diagonal is positive"))
        .collect();
    FGAbelianGroup::new(m.rows() - snf.rank(), factors)
}

/// Finite abelian group as a list of cyclic orders, each at least 2, not
/// necessarily in invariant-factor form. The total order must fit in u64.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAbelianGroup {
    cyclic_orders: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn new(orders: Vec<u64>) -> Result<Self, ZModuleError> {
        let mut kept = Vec::new();
        let mut total: u64 = 1;
        for o in orders {
            if o == 0 {
                return Err(ZModuleError::InvalidOrder(0));
            }
            if o == 1 {
                continue;
            }
            total = total.checked_mul(o).ok_or(ZModuleError::OrderOverflow)?;
            kept.push(o);
        }
        Ok(FiniteAbelianGroup { cyclic_orders: kept })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup {
            cyclic_orders: Vec::new(),
        }
    }

    pub fn cyclic(n: u64) -> Result<Self, ZModuleError> {
        Self::new(vec![n])
    }

    pub fn cyclic_orders(&self) -> &[u64] {
        &self.cyclic_orders
    }

    pub fn order(&self) -> u64 {
        self.cyclic_orders.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.cyclic_orders.is_empty()
    }

    /// Invariant factors (ascending divisibility chain) by prime-power
    /// regrouping of the cyclic orders.
    pub fn canonical_invariants(&self) -> Vec<u64> {
        invariant_factors_from_cyclic(&self.cyclic_orders)
    }

    pub fn canonicalized(&self) -> Self {
        FiniteAbelianGroup {
            cyclic_orders: self.canonical_invariants(),
        }
    }

    pub fn is_isomorphic(&self, other: &Self) -> bool {
        self.canonical_invariants() == other.canonical_invariants()
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cyclic_orders.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.cyclic_orders.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

fn factorize_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Regroups arbitrary cyclic orders into the invariant-factor chain: per
/// prime, exponents sorted descending; the k-th largest exponents across
/// all primes multiply into the k-th largest invariant factor.
pub fn invariant_factors_from_cyclic(orders: &[u64]) -> Vec<u64> {
    use std::collections::BTreeMap;
    let mut exps: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for &o in orders {
        if o <= 1 {
            continue;
        }
        for (p, e) in factorize_u64(o) {
            exps.entry(p).or_default().push(e);
        }
    }
    let mut slots = 0;
    for v in exps.values_mut() {
        v.sort_unstable_by(|a, b| b.cmp(a));
        slots = slots.max(v.len());
    }
    let mut factors = Vec::new();
    for k in 0..slots {
        let mut d: u64 = 1;
        for (p, v) in &exps {
            if let Some(&e) = v.get(k) {
                d *= p.pow(e);
            }
        }
        factors.push(d);
    }
    factors.reverse(); // ascending divisibility
    factors
}

/// Cokernel of `m ⊗ id_A : A^cols -> A^rows` for a finite coefficient
/// group, computed from the Smith normal form: each diagonal entry `d`
/// contributes `A/dA`, and each free row contributes a full copy of `A`.
/// The result is in canonical invariant-factor form.
pub fn cokernel_with_coefficients(
    m: &IntegerMatrix,
    coeffs: &FiniteAbelianGroup,
) -> Result<FiniteAbelianGroup, ZModuleError> {
    let snf = smith_normal_form(m);
    let free_rows = m.rows() - snf.rank();
    let mut orders: Vec<u64> = Vec::new();
    for d in snf.diagonal() {
        for &a in coeffs.cyclic_orders() {
            // (Z/a)/d(Z/a) is cyclic of order gcd(d, a)
            let dm = d.mod_floor(&BigInt::from(a)).to_u64().unwrap_or(0);
            orders.push(gcd_u64(dm, a));
        }
    }
    for _ in 0..free_rows {
        orders.extend_from_slice(coeffs.cyclic_orders());
    }
    let factors = invariant_factors_from_cyclic(&orders);
    FiniteAbelianGroup::new(factors)
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if a == 0 {
        b
    } else {
        gcd_u64(b % a, a)
    }
}

/// Brute-force oracle for [`cokernel_with_coefficients`]: enumerates the
/// image of `m ⊗ id_A` over all of `A^cols`, then reads off the abelian
/// invariants of `A^rows / image` from torsion counts of coset orders.
/// Refuses when either enumeration exceeds `budget` tuples.
pub fn brute_force_cokernel(
    m: &IntegerMatrix,
    coeffs: &FiniteAbelianGroup,
    budget: u64,
) -> Result<FiniteAbelianGroup, ZModuleError> {
    let a_order = coeffs.order() as u128;
    let domain_size = a_order
        .checked_pow(m.cols() as u32)
        .ok_or(ZModuleError::OrderOverflow)?;
    let target_size = a_order
        .checked_pow(m.rows() as u32)
        .ok_or(ZModuleError::OrderOverflow)?;
    for needed in [domain_size, target_size] {
        if needed > budget as u128 {
            return Err(ZModuleError::BudgetExceeded { needed, budget });
        }
    }

    let moduli: Vec<u64> = coeffs.cyclic_orders().to_vec();
    let k = moduli.len();
    // m reduced mod each cyclic modulus, so scalar action stays in u64
    let m_mod: Vec<Vec<Vec<u64>>> = (0..k)
        .map(|t| {
            (0..m.rows())
                .map(|i| {
                    (0..m.cols())
                        .map(|j| {
                            m.get(i, j)
                                .mod_floor(&BigInt::from(moduli[t]))
                                .to_u64()
                                .expect("reduced entry fits u64")
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    // The image subgroup of A^rows, stored as flattened tuples.
    let mut image: HashSet<Vec<u64>> = HashSet::new();
    let mut x = vec![0u64; m.cols() * k];
    loop {
        let mut y = vec![0u64; m.rows() * k];
        for t in 0..k {
            for i in 0..m.rows() {
                let mut acc: u128 = 0;
                for c in 0..m.cols() {
                    acc = (acc + m_mod[t][i][c] as u128 * x[c * k + t] as u128)
                        % moduli[t] as u128;
                }
                y[i * k + t] = acc as u64;
            }
        }
        image.insert(y);
        if !advance(&mut x, &moduli, k) {
            break;
        }
    }

    let quotient_order = (target_size / image.len() as u128) as u64;
    let mut factors_by_prime: Vec<(u64, Vec<u32>)> = Vec::new();
    for (p, max_e) in factorize_u64(quotient_order) {
        // |Q[p^j]| from counting elements x of A^rows with p^j * x in the
        // image; each quotient class is counted |image| times.
        let mut prev_log = 0u32;
        let mut counts_geq: Vec<u32> = Vec::new();
        for j in 1..=max_e {
            let pj = p.pow(j);
            let mut count: u128 = 0;
            let mut x = vec![0u64; m.rows() * k];
            loop {
                let scaled: Vec<u64> = x
                    .iter()
                    .enumerate()
                    .map(|(idx, &v)| {
                        let md = moduli[idx % k] as u128;
                        (v as u128 * (pj as u128 % md) % md) as u64
                    })
                    .collect();
                if image.contains(&scaled) {
                    count += 1;
                }
                if !advance(&mut x, &moduli, k) {
                    break;
                }
            }
            let torsion = (count / image.len() as u128) as u64;
            let log = log_exact(torsion, p);
            counts_geq.push(log - prev_log);
            prev_log = log;
        }
        // counts_geq[j-1] = number of cyclic p-factors with exponent >= j,
        // so the factor in a given slot has exponent equal to the number of
        // levels j whose count still exceeds the slot index.
        let nfactors = counts_geq.first().copied().unwrap_or(0) as usize;
        let mut exps = Vec::new();
        for slot in 0..nfactors {
            let e = counts_geq.iter().filter(|&&c| c as usize > slot).count() as u32;
            exps.push(e);
        }
        exps.sort_unstable_by(|a, b| b.cmp(a));
        factors_by_prime.push((p, exps));
    }

    let slots = factors_by_prime
        .iter()
        .map(|(_, v)| v.len())
        .max()
        .unwrap_or(0);
    let mut factors = Vec::new();
    for slot in 0..slots {
        let mut d: u64 = 1;
        for (p, exps) in &factors_by_prime {
            if let Some(&e) = exps.get(slot) {
                d *= p.pow(e);
            }
        }
        factors.push(d);
    }
    factors.reverse();
    FiniteAbelianGroup::new(factors)
}

fn log_exact(mut n: u64, p: u64) -> u32 {
    let mut e = 0;
    while n > 1 {
        debug_assert_eq!(n % p, 0, "torsion count is a power of p");
        n /= p;
        e += 1;
    }
    e
}

// Mixed-radix increment over coords*k slots with moduli repeating per coord.
fn advance(x: &mut [u64], moduli: &[u64], k: usize) -> bool {
    for idx in 0..x.len() {
        let m = moduli[idx % k];
        x[idx] += 1;
        if x[idx] < m {
            return true;
        }
        x[idx] = 0;
    }
    false
}
