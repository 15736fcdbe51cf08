//! Small dense linear algebra over [`Scalar`]: pivoted LU, determinant,
//! solves, first row of the inverse, condition estimate and row reduction.
//!
//! Pivoting picks the candidate of largest absolute value and breaks ties by
//! the lowest row index, so floating results are reproducible run to run.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    size: usize,
    entries: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(size: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::arg(format!(
                "{} entries cannot form a {size}x{size} matrix",
                entries.len()
            )));
        }
        Ok(Matrix { size, entries })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::arg("matrix rows must all have length equal to the row count"));
        }
        Ok(Matrix { size, entries: rows.into_iter().flatten().collect() })
    }

    pub fn zeros(size: usize) -> Self {
        Matrix { size, entries: vec![T::zero(); size * size] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size);
        for i in 0..size {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.size + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.entries[i * self.size + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.size..(i + 1) * self.size]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.size).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let n = self.size;
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                out.push(self.get(i, j).clone());
            }
        }
        Matrix { size: n, entries: out }
    }

    pub fn mul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.size != other.size {
            return Err(Error::arg("matrix product of mismatched sizes"));
        }
        let n = self.size;
        let mut out = Matrix::<T>::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j).clone() + a.clone() * other.get(k, j).clone();
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.size {
            return Err(Error::arg("matrix-vector product of mismatched sizes"));
        }
        Ok((0..self.size)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.size)
            .map(|i| self.row(i).iter().map(|v| v.to_f64_lossy().abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { size: self.size, entries: self.entries.iter().map(f).collect() }
    }
}

/// LU factorization `P·M = L·U` with unit lower-triangular `L` stored below
/// the diagonal of `lu`.
#[derive(Debug, Clone)]
pub struct LuFactors<T> {
    size: usize,
    lu: Vec<T>,
    /// `perm[i]` is the original row placed at position `i`.
    perm: Vec<usize>,
    sign: i8,
}

enum Elimination<T> {
    Complete(LuFactors<T>),
    Deficient { rank: usize, pivots: Vec<(usize, f64)> },
}

fn eliminate<T: Scalar>(m: &Matrix<T>, pivot_floor: f64) -> Elimination<T> {
    let n = m.size;
    let mut lu = m.entries.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1i8;
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let mut best = k;
        let mut best_abs = lu[k * n + k].abs();
        for i in k + 1..n {
            let cand = lu[i * n + k].abs();
            if cand > best_abs {
                best = i;
                best_abs = cand;
            }
        }
        let too_small = if T::EXACT {
            best_abs.is_zero()
        } else {
            best_abs.to_f64_lossy() <= pivot_floor
        };
        if too_small {
            return Elimination::Deficient { rank: k, pivots };
        }
        pivots.push((k, best_abs.to_f64_lossy()));
        if best != k {
            for j in 0..n {
                lu.swap(k * n + j, best * n + j);
            }
            perm.swap(k, best);
            sign = -sign;
        }
        let pivot = lu[k * n + k].clone();
        for i in k + 1..n {
            if lu[i * n + k].is_zero() {
                continue;
            }
            let factor = lu[i * n + k].clone() / pivot.clone();
            for j in k + 1..n {
                let v = lu[i * n + j].clone() - factor.clone() * lu[k * n + j].clone();
                lu[i * n + j] = v;
            }
            lu[i * n + k] = factor;
        }
    }
    Elimination::Complete(LuFactors { size: n, lu, perm, sign })
}

/// Pivots at or below this fraction of ‖M‖∞·size are treated as zero in
/// floating mode.
fn float_pivot_floor<T: Scalar>(m: &Matrix<T>) -> f64 {
    f64::EPSILON * m.norm_inf() * m.size as f64
}

pub fn lu_decompose<T: Scalar>(m: &Matrix<T>) -> Result<LuFactors<T>> {
    match eliminate(m, float_pivot_floor(m)) {
        Elimination::Complete(f) => Ok(f),
        Elimination::Deficient { rank, pivots } => {
            Err(Error::SingularMatrix { size: m.size, rank, pivots })
        }
    }
}

impl<T: Scalar> LuFactors<T> {
    pub fn size(&self) -> usize {
        self.size
    }

    fn at(&self, i: usize, j: usize) -> &T {
        &self.lu[i * self.size + j]
    }

    pub fn determinant(&self) -> T {
        let mut det = if self.sign > 0 { T::one() } else { -T::one() };
        for k in 0..self.size {
            det = det * self.at(k, k).clone();
        }
        det
    }

    /// `ln|det|`, summed over pivots so large sizes do not overflow.
    pub fn log_abs_det(&self) -> f64 {
        (0..self.size).map(|k| self.at(k, k).to_f64_lossy().abs().ln()).sum()
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.size;
        if rhs.len() != n {
            return Err(Error::arg(format!("right-hand side of length {} for size {n}", rhs.len())));
        }
        let mut y: Vec<T> = self.perm.iter().map(|&p| rhs[p].clone()).collect();
        for i in 0..n {
            let mut acc = y[i].clone();
            for j in 0..i {
                acc = acc - self.at(i, j).clone() * y[j].clone();
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = y[i].clone();
            for j in i + 1..n {
                acc = acc - self.at(i, j).clone() * y[j].clone();
            }
            y[i] = acc / self.at(i, i).clone();
        }
        Ok(y)
    }

    /// Solves `Mᵀ·x = rhs` with the factors of `M`.
    pub fn solve_transpose(&self, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.size;
        if rhs.len() != n {
            return Err(Error::arg(format!("right-hand side of length {} for size {n}", rhs.len())));
        }
        // Uᵀ z = rhs
        let mut z = rhs.to_vec();
        for i in 0..n {
            let mut acc = z[i].clone();
            for j in 0..i {
                acc = acc - self.at(j, i).clone() * z[j].clone();
            }
            z[i] = acc / self.at(i, i).clone();
        }
        // Lᵀ w = z
        for i in (0..n).rev() {
            let mut acc = z[i].clone();
            for j in i + 1..n {
                acc = acc - self.at(j, i).clone() * z[j].clone();
            }
            z[i] = acc;
        }
        let mut x = vec![T::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i].clone();
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Matrix<T> {
        let n = self.size;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            cols.push(self.solve(&e).expect("sizes agree"));
        }
        let mut out = Matrix::zeros(n);
        for (j, col) in cols.into_iter().enumerate() {
            for (i, v) in col.into_iter().enumerate() {
                out.set(i, j, v);
            }
        }
        out
    }
}

pub fn lu_solve<T: Scalar>(m: &Matrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    lu_decompose(m)?.solve(rhs)
}

/// Solves for several right-hand sides at once; `rhs` holds one column per entry.
pub fn lu_solve_many<T: Scalar>(m: &Matrix<T>, rhs: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let f = lu_decompose(m)?;
    rhs.iter().map(|b| f.solve(b)).collect()
}

/// First row of `M⁻¹`, obtained from `Mᵀ·x = e₁`.
pub fn inverse_first_row<T: Scalar>(m: &Matrix<T>) -> Result<Vec<T>> {
    let f = lu_decompose(m)?;
    let mut e1 = vec![T::zero(); m.size];
    if let Some(first) = e1.first_mut() {
        *first = T::one();
    }
    f.solve_transpose(&e1)
}

pub fn inverse<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>> {
    Ok(lu_decompose(m)?.inverse())
}

/// Determinant by elimination; exact in rational mode. Never fails: a column
/// without a nonzero pivot gives zero.
pub fn determinant<T: Scalar>(m: &Matrix<T>) -> T {
    match eliminate(m, 0.0) {
        Elimination::Complete(f) => f.determinant(),
        Elimination::Deficient { .. } => T::zero(),
    }
}

/// `‖M‖∞·‖M⁻¹‖∞`, or `+∞` when `M` is singular.
pub fn condition_estimate<T: Scalar>(m: &Matrix<T>) -> f64 {
    match lu_decompose(m) {
        Ok(f) => m.norm_inf() * f.inverse().norm_inf(),
        Err(_) => f64::INFINITY,
    }
}

/// Reduced row echelon form of a rectangular matrix.
#[derive(Debug, Clone)]
pub struct Rref<T> {
    pub rows: usize,
    pub cols: usize,
    pub reduced: Vec<T>,
    pub pivot_cols: Vec<usize>,
    /// |pivot| before normalization, one per pivot column.
    pub pivot_magnitudes: Vec<f64>,
}

impl<T: Scalar> Rref<T> {
    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    /// Basis of the right null space, one vector per free column.
    pub fn null_basis(&self) -> Vec<Vec<T>> {
        let mut basis = Vec::new();
        let is_pivot: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &c in &self.pivot_cols {
                v[c] = true;
            }
            v
        };
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![T::zero(); self.cols];
            v[free] = T::one();
            for (r, &pc) in self.pivot_cols.iter().enumerate() {
                v[pc] = -self.reduced[r * self.cols + free].clone();
            }
            basis.push(v);
        }
        basis
    }
}

/// Row-reduces `rows × cols` data. Entries with |v| ≤ `tol` count as zero in
/// floating mode; rational mode ignores `tol`.
pub fn rref<T: Scalar>(rows: usize, cols: usize, data: &[T], tol: f64) -> Rref<T> {
    assert_eq!(data.len(), rows * cols, "rref data shape");
    let mut a = data.to_vec();
    let mut pivot_cols = Vec::new();
    let mut pivot_magnitudes = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let mut best = r;
        let mut best_abs = a[r * cols + c].abs();
        for i in r + 1..rows {
            let cand = a[i * cols + c].abs();
            if cand > best_abs {
                best = i;
                best_abs = cand;
            }
        }
        let negligible = if T::EXACT { best_abs.is_zero() } else { best_abs.to_f64_lossy() <= tol };
        if negligible {
            if !T::EXACT {
                for i in r..rows {
                    a[i * cols + c] = T::zero();
                }
            }
            continue;
        }
        if best != r {
            for j in 0..cols {
                a.swap(r * cols + j, best * cols + j);
            }
        }
        let pivot = a[r * cols + c].clone();
        for j in c..cols {
            let v = a[r * cols + j].clone() / pivot.clone();
            a[r * cols + j] = v;
        }
        for i in 0..rows {
            if i == r || a[i * cols + c].is_zero() {
                continue;
            }
            let factor = a[i * cols + c].clone();
            for j in c..cols {
                let v = a[i * cols + j].clone() - factor.clone() * a[r * cols + j].clone();
                a[i * cols + j] = v;
            }
        }
        pivot_cols.push(c);
        pivot_magnitudes.push(best_abs.to_f64_lossy());
        r += 1;
    }
    Rref { rows, cols, reduced: a, pivot_cols, pivot_magnitudes }
}
