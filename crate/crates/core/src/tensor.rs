//! Dense rank-n tensors, metrics, the three rank-3 traces and the forward map
//! of the permutation equation.
//!
//! Storage is row-major with the last index fastest. Rank-3 slots play the
//! free-index roles `(α, μ, ν)` in that order.

use crate::coeff::{CoeffVector, TraceCoeffs};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::perm::{canonical_order, Perm};
use crate::scalar::{max_abs, Scalar};

/// Metrics whose condition estimate exceeds this get a warning.
pub const METRIC_CONDITION_WARN: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T> {
    rank: usize,
    dim: usize,
    values: Vec<T>,
}

impl<T: Scalar> DenseTensor<T> {
    pub fn new(rank: usize, dim: usize, values: Vec<T>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidRank(0));
        }
        if dim == 0 {
            return Err(Error::InvalidDimension { dim, reason: "dimension must be positive" });
        }
        let expected = checked_volume(rank, dim)?;
        if values.len() != expected {
            return Err(Error::arg(format!(
                "tensor of rank {rank} and dimension {dim} needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(Error::arg(format!("tensor value at flat position {pos} is not finite")));
        }
        Ok(DenseTensor { rank, dim, values })
    }

    pub fn zeros(rank: usize, dim: usize) -> Result<Self> {
        let len = checked_volume(rank, dim)?;
        Self::new(rank, dim, vec![T::zero(); len])
    }

    /// Builds a tensor by evaluating `f` at every multi-index in storage order.
    pub fn from_fn(rank: usize, dim: usize, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let len = checked_volume(rank, dim)?;
        let mut idx = vec![0usize; rank];
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(f(&idx));
            increment(&mut idx, dim);
        }
        Self::new(rank, dim, values)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.rank];
        for slot in (0..self.rank).rev() {
            idx[slot] = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.values[self.flat_index(idx)]
    }

    pub fn norm_inf(&self) -> f64 {
        max_abs(&self.values)
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        DenseTensor { rank: self.rank, dim: self.dim, values: self.values.iter().map(f).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(DenseTensor {
            rank: self.rank,
            dim: self.dim,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rank != other.rank || self.dim != other.dim {
            return Err(Error::arg(format!(
                "shape mismatch: rank {} dim {} vs rank {} dim {}",
                self.rank, self.dim, other.rank, other.dim
            )));
        }
        Ok(())
    }

    /// `max |self − other|` as a double.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.norm_inf())
    }

    /// The tensor with zero-based slots `i` and `j` exchanged.
    pub fn swap_slots(&self, i: usize, j: usize) -> Self {
        let p = Perm::transposition(self.rank, i, j);
        permute_tensor(self, &p).expect("rank matches transposition size")
    }

    pub fn convert<U: Scalar>(&self) -> DenseTensor<U> {
        DenseTensor {
            rank: self.rank,
            dim: self.dim,
            values: self.values.iter().map(crate::scalar::convert).collect(),
        }
    }
}

fn checked_volume(rank: usize, dim: usize) -> Result<usize> {
    u32::try_from(rank)
        .ok()
        .and_then(|r| dim.checked_pow(r))
        .ok_or_else(|| Error::arg(format!("dimension {dim} to the power {rank} overflows")))
}

/// Odometer increment of a row-major multi-index.
fn increment(idx: &mut [usize], dim: usize) {
    for slot in (0..idx.len()).rev() {
        idx[slot] += 1;
        if idx[slot] < dim {
            return;
        }
        idx[slot] = 0;
    }
}

/// Source strides such that the flat position of `p·x` is `Σ_j x[j]·stride[j]`.
fn source_strides(p: &Perm, dim: usize) -> Vec<usize> {
    let n = p.len();
    let row_major: Vec<usize> = (0..n).map(|i| dim.pow((n - 1 - i) as u32)).collect();
    let inv = p.inverse();
    (0..n).map(|j| row_major[inv.get(j)]).collect()
}

/// Calls `f(dest, src)` for every flat destination index and its source under
/// `result[x] = t[p·x]`.
fn for_each_permuted(rank: usize, dim: usize, p: &Perm, mut f: impl FnMut(usize, usize)) {
    let strides = source_strides(p, dim);
    let len = dim.pow(rank as u32);
    let mut idx = vec![0usize; rank];
    let mut src = 0usize;
    for dest in 0..len {
        f(dest, src);
        for slot in (0..rank).rev() {
            idx[slot] += 1;
            src += strides[slot];
            if idx[slot] < dim {
                break;
            }
            idx[slot] = 0;
            src -= dim * strides[slot];
        }
    }
}

/// `result[x] = t[p·x]`, with `(p·x)[i] = x[p(i)]`.
///
/// Note the order of composition: permuting by `p` and then by `q` equals a
/// single permutation by `q∘p`.
pub fn permute_tensor<T: Scalar>(t: &DenseTensor<T>, p: &Perm) -> Result<DenseTensor<T>> {
    if p.len() != t.rank {
        return Err(Error::arg(format!(
            "permutation of size {} applied to a rank-{} tensor",
            p.len(),
            t.rank
        )));
    }
    let mut values = vec![T::zero(); t.values.len()];
    for_each_permuted(t.rank, t.dim, p, |dest, src| values[dest] = t.values[src].clone());
    Ok(DenseTensor { rank: t.rank, dim: t.dim, values })
}

/// `out += coeff · permute_tensor(t, p)` without the intermediate tensor.
pub(crate) fn accumulate_permuted<T: Scalar>(
    out: &mut [T],
    t: &DenseTensor<T>,
    p: &Perm,
    coeff: &T,
) {
    for_each_permuted(t.rank, t.dim, p, |dest, src| {
        let v = std::mem::replace(&mut out[dest], T::zero());
        out[dest] = v + coeff.clone() * t.values[src].clone();
    });
}

/// Symmetric non-degenerate metric with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric<T> {
    g: Matrix<T>,
    g_inv: Matrix<T>,
}

impl<T: Scalar> Metric<T> {
    pub fn new(g: Matrix<T>) -> Result<Self> {
        let d = g.size();
        if d == 0 {
            return Err(Error::InvalidDimension { dim: 0, reason: "metric must be at least 1x1" });
        }
        let mut asym = 0.0f64;
        let mut exact_asym = false;
        for i in 0..d {
            for j in i + 1..d {
                let diff = g.get(i, j).clone() - g.get(j, i).clone();
                asym = asym.max(diff.to_f64_lossy().abs());
                exact_asym |= !diff.is_zero();
            }
        }
        let asymmetric = if T::EXACT { exact_asym } else { asym > 1e-12 * g.norm_inf() };
        if asymmetric {
            return Err(Error::MetricNotSymmetric(asym));
        }
        let factors = linalg::lu_decompose(&g)
            .map_err(|_| Error::arg("metric is singular (det(g) = 0)"))?;
        let g_inv = factors.inverse();
        let cond = g.norm_inf() * g_inv.norm_inf();
        if cond > METRIC_CONDITION_WARN {
            log::warn!("metric condition estimate {cond:e} exceeds {METRIC_CONDITION_WARN:e}; traces may be inaccurate");
        }
        Ok(Metric { g, g_inv })
    }

    pub fn euclidean(dim: usize) -> Self {
        Metric { g: Matrix::identity(dim), g_inv: Matrix::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.g.size()
    }

    pub fn g(&self) -> &Matrix<T> {
        &self.g
    }

    pub fn g_inv(&self) -> &Matrix<T> {
        &self.g_inv
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceVector<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> TraceVector<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// The three traces of a rank-3 tensor, contracting slot pairs (1,2), (1,3)
/// and (2,3) with the inverse metric, in that order.
pub fn traces3<T: Scalar>(n: &DenseTensor<T>, g: &Metric<T>) -> Result<[TraceVector<T>; 3]> {
    if n.rank != 3 {
        return Err(Error::arg(format!("traces need a rank-3 tensor, got rank {}", n.rank)));
    }
    let d = n.dim;
    if g.dim() != d {
        return Err(Error::arg(format!("metric dimension {} for tensor dimension {d}", g.dim())));
    }
    let gi = g.g_inv();
    let mut t = [vec![T::zero(); d], vec![T::zero(); d], vec![T::zero(); d]];
    for a in 0..d {
        for b in 0..d {
            let w = gi.get(a, b);
            if w.is_zero() {
                continue;
            }
            for m in 0..d {
                let v0 = t[0][m].clone() + w.clone() * n.get(&[a, b, m]).clone();
                let v1 = t[1][m].clone() + w.clone() * n.get(&[a, m, b]).clone();
                let v2 = t[2][m].clone() + w.clone() * n.get(&[m, a, b]).clone();
                t[0][m] = v0;
                t[1][m] = v1;
                t[2][m] = v2;
            }
        }
    }
    let [t0, t1, t2] = t;
    Ok([TraceVector { values: t0 }, TraceVector { values: t1 }, TraceVector { values: t2 }])
}

/// Left side of the equation applied to `n`:
/// `Σ_σ a_σ·n[σ·x]`, plus for rank 3 with trace coefficients
/// `Σ_i (a7_i N⁽ⁱ⁾_μ g_αν + a8_i N⁽ⁱ⁾_ν g_αμ + a9_i N⁽ⁱ⁾_α g_μν)`.
pub fn lhs_apply<T: Scalar>(
    coeffs: &CoeffVector<T>,
    n: &DenseTensor<T>,
    trace_coeffs: Option<&TraceCoeffs<T>>,
    g: Option<&Metric<T>>,
) -> Result<DenseTensor<T>> {
    if coeffs.rank() != n.rank {
        return Err(Error::arg(format!(
            "coefficients of rank {} applied to a rank-{} tensor",
            coeffs.rank(),
            n.rank
        )));
    }
    let order = canonical_order(n.rank)?;
    let mut out = vec![T::zero(); n.values.len()];
    for (p, a) in order.iter().zip(coeffs.values()) {
        if !a.is_zero() {
            accumulate_permuted(&mut out, n, p, a);
        }
    }
    let mut result = DenseTensor { rank: n.rank, dim: n.dim, values: out };
    if let Some(tc) = trace_coeffs {
        let g = g.ok_or_else(|| Error::arg("trace terms require a metric"))?;
        add_trace_terms(&mut result, tc, &traces3(n, g)?, g)?;
    }
    Ok(result)
}

/// Adds `Σ_i (a7_i u⁽ⁱ⁾_μ g_αν + a8_i u⁽ⁱ⁾_ν g_αμ + a9_i u⁽ⁱ⁾_α g_μν)` to `out`
/// for arbitrary trace-shaped vectors `u`.
pub(crate) fn add_trace_terms<T: Scalar>(
    out: &mut DenseTensor<T>,
    tc: &TraceCoeffs<T>,
    u: &[TraceVector<T>; 3],
    g: &Metric<T>,
) -> Result<()> {
    let d = out.dim;
    if out.rank != 3 {
        return Err(Error::arg("trace terms are defined for rank 3 only"));
    }
    if g.dim() != d || u.iter().any(|v| v.dim() != d) {
        return Err(Error::arg("trace term dimensions disagree"));
    }
    let combine = |c: &[T; 3]| -> Vec<T> {
        (0..d)
            .map(|m| {
                (0..3).fold(T::zero(), |acc, i| acc + c[i].clone() * u[i].values[m].clone())
            })
            .collect()
    };
    let u7 = combine(&tc.a7);
    let u8 = combine(&tc.a8);
    let u9 = combine(&tc.a9);
    let gm = g.g();
    let mut flat = 0;
    for a in 0..d {
        for m in 0..d {
            for n in 0..d {
                let term = u7[m].clone() * gm.get(a, n).clone()
                    + u8[n].clone() * gm.get(a, m).clone()
                    + u9[a].clone() * gm.get(m, n).clone();
                let v = std::mem::replace(&mut out.values[flat], T::zero());
                out.values[flat] = v + term;
                flat += 1;
            }
        }
    }
    Ok(())
}

/// A pair of rank-3 slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotPair {
    S12,
    S13,
    S23,
}

impl SlotPair {
    /// From one-based slot numbers in either order.
    pub fn from_slots(i: usize, j: usize) -> Result<Self> {
        match (i.min(j), i.max(j)) {
            (1, 2) => Ok(SlotPair::S12),
            (1, 3) => Ok(SlotPair::S13),
            (2, 3) => Ok(SlotPair::S23),
            _ => Err(Error::arg(format!("({i},{j}) is not a slot pair of a rank-3 tensor"))),
        }
    }

    /// Zero-based slots.
    pub fn slots(self) -> (usize, usize) {
        match self {
            SlotPair::S12 => (0, 1),
            SlotPair::S13 => (0, 2),
            SlotPair::S23 => (1, 2),
        }
    }

    pub fn one_based(self) -> [usize; 2] {
        let (i, j) = self.slots();
        [i + 1, j + 1]
    }

    pub fn transposition(self) -> Perm {
        let (i, j) = self.slots();
        Perm::transposition(3, i, j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_i64(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::arg(format!("symmetry sign must be +1 or -1, got {v}"))),
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn apply<T: Scalar>(self, v: T) -> T {
        match self {
            Sign::Plus => v,
            Sign::Minus => -v,
        }
    }
}

/// Pair (anti)symmetry of a rank-3 tensor: `T[swap(x)] = sign·T[x]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symmetry {
    pub pair: SlotPair,
    pub sign: Sign,
}

/// `true` iff `max |T[x] − sign·T[swap(x)]| ≤ tol`.
pub fn symmetry_check<T: Scalar>(t: &DenseTensor<T>, pair: SlotPair, sign: Sign, tol: f64) -> bool {
    if t.rank != 3 {
        return false;
    }
    let (i, j) = pair.slots();
    let swapped = t.swap_slots(i, j);
    t.values
        .iter()
        .zip(&swapped.values)
        .all(|(a, b)| (a.clone() - sign.apply(b.clone())).to_f64_lossy().abs() <= tol)
}
