//! Coefficient vectors and the matrices built from them: the n!×n!
//! permutation-coefficient matrix, its rank-3 symmetry reduction, the 3×3
//! trace matrix Γ, and degeneracy diagnostics.
//!
//! The coefficient matrix is indexed by the canonical order of S_n. Row ρ is
//! the base equation with its free indices relabeled by ρ (right side
//! `B[ρ·x]`), column τ is the unknown `N[τ·x]`, and the entry is
//! `a[ρ⁻¹∘τ]`. This is the left regular representation `Σ_σ a_σ L(σ)`.
//!
//! For rank 3 the determinant factors as `σ₁·σ₂·σ₃²`, one factor per
//! irreducible representation of S_3 (trivial, sign, and the 2-dimensional
//! standard representation, which appears twice). The general-n analogue is
//! Frobenius' group-determinant factorization; it is not implemented here.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::perm::{canonical_order, factorial, Perm, PermTable};
use crate::scalar::{from_usize, max_abs, Scalar, FLOAT_ZERO_TOL};
use crate::tensor::{lhs_apply, traces3, DenseTensor, Metric, Symmetry};

/// Coefficients `a_σ` indexed by the canonical order of S_n.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector<T> {
    rank: usize,
    a: Vec<T>,
}

impl<T: Scalar> CoeffVector<T> {
    pub fn new(rank: usize, a: Vec<T>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidRank(0));
        }
        if rank > crate::perm::MAX_TABLE_RANK {
            return Err(Error::UnsupportedRank { rank, reason: "n! must not exceed 720" });
        }
        let expected = factorial(rank);
        if a.len() != expected {
            return Err(Error::arg(format!(
                "rank {rank} needs {expected} coefficients, got {}",
                a.len()
            )));
        }
        if let Some(pos) = a.iter().position(|v| !v.is_finite_value()) {
            return Err(Error::arg(format!("coefficient {} is not finite", pos + 1)));
        }
        Ok(CoeffVector { rank, a })
    }

    /// The coefficient vector with a single 1 at canonical position `k`.
    pub fn unit(rank: usize, k: usize) -> Result<Self> {
        let m = factorial(rank);
        if k >= m {
            return Err(Error::arg(format!("unit position {k} out of range for rank {rank}")));
        }
        let mut a = vec![T::zero(); m];
        a[k] = T::one();
        Self::new(rank, a)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn values(&self) -> &[T] {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn scale(&self, s: &T) -> Self {
        CoeffVector { rank: self.rank, a: self.a.iter().map(|v| v.clone() * s.clone()).collect() }
    }

    /// Group-algebra product: `(a⋆b)_υ = Σ_{σ∘τ=υ} a_σ b_τ`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.rank != other.rank {
            return Err(Error::arg("convolution of coefficient vectors of different rank"));
        }
        let table = PermTable::new(self.rank)?;
        let mut out = vec![T::zero(); self.a.len()];
        for (i, ai) in self.a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in other.a.iter().enumerate() {
                let k = table.compose(i, j);
                out[k] = out[k].clone() + ai.clone() * bj.clone();
            }
        }
        Ok(CoeffVector { rank: self.rank, a: out })
    }

    pub fn convert<U: Scalar>(&self) -> CoeffVector<U> {
        CoeffVector { rank: self.rank, a: self.a.iter().map(crate::scalar::convert).collect() }
    }
}

/// Coefficients of the nine trace terms, `a7_i`, `a8_i`, `a9_i` for i = 1..3.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceCoeffs<T> {
    pub a7: [T; 3],
    pub a8: [T; 3],
    pub a9: [T; 3],
}

impl<T: Scalar> TraceCoeffs<T> {
    pub fn zero() -> Self {
        let z = || [T::zero(), T::zero(), T::zero()];
        TraceCoeffs { a7: z(), a8: z(), a9: z() }
    }

    pub fn is_zero(&self) -> bool {
        self.a7.iter().chain(&self.a8).chain(&self.a9).all(|v| v.is_zero())
    }

    pub fn convert<U: Scalar>(&self) -> TraceCoeffs<U> {
        let c = |v: &[T; 3]| [0, 1, 2].map(|i| crate::scalar::convert(&v[i]));
        TraceCoeffs { a7: c(&self.a7), a8: c(&self.a8), a9: c(&self.a9) }
    }
}

/// How the rows and columns of a [`CoeffMatrix`] map onto arrangements.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixBasis {
    /// Rows and columns are all of S_n in canonical order.
    Full { order: Vec<Perm> },
    /// Rank-3 reduction under a pair (anti)symmetry of N.
    Reduced {
        symmetry: Symmetry,
        /// Relabelings kept as rows; the right side of row r is `B[rows[r]·x]`.
        rows: Vec<Perm>,
        /// Class representatives; column c is the unknown `N[columns[c]·x]`.
        columns: Vec<Perm>,
        /// For each canonical arrangement: its class and the sign relating
        /// `N[τ·x]` to the class representative.
        class_map: Vec<(usize, i64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffMatrix<T> {
    pub matrix: Matrix<T>,
    pub basis: MatrixBasis,
}

impl<T: Scalar> CoeffMatrix<T> {
    pub fn size(&self) -> usize {
        self.matrix.size()
    }
}

/// Position layout of the coefficient matrix: entry `(ρ, τ)` holds the
/// coefficient with canonical index `layout[ρ][τ]`. Useful for symbolic
/// inspection of the matrix.
pub fn coefficient_layout(rank: usize) -> Result<Vec<Vec<usize>>> {
    let table = PermTable::new(rank)?;
    let m = table.size();
    Ok((0..m)
        .map(|rho| {
            let rho_inv = table.inverse(rho);
            (0..m).map(|tau| table.compose(rho_inv, tau)).collect()
        })
        .collect())
}

/// The n!×n! permutation-coefficient matrix, `A[ρ][τ] = a[ρ⁻¹∘τ]`.
pub fn build_a<T: Scalar>(coeffs: &CoeffVector<T>) -> Result<CoeffMatrix<T>> {
    let layout = coefficient_layout(coeffs.rank)?;
    let m = layout.len();
    let mut entries = Vec::with_capacity(m * m);
    for row in &layout {
        entries.extend(row.iter().map(|&k| coeffs.a[k].clone()));
    }
    Ok(CoeffMatrix {
        matrix: Matrix::new(m, entries)?,
        basis: MatrixBasis::Full { order: canonical_order(coeffs.rank)? },
    })
}

fn require_rank3<T: Scalar>(coeffs: &CoeffVector<T>) -> Result<()> {
    if coeffs.rank != 3 {
        return Err(Error::UnsupportedRank { rank: coeffs.rank, reason: "defined for rank 3 only" });
    }
    Ok(())
}

/// `(σ₁, σ₂, σ₃)` with `det A = σ₁·σ₂·σ₃²` at rank 3.
///
/// `σ₁ = Σ a_i`, `σ₂ = Σ (a_i − a_{i+3})`,
/// `σ₃ = Σ (a_i² − a_{i+3}²) − Σ_{i<j} (a_i a_j − a_{i+3} a_{j+3})`, where
/// `a_1..a_3` are the even arrangements and `a_4..a_6` the transpositions.
pub fn det_factors3<T: Scalar>(coeffs: &CoeffVector<T>) -> Result<[T; 3]> {
    require_rank3(coeffs)?;
    let a = &coeffs.a;
    let s1 = a.iter().cloned().fold(T::zero(), |x, y| x + y);
    let s2 = (0..3).fold(T::zero(), |acc, i| acc + a[i].clone() - a[i + 3].clone());
    let mut s3 = T::zero();
    for i in 0..3 {
        s3 = s3 + a[i].clone() * a[i].clone() - a[i + 3].clone() * a[i + 3].clone();
        for j in i + 1..3 {
            s3 = s3 - (a[i].clone() * a[j].clone() - a[i + 3].clone() * a[j + 3].clone());
        }
    }
    Ok([s1, s2, s3])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport<T> {
    pub size: usize,
    pub det: T,
    pub singular: bool,
    /// Rank-3 factors `(σ₁, σ₂, σ₃)`.
    pub sigma: Option<[T; 3]>,
    /// Zero-based indices of the σ factors that vanish.
    pub vanishing: Vec<usize>,
    pub nullity: usize,
    /// Right null space of the matrix: combinations of the permuted unknowns
    /// the equation does not constrain.
    pub null_basis: Vec<Vec<T>>,
    /// `‖A‖∞·‖A⁻¹‖∞` in floating mode.
    pub condition: Option<f64>,
}

impl<T: Scalar> DegeneracyReport<T> {
    pub fn summary(&self) -> String {
        let mut s = format!("det = {}, nullity = {}", self.det, self.nullity);
        if let Some(sigma) = &self.sigma {
            s.push_str(&format!(", sigma = ({}, {}, {})", sigma[0], sigma[1], sigma[2]));
            if !self.vanishing.is_empty() {
                let names: Vec<String> = self.vanishing.iter().map(|i| format!("sigma{}", i + 1)).collect();
                s.push_str(&format!(", vanishing: {}", names.join(", ")));
            }
        }
        s
    }
}

/// Floating matrices with `‖M‖∞·‖M⁻¹‖∞` beyond this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Degeneracy diagnostics of an arbitrary square matrix (no σ factors).
pub fn matrix_report<T: Scalar>(m: &Matrix<T>) -> DegeneracyReport<T> {
    let size = m.size();
    let det = linalg::determinant(m);
    let condition = (!T::EXACT).then(|| linalg::condition_estimate(m));
    let ill_conditioned = condition.is_some_and(|c| c >= SINGULAR_CONDITION);
    let tol = FLOAT_ZERO_TOL * m.norm_inf();
    let mut reduced = linalg::rref(size, size, m.entries(), tol);
    if ill_conditioned && reduced.rank() == size {
        // Numerically singular but every pivot cleared the rank tolerance:
        // treat the weakest pivot as the null direction.
        let weakest = reduced.pivot_magnitudes.iter().cloned().fold(f64::INFINITY, f64::min);
        reduced = linalg::rref(size, size, m.entries(), weakest);
    }
    let nullity = size - reduced.rank();
    DegeneracyReport {
        size,
        det,
        singular: ill_conditioned || nullity > 0,
        sigma: None,
        vanishing: Vec::new(),
        nullity,
        null_basis: reduced.null_basis(),
        condition,
    }
}

/// Full diagnostics of the permutation-coefficient matrix, with σ factors at
/// rank 3.
pub fn degeneracy_report<T: Scalar>(coeffs: &CoeffVector<T>) -> Result<DegeneracyReport<T>> {
    let a = build_a(coeffs)?;
    let mut report = matrix_report(&a.matrix);
    if coeffs.rank == 3 {
        let sigma = det_factors3(coeffs)?;
        let scale = max_abs(&coeffs.a);
        let scales = [scale, scale, scale * scale];
        report.vanishing = (0..3).filter(|&k| sigma[k].is_negligible(scales[k])).collect();
        report.sigma = Some(sigma);
    }
    Ok(report)
}

/// Folds the 6×6 matrix under `N[swap(x)] = sign·N[x]` for the given slot
/// pair.
///
/// Columns pair up as `{τ, τ∘t}` with `t` the pair transposition; each class
/// is represented by its even member, so the unknowns are `N_{αμν}`,
/// `N_{ναμ}`, `N_{μνα}`. The rows kept are the even relabelings, paired with
/// `B_{αμν}`, `B_{ναμ}`, `B_{μνα}`.
pub fn reduce_symmetric<T: Scalar>(coeffs: &CoeffVector<T>, symmetry: Symmetry) -> Result<CoeffMatrix<T>> {
    require_rank3(coeffs)?;
    let table = PermTable::new(3)?;
    let t = table.index_of(&symmetry.pair.transposition()).expect("transposition is canonical");
    let evens = [0usize, 1, 2];
    let mut class_map = vec![(0usize, 1i64); 6];
    for (c, &rep) in evens.iter().enumerate() {
        class_map[rep] = (c, 1);
        class_map[table.compose(rep, t)] = (c, symmetry.sign.as_i64());
    }
    let mut entries = Vec::with_capacity(9);
    for &rho in &evens {
        let rho_inv = table.inverse(rho);
        for &rep in &evens {
            let direct = coeffs.a[table.compose(rho_inv, rep)].clone();
            let partner = coeffs.a[table.compose(rho_inv, table.compose(rep, t))].clone();
            entries.push(direct + symmetry.sign.apply(partner));
        }
    }
    let order = table.order();
    Ok(CoeffMatrix {
        matrix: Matrix::new(3, entries)?,
        basis: MatrixBasis::Reduced {
            symmetry,
            rows: evens.iter().map(|&i| order[i].clone()).collect(),
            columns: evens.iter().map(|&i| order[i].clone()).collect(),
            class_map,
        },
    })
}

/// The 3×3 matrix Γ with `traces(lhs(N)) = Γ·traces(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatrix<T> {
    pub entries: Matrix<T>,
    pub dim_used: usize,
}

/// Rank-3 probe with `δ` on the given zero-based slot pair and `e₀` on the
/// remaining slot.
fn trace_probe<T: Scalar>(pair: (usize, usize), d: usize) -> DenseTensor<T> {
    let free = 3 - pair.0 - pair.1;
    DenseTensor::from_fn(3, d, |x| {
        if x[pair.0] == x[pair.1] && x[free] == 0 {
            T::one()
        } else {
            T::zero()
        }
    })
    .expect("probe shape")
}

/// Γ by the probe-tensor method: traced left sides of three probes with
/// known traces, then a 3×3 solve.
pub fn build_gamma<T: Scalar>(coeffs: &CoeffVector<T>, tc: &TraceCoeffs<T>, d: usize) -> Result<GammaMatrix<T>> {
    require_rank3(coeffs)?;
    if d < 2 {
        return Err(Error::InvalidDimension { dim: d, reason: "trace probes are degenerate below dimension 2" });
    }
    let g = Metric::euclidean(d);
    let mut probe_traces = Matrix::zeros(3);
    let mut image_traces = Matrix::zeros(3);
    for (k, pair) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
        let probe = trace_probe::<T>(pair, d);
        let before = traces3(&probe, &g)?;
        let after = traces3(&lhs_apply(coeffs, &probe, Some(tc), Some(&g))?, &g)?;
        for i in 0..3 {
            probe_traces.set(i, k, before[i].values[0].clone());
            image_traces.set(i, k, after[i].values[0].clone());
        }
    }
    // Γ·P = Y  ⇔  Pᵀ·Γᵀ = Yᵀ, one transposed solve per row of Γ.
    let factors = linalg::lu_decompose(&probe_traces)?;
    let mut gamma = Matrix::zeros(3);
    for i in 0..3 {
        let row = factors.solve_transpose(image_traces.row(i))?;
        for (j, v) in row.into_iter().enumerate() {
            gamma.set(i, j, v);
        }
    }
    Ok(GammaMatrix { entries: gamma, dim_used: d })
}

/// Closed form of Γ. Row i traces the left side over slot pair (1,2), (1,3)
/// or (2,3); each entry is a sum of two permutation coefficients plus the
/// trace coefficients, with the dimension `d` arising from `g^{μν}g_{μν}`.
pub fn gamma_closed_form<T: Scalar>(coeffs: &CoeffVector<T>, tc: &TraceCoeffs<T>, d: usize) -> Result<Matrix<T>> {
    require_rank3(coeffs)?;
    // Zero-based canonical indices: 0 αμν, 1 ναμ, 2 μνα, 3 ανμ, 4 νμα, 5 μαν.
    const PAIRS: [[(usize, usize); 3]; 3] = [
        [(0, 5), (2, 3), (1, 4)],
        [(1, 3), (0, 4), (2, 5)],
        [(2, 4), (1, 5), (0, 3)],
    ];
    let a = &coeffs.a;
    let dd: T = from_usize(d);
    let mut gamma = Matrix::zeros(3);
    for i in 0..3 {
        for j in 0..3 {
            let (p, q) = PAIRS[i][j];
            let weights = match i {
                0 => [T::one(), dd.clone(), T::one()],
                1 => [dd.clone(), T::one(), T::one()],
                _ => [T::one(), T::one(), dd.clone()],
            };
            let [w7, w8, w9] = weights;
            let v = a[p].clone()
                + a[q].clone()
                + w7 * tc.a7[j].clone()
                + w8 * tc.a8[j].clone()
                + w9 * tc.a9[j].clone();
            gamma.set(i, j, v);
        }
    }
    Ok(gamma)
}

/// Sign convention tying `det A` to the σ factors: `det A = DET_SIGN·σ₁σ₂σ₃²`.
pub const DET_SIGN: i64 = 1;
