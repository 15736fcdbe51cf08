//! Solvers for the permutation equation `Σ_σ a_σ N[σ·x] = B[x]`, its
//! symmetry-reduced and trace-coupled variants, and a brute-force oracle that
//! works on the flattened operator.
//!
//! Every path attaches the residual `‖lhs(N) − B‖∞`, recomputed with
//! [`lhs_apply`] rather than taken from the solve.

use crate::coeff::{
    build_a, build_gamma, degeneracy_report, matrix_report, reduce_symmetric, CoeffVector,
    DegeneracyReport, MatrixBasis, TraceCoeffs,
};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::perm::{canonical_order, Perm};
use crate::scalar::{from_usize, Scalar};
use crate::tensor::{
    accumulate_permuted, add_trace_terms, lhs_apply, traces3, DenseTensor, Metric, Symmetry,
    TraceVector,
};

/// Largest number of unknowns the brute-force oracle will assemble.
pub const ORACLE_MAX_UNKNOWNS: usize = 4096;

/// Relative residual above which a reduced solve is rejected as inconsistent
/// with the declared symmetry (floating mode; rational mode requires zero).
pub const REDUCED_CONSISTENCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvePath {
    Plain,
    Reduced,
    Traced,
    Oracle,
}

impl SolvePath {
    pub fn as_str(self) -> &'static str {
        match self {
            SolvePath::Plain => "plain",
            SolvePath::Reduced => "reduced",
            SolvePath::Traced => "traced",
            SolvePath::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution<T> {
    pub n: DenseTensor<T>,
    /// First row of the inverse of the matrix used by the path. Empty for the
    /// oracle, which never forms it.
    pub inverse_first_row: Vec<T>,
    pub residual_inf: T,
    pub degeneracy: DegeneracyReport<T>,
    pub path: SolvePath,
    /// Whether rank ≤ dimension. Recorded only; the solvers do not need it.
    pub rank_within_dimension: bool,
}

fn max_abs_exact<T: Scalar>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |m, v| {
        let a = v.abs();
        if a > m {
            a
        } else {
            m
        }
    })
}

/// `‖lhs(N) − B‖∞` in the arithmetic of `T`.
pub fn residual_inf<T: Scalar>(
    coeffs: &CoeffVector<T>,
    trace_coeffs: Option<&TraceCoeffs<T>>,
    g: Option<&Metric<T>>,
    n: &DenseTensor<T>,
    b: &DenseTensor<T>,
) -> Result<T> {
    let lhs = lhs_apply(coeffs, n, trace_coeffs, g)?;
    Ok(max_abs_exact(lhs.sub(b)?.values()))
}

/// `Σ_i w_i · B[perms[i]·x]`, accumulated from zero.
fn combine_permuted<T: Scalar>(b: &DenseTensor<T>, perms: &[Perm], weights: &[T]) -> DenseTensor<T> {
    let mut out = vec![T::zero(); b.len()];
    for (p, w) in perms.iter().zip(weights) {
        if !w.is_zero() {
            accumulate_permuted(&mut out, b, p, w);
        }
    }
    DenseTensor::new(b.rank(), b.dim(), out).expect("shape preserved")
}

fn check_shapes<T: Scalar>(coeffs: &CoeffVector<T>, b: &DenseTensor<T>) -> Result<()> {
    if coeffs.rank() != b.rank() {
        return Err(Error::arg(format!(
            "coefficients are for rank {} but B has rank {}",
            coeffs.rank(),
            b.rank()
        )));
    }
    Ok(())
}

/// Factored plain system, reusable across many right-hand sides that share
/// one coefficient vector.
#[derive(Debug, Clone)]
pub struct PlainSolver<T> {
    coeffs: CoeffVector<T>,
    order: Vec<Perm>,
    first_row: Vec<T>,
    report: DegeneracyReport<T>,
}

impl<T: Scalar> PlainSolver<T> {
    pub fn new(coeffs: &CoeffVector<T>) -> Result<Self> {
        let report = degeneracy_report(coeffs)?;
        if report.singular {
            return Err(Error::SingularSystem { summary: report.summary() });
        }
        let a = build_a(coeffs)?;
        let first_row = linalg::inverse_first_row(&a.matrix)?;
        Ok(PlainSolver {
            coeffs: coeffs.clone(),
            order: canonical_order(coeffs.rank())?,
            first_row,
            report,
        })
    }

    pub fn report(&self) -> &DegeneracyReport<T> {
        &self.report
    }

    pub fn inverse_first_row(&self) -> &[T] {
        &self.first_row
    }

    /// `N = Σ_τ ã_τ · B[τ·x]`, without residual bookkeeping.
    pub fn apply(&self, b: &DenseTensor<T>) -> Result<DenseTensor<T>> {
        check_shapes(&self.coeffs, b)?;
        Ok(combine_permuted(b, &self.order, &self.first_row))
    }

    pub fn solve(&self, b: &DenseTensor<T>) -> Result<Solution<T>> {
        let n = self.apply(b)?;
        let residual = residual_inf(&self.coeffs, None, None, &n, b)?;
        Ok(Solution {
            n,
            inverse_first_row: self.first_row.clone(),
            residual_inf: residual,
            degeneracy: self.report.clone(),
            path: SolvePath::Plain,
            rank_within_dimension: b.rank() <= b.dim(),
        })
    }
}

/// Unique solution of the rank-3 equation.
pub fn solve_rank3<T: Scalar>(coeffs: &CoeffVector<T>, b: &DenseTensor<T>) -> Result<Solution<T>> {
    if coeffs.rank() != 3 {
        return Err(Error::UnsupportedRank { rank: coeffs.rank(), reason: "expected rank 3" });
    }
    check_shapes(coeffs, b)?;
    PlainSolver::new(coeffs)?.solve(b)
}

/// Unique solution at any rank up to 6 (720×720 coefficient matrix).
pub fn solve_rankn<T: Scalar>(coeffs: &CoeffVector<T>, b: &DenseTensor<T>) -> Result<Solution<T>> {
    check_shapes(coeffs, b)?;
    PlainSolver::new(coeffs)?.solve(b)
}

/// Trace-coupled rank-3 system, prepared once for a coefficient set and metric.
#[derive(Debug, Clone)]
pub struct TracedSolver<T> {
    plain: PlainSolver<T>,
    trace_coeffs: TraceCoeffs<T>,
    metric: Metric<T>,
    gamma: linalg::LuFactors<T>,
}

impl<T: Scalar> TracedSolver<T> {
    pub fn new(coeffs: &CoeffVector<T>, tc: &TraceCoeffs<T>, g: &Metric<T>) -> Result<Self> {
        if coeffs.rank() != 3 {
            return Err(Error::UnsupportedRank { rank: coeffs.rank(), reason: "trace terms need rank 3" });
        }
        let gamma = build_gamma(coeffs, tc, g.dim())?;
        let gamma_report = matrix_report(&gamma.entries);
        if gamma_report.singular {
            return Err(Error::GammaSingular { summary: gamma_report.summary() });
        }
        let plain = PlainSolver::new(coeffs)?;
        Ok(TracedSolver {
            plain,
            trace_coeffs: tc.clone(),
            metric: g.clone(),
            gamma: linalg::lu_decompose(&gamma.entries)?,
        })
    }

    /// The trace-corrected source `B̂ = B − Σ_i(a7_i η⁽ⁱ⁾_μ g_αν + a8_i η⁽ⁱ⁾_ν g_αμ
    /// + a9_i η⁽ⁱ⁾_α g_μν)` with `η = Γ⁻¹·traces(B)`.
    pub fn corrected_source(&self, b: &DenseTensor<T>) -> Result<DenseTensor<T>> {
        let d = b.dim();
        if self.metric.dim() != d {
            return Err(Error::arg(format!("metric dimension {} for B of dimension {d}", self.metric.dim())));
        }
        let bt = traces3(b, &self.metric)?;
        let mut eta = [vec![T::zero(); d], vec![T::zero(); d], vec![T::zero(); d]];
        for m in 0..d {
            let rhs: Vec<T> = bt.iter().map(|t| t.values[m].clone()).collect();
            let sol = self.gamma.solve(&rhs)?;
            for (i, v) in sol.into_iter().enumerate() {
                eta[i][m] = v;
            }
        }
        let [e0, e1, e2] = eta;
        let eta = [TraceVector { values: e0 }, TraceVector { values: e1 }, TraceVector { values: e2 }];
        let mut terms = DenseTensor::zeros(3, d)?;
        add_trace_terms(&mut terms, &self.trace_coeffs, &eta, &self.metric)?;
        b.sub(&terms)
    }

    pub fn solve(&self, b: &DenseTensor<T>) -> Result<Solution<T>> {
        check_shapes(&self.plain.coeffs, b)?;
        let b_hat = self.corrected_source(b)?;
        let n = self.plain.apply(&b_hat)?;
        let residual =
            residual_inf(&self.plain.coeffs, Some(&self.trace_coeffs), Some(&self.metric), &n, b)?;
        Ok(Solution {
            n,
            inverse_first_row: self.plain.first_row.clone(),
            residual_inf: residual,
            degeneracy: self.plain.report.clone(),
            path: SolvePath::Traced,
            rank_within_dimension: 3 <= b.dim(),
        })
    }
}

/// Unique solution of the rank-3 equation with trace terms.
pub fn solve_with_traces<T: Scalar>(
    coeffs: &CoeffVector<T>,
    tc: &TraceCoeffs<T>,
    b: &DenseTensor<T>,
    g: &Metric<T>,
) -> Result<Solution<T>> {
    check_shapes(coeffs, b)?;
    TracedSolver::new(coeffs, tc, g)?.solve(b)
}

/// Prepared symmetry-reduced system.
#[derive(Debug, Clone)]
pub struct ReducedSolver<T> {
    coeffs: CoeffVector<T>,
    symmetry: Symmetry,
    rows: Vec<Perm>,
    first_row: Vec<T>,
    report: DegeneracyReport<T>,
}

impl<T: Scalar> ReducedSolver<T> {
    pub fn new(coeffs: &CoeffVector<T>, symmetry: Symmetry) -> Result<Self> {
        let reduced = reduce_symmetric(coeffs, symmetry)?;
        let report = matrix_report(&reduced.matrix);
        if report.singular {
            return Err(Error::SingularReduced { summary: report.summary() });
        }
        let MatrixBasis::Reduced { rows, .. } = reduced.basis else {
            unreachable!("reduce_symmetric returns a reduced basis")
        };
        Ok(ReducedSolver {
            coeffs: coeffs.clone(),
            symmetry,
            rows,
            first_row: linalg::inverse_first_row(&reduced.matrix)?,
            report,
        })
    }

    pub fn inverse_first_row(&self) -> &[T] {
        &self.first_row
    }

    pub fn solve(&self, b: &DenseTensor<T>) -> Result<Solution<T>> {
        check_shapes(&self.coeffs, b)?;
        let raw = combine_permuted(b, &self.rows, &self.first_row);
        // Impose the declared symmetry exactly: (N + s·swap(N)) / 2 is
        // bit-exactly (anti)symmetric.
        let (i, j) = self.symmetry.pair.slots();
        let swapped = raw.swap_slots(i, j);
        let two: T = from_usize(2);
        let sign = self.symmetry.sign;
        let values = raw
            .values()
            .iter()
            .zip(swapped.values())
            .map(|(u, v)| (u.clone() + sign.apply(v.clone())) / two.clone())
            .collect();
        let n = DenseTensor::new(3, b.dim(), values)?;
        let residual = residual_inf(&self.coeffs, None, None, &n, b)?;
        let bound = REDUCED_CONSISTENCY_TOL * b.norm_inf().max(1.0);
        let inconsistent = if T::EXACT { !residual.is_zero() } else { residual.to_f64_lossy() > bound };
        if inconsistent {
            return Err(Error::SymmetryViolation { residual: residual.to_f64_lossy() });
        }
        Ok(Solution {
            n,
            inverse_first_row: self.first_row.clone(),
            residual_inf: residual,
            degeneracy: self.report.clone(),
            path: SolvePath::Reduced,
            rank_within_dimension: 3 <= b.dim(),
        })
    }
}

/// Solution restricted to tensors with the given pair (anti)symmetry.
///
/// The source is accepted when the reconstructed symmetric `N` reproduces it
/// through the full equation; otherwise no solution with that symmetry exists
/// and [`Error::SymmetryViolation`] is returned.
pub fn solve_reduced<T: Scalar>(
    coeffs: &CoeffVector<T>,
    b: &DenseTensor<T>,
    symmetry: Symmetry,
) -> Result<Solution<T>> {
    ReducedSolver::new(coeffs, symmetry)?.solve(b)
}

/// Flattened operator of [`lhs_apply`]: column j is the image of the j-th
/// unit tensor.
pub fn assemble_operator<T: Scalar>(
    coeffs: &CoeffVector<T>,
    trace_coeffs: Option<&TraceCoeffs<T>>,
    g: Option<&Metric<T>>,
    rank: usize,
    dim: usize,
) -> Result<Matrix<T>> {
    let probe = DenseTensor::<T>::zeros(rank, dim)?;
    let size = probe.len();
    if size > ORACLE_MAX_UNKNOWNS {
        return Err(Error::ScaleGuard { size, limit: ORACLE_MAX_UNKNOWNS });
    }
    let mut op = Matrix::zeros(size);
    let mut unit = probe.into_values();
    for j in 0..size {
        unit[j] = T::one();
        let col = lhs_apply(coeffs, &DenseTensor::new(rank, dim, unit.clone())?, trace_coeffs, g)?;
        unit[j] = T::zero();
        for (i, v) in col.into_values().into_iter().enumerate() {
            if !v.is_zero() {
                op.set(i, j, v);
            }
        }
    }
    Ok(op)
}

/// Independent oracle: assembles the full operator on flattened N and solves
/// it directly. For singular operators a least-squares representative is
/// returned (free variables set to zero) and the report carries the operator
/// nullity and null space.
pub fn brute_force<T: Scalar>(
    coeffs: &CoeffVector<T>,
    trace_coeffs: Option<&TraceCoeffs<T>>,
    g: Option<&Metric<T>>,
    b: &DenseTensor<T>,
) -> Result<Solution<T>> {
    check_shapes(coeffs, b)?;
    let op = assemble_operator(coeffs, trace_coeffs, g, b.rank(), b.dim())?;
    let report = matrix_report(&op);
    let values = if report.singular {
        least_squares(&op, b.values())
    } else {
        linalg::lu_solve(&op, b.values())?
    };
    let values = values.into_iter().map(|v| v + T::zero()).collect();
    let n = DenseTensor::new(b.rank(), b.dim(), values)?;
    let residual = residual_inf(coeffs, trace_coeffs, g, &n, b)?;
    Ok(Solution {
        n,
        inverse_first_row: Vec::new(),
        residual_inf: residual,
        degeneracy: report,
        path: SolvePath::Oracle,
        rank_within_dimension: b.rank() <= b.dim(),
    })
}

/// A solution of the normal equations `AᵀA·x = Aᵀb` with free variables zero.
fn least_squares<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Vec<T> {
    let m = a.size();
    let at = a.transpose();
    let ata = at.mul(a).expect("square");
    let atb = at.mul_vec(b).expect("sizes agree");
    let cols = m + 1;
    let mut aug = Vec::with_capacity(m * cols);
    for i in 0..m {
        aug.extend_from_slice(ata.row(i));
        aug.push(atb[i].clone());
    }
    let scale = ata.norm_inf().max(crate::scalar::max_abs(&atb));
    let reduced = linalg::rref(m, cols, &aug, crate::scalar::FLOAT_ZERO_TOL * scale);
    let mut x = vec![T::zero(); m];
    for (r, &c) in reduced.pivot_cols.iter().enumerate() {
        if c < m {
            x[c] = reduced.reduced[r * cols + m].clone();
        }
    }
    x
}
