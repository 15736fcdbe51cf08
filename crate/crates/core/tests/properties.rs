use lintensor::coeff::{build_a, degeneracy_report, det_factors3, CoeffVector, TraceCoeffs};
use lintensor::linalg;
use lintensor::perm::PermTable;
use lintensor::scalar::{from_ratio, Rational};
use lintensor::solver::{brute_force, solve_rankn, solve_reduced, solve_with_traces};
use lintensor::tensor::{lhs_apply, permute_tensor, DenseTensor, Metric, Sign, SlotPair, Symmetry};
use proptest::prelude::*;

fn coeffs(rank: usize) -> impl Strategy<Value = Vec<f64>> {
    let m = (1..=rank).product::<usize>();
    prop::collection::vec(-1.0f64..1.0, m)
}

fn tensor(rank: usize, d: usize) -> impl Strategy<Value = DenseTensor<f64>> {
    prop::collection::vec(-1.0f64..1.0, d.pow(rank as u32)).prop_map(move |v| DenseTensor::new(rank, d, v).unwrap())
}

fn nondegenerate(c: &CoeffVector<f64>) -> bool {
    linalg::condition_estimate(&build_a(c).unwrap().matrix) < 1e5
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solution_satisfies_equation(a in coeffs(3), b in tensor(3, 3)) {
        let c = CoeffVector::new(3, a).unwrap();
        prop_assume!(nondegenerate(&c));
        let s = solve_rankn(&c, &b).unwrap();
        let lhs = lhs_apply(&c, &s.n, None, None).unwrap();
        prop_assert!(lhs.max_abs_diff(&b).unwrap() <= 1e-10 * b.norm_inf().max(1.0));
        prop_assert!(s.residual_inf <= 1e-10 * b.norm_inf().max(1.0));
    }

    #[test]
    fn rank4_solution_satisfies_equation(a in coeffs(4), b in tensor(4, 2)) {
        let mut a = a;
        a[0] += 4.0;
        let c = CoeffVector::new(4, a).unwrap();
        prop_assume!(nondegenerate(&c));
        let s = solve_rankn(&c, &b).unwrap();
        prop_assert!(s.residual_inf <= 1e-10 * b.norm_inf().max(1.0));
    }

    #[test]
    fn solver_is_linear(a in coeffs(3), b1 in tensor(3, 2), b2 in tensor(3, 2), k in -3.0f64..3.0) {
        let c = CoeffVector::new(3, a).unwrap();
        prop_assume!(nondegenerate(&c));
        let n1 = solve_rankn(&c, &b1).unwrap().n;
        let n2 = solve_rankn(&c, &b2).unwrap().n;
        let combo = solve_rankn(&c, &b1.add(&b2.scale(&k)).unwrap()).unwrap().n;
        let want = n1.add(&n2.scale(&k)).unwrap();
        prop_assert!(combo.max_abs_diff(&want).unwrap() < 1e-9);
    }

    #[test]
    fn relabeling_equivariance(a in coeffs(3), b in tensor(3, 3), rho in 0usize..6) {
        let table = PermTable::new(3).unwrap();
        let c = CoeffVector::new(3, a.clone()).unwrap();
        prop_assume!(nondegenerate(&c));
        let conj: Vec<f64> = (0..6).map(|t| a[table.compose(table.compose(table.inverse(rho), t), rho)]).collect();
        let n = solve_rankn(&c, &b).unwrap().n;
        let n2 = solve_rankn(&CoeffVector::new(3, conj).unwrap(), &permute_tensor(&b, table.perm(rho)).unwrap()).unwrap().n;
        prop_assert!(n2.max_abs_diff(&permute_tensor(&n, table.perm(rho)).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn oracle_agrees(a in coeffs(3), b in tensor(3, 2)) {
        let c = CoeffVector::new(3, a).unwrap();
        prop_assume!(nondegenerate(&c));
        let s = solve_rankn(&c, &b).unwrap().n;
        let o = brute_force(&c, None, None, &b).unwrap().n;
        prop_assert!(s.max_abs_diff(&o).unwrap() < 1e-9);
    }

    #[test]
    fn reduced_recovers_symmetric_unknown(a in coeffs(3), x in tensor(3, 3), pair in 0usize..3, plus in any::<bool>()) {
        let c = CoeffVector::new(3, a).unwrap();
        let pair = [SlotPair::S12, SlotPair::S13, SlotPair::S23][pair];
        let sign = if plus { Sign::Plus } else { Sign::Minus };
        let (i, j) = pair.slots();
        let swapped = x.swap_slots(i, j);
        let truth = if plus { x.add(&swapped).unwrap() } else { x.sub(&swapped).unwrap() };
        let b = lhs_apply(&c, &truth, None, None).unwrap();
        if let Ok(s) = solve_reduced(&c, &b, Symmetry { pair, sign }) {
            if s.degeneracy.condition.is_some_and(|k| k < 1e5) {
                prop_assert!(s.n.max_abs_diff(&truth).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn traced_solution_satisfies_equation(a in coeffs(3), t in prop::collection::vec(-1.0f64..1.0, 9), b in tensor(3, 3)) {
        let c = CoeffVector::new(3, a).unwrap();
        prop_assume!(nondegenerate(&c));
        let tc = TraceCoeffs { a7: [t[0], t[1], t[2]], a8: [t[3], t[4], t[5]], a9: [t[6], t[7], t[8]] };
        let g = Metric::euclidean(3);
        if let Ok(s) = solve_with_traces(&c, &tc, &b, &g) {
            let lhs = lhs_apply(&c, &s.n, Some(&tc), Some(&g)).unwrap();
            let cond = linalg::condition_estimate(&lintensor::coeff::build_gamma(&c, &tc, 3).unwrap().entries);
            prop_assume!(cond < 1e5);
            prop_assert!(lhs.max_abs_diff(&b).unwrap() <= 1e-9 * b.norm_inf().max(1.0));
        }
    }

    #[test]
    fn exact_determinant_factorization(p in prop::collection::vec(-20i64..20, 6), q in prop::collection::vec(1i64..7, 6)) {
        let a: Vec<Rational> = p.iter().zip(&q).map(|(&p, &q)| from_ratio(p, q)).collect();
        let c = CoeffVector::new(3, a).unwrap();
        let [s1, s2, s3] = det_factors3(&c).unwrap();
        let report = degeneracy_report(&c).unwrap();
        prop_assert_eq!(report.det.clone(), s1.clone() * s2.clone() * s3.clone() * s3.clone());
        let zero = from_ratio::<Rational>(0, 1);
        prop_assert_eq!(report.singular, s1 == zero || s2 == zero || s3 == zero);
    }
}
