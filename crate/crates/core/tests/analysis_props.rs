use nalgebra::{Complex, DMatrix};
use omega_core::analysis::*;
use omega_core::dynamics::{lift_field, Mode};
use omega_core::*;
use proptest::prelude::*;

type C = Complex<f64>;

fn complex_rank(m: &DMatrix<C>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-7 * top.max(1.0)).count()
}

/// Hautus test: `rank [λI − A, B] = n` at every eigenvalue of `A`.
fn pbh_controllable(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    omega_core::linalg::eigenvalues(a)
        .unwrap()
        .iter()
        .all(|&lambda| {
            let mut m = DMatrix::<C>::zeros(n, n + b.ncols());
            for i in 0..n {
                for j in 0..n {
                    let d = if i == j { lambda } else { C::new(0.0, 0.0) };
                    m[(i, j)] = d - C::new(a[(i, j)], 0.0);
                }
                for j in 0..b.ncols() {
                    m[(i, n + j)] = C::new(b[(i, j)], 0.0);
                }
            }
            complex_rank(&m) == n
        })
}

fn small_int_matrix(r: usize, c: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(
        prop_oneof![3 => Just(0.0), 1 => Just(1.0), 1 => Just(-1.0), 1 => Just(2.0)],
        r * c,
    )
    .prop_map(move |v| DMatrix::from_vec(r, c, v))
}

fn system() -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
    (1usize..=6, 1usize..=2)
        .prop_flat_map(|(n, k)| (small_int_matrix(n, n), small_int_matrix(n, k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kalman_agrees_with_hautus((a, b) in system()) {
        let n = a.nrows();
        prop_assert_eq!(ctrb_rank(&a, &b).unwrap() == n, pbh_controllable(&a, &b));
        let c = b.transpose();
        prop_assert_eq!(obs_rank(&a, &c).unwrap() == n, pbh_controllable(&a.transpose(), &b));
        prop_assert!(ctrb_rank(&a, &b).unwrap() <= n);
    }

    #[test]
    fn empty_subspace_is_full_test((a, b) in system()) {
        let n = a.nrows();
        let partial = partial_ctrb(&a, &b, &DMatrix::zeros(n, 0)).unwrap();
        prop_assert_eq!(partial, ctrb_rank(&a, &b).unwrap() == n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn intersection_basis_vectors_are_lifted_generators(m in 1usize..=12, n in 1usize..=12) {
        let b = intersection_basis(m, n).unwrap();
        let g = b.ncols();
        for j in 0..g {
            let mut e = vec![0.0; g];
            e[j] = 1.0;
            let gen = CdVector::new(e).unwrap();
            let v = CdVector::from_slice(b.column(j).as_slice()).unwrap();
            prop_assert!(equivalent(&v, &gen, 1e-12));
        }
    }

    #[test]
    fn same_dimension_reduction_is_identity(a in (1usize..=5).prop_flat_map(|n| small_int_matrix(n, n))) {
        let n = a.nrows();
        let r = reduce_model(&a, None, None, n).unwrap();
        prop_assert!((r.a - &a).amax() <= 1e-12);
        // both normal-equation branches coincide with A when Π = I
        let pi = DMatrix::<f64>::identity(n, n);
        let lower = &pi * &a * pi.transpose() * (&pi * pi.transpose()).try_inverse().unwrap();
        let upper = &pi * &a * (pi.transpose() * &pi).try_inverse().unwrap() * pi.transpose();
        prop_assert!((lower - &a).amax() <= 1e-12 && (upper - &a).amax() <= 1e-12);
    }

    #[test]
    fn approx_error_invariant_under_lifting(
        diag in prop::collection::vec(-0.01f64..0.0, 2..=4),
        x0 in prop::collection::vec(1.0f64..5.0, 4),
        pick in 0usize..4,
        k in 2usize..=3
    ) {
        let n = diag.len();
        // nested case Ω^m ⊂ Ω^n
        let divisors: Vec<usize> = (1..=n).filter(|d| n % d == 0).collect();
        let m = divisors[pick % divisors.len()];
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
        let x0 = &x0[..n];
        let times: Vec<f64> = (1..=10).map(|t| 10.0 * t as f64).collect();
        let base = approx_error(&a, x0, m, &times).unwrap();
        let lifted_mode = lift_field(&Mode::linear("a", a.clone()).unwrap(), k).unwrap();
        let la = lifted_mode.drift_matrix().unwrap();
        let lx = CdVector::from_slice(x0).unwrap().kron_ones(k);
        let lifted = approx_error(la, lx.entries(), m, &times).unwrap();
        for (u, v) in base.values.iter().zip(&lifted.values) {
            prop_assert!((u.unwrap() - v.unwrap()).abs() <= 1e-9);
        }
    }
}

#[test]
fn lifting_changes_error_when_subspaces_are_not_nested() {
    // m = 2 does not divide n = 3: the lifted run rebuilds z exactly in Ω^6,
    // the base run only its best approximation in Ω^3
    let a = DMatrix::<f64>::zeros(3, 3);
    let x0 = [1.0, 2.0, 4.0];
    let base = approx_error(&a, &x0, 2, &[1.0]).unwrap();
    let lifted_mode = lift_field(&Mode::linear("a", a.clone()).unwrap(), 2).unwrap();
    let lx = CdVector::from_slice(&x0).unwrap().kron_ones(2);
    let lifted =
        approx_error(lifted_mode.drift_matrix().unwrap(), lx.entries(), 2, &[1.0]).unwrap();
    let (b, l) = (base.values[0].unwrap(), lifted.values[0].unwrap());
    assert!((b - l).abs() > 1e-3, "base {b} lifted {l}");
}
