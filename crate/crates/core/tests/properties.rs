use nalgebra::{DMatrix, DVector};
use omega_core::cdspace::DEFAULT_REDUCTION_TOL;
use omega_core::dynamics::{integrate_mode, lift_field, IntegrationOptions, Mode};
use omega_core::switching::JumpEvent;
use omega_core::*;
use proptest::prelude::*;

fn vec_of(dim: usize) -> impl Strategy<Value = CdVector> {
    prop::collection::vec(-10.0f64..10.0, dim).prop_map(|v| CdVector::new(v).unwrap())
}

fn any_vec(max_dim: usize) -> impl Strategy<Value = CdVector> {
    (1..=max_dim).prop_flat_map(vec_of)
}

fn mat_of(r: usize, c: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-5.0f64..5.0, r * c).prop_map(move |v| DMatrix::from_vec(r, c, v))
}

fn rel_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / a.amax().max(b.amax()).max(1.0)
}

fn col(v: &CdVector) -> DMatrix<f64> {
    DMatrix::from_column_slice(v.dim(), 1, v.entries())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn same_dim_distance_is_scaled_euclidean(
        (x, y) in (1usize..=12).prop_flat_map(|n| (vec_of(n), vec_of(n)))
    ) {
        let e = (x.to_dvector() - y.to_dvector()).norm();
        let n = x.dim() as f64;
        prop_assert!((v_dist(&x, &y) * n.sqrt() - e).abs() <= 1e-12 * e.max(1.0));
    }

    #[test]
    fn canonicalize_is_idempotent(x in any_vec(6), k in 1usize..=4) {
        let lifted = x.kron_ones(k);
        let c = canonicalize(lifted.entries(), DEFAULT_REDUCTION_TOL).unwrap();
        prop_assert_eq!(lifted.dim() % c.dim(), 0);
        prop_assert!(c.dim() <= x.dim());
        prop_assert!(equivalent(&lifted, &c, DEFAULT_REDUCTION_TOL));
        let cc = canonicalize(c.entries(), DEFAULT_REDUCTION_TOL).unwrap();
        prop_assert_eq!(cc, c);
    }

    #[test]
    fn triangle_inequality(x in any_vec(8), y in any_vec(8), z in any_vec(8)) {
        prop_assert!(v_dist(&x, &z) <= v_dist(&x, &y) + v_dist(&y, &z) + 1e-9);
    }

    #[test]
    fn dk_product_through_bridge(
        (m, n) in (1usize..=5, 1usize..=5, 1usize..=5, 1usize..=4)
            .prop_flat_map(|(r, c, p, q)| (mat_of(r, c), mat_of(p, q)))
    ) {
        let expected = &m * bridge(m.ncols(), n.nrows()) * &n;
        prop_assert!((dk_product(&m, &n) - expected).amax() <= 1e-12 * m.amax().max(1.0) * n.amax().max(1.0) * 10.0);
    }

    #[test]
    fn distributivity(
        (a, b, c) in (1usize..=4, 1usize..=4, 1usize..=4, 1usize..=4)
            .prop_flat_map(|(r, k, p, q)| (mat_of(r, k), mat_of(r, k), mat_of(p, q)))
    ) {
        let lhs = dk_product(&(&a + &b), &c);
        let rhs = dk_product(&a, &c) + dk_product(&b, &c);
        prop_assert!(rel_residual(&lhs, &rhs) <= 1e-9);
    }

    #[test]
    fn associativity(
        (a, b, c) in (1usize..=4, 1usize..=4, 1usize..=4, 1usize..=4, 1usize..=4, 1usize..=4)
            .prop_flat_map(|(r1, c1, r2, c2, r3, c3)| (mat_of(r1, c1), mat_of(r2, c2), mat_of(r3, c3)))
    ) {
        let lhs = dk_product(&dk_product(&a, &b), &c);
        let rhs = dk_product(&a, &dk_product(&b, &c));
        prop_assert!(rel_residual(&lhs, &rhs) <= 1e-9);
    }

    #[test]
    fn lattice_laws(dims in prop::collection::vec(1usize..=12, 1..4), picks in prop::collection::vec(0usize..64, 3)) {
        let l = build_lattice(&dims, LatticeClosure::Full).unwrap();
        let nodes: Vec<usize> = l.nodes().iter().copied().collect();
        let [a, b, c] = [0, 1, 2].map(|i| nodes[picks[i] % nodes.len()]);
        prop_assert_eq!(l.sup(a, b), l.sup(b, a));
        prop_assert_eq!(l.inf(a, b), l.inf(b, a));
        prop_assert_eq!(l.sup(l.sup(a, b), c), l.sup(a, l.sup(b, c)));
        prop_assert_eq!(l.inf(l.inf(a, b), c), l.inf(a, l.inf(b, c)));
        prop_assert_eq!(l.sup(a, l.inf(a, b)), a);
        prop_assert_eq!(l.inf(a, l.sup(a, b)), a);
        prop_assert!(l.contains(l.sup(a, b)) && l.contains(l.inf(a, b)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn projection_ignores_lifting(x in any_vec(6), k in 2usize..=4, t in 1usize..=8) {
        let a = project(&x.kron_ones(k), t);
        let b = project(&x, t);
        for (u, v) in a.entries().iter().zip(b.entries()) {
            prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
        }
    }

    #[test]
    fn equivalent_vectors_project_equally(x in any_vec(4), k in 1usize..=3, j in 1usize..=3, t in 1usize..=8) {
        let (y1, y2) = (x.kron_ones(k), x.kron_ones(j));
        prop_assert!(equivalent(&y1, &y2, DEFAULT_REDUCTION_TOL));
        let (a, b) = (project(&y1, t), project(&y2, t));
        for (u, v) in a.entries().iter().zip(b.entries()) {
            prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
        }
    }

    #[test]
    fn projection_is_orthogonal_least_squares(
        xi in any_vec(9),
        m in 1usize..=9,
        zs in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 9), 100)
    ) {
        let x0 = project(&xi, m);
        let resid = stp_sub(&xi, &x0);
        prop_assert!(v_inner(&resid, &x0).abs() <= 1e-9);
        let lhs = v_norm(&xi).powi(2);
        let rhs = v_dist(&xi, &x0).powi(2) + v_norm(&x0).powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1.0));
        let best = v_dist(&xi, &x0);
        for z in zs {
            let z = CdVector::from_slice(&z[..m]).unwrap();
            prop_assert!(best <= v_dist(&xi, &z) + 1e-12);
        }
    }

    #[test]
    fn op_norm_bounds_and_is_nearly_attained(a in (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| mat_of(r, c))) {
        let norm = op_vnorm(&a).unwrap();
        let cols = a.ncols();
        // probe dimensions 1..12 for the bound
        for d in 1..=12usize {
            let x = CdVector::new((0..d).map(|i| ((i * 7 + d) as f64).sin()).collect()).unwrap();
            let y = CdVector::from(DVector::from_column_slice(dk_product(&a, &col(&x)).as_slice()));
            prop_assert!(v_norm(&y) <= norm * v_norm(&x) + 1e-9);
        }
        // power-iteration direction in ℝ^cols attains the bound
        let g = a.transpose() * &a;
        let mut v = DVector::from_fn(cols, |i, _| 1.0 + (i as f64 * 1.618).fract());
        for _ in 0..500 {
            let w = &g * &v;
            if w.norm() == 0.0 { break; }
            v = w.normalize();
        }
        let x = CdVector::from(v);
        let y = CdVector::from(DVector::from_column_slice(dk_product(&a, &col(&x)).as_slice()));
        if norm > 1e-12 {
            prop_assert!(v_norm(&y) / v_norm(&x) >= 0.99 * norm);
        }
    }

    #[test]
    fn transition_maps_respect_lipschitz(n in 1usize..=8, m in 1usize..=8, x in prop::collection::vec(-10.0f64..10.0, 8)) {
        let x = CdVector::from_slice(&x[..n]).unwrap();
        let mut maps = vec![nearest_map(n, m).unwrap()];
        if m < n { maps.push(drop_map(n, m, None).unwrap()); }
        if m > n { maps.push(add_map(n, m).unwrap()); }
        for w in &maps {
            let y = w.apply(&x).unwrap();
            prop_assert!(v_norm(&y) <= lipschitz_of(w).unwrap() * v_norm(&x) + 1e-9);
        }
        let p = projector(n, m);
        prop_assert_eq!(maps[0].matrix(), p.matrix());
    }

    #[test]
    fn nearest_gap_is_orthogonal_component(x in any_vec(8), m in 1usize..=8) {
        let post = nearest_map(x.dim(), m).unwrap().apply(&x).unwrap();
        let gap = jump_gap(&x, &post);
        // ‖x‖² = gap² + ‖Πx‖²; squared to avoid cancellation in the square root
        let lhs = v_norm(&x).powi(2);
        prop_assert!((gap * gap + v_norm(&post).powi(2) - lhs).abs() <= 1e-9 * lhs.max(1.0));
        let resid = stp_sub(&x, &post);
        prop_assert!((gap - v_norm(&resid)).abs() <= 1e-12 * v_norm(&x).max(1.0));
        let e = JumpEvent::new(0.0, Some(0), 1, x.clone(), post.clone(), 0.0);
        prop_assert!((e.gap - gap).abs() <= 1e-12);
    }

    #[test]
    fn equivalent_jump_has_no_direction(x in any_vec(4), k in 2usize..=3) {
        let post = x.kron_ones(k);
        let e = JumpEvent::new(0.0, Some(0), 1, x, post, 1.0);
        prop_assert!(e.gap <= 1e-12);
        prop_assert!(e.direction.is_none());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn lifted_linear_flow_commutes(
        (a, x0) in (1usize..=4).prop_flat_map(|n| (mat_of(n, n), prop::collection::vec(-2.0f64..2.0, n))),
        k in 2usize..=3
    ) {
        // shift to make the mode stable
        let n = a.nrows();
        let shift = a.iter().map(|v| v.abs()).sum::<f64>();
        let a = &a - DMatrix::identity(n, n) * shift;
        let base = Mode::linear("b", a).unwrap();
        let lifted = lift_field(&base, k).unwrap();
        let opts = IntegrationOptions::default();
        let s = integrate_mode(&base, &x0, 0.0, 1.0, &opts).unwrap();
        let y0 = CdVector::from_slice(&x0).unwrap().kron_ones(k);
        let l = integrate_mode(&lifted, y0.entries(), 0.0, 1.0, &opts).unwrap();
        for (x, y) in s.states.iter().zip(&l.states) {
            let lx = CdVector::from_slice(x).unwrap().kron_ones(k);
            for (u, v) in lx.entries().iter().zip(y) {
                prop_assert!((u - v).abs() <= 1e-6);
            }
        }
    }
}

#[test]
fn bridge_equals_projector_up_to_twelve() {
    for n in 1..=12 {
        for m in 1..=12 {
            assert_eq!(&bridge(n, m), projector(m, n).matrix(), "n={n} m={m}");
        }
    }
}
