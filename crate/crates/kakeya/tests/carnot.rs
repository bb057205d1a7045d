use kakeya::carnot::{c_rn, check_condition, compute_constants, d_infty, group_inv, group_mul, GroupSpec, SegmentCase};
use kakeya::geometry::dilate;
use proptest::prelude::*;

fn specs() -> Vec<GroupSpec> {
    vec![GroupSpec::heisenberg(), GroupSpec::free(3).unwrap(), GroupSpec::heisenberg().with_epsilon(0.5).unwrap()]
}

fn spec_and_points(k: usize) -> impl Strategy<Value = (GroupSpec, Vec<Vec<f64>>)> {
    (0..specs().len()).prop_flat_map(move |i| {
        let s = specs().swap_remove(i);
        let n = s.n();
        (Just(s), prop::collection::vec(prop::collection::vec(-1.5f64..1.5, n), k))
    })
}

// p·q by hand: coordinates add, plus Σ_{l<i} b^j_{l,i}(x_l y_i − x_i y_l) in each vertical slot
fn oracle_mul(s: &GroupSpec, p: &[f64], q: &[f64]) -> Vec<f64> {
    let m1 = s.m1();
    let mut out: Vec<f64> = p.iter().zip(q).map(|(a, b)| a + b).collect();
    for k in 0..s.m2() {
        let j = m1 + k + 1;
        let mut acc = 0.0;
        for l in 1..=m1 {
            for i in l + 1..=m1 {
                acc += s.coeff(j, l, i) * (p[l - 1] * q[i - 1] - p[i - 1] * q[l - 1]);
            }
        }
        out[m1 + k] += acc;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_matches_oracle((s, pts) in spec_and_points(2)) {
        let got = group_mul(&pts[0], &pts[1], &s).unwrap();
        let want = oracle_mul(&s, &pts[0], &pts[1]);
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn group_axioms((s, pts) in spec_and_points(3)) {
        let (p, q, r) = (&pts[0], &pts[1], &pts[2]);
        let l = s.mul(&s.mul(p, q), r);
        let rr = s.mul(p, &s.mul(q, r));
        let inv = group_inv(p, &s).unwrap();
        let e = s.mul(p, &inv);
        for i in 0..s.n() {
            prop_assert!((l[i] - rr[i]).abs() <= 1e-12);
            prop_assert!(e[i].abs() <= 1e-12);
        }
    }

    #[test]
    fn left_invariance_and_homogeneity((s, pts) in spec_and_points(3), lam in 0.1f64..5.0) {
        let (p, q, r) = (&pts[0], &pts[1], &pts[2]);
        let d = d_infty(p, q, &s).unwrap();
        prop_assert!((s.dist(&s.mul(r, p), &s.mul(r, q)) - d).abs() <= 1e-9);
        let lay = s.layers();
        let dp = dilate(p, lam, &lay).unwrap();
        let dq = dilate(q, lam, &lay).unwrap();
        prop_assert!((s.dist(&dp, &dq) - lam * d).abs() <= 1e-9 * (1.0 + lam * d));
    }

    #[test]
    fn symmetric_and_positive((s, pts) in spec_and_points(2)) {
        let d = s.dist(&pts[0], &pts[1]);
        prop_assert!((d - s.dist(&pts[1], &pts[0])).abs() <= 1e-12);
        prop_assert!(s.dist(&pts[0], &pts[0]) <= 1e-12);
        prop_assert!(d >= 0.0);
    }
}

#[test]
fn constants_respect_radius_bounds() {
    for spec in specs() {
        for r in [0.5, 1.0, 2.0] {
            let c = c_rn(&spec, r);
            for case in [SegmentCase::LT, SegmentCase::Classical] {
                let k = compute_constants(&spec, r, case).unwrap();
                assert!(k.c_outer > 1.0);
                // the sandwich only needs θ̄ > θ when m₂ = 1
                if spec.m2() == 1 {
                    assert!(k.theta_bar_rn > k.theta_rn);
                    assert!(k.c_inner > 0.0 && k.c_inner < 1.0);
                }
                let bound = match (case, spec.m2()) {
                    (SegmentCase::LT, 1) => (1.0 + c * c).sqrt() - c,
                    (SegmentCase::LT, _) => f64::min(1.0, 1.0 / (2.0 * c)),
                    (SegmentCase::Classical, _) => 1.0 / (1.0 + c * c).sqrt(),
                };
                assert!(k.r_r < bound);
            }
        }
    }
    assert!(compute_constants(&GroupSpec::heisenberg(), 0.0, SegmentCase::LT).is_err());
}

#[test]
fn condition_on_free_group() {
    assert!(check_condition(&GroupSpec::free(3).unwrap()).unwrap().is_some());
}
