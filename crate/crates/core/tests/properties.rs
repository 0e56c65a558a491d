//! Randomised invariants across params, group, orbit and verify.

use orbitforge::group::{
    hyperbolic_distance, mobius_apply, mobius_derivative, sl2_exp, GroupWord, HalfPlanePoint,
    WordFactor,
};
use orbitforge::operators::{IndexWindow, Sl2Element};
use orbitforge::orbit::{frame_flow, OrbitSampler};
use orbitforge::params::{
    a_sequence, c_coeff, curvature_from_series, series_from_curvature, SeriesParam,
};
use orbitforge::verify::{gram_pairings, pullback_metric};
use proptest::prelude::*;

fn series() -> impl Strategy<Value = SeriesParam> {
    prop_oneof![
        (0.01f64..3.0).prop_map(|t| SeriesParam::principal(t).unwrap()),
        (-0.45f64..0.45).prop_map(|s| SeriesParam::complementary(s).unwrap()),
    ]
}

fn element() -> impl Strategy<Value = Sl2Element> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b, c)| Sl2Element::new(a, b, c))
}

fn word(max_len: usize) -> impl Strategy<Value = GroupWord> {
    prop::collection::vec((element(), -0.6f64..0.6), 1..=max_len).prop_map(|fs| {
        GroupWord::from(
            fs.into_iter()
                .map(|(x, t)| WordFactor::new(x, t))
                .collect::<Vec<_>>(),
        )
    })
}

fn point() -> impl Strategy<Value = HalfPlanePoint> {
    (-2.0f64..2.0, 0.2f64..5.0).prop_map(|(x, y)| HalfPlanePoint::new(x, y).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn curvature_round_trip(s in series()) {
        let k = curvature_from_series(&s).curvature;
        prop_assert!(k < 0.0);
        let back = series_from_curvature(k).unwrap();
        prop_assert_eq!(back.kind, s.kind);
        prop_assert!((back.value.abs() - s.value.abs()).abs() <= 1e-12 * s.value.abs().max(1.0));
        prop_assert!(((1.0 / -k) - s.lambda() / 2.0).abs() <= 1e-14);
    }

    #[test]
    fn ladder_constants_positive_and_consistent(k in -64.0f64..-0.01) {
        let seq = a_sequence(k, 30).unwrap();
        for p in 1..=30 {
            let c = c_coeff(k, p);
            prop_assert!(c > 0.0);
            prop_assert!((seq.a(p) / seq.a(p - 1) - c).abs() <= 1e-12 * c);
        }
        // growth starts once c_{p+1} = (1 + binom(p+1,2)|K|)/2 exceeds 1;
        // for |K| >= 1/3 that is every p >= 2
        for p in 2..30 {
            prop_assert_eq!(seq.a(p + 1) > seq.a(p), c_coeff(k, p + 1) > 1.0);
        }
        if k <= -1.0 / 3.0 {
            prop_assert!((2..30).all(|p| seq.a(p + 1) > seq.a(p)));
        }
    }

    #[test]
    fn mobius_is_isometry(w in word(4), z in point(), v in point()) {
        let m = w.matrix();
        let (az, av) = (mobius_apply(&m, &z).unwrap(), mobius_apply(&m, &v).unwrap());
        let (d0, d1) = (hyperbolic_distance(&z, &v), hyperbolic_distance(&az, &av));
        prop_assert!((d0 - d1).abs() <= 1e-10 * d0.max(1.0), "{} vs {}", d0, d1);
    }

    #[test]
    fn one_parameter_law(x in element(), s in -1.5f64..1.5, t in -1.5f64..1.5) {
        let lhs = sl2_exp(&x, s + t);
        let rhs = sl2_exp(&x, s).mul(&sl2_exp(&x, t));
        let scale = lhs.a.abs().max(lhs.b.abs()).max(lhs.c.abs()).max(lhs.d.abs()).max(1.0);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * scale);
    }

    #[test]
    fn composition_keeps_unit_determinant(a in word(5), b in word(5)) {
        let m = a.compose(&b).matrix();
        prop_assert!((m.det() - 1.0).abs() <= 1e-12);
        let prod = a.matrix().mul(&b.matrix());
        prop_assert!(m.max_abs_diff(&prod) <= 1e-12 * 10.0);
    }

    #[test]
    fn orbit_points_are_unit_and_real(s in series(), w in word(3)) {
        let sampler = OrbitSampler::new(s, IndexWindow::new(32, 2).unwrap()).unwrap();
        let v = sampler.orbit_point_raw(&w).unwrap();
        prop_assert!((v.norm() - 1.0).abs() <= 1e-12);
        prop_assert!(v.real_structure_defect() <= 1e-12);
    }

    #[test]
    fn orbit_is_equivariant_and_fibre_stationary(s in series(), a in word(2), b in word(2), t in -3.0f64..3.0) {
        let sampler = OrbitSampler::new(s, IndexWindow::new(32, 2).unwrap()).unwrap();
        let ab = sampler.orbit_point_raw(&a.compose(&b)).unwrap();
        let vb = sampler.orbit_point_raw(&b).unwrap();
        let moved = sampler.apply_word(&a, &vb.coords).unwrap();
        prop_assert!(orbitforge::linalg::distance(&ab.coords, &moved) <= 1e-12);
        let fibre = a.compose(&GroupWord::single(Sl2Element::SIGMA3, t));
        let va = sampler.orbit_point_raw(&a).unwrap();
        let vf = sampler.orbit_point_raw(&fibre).unwrap();
        prop_assert!(orbitforge::linalg::distance(&va.coords, &vf.coords) <= 1e-12);
    }

    #[test]
    fn two_point_function_depends_on_distance_only(s in series(), p in point(), a in word(2)) {
        let sampler = OrbitSampler::new(s, IndexWindow::new(48, 2).unwrap()).unwrap();
        let p = HalfPlanePoint::new(p.x * 0.3, 0.5 + p.y * 0.2).unwrap();
        let q = HalfPlanePoint::new(p.x + 0.4, p.y * 1.3).unwrap();
        let (ap, aq) = (mobius_apply(&a.matrix(), &p).unwrap(), mobius_apply(&a.matrix(), &q).unwrap());
        let v = sampler.grid(&[p, q, ap, aq]).unwrap();
        let before = v[0].hermitian(&v[1]);
        let after = v[2].hermitian(&v[3]);
        prop_assert!((before - after).norm() <= 1e-9, "{} vs {}", before, after);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn metric_is_isometry_invariant(s in series(), x in element(), t in -0.5f64..0.5) {
        let sampler = OrbitSampler::new(s, IndexWindow::new(64, 2).unwrap()).unwrap();
        let p = HalfPlanePoint::new(0.1, 1.1).unwrap();
        let m = sl2_exp(&x, t);
        let q = mobius_apply(&m, &p).unwrap();
        let (dr, di) = mobius_derivative(&m, &p);
        let jac2 = dr * dr + di * di;
        let gp = pullback_metric(&sampler, &p, 1e-3).unwrap();
        let gq = pullback_metric(&sampler, &q, 1e-3 * q.y.min(1.0)).unwrap();
        // dA is a rotation scaled by |A'|, so g(q) |A'|² = g(p)
        prop_assert!((gq.g11 * jac2 - gp.g11).abs() <= 1e-6 * gp.g11.max(1.0), "{} vs {}", gq.g11 * jac2, gp.g11);
        prop_assert!((gq.g22 * jac2 - gp.g22).abs() <= 1e-6 * gp.g22.max(1.0));
    }
}

#[test]
fn metric_is_conformal_on_grid() {
    let h = 1e-3;
    for s in [
        SeriesParam::complementary(0.0).unwrap(),
        SeriesParam::principal(0.5).unwrap(),
        SeriesParam::complementary(0.3).unwrap(),
    ] {
        let sampler = OrbitSampler::new(s, IndexWindow::new(64, 2).unwrap()).unwrap();
        for i in -2..=2 {
            for j in -2..=2 {
                let p = HalfPlanePoint::new(0.1 * i as f64, 1.0 + 0.1 * j as f64).unwrap();
                let g = pullback_metric(&sampler, &p, h).unwrap();
                assert!(
                    g.conformality_defect() <= 10.0 * h * h,
                    "{s} at {p:?}: {}",
                    g.conformality_defect()
                );
                assert!(((g.g11 - g.g22) / g.g11).abs() <= 10.0 * h * h);
            }
        }
    }
}

#[test]
fn gram_residuals_do_not_grow_with_n() {
    let s = SeriesParam::complementary(0.0).unwrap();
    let k = s.curvature();
    let coframe = [1.0 / (-k).sqrt(), 0.0, 0.0];
    let small = frame_flow(s, IndexWindow::new(24, 1).unwrap(), coframe, 1.0, 1000).unwrap();
    let large = frame_flow(s, IndexWindow::new(40, 1).unwrap(), coframe, 1.0, 1000).unwrap();
    let g_small = gram_pairings(&small, k, 6).unwrap().max();
    let g_large = gram_pairings(&large, k, 6).unwrap().max();
    assert!(g_small <= 1e-8 && g_large <= 1e-8);
    // both sit at round-off; compare against a floor to keep the ratio meaningful
    assert!(
        g_large <= 2.0 * g_small.max(1e-11),
        "{g_small} -> {g_large}"
    );
}
