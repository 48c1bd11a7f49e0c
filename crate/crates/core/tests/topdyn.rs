use proptest::prelude::*;
use racket_core::topdyn::*;
use racket_core::Error;
use racket_oracles as oracle;

fn top(k: f64) -> TopParameters {
    TopParameters::new(k).unwrap()
}

fn rhs_array(p: TopParameters) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] {
    move |_, y| {
        let d = euler_rhs(&Vec3::new(y[0], y[1], y[2]), &p);
        [d.x, d.y, d.z]
    }
}

#[test]
fn rhs_examples() {
    let p = top(0.5);
    assert_eq!(euler_rhs(&Vec3::z(), &p), Vec3::zeros());
    assert_eq!(euler_rhs(&Vec3::x(), &p), Vec3::zeros());
    let d = euler_rhs(&Vec3::new(0.6, 0.8, 0.0), &p);
    assert!((d - Vec3::new(0.0, 0.0, 0.48)).norm() < 1e-15);
}

#[test]
fn energy_examples() {
    let p = top(0.5);
    assert_eq!(energy(&Vec3::z(), &p), 0.125);
    assert_eq!(energy(&Vec3::y(), &p), 0.0);
    assert_eq!(energy(&Vec3::x(), &p), 0.5);
}

#[test]
fn shape_parameter_is_open_interval() {
    for k in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
        assert!(matches!(TopParameters::new(k), Err(Error::Domain(_))), "k = {k}");
    }
    assert_eq!(top(0.5).inertia()[0], 1.0);
    assert_eq!(top(0.5).inertia()[2], 4.0);
    assert!(top(0.5).inertia()[1].is_infinite());
}

#[test]
fn classify_examples() {
    let p = top(0.5);
    let c = (1.0 - 1e-4f64).sqrt();
    let rot = BodyState::normalized(0.01, 0.0, c).unwrap();
    assert_eq!(classify(&rot, &p, 1e-9), TrajectoryClass::Rotating);
    let osc = BodyState::normalized(0.0, 0.01, c).unwrap();
    assert_eq!(classify(&osc, &p, CLASSIFY_TOL), TrajectoryClass::Oscillating);
    assert_eq!(classify(&BodyState::normalized(0.0, 0.0, 1.0).unwrap(), &p, CLASSIFY_TOL), TrajectoryClass::UnstableFixedPoint);
    assert_eq!(classify(&BodyState::normalized(0.0, -1.0, 0.0).unwrap(), &p, CLASSIFY_TOL), TrajectoryClass::StableFixedPoint);
}

#[test]
fn tre_initial_points() {
    let p = top(0.5);
    let r = tre_initial(&p, 0.01, Family::Rotating).unwrap().vector();
    assert_eq!((r.x, r.y), (0.01, 0.0));
    assert!((r.z - 0.999_949_998_749_937_5).abs() < 1e-15);
    let o = tre_initial(&p, 0.01, Family::Oscillating).unwrap().vector();
    assert_eq!((o.x, o.y, o.z), (0.0, 0.01, r.z));
    assert_eq!(classify(&BodyState::normalized(r.x, r.y, r.z).unwrap(), &p, CLASSIFY_TOL), TrajectoryClass::Rotating);
    for eps in [0.0, 1.0, -0.1] {
        assert!(tre_initial(&p, eps, Family::Rotating).is_err());
    }
}

#[test]
fn closed_form_matches_integration() {
    let p = top(0.5);
    for family in [Family::Rotating, Family::Oscillating] {
        let orbit = TopOrbit::new(&p, 0.1, family).unwrap();
        let l0 = orbit.state(0.0);
        let path = oracle::rk4_path(rhs_array(p), [l0.x, l0.y, l0.z], 0.0, orbit.period(), 1e-4);
        let worst = path
            .iter()
            .step_by(50)
            .chain(path.last())
            .map(|(t, y)| (orbit.state(*t) - Vec3::new(y[0], y[1], y[2])).norm())
            .fold(0.0f64, f64::max);
        assert!(worst <= 1e-8, "{family:?}: {worst:e}");
    }
}

#[test]
fn closed_form_conserves_energy() {
    let p = top(0.5);
    for family in [Family::Rotating, Family::Oscillating] {
        let e0 = energy(&analytic_trajectory(&p, 0.1, family, 0.0).unwrap().vector(), &p);
        for i in 0..200 {
            let l = analytic_trajectory(&p, 0.1, family, 0.173 * i as f64).unwrap().vector();
            assert!((energy(&l, &p) - e0).abs() <= 1e-12);
            assert!((l.norm() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn transfer_period_matches_closest_approaches() {
    let p = top(0.5);
    let t = transfer_period(&p, 0.1, Family::Rotating).unwrap();
    let l0 = tre_initial(&p, 0.1, Family::Rotating).unwrap().vector();
    // L3 is extremal where its derivative L1·L2 vanishes.
    let start = oracle::rk4_path(rhs_array(p), [l0.x, l0.y, l0.z], 0.0, -0.5, 1e-4).last().unwrap().1;
    let events = oracle::rk4_events(rhs_array(p), |y| y[0] * y[1], start, -0.5, 1.5 * t, 1e-3);
    assert_eq!(events.len(), 2, "{events:?}");
    assert!(events[0].abs() < 1e-9);
    assert!((events[1] - events[0] - t).abs() <= 1e-6, "{} vs {t}", events[1] - events[0]);
}

#[test]
fn period_grows_as_eps_shrinks() {
    let p = top(0.5);
    for family in [Family::Rotating, Family::Oscillating] {
        let mut eps = 0.4;
        let mut last = transfer_period(&p, eps, family).unwrap();
        for _ in 0..20 {
            eps *= 0.5;
            let t = transfer_period(&p, eps, family).unwrap();
            assert!(t > last);
            last = t;
        }
    }
}

#[test]
fn period_is_logarithmic_in_eps() {
    let p = top(0.5);
    let eps = [1e-2, 1e-3, 1e-4];
    let x: Vec<f64> = eps.iter().map(|e: &f64| (1.0 / e).ln()).collect();
    let y: Vec<f64> = eps.iter().map(|&e| transfer_period(&p, e, Family::Rotating).unwrap()).collect();
    let (_, _, r2) = oracle::linear_fit(&x, &y);
    assert!(r2 >= 0.999, "{r2}");
}

#[test]
fn separatrix_solves_the_flow() {
    let p = top(0.5);
    let rate = 0.5 * 0.75f64.sqrt();
    for s in [-2.0, -0.3, 0.0, 0.8, 3.0] {
        let l = separatrix_state(&p, s);
        let d = oracle::central_diff4(|t| separatrix_state(&p, rate * t).y, s / rate, 1e-3);
        assert!((d - euler_rhs(&l, &p).y).abs() < 1e-9);
        assert!((energy(&l, &p) - 0.125).abs() < 1e-15);
    }
}

#[test]
fn midpoint_integrator_conserves() {
    let p = top(0.5);
    let l0 = tre_initial(&p, 0.1, Family::Rotating).unwrap();
    let path = integrate_top(&p, &l0, 1e-2, 10_000);
    assert_eq!(path.len(), 10_001);
    let e0 = energy(&l0.vector(), &p);
    for l in &path {
        assert!((l.norm() - 1.0).abs() <= 1e-9);
        assert!((energy(l, &p) - e0).abs() <= 1e-9);
    }
}

#[test]
fn orbits_through_points() {
    let p = top(0.7);
    for family in [Family::Rotating, Family::Oscillating] {
        let o = TopOrbit::new(&p, 0.2, family).unwrap();
        for t in [0.3, 2.0, 5.5] {
            let q = o.state(t);
            let (found, tau) = TopOrbit::through(&p, &q).unwrap();
            assert!((found.state(tau) - q).norm() < 1e-10);
            assert!((found.energy() - o.energy()).abs() < 1e-12);
        }
    }
}

fn unit() -> impl Strategy<Value = Vec3> {
    (-1.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let r = (1.0 - z * z).sqrt();
        Vec3::new(r * phi.cos(), r * phi.sin(), z)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn norm_is_conserved(l in unit(), k in 0.01..0.99f64) {
        prop_assert!(l.dot(&euler_rhs(&l, &top(k))).abs() <= 1e-15);
    }

    #[test]
    fn energy_is_conserved(l in unit(), k in 0.01..0.99f64) {
        let grad = Vec3::new(l.x, 0.0, k * k * l.z);
        prop_assert!(grad.dot(&euler_rhs(&l, &top(k))).abs() <= 1e-15);
    }

    #[test]
    fn classify_is_reflection_invariant(l in unit(), k in 0.01..0.99f64) {
        let p = top(k);
        let c = classify(&BodyState::normalized(l.x, l.y, l.z).unwrap(), &p, CLASSIFY_TOL);
        for s in [Vec3::new(-1.0, 1.0, 1.0), Vec3::new(1.0, -1.0, 1.0), Vec3::new(1.0, 1.0, -1.0)] {
            let m = l.component_mul(&s);
            prop_assert_eq!(classify(&BodyState::normalized(m.x, m.y, m.z).unwrap(), &p, CLASSIFY_TOL), c);
        }
    }

    #[test]
    fn rotating_quarter_point_norm(k in 0.01..0.99f64, eps in 1e-4..0.99f64) {
        let p = top(k);
        let o = TopOrbit::new(&p, eps, Family::Rotating).unwrap();
        // A quarter period in, L3 = 0 and the state is (A, ±B, 0).
        let q = o.state(0.5 * o.transfer_time());
        let a2 = k * k + eps * eps * (1.0 - k * k);
        let c2 = 1.0 - eps * eps;
        prop_assert!(q.z.abs() < 1e-10);
        prop_assert!((q.x * q.x - a2).abs() < 1e-10);
        prop_assert!((q.y * q.y - (1.0 - k * k) * c2).abs() < 1e-10);
        prop_assert!((a2 + (1.0 - k * k) * c2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn strict_states_reject_off_sphere(x in -2.0..2.0f64, y in -2.0..2.0f64, z in -2.0..2.0f64) {
        let v = Vec3::new(x, y, z);
        let r = BodyState::new(v, Strictness::Reject { tol: 1e-12 });
        prop_assert_eq!(r.is_ok(), (v.norm() - 1.0).abs() <= 1e-12);
    }
}
