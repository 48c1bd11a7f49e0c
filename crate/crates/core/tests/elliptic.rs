use proptest::prelude::*;
use racket_core::elliptic::{complete_e, complete_k, jacobi_sn_cn_dn, EllipticModulus};
use racket_core::Error;
use racket_oracles as oracle;

fn modulus(m: f64) -> EllipticModulus {
    EllipticModulus::new(m).unwrap()
}

#[test]
fn k_matches_quadrature() {
    for m in [0.1, 0.5, 0.9, 0.99] {
        let k = complete_k(modulus(m)).unwrap();
        assert!((k - oracle::elliptic_k(m)).abs() <= 1e-12, "m = {m}");
    }
}

#[test]
fn e_matches_quadrature() {
    for m in [0.1, 0.5, 0.9, 0.999] {
        let e = complete_e(modulus(m));
        assert!((e - oracle::elliptic_e(m)).abs() <= 1e-12, "m = {m}");
    }
    assert_eq!(complete_e(modulus(0.0)), std::f64::consts::FRAC_PI_2);
    assert!((complete_e(modulus(1.0)) - 1.0).abs() < 1e-15);
}

#[test]
fn k_near_one_follows_log_asymptote() {
    let m1 = 1e-8;
    let k = complete_k(EllipticModulus::from_complement(m1).unwrap()).unwrap();
    let asym = 0.5 * (16.0 / m1).ln();
    assert!(((k - asym) / asym).abs() <= 1e-6);
}

#[test]
fn k_diverges_at_one() {
    assert!(matches!(complete_k(modulus(1.0)), Err(Error::Divergence(_))));
    assert!(matches!(EllipticModulus::new(-0.1), Err(Error::Domain(_))));
    assert!(matches!(EllipticModulus::new(1.5), Err(Error::Domain(_))));
}

#[test]
fn jacobi_matches_inversion_oracle() {
    for m in [0.2, 0.7, 0.95] {
        for u in [0.3, 1.1, 2.9, -4.2] {
            let j = jacobi_sn_cn_dn(u, modulus(m));
            let (sn, cn, dn) = oracle::jacobi_by_inversion(u, m);
            assert!((j.sn - sn).abs() < 1e-11, "sn m={m} u={u}");
            assert!((j.cn - cn).abs() < 1e-11, "cn m={m} u={u}");
            assert!((j.dn - dn).abs() < 1e-11, "dn m={m} u={u}");
        }
    }
}

#[test]
fn jacobi_limits() {
    for u in [-3.0, 0.4, 7.5] {
        let j = jacobi_sn_cn_dn(u, modulus(0.0));
        assert!((j.sn - f64::sin(u)).abs() < 1e-15 && (j.cn - f64::cos(u)).abs() < 1e-15 && j.dn == 1.0);
        let j = jacobi_sn_cn_dn(u, modulus(1.0));
        let sech = 1.0 / f64::cosh(u);
        assert!((j.sn - u.tanh()).abs() < 1e-15 && (j.cn - sech).abs() < 1e-15 && (j.dn - sech).abs() < 1e-15);
    }
}

fn accuracy_range() -> impl Strategy<Value = (f64, f64)> {
    (0.0..0.999f64, -1.0..1.0f64).prop_map(|(m, x)| (m, x * 10.0 * complete_k(modulus(m)).unwrap()))
}

proptest! {
    #[test]
    fn pythagorean_identities((m, u) in accuracy_range()) {
        let j = jacobi_sn_cn_dn(u, modulus(m));
        prop_assert!((j.sn * j.sn + j.cn * j.cn - 1.0).abs() <= 1e-11);
        prop_assert!((j.dn * j.dn + m * j.sn * j.sn - 1.0).abs() <= 1e-11);
    }

    #[test]
    fn four_k_periodic(m in 0.0..0.99f64, u in -20.0..20.0f64) {
        let k = complete_k(modulus(m)).unwrap();
        let a = jacobi_sn_cn_dn(u, modulus(m));
        let b = jacobi_sn_cn_dn(u + 4.0 * k, modulus(m));
        prop_assert!((a.sn - b.sn).abs() <= 1e-10);
    }

    #[test]
    fn sn_derivative(m in 0.0..0.99f64, u in -10.0..10.0f64) {
        let d = oracle::central_diff(|x| jacobi_sn_cn_dn(x, modulus(m)).sn, u, 1e-5);
        let j = jacobi_sn_cn_dn(u, modulus(m));
        prop_assert!((d - j.cn * j.dn).abs() <= 1e-7);
    }

    #[test]
    fn origin_values(m in 0.0..=1.0f64) {
        let j = jacobi_sn_cn_dn(0.0, modulus(m));
        prop_assert_eq!((j.sn, j.cn, j.dn), (0.0, 1.0, 1.0));
    }
}
