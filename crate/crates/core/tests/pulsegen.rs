use racket_core::io::{read_pulse_csv, write_pulse_csv};
use racket_core::propagate::{final_state, final_unitary, ErrorParams};
use racket_core::pulsegen::*;
use racket_core::topdyn::*;
use racket_core::Error;
use racket_oracles as oracle;

fn top(k: f64) -> TopParameters {
    TopParameters::new(k).unwrap()
}

fn north() -> BodyState {
    BodyState::normalized(0.0, 0.0, 1.0).unwrap()
}

#[test]
fn allen_eberly_peak() {
    let pulse = allen_eberly_pulse(&top(0.5), 0.0, 12.0, 2049, Branch::Plus).unwrap();
    let peak = pulse.omega1().iter().cloned().fold(f64::MIN, f64::max);
    assert!((peak - 1.154_700_538_379_251_5).abs() < 1e-15);
    assert_eq!(pulse.omega3()[1024], 0.0);
    let minus = allen_eberly_pulse(&top(0.5), 0.0, 12.0, 2049, Branch::Minus).unwrap();
    assert_eq!(minus.omega1()[1024], -peak);
}

#[test]
fn allen_eberly_tail_limit() {
    let k = 0.5;
    let pulse = allen_eberly_pulse(&top(k), 0.0, 30.0, 101, Branch::Plus).unwrap();
    let last = pulse.field(100);
    assert!(last.x.abs() < 1e-12);
    assert!((last.z - k / (1.0 - k * k).sqrt()).abs() < 1e-12);
}

#[test]
fn allen_eberly_transfers() {
    for k in [0.2, 0.5, 0.9] {
        let pulse = allen_eberly_pulse(&top(k), 0.0, DEFAULT_HALF_WIDTH, DEFAULT_SAMPLES, Branch::Plus).unwrap();
        let m = final_state(&pulse, &north(), &ErrorParams::default()).unwrap();
        assert!(-m.z >= 1.0 - 1e-4, "k = {k}: J3 = {}", -m.z);
    }
}

#[test]
fn allen_eberly_is_rescaled_separatrix() {
    let k: f64 = 0.5;
    let p = top(k);
    let rate = k * (1.0 - k * k).sqrt();
    let s0 = -8.0;
    let l0 = separatrix_state(&p, s0);
    let rhs = |_: f64, y: &[f64; 3]| {
        let d = euler_rhs(&Vec3::new(y[0], y[1], y[2]), &p);
        [d.x, d.y, d.z]
    };
    let path = oracle::rk4_path(rhs, [l0.x, l0.y, l0.z], 0.0, 16.0 / rate, 1e-3);
    for (t, y) in path.iter().step_by(97) {
        let s = s0 + rate * t;
        let field = p.angular_velocity(&Vec3::new(y[0], y[1], y[2])) / rate;
        let ae = Vec3::new(1.0 / (s.cosh() * (1.0 - k * k).sqrt()), 0.0, k * s.tanh() / (1.0 - k * k).sqrt());
        assert!((field - ae).norm() <= 1e-8, "s = {s}");
    }
}

#[test]
fn tre_transfers_both_families() {
    for family in [Family::Rotating, Family::Oscillating] {
        let pulse = tre_pulse(&top(0.5), 0.01, family, DEFAULT_SAMPLES).unwrap();
        let m = final_state(&pulse, &north(), &ErrorParams::default()).unwrap();
        assert!(-m.z >= 0.99, "{family:?}: J3 = {}", -m.z);
        assert!(pulse.omega2().iter().all(|&x| x == 0.0));
        assert_eq!(pulse.duration(), transfer_period(&top(0.5), 0.01, family).unwrap());
    }
}

#[test]
fn tre_fields_lie_on_an_energy_level() {
    let k = 0.6;
    for family in [Family::Rotating, Family::Oscillating] {
        let pulse = tre_pulse(&top(k), 0.05, family, 1000).unwrap();
        let level = |i: usize| pulse.omega1()[i].powi(2) + (pulse.omega3()[i] / k).powi(2);
        for i in 0..pulse.len() {
            assert!((level(i) - level(0)).abs() <= 1e-12);
        }
    }
}

#[test]
fn near_stable_axis_tre_is_almost_constant() {
    let k = 0.5;
    let pulse = tre_pulse(&top(k), 0.999, Family::Rotating, DEFAULT_SAMPLES).unwrap();
    let dev1 = pulse.omega1().iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
    let dev3 = pulse.omega3().iter().map(|x| x.abs()).fold(0.0, f64::max);
    assert!(dev1 <= 0.05, "{dev1}");
    assert!(dev3 <= 0.05 * k * k, "{dev3}");
}

#[test]
fn tre_duration_is_logarithmic() {
    let eps = [1e-2, 1e-3, 1e-4];
    let t: Vec<f64> = eps.iter().map(|&e| tre_pulse(&top(0.5), e, Family::Rotating, 16).unwrap().duration()).collect();
    let x: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
    let (slope, _, r2) = oracle::linear_fit(&x, &t);
    assert!(slope > 0.0 && r2 >= 0.999);
}

#[test]
fn rect_pi_pulse_inverts() {
    let pulse = rect_pi_pulse(1.0, 64).unwrap();
    assert_eq!(pulse.duration(), std::f64::consts::PI);
    let m = final_state(&pulse, &north(), &ErrorParams::default()).unwrap();
    assert!((m - Vec3::new(0.0, 0.0, -1.0)).norm() <= 1e-9);
    assert!(matches!(rect_pi_pulse(0.0, 8), Err(Error::Domain(_))));
}

#[test]
fn rect_pulse_amplitude_error_is_a_cosine() {
    let pulse = rect_pi_pulse(1.0, 64).unwrap();
    let m0 = BodyState::normalized(0.0, 1.0, 0.0).unwrap();
    for i in 0..11 {
        let alpha = -0.5 + 0.1 * i as f64;
        let m = final_state(&pulse, &m0, &ErrorParams::new(alpha, 0.0)).unwrap();
        assert!((-m.y - (std::f64::consts::PI * alpha).cos()).abs() <= 1e-9);
    }
}

#[test]
fn concat_properties() {
    let p = tre_pulse(&top(0.5), 0.05, Family::Rotating, 300).unwrap();
    let q = allen_eberly_pulse(&top(0.3), 0.4, 6.0, 200, Branch::Minus).unwrap();
    assert_eq!(concat(std::slice::from_ref(&p)).unwrap(), p);
    let pq = concat(&[p.clone(), q.clone()]).unwrap();
    assert!((pq.duration() - (p.duration() + q.duration())).abs() < 1e-12);
    let e = ErrorParams::new(0.1, -0.2);
    let product = final_unitary(&q, &e).unwrap() * final_unitary(&p, &e).unwrap();
    assert!((final_unitary(&pq, &e).unwrap() - product).norm() <= 1e-9);
    assert!(matches!(concat(&[]), Err(Error::Usage(_))));
}

#[test]
fn invalid_grids_rejected() {
    let meta = tre_pulse(&top(0.5), 0.1, Family::Rotating, 4).unwrap().meta().clone();
    let bad = ControlPulse::new(vec![0.0, 1.0, 0.5], vec![0.0; 3], vec![0.0; 3], vec![0.0; 3], vec![0], meta.clone());
    assert!(bad.is_err());
    let short = ControlPulse::new(vec![0.0, 1.0], vec![0.0; 1], vec![0.0; 2], vec![0.0; 2], vec![0], meta);
    assert!(short.is_err());
    assert!(tre_pulse(&top(0.5), 0.1, Family::Rotating, 1).is_err());
}

#[test]
fn csv_round_trip_is_exact() {
    let parts = [
        tre_pulse(&top(0.37), 0.013, Family::Oscillating, 257).unwrap(),
        rect_pi_pulse(0.7, 9).unwrap().phase_shifted(1.1),
    ];
    let pulse = concat(&parts).unwrap();
    let mut first = Vec::new();
    write_pulse_csv(&mut first, &pulse, 1.0).unwrap();
    assert!(String::from_utf8_lossy(&first).starts_with("t,omega1,omega2,omega3\n"));
    let back = read_pulse_csv(first.as_slice(), 1.0, Some(pulse.meta().clone())).unwrap();
    assert_eq!(back, pulse);
    let mut second = Vec::new();
    write_pulse_csv(&mut second, &back, 1.0).unwrap();
    assert_eq!(first, second);
}
