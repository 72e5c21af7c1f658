use proptest::prelude::*;
use quadsurf::metrics::{delta_f_rms, f_rms, reaching_time, Telemetry, TelemetrySample};
use quadsurf::reference::FlightMode;
use quadsurf::so3::{Rotation, Vec3};

fn sample(t: f64, motors: [f64; 4]) -> TelemetrySample {
    let z = Vec3::zeros();
    TelemetrySample {
        t,
        phase: 0,
        mode: FlightMode::Position,
        x: z,
        v: z,
        r: Rotation::identity(),
        w: z,
        xd: z,
        vd: z,
        target: Rotation::identity(),
        psi: 0.0,
        e_r: z,
        e_omega: z,
        e_x: z,
        e_v: z,
        s_r: z,
        s_x: z,
        thrust_cmd: motors.iter().sum(),
        moment_cmd: z,
        thrust: motors.iter().sum(),
        moment: z,
        motors,
        saturated: [false; 4],
        v_lyap: 0.0,
        v_psi: 0.0,
        v_x: 0.0,
        v_g: 0.0,
    }
}

fn sampled<F: Fn(f64) -> [f64; 4]>(f: F, horizon: f64, dt: f64) -> Telemetry {
    let n = (horizon / dt).round() as usize;
    Telemetry { dt, samples: (0..=n).map(|k| sample(k as f64 * dt, f(k as f64 * dt))).collect() }
}

fn smooth(t: f64) -> [f64; 4] {
    [3.0 + (2.0 * t).sin(), 3.0 + 0.5 * (3.0 * t).cos(), 2.0 + t * t / 10.0, 3.5 - (t).sin()]
}

/// `(1/T) ∫ Σ fᵢ²` by composite Simpson on a fine grid.
fn mean_square(f: fn(f64) -> [f64; 4], horizon: f64) -> f64 {
    let n = 20_000;
    let h = horizon / n as f64;
    let g = |t: f64| f(t).iter().map(|x| x * x).sum::<f64>();
    let mut acc = g(0.0) + g(horizon);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h);
    }
    acc * h / 3.0 / horizon
}

#[test]
fn halving_dt_is_second_order() {
    let exact = mean_square(smooth, 2.0).sqrt();
    let err = |dt: f64| (f_rms(&sampled(smooth, 2.0, dt), 2.0).unwrap() - exact).abs();
    let ratio = err(0.02) / err(0.01);
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn reversed_constant_signal_has_same_rms() {
    let tel = sampled(|_| [1.5; 4], 1.0, 0.01);
    let mut rev = tel.clone();
    rev.samples.reverse();
    for (k, s) in rev.samples.iter_mut().enumerate() {
        s.t = k as f64 * 0.01;
    }
    assert_eq!(f_rms(&tel, 1.0).unwrap(), f_rms(&rev, 1.0).unwrap());
    assert_eq!(f_rms(&tel, 1.0).unwrap(), 3.0);
}

proptest! {
    #[test]
    fn rms_is_nonnegative_and_self_delta_vanishes(
        values in prop::collection::vec(prop::array::uniform4(0.0..7.0f64), 2..200),
        frac in 0.01..1.0f64,
    ) {
        let dt = 1e-3;
        let tel = Telemetry { dt, samples: values.iter().enumerate().map(|(k, m)| sample(k as f64 * dt, *m)).collect() };
        let t = frac * tel.end();
        prop_assume!(t > 0.0);
        prop_assert!(f_rms(&tel, t).unwrap() >= 0.0);
        prop_assert_eq!(delta_f_rms(&tel, &tel, t).unwrap(), 0.0);
    }

    #[test]
    fn constant_is_exact(c in 0.0..10.0f64, n in 2usize..500) {
        let tel = sampled(|_| [c; 4], n as f64 * 1e-3, 1e-3);
        prop_assert_eq!(f_rms(&tel, tel.end()).unwrap(), 2.0 * c);
    }

    #[test]
    fn faster_decay_reaches_sooner(rate in 1.0..20.0f64) {
        let t: Vec<f64> = (0..3000).map(|k| k as f64 * 1e-3).collect();
        let slow: Vec<f64> = t.iter().map(|&x| (-rate * x).exp()).collect();
        let fast: Vec<f64> = t.iter().map(|&x| (-2.0 * rate * x).exp()).collect();
        let (a, b) = (reaching_time(&t, &slow, 0.05).unwrap(), reaching_time(&t, &fast, 0.05).unwrap());
        prop_assert!(b < a);
    }
}
