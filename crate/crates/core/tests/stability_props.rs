use proptest::prelude::*;
use quadsurf::attitude_errors::ErrorSetKind;
use quadsurf::control::{AttitudeGains, PositionGains};
use quadsurf::plant::{Calm, RigidBodyState};
use quadsurf::reference::{FlightScenario, PhaseReference};
use quadsurf::sim::{simulate, SimConfig};
use quadsurf::so3::{exp_so3, Rotation, Vec3};
use quadsurf::stability::{
    attractiveness_contains, build_pi_matrices, lambda_min, lyapunov_monitors, pi3, pi4, position_roa_contains,
    theta_max_bounded, theta_max_no_xv, w1, w2, MonitorCheck, MonitorMode, MonitorSample, MonitorTolerance, RoaVariant,
};

fn attitude_gains() -> impl Strategy<Value = AttitudeGains> {
    (1.0..200.0f64, 0.01..1.0f64, 0.01..3.0f64).prop_map(|(k_omega, frac, over)| {
        let k_r = frac * k_omega * k_omega;
        AttitudeGains::new(k_r, k_omega, k_r / (k_omega * k_omega) * (1.0 + over))
    })
}

fn position_gains() -> impl Strategy<Value = (PositionGains, f64)> {
    (1.0..1000.0f64, 1.0..100.0f64, 0.01..2.0f64, 0.3..3.0f64, attitude_gains())
        .prop_map(|(k_x, k_v, a, m, att)| (PositionGains { k_x, k_v, a, att }, m))
}

fn kind() -> impl Strategy<Value = ErrorSetKind> {
    prop_oneof![Just(ErrorSetKind::SetOne), Just(ErrorSetKind::SetTwo)]
}

proptest! {
    #[test]
    fn pi3_pi4_positive_definite((g, m) in position_gains()) {
        prop_assert!(lambda_min(&pi3(&g, m)) > 0.0);
        prop_assert!(lambda_min(&pi4(&g, m)) > 0.0);
    }

    #[test]
    fn w1_w2_positive_definite(g in attitude_gains(), kind in kind(), psi_a in 0.0..1.99f64) {
        prop_assert!(lambda_min(&w1(&g, kind)) > 0.0);
        prop_assert!(lambda_min(&w2(&g, kind, psi_a)) > 0.0);
    }

    #[test]
    fn bounded_theta_is_never_smaller((g, m) in position_gains()) {
        prop_assert!(theta_max_bounded(&g, m) >= theta_max_no_xv(&g, m).value);
    }

    #[test]
    fn theta_bracket((g, m) in position_gains(), b in 1.0..50.0f64) {
        let t = theta_max_no_xv(&g, m).value;
        let (pi1, _) = build_pi_matrices(&g, m, b, 0.99 * t, RoaVariant::PositionNoXV, 0.0).unwrap();
        prop_assert!(lambda_min(&pi1) > 0.0);
        if let Ok((pi1, _)) = build_pi_matrices(&g, m, b, 1.01 * t, RoaVariant::PositionNoXV, 0.0) {
            prop_assert!(lambda_min(&pi1) <= 0.0);
        }
    }

    /// SetOne error of a rotation by `angle` is `1 − cos(angle)`.
    #[test]
    fn attractiveness_band(g in attitude_gains(), angle in 0.0..3.1f64, w in 0.0..1.0f64, psi_p in 0.01..0.99f64) {
        let r0 = exp_so3(&(Vec3::new(0.3, -0.5, 0.8).normalize() * angle));
        let psi = 1.0 - angle.cos();
        let bound_sq = 2.0 * g.eta * g.k_r * (2.0 - psi);
        let e_omega = Vec3::new(1.0, 0.0, 0.0) * (w * 1.2 * bound_sq.sqrt());
        let band = psi_p <= psi && psi < 2.0 && e_omega.norm_squared() < bound_sq;
        let id = Rotation::identity();
        prop_assert_eq!(attractiveness_contains(&r0, &id, &e_omega, &g, ErrorSetKind::SetOne, psi_p), band);
        prop_assert!(!(band && position_roa_contains(&r0, &id, &e_omega, &g, ErrorSetKind::SetOne, psi_p)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    /// Attitude step from inside the region of attraction: `V` decreases and `V̇`
    /// stays under its bound at all but a handful of samples.
    #[test]
    fn acm_lyapunov_decrease(
        k_omega in 5.0..40.0f64,
        frac in 0.05..1.0f64,
        over in 0.1..2.0f64,
        kind in kind(),
        axis in prop::array::uniform3(-1.0..1.0f64),
        angle in 0.1..2.5f64,
        w_frac in 0.0..0.5f64,
    ) {
        let axis = Vec3::from(axis);
        prop_assume!(axis.norm() > 1e-2);
        let axis = axis.normalize();
        let k_r = frac * k_omega * k_omega;
        let g = AttitudeGains::new(k_r, k_omega, k_r / (k_omega * k_omega) * (1.0 + over));
        let r0 = exp_so3(&(axis * angle));
        let psi0 = quadsurf::attitude_errors::psi_of(&r0, &Rotation::identity(), kind).unwrap();
        prop_assume!(psi0 < 1.95);
        let w0 = axis.cross(&Vec3::new(0.0, 0.0, 1.0)).try_normalize(1e-6).unwrap_or(Vec3::x())
            * w_frac * (2.0 * g.eta * g.k_r * (2.0 - psi0)).sqrt();
        let cfg = SimConfig { kind, attitude: g, ..SimConfig::default() };
        let scenario = FlightScenario::single(PhaseReference::AttitudeStep { rotation: Rotation::identity() }, 1.0);
        let initial = RigidBodyState { r: r0, w: w0, ..RigidBodyState::default() };
        let out = simulate(&cfg, &scenario, initial, &Calm).unwrap();
        prop_assert!(out.completed());
        let samples: Vec<MonitorSample> = out.telemetry.samples.iter()
            .map(|s| MonitorSample { t: s.t, psi: s.psi, e_r: s.e_r, e_omega: s.e_omega, e_x: s.e_x, e_v: s.e_v })
            .collect();
        let m = lyapunov_monitors(&samples, &g, kind, &MonitorMode::Attitude, &MonitorTolerance::default());
        prop_assert!(m.decreasing_fraction() >= 0.99, "{}", m.decreasing_fraction());
        let bad = m.violations_of(MonitorCheck::Derivative).count();
        prop_assert!(bad as f64 <= 0.01 * samples.len() as f64, "{bad} derivative violations");
    }
}
