mod common;

use common::{balance_residual, oracle, random_case};
use dsmsim::feeder::{
    build_feeder, reverse_flow_report, solve_power_flow, solve_time_series, BranchSpec, FeederSpec, InjectionFrame,
    DEFAULT_MAX_ITER, DEFAULT_TOLERANCE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn two_bus_case_matches_newton() {
    let feeder = build_feeder(FeederSpec {
        bus_count: 2,
        branches: vec![BranchSpec {
            from_bus: 1,
            to_bus: 2,
            resistance_pu: 0.01,
            reactance_pu: 0.01,
        }],
        base_kv: 12.47,
        base_kva: 1000.0,
        slack_voltage_pu: 1.0,
    })
    .unwrap();
    // 0.1 pu at 0.95 lagging.
    let p = 100.0;
    let q = p * (1.0f64 / 0.95 / 0.95 - 1.0).sqrt();
    let mut frame = InjectionFrame::zeros(2);
    frame.load_kw[1] = p;
    frame.load_kvar[1] = q;
    let sweep = solve_power_flow(&feeder, &frame, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
    let nr = oracle(&feeder, &frame);
    assert!(sweep.converged);
    assert!((sweep.v_mag[1] - nr.v_mag[1]).abs() < 1e-6);
    // Oracle loss: |I|^2 r with I from the oracle voltages.
    let v2 = num_complex::Complex64::from_polar(nr.v_mag[1], nr.v_ang[1]);
    let i = (num_complex::Complex64::new(1.0, 0.0) - v2) / num_complex::Complex64::new(0.01, 0.01);
    let loss_kw = i.norm_sqr() * 0.01 * 1000.0;
    assert!((sweep.total_loss_kw - loss_kw).abs() / 1000.0 < 1e-6);
}

#[test]
fn random_radial_feeders_match_newton() {
    let mut worst_v: f64 = 0.0;
    let mut worst_balance: f64 = 0.0;
    for seed in 0..100 {
        let case = random_case(seed);
        let sweep = solve_power_flow(&case.feeder, &case.frame, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
        assert!(sweep.converged, "seed {seed}");
        let nr = oracle(&case.feeder, &case.frame);
        for (a, b) in sweep.v_mag.iter().zip(&nr.v_mag) {
            worst_v = worst_v.max((a - b).abs());
        }
        worst_balance = worst_balance.max(balance_residual(&case.feeder, &case.frame, &sweep));
    }
    println!("worst |V| gap {worst_v:.3e} pu, worst balance residual {worst_balance:.3e} pu");
    assert!(worst_v < 1e-6);
    assert!(worst_balance < 1e-8);
}

#[test]
fn losses_are_non_negative_and_vanish_with_impedance() {
    let case = random_case(77);
    let mut previous = f64::INFINITY;
    for k in [1.0, 1e-2, 1e-4, 1e-6] {
        let spec = FeederSpec {
            branches: case
                .feeder
                .spec()
                .branches
                .iter()
                .map(|b| BranchSpec {
                    resistance_pu: b.resistance_pu * k,
                    reactance_pu: b.reactance_pu * k,
                    ..*b
                })
                .collect(),
            ..case.feeder.spec().clone()
        };
        let f = build_feeder(spec).unwrap();
        let r = solve_power_flow(&f, &case.frame, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
        assert!(r.total_loss_kw >= 0.0);
        assert!(r.total_loss_kw < previous);
        previous = r.total_loss_kw;
        if k == 1e-6 {
            assert!(r.total_loss_kw < 1e-6);
            assert!(r.v_mag.iter().all(|v| (v - f.slack_voltage()).abs() < 1e-6));
        }
    }
}

#[test]
fn voltage_falls_with_depth_under_pure_load() {
    let feeder = build_feeder(FeederSpec::default_community()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let mut frame = InjectionFrame::zeros(31);
        for bus in 1..31 {
            frame.load_kw[bus] = rng.gen_range(0.0..12.0);
            frame.load_kvar[bus] = frame.load_kw[bus] * 0.33;
        }
        let r = solve_power_flow(&feeder, &frame, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
        assert!(r.v_mag.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.branch_p_kw.iter().all(|&p| p >= 0.0));
    }
}

#[test]
fn time_series_examples() {
    let feeder = build_feeder(FeederSpec::default_community()).unwrap();
    let zeros = vec![InjectionFrame::zeros(31); 48];
    let r = solve_time_series(&feeder, &zeros, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
    assert!(r.iter().all(|x| x.total_loss_kw == 0.0 && x.converged));

    let mut frame = InjectionFrame::zeros(31);
    frame.load_kw[1..].fill(3.0);
    let constant = vec![frame.clone(); 48];
    let r = solve_time_series(&feeder, &constant, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
    assert!(r.windows(2).all(|w| w[0] == w[1]));

    // Midday surplus at every bus reverses the head section.
    let frames: Vec<InjectionFrame> = (0..48)
        .map(|slot| {
            let mut f = InjectionFrame::zeros(31);
            let p = if (20..28).contains(&slot) { -2.5 } else { 1.5 };
            f.load_kw[1..].fill(p);
            f
        })
        .collect();
    let r = solve_time_series(&feeder, &frames, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
    for (slot, res) in r.iter().enumerate() {
        assert_eq!(res.branch_p_kw[0] < 0.0, (20..28).contains(&slot));
    }
    let events = reverse_flow_report(&r).unwrap();
    assert!(events.iter().any(|e| e.branch == 0));
}

#[test]
fn errors_carry_the_slot() {
    let feeder = build_feeder(FeederSpec::default_community()).unwrap();
    let mut frames = vec![InjectionFrame::zeros(31); 5];
    frames[3].load_kw[30] = 1e6;
    let err = solve_time_series(&feeder, &frames, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap_err();
    assert!(matches!(err, dsmsim::feeder::FeederError::AtSlot { slot: 3, .. }));
}
