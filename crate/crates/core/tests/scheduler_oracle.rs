mod common;

use common::{enumerate_min, small_instance};
use dsmsim::model::{Appliance, Household, PriceProfile, PvProfile};
use dsmsim::scheduler::{
    is_feasible, optimize_exact, optimize_heuristic, shift_penalty, total_cost, Problem, SolveBudget,
};
use proptest::prelude::*;

#[test]
fn exact_matches_enumeration_on_small_instances() {
    let budget = SolveBudget::default();
    for seed in 0..120u64 {
        let inst = small_instance(1000 + seed, 12);
        let problem = Problem::new(&inst.household, &inst.price, &inst.pv, inst.penalty_price);
        let oracle = enumerate_min(&inst).expect("baseline is feasible");
        let sol = optimize_exact(&problem, &budget).unwrap();
        assert!(sol.is_optimal(), "seed {seed}");
        assert!(
            (sol.costs.objective() - oracle).abs() < 1e-9,
            "seed {seed}: exact {} vs oracle {oracle}",
            sol.costs.objective()
        );
        assert!(is_feasible(&sol.schedule, &inst.household).unwrap().is_feasible());
    }
}

#[test]
fn heuristic_is_exact_for_single_appliances() {
    let mut checked = 0;
    let mut seed = 5000u64;
    while checked < 50 {
        seed += 1;
        let mut inst = small_instance(seed, 12);
        inst.household.appliances.truncate(1);
        let oracle = enumerate_min(&inst).unwrap();
        let problem = Problem::new(&inst.household, &inst.price, &inst.pv, inst.penalty_price);
        let h = optimize_heuristic(&problem, &SolveBudget::default(), seed).unwrap();
        assert!((h.costs.objective() - oracle).abs() < 1e-9, "seed {seed}");
        checked += 1;
    }
}

#[test]
fn heuristic_never_beats_exact_and_never_loses_to_baseline() {
    for seed in 0..60u64 {
        let inst = small_instance(9000 + seed, 12);
        let problem = Problem::new(&inst.household, &inst.price, &inst.pv, inst.penalty_price);
        let exact = optimize_exact(&problem, &SolveBudget::default()).unwrap();
        let heur = optimize_heuristic(&problem, &SolveBudget::default(), seed).unwrap();
        let baseline = total_cost(
            &inst.household.baseline_schedule(),
            &inst.household,
            &inst.price,
            &inst.pv,
            inst.penalty_price,
        )
        .unwrap();
        assert!(heur.costs.objective() >= exact.costs.objective() - 1e-9);
        assert!(heur.costs.objective() <= baseline.objective() + 1e-12);
    }
}

#[test]
fn surplus_pv_makes_energy_free() {
    let appliances = vec![
        Appliance {
            id: "a".into(),
            rated_power_kw: 1.5,
            duration_slots: 2,
            window_start: 0,
            window_end: 7,
            interruptible: true,
            baseline_on_slots: vec![1, 6],
        },
        Appliance {
            id: "b".into(),
            rated_power_kw: 2.0,
            duration_slots: 3,
            window_start: 2,
            window_end: 7,
            interruptible: false,
            baseline_on_slots: vec![3, 4, 5],
        },
    ];
    let h = Household {
        index: 1,
        bus: 2,
        appliances,
        md_kw: 6.0,
        pv_installed: true,
        base_load_kw: vec![0.5; 8],
        power_factor: 0.95,
    };
    let price = PriceProfile::new(vec![0.1, 0.2, 0.3, 0.3, 0.3, 0.2, 0.1, 0.1]).unwrap();
    let pv = PvProfile::new(vec![6.0; 8], 6.0).unwrap();
    let sol = optimize_exact(&Problem::new(&h, &price, &pv, 0.0), &SolveBudget::default()).unwrap();
    assert_eq!(sol.costs.electricity_cost, 0.0);
    assert_eq!(sol.costs.penalty_cost, 0.0);
    // Every feasible schedule ties; the tie-break keeps the baseline.
    assert_eq!(sol.schedule, h.baseline_schedule());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn optimal_objective_is_monotone_in_penalty(seed in 0u64..10_000, lo in 0.0f64..0.2, step in 0.0f64..0.2) {
        let inst = small_instance(seed, 10);
        let p_lo = Problem::new(&inst.household, &inst.price, &inst.pv, lo);
        let p_hi = Problem::new(&inst.household, &inst.price, &inst.pv, lo + step);
        let a = optimize_exact(&p_lo, &SolveBudget::default()).unwrap();
        let b = optimize_exact(&p_hi, &SolveBudget::default()).unwrap();
        prop_assert!(a.costs.objective() <= b.costs.objective() + 1e-9);
    }

    #[test]
    fn zero_penalty_reports_zero_penalty_cost(seed in 0u64..10_000) {
        let inst = small_instance(seed, 10);
        let p = Problem::new(&inst.household, &inst.price, &inst.pv, 0.0);
        let s = optimize_exact(&p, &SolveBudget::default()).unwrap();
        prop_assert_eq!(s.costs.penalty_cost, 0.0);
    }

    #[test]
    fn shift_penalty_is_symmetric(seed in 0u64..10_000, pi in 0.0f64..0.3) {
        let inst = small_instance(seed, 12);
        let h = &inst.household;
        let p = Problem::new(h, &inst.price, &inst.pv, 0.0);
        let other = optimize_exact(&p, &SolveBudget::default()).unwrap().schedule;
        let base = h.baseline_schedule();
        let ab = shift_penalty(&other, &base, h, pi).unwrap();
        let ba = shift_penalty(&base, &other, h, pi).unwrap();
        prop_assert_eq!(ab, ba);
    }
}
