//! Controller fidelity pins (the three-way rule and d_crit), Bayes-update
//! oracle checks, and episode-level simulation invariants.

use mcd_core::av::longitudinal::{
    aggregate_outcomes, bayes_cell, canonical_grid, control_step, d_crit, run_scenario,
    simulate_episode, CtrlSpec, DynSpec, EnvSpec, EpisodeOutcome, LongitudinalScenario,
    SensorRecord,
};
use mcd_core::poset::SampledCurve;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive};

fn flat(v: f64) -> SampledCurve {
    let grid = canonical_grid();
    let values = vec![v; grid.len()];
    SampledCurve::new(grid, values).unwrap()
}

fn perfect_sensor() -> SensorRecord {
    SensorRecord {
        name: "oracle".to_string(),
        fp_curve: flat(0.0),
        fn_curve: flat(0.0),
        acc_curve: flat(0.01),
        acquisition_frequency: 25.0,
        latency: 0.0,
        cost: 0.0,
        mass: 0.0,
        power: 0.0,
    }
}

fn scenario(density: f64, sensor: SensorRecord) -> LongitudinalScenario {
    LongitudinalScenario {
        env: EnvSpec {
            night: false,
            density,
        },
        cruise_speed: 54.0, // 15 m/s
        dynamics: DynSpec {
            v_max: 50.0,
            a_max: 3.0,
            a_min: 6.0,
        },
        ctrl: CtrlSpec {
            theta: 0.5,
            control_frequency: 25.0,
        },
        sensor,
        vehicle_mass: 1500.0,
        horizon: 60.0,
        episodes: 20,
        rng_seed: 7,
        obstacle_dwell: 6.0,
    }
}

#[test]
fn d_crit_is_the_textbook_braking_distance() {
    assert_eq!(d_crit(10.0, 5.0), 10.0);
    assert_eq!(d_crit(20.0, 4.0), 50.0);
    assert_eq!(d_crit(0.0, 3.0), 0.0);
    let (v, a) = (13.7, 6.2);
    assert!((d_crit(v, a) - v * v / (2.0 * a)).abs() < 1e-15);
}

#[test]
fn three_way_rule_boundary_cases() {
    let s = scenario(0.0, perfect_sensor());
    let empty = vec![0.0; 150];

    // v = 0, nothing believed: accelerate
    assert_eq!(control_step(0.0, &empty, &s), s.dynamics.a_max);

    // mass 1.0 at 1 m, v = 10, a_min = 5 (d_crit = 10 m >= 1 m): brake
    let mut s2 = scenario(0.0, perfect_sensor());
    s2.dynamics.a_min = 5.0;
    let mut one = vec![0.0; 150];
    one[1] = 1.0;
    assert_eq!(control_step(10.0, &one, &s2), -5.0);

    // v exactly cruise, belief below threshold: coast
    assert_eq!(control_step(s.v_cruise_ms(), &empty, &s), 0.0);

    // integral exactly theta: brake (>= is inclusive)
    let mut half = vec![0.0; 150];
    half[2] = s.ctrl.theta; // one full cell inside d_crit carries exactly theta
    assert_eq!(control_step(10.0, &half, &s), -s.dynamics.a_min);

    // same mass just outside d_crit: not a brake
    let mut outside = vec![0.0; 150];
    outside[60] = 1.0; // d_crit(10, 6) = 8.33 m
    assert_eq!(control_step(10.0, &outside, &s), s.dynamics.a_max);
}

#[test]
fn bayes_update_matches_rational_oracle() {
    // exact odds-form computation with rationals
    let cases = [
        (0.01, 1.0, 0.001, 0.05),
        (0.5, 0.0, 0.01, 0.2),
        (0.2, 0.35, 0.02, 0.1),
        (0.9, 1.0, 0.3, 0.4),
        (0.005, 0.6, 0.0001, 0.01),
    ];
    for (b, e, fp, fnr) in cases {
        let got = bayes_cell(b, e, fp, fnr);
        let rb = BigRational::from_f64(b).unwrap();
        let re = BigRational::from_f64(e).unwrap();
        let rfp = BigRational::from_f64(fp).unwrap();
        let rfn = BigRational::from_f64(fnr).unwrap();
        let one = BigRational::from_f64(1.0).unwrap();
        let lr = &re * (&one - &rfn) / &rfp + (&one - &re) * &rfn / (&one - &rfp);
        let odds = &rb / (&one - &rb) * lr;
        let want = (&odds / (&one + &odds)).to_f64().unwrap();
        assert!(
            (got - want).abs() < 1e-12,
            "bayes_cell({b},{e},{fp},{fnr}) = {got}, oracle {want}"
        );
    }
}

#[test]
fn uninformative_sensor_leaves_belief_unchanged() {
    for b in [0.01, 0.3, 0.7] {
        for e in [0.0, 0.4, 1.0] {
            let got = bayes_cell(b, e, 0.5, 0.5);
            assert!((got - b).abs() < 1e-9, "belief moved: {b} -> {got}");
        }
    }
}

#[test]
fn near_perfect_detection_saturates_belief() {
    let got = bayes_cell(0.005, 1.0, 1e-9, 1e-9);
    assert!(got > 0.999, "{got}");
    let gone = bayes_cell(0.9, 0.0, 1e-9, 1e-9);
    assert!(gone < 1e-6, "{gone}");
}

#[test]
fn empty_road_reaches_cruise_and_stops() {
    let s = scenario(0.0, perfect_sensor());
    let out = simulate_episode(&s, 0);
    assert!(!out.collided);
    let v_cs = s.v_cruise_ms();
    // reach-and-stop identity: one ramp up, one ramp down
    assert!(
        (out.discomfort - 2.0 * v_cs).abs() < v_cs * 0.01,
        "discomfort {} vs 2*v_cruise {}",
        out.discomfort,
        2.0 * v_cs
    );
    assert!(out.mean_speed >= 0.95 * v_cs, "mean speed {}", out.mean_speed);
}

#[test]
fn fixed_seed_is_bit_deterministic() {
    let s = scenario(4.0, perfect_sensor());
    let a = simulate_episode(&s, 3);
    let b = simulate_episode(&s, 3);
    assert_eq!(a, b);
    let c = simulate_episode(&s, 4);
    assert!(a != c, "different seeds should differ");
}

#[test]
fn huge_braking_power_prevents_all_collisions() {
    let mut s = scenario(8.0, perfect_sensor());
    s.dynamics.a_min = 100.0;
    for seed in 0..30 {
        let out = simulate_episode(&s, seed);
        assert!(!out.collided, "collision at seed {seed}");
    }
}

#[test]
fn aggregate_definitions() {
    let mk = |collided: bool, p: f64, dis: f64, v: f64| EpisodeOutcome {
        collided,
        collision_momentum: p,
        discomfort: dis,
        mean_speed: v,
        distance_covered: 0.0,
    };
    // all collide at momentum 15000
    let all: Vec<_> = (0..4).map(|_| mk(true, 15000.0, 1.0, 5.0)).collect();
    let agg = aggregate_outcomes(&all, 1500.0).unwrap();
    assert!((agg.danger - 15000.0).abs() < 1e-9);
    // half collide at momentum m: danger = m/2
    let half = vec![
        mk(true, 8000.0, 1.0, 5.0),
        mk(false, 0.0, 1.0, 5.0),
    ];
    let agg = aggregate_outcomes(&half, 1500.0).unwrap();
    assert!((agg.danger - 4000.0).abs() < 1e-9);
    // no collisions: danger 0
    let none = vec![mk(false, 0.0, 2.0, 5.0)];
    assert_eq!(aggregate_outcomes(&none, 1500.0).unwrap().danger, 0.0);
    assert!(aggregate_outcomes(&[], 1500.0).is_err());
}

#[test]
fn scenario_validation_rejects_nonsense() {
    let mut s = scenario(0.0, perfect_sensor());
    s.ctrl.theta = 1.5;
    assert!(run_scenario(&s).is_err());
    let mut s = scenario(0.0, perfect_sensor());
    s.episodes = 0;
    assert!(run_scenario(&s).is_err());
    let mut s = scenario(0.0, perfect_sensor());
    s.ctrl.control_frequency = 80.0;
    assert!(run_scenario(&s).is_err());
    let mut s = scenario(0.0, perfect_sensor());
    s.cruise_speed = 500.0;
    assert!(run_scenario(&s).is_err());
}
