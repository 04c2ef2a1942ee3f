use proptest::prelude::*;
use sticky_core::gas::{jump_measures, velocity_space_fields};
use sticky_core::{clusters_from_gvp, simulate, InitialData, Tolerances};

/// Admissible data whose accelerations come from a three-value set, so
/// consecutive ties are common.
fn tied_instance() -> impl Strategy<Value = InitialData> {
    (1usize..=8).prop_flat_map(|n| {
        (
            prop::collection::vec(0.05f64..1.5, n),
            prop::collection::vec(0.1f64..10.0, n),
            prop::collection::vec(-2.0f64..2.0, n),
            prop::collection::vec(prop::sample::select(vec![-1.0, 0.0, 1.0]), n),
        )
            .prop_map(|(gaps, m, v, mut th)| {
                let x = gaps
                    .iter()
                    .scan(0.0, |acc, g| {
                        *acc += g;
                        Some(*acc)
                    })
                    .collect();
                th.sort_by(|a: &f64, b| b.total_cmp(a));
                InitialData::new(x, m, v, th).expect("valid by construction")
            })
    })
}

fn admissible_instance() -> impl Strategy<Value = InitialData> {
    (1usize..=8).prop_flat_map(|n| {
        (
            prop::collection::vec(0.05f64..1.5, n),
            prop::collection::vec(0.1f64..10.0, n),
            prop::collection::vec(-2.0f64..2.0, n),
            prop::collection::vec(-2.0f64..2.0, n),
        )
            .prop_map(|(gaps, m, v, th)| {
                let x = gaps
                    .iter()
                    .scan(0.0, |acc, g| {
                        *acc += g;
                        Some(*acc)
                    })
                    .collect();
                InitialData::new(x, m, v, th).expect("valid by construction")
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ties_do_not_break_gvp_equivalence(data in tied_instance(), frac in prop::collection::vec(0.0f64..1.0, 4)) {
        let tol = Tolerances::default();
        let timeline = simulate(&data, f64::INFINITY, &tol).unwrap();
        let horizon = timeline.event_times().last().map_or(2.0, |s| 1.25 * s + 0.5);
        let shocks = timeline.event_times();
        for f in frac {
            let t = f * horizon;
            if shocks.iter().any(|s| (s - t).abs() < 1e-6) {
                continue;
            }
            let gvp = clusters_from_gvp(&data, t, &tol).unwrap();
            prop_assert_eq!(gvp.ranges(), timeline.partition_at(t).unwrap().ranges(), "t = {}", t);
        }
    }

    #[test]
    fn jumps_conserve_mass_and_force(data in admissible_instance()) {
        let tol = Tolerances::default();
        let timeline = simulate(&data, f64::INFINITY, &tol).unwrap();
        let force: f64 = data.masses().iter().zip(data.accelerations()).map(|(m, a)| (m * a).abs()).sum();
        for s in timeline.event_times() {
            let (dmu, dwmu) = jump_measures(&timeline, s).unwrap();
            prop_assert!(dmu.total_weight().abs() <= 1e-12, "Δμ total {}", dmu.total_weight());
            let scale = 1e-12 * (1.0 + force / data.total_mass());
            prop_assert!(dwmu.total_weight().abs() <= scale, "Δ(wμ) total {}", dwmu.total_weight());
        }
    }

    #[test]
    fn velocity_fields_are_well_formed(data in admissible_instance(), frac in 0.0f64..1.0) {
        let tol = Tolerances::default();
        let timeline = simulate(&data, f64::INFINITY, &tol).unwrap();
        let horizon = timeline.event_times().last().map_or(2.0, |s| 1.25 * s + 0.5);
        let t = frac * horizon;
        let fields = velocity_space_fields(&timeline, t).unwrap();
        prop_assert!(fields.mu().is_probability());
        for atom in &fields.current {
            prop_assert!(atom.a >= 0.0);
            prop_assert!(atom.weight > 0.0);
        }
        let velocities: Vec<f64> = fields.current.iter().map(|a| a.velocity).collect();
        prop_assert!(velocities.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn momentum_is_affine(data in admissible_instance(), frac in 0.0f64..1.0) {
        let tol = Tolerances::default();
        let timeline = simulate(&data, f64::INFINITY, &tol).unwrap();
        let horizon = timeline.event_times().last().map_or(2.0, |s| 1.25 * s + 0.5);
        let t = frac * horizon;
        let seg = timeline.segment_at(t).unwrap();
        let p: f64 = seg.partition.clusters().iter().zip(&seg.paths).map(|(c, q)| c.mass * q.velocity(t)).sum();
        let expected = data.total_momentum() + t * data.total_force();
        let scale: f64 = data
            .particles()
            .map(|q| q.m * (q.v.abs() + t * q.theta.abs()))
            .sum();
        prop_assert!((p - expected).abs() <= 1e-12 * (1.0 + scale), "{} vs {}", p, expected);
    }
}
