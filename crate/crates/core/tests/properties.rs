use proptest::prelude::*;

use heavytail::cli_reporting::format_number;
use heavytail::estimators::lattice_oracle::{exact_oracle_for, FiniteSkipFree};
use heavytail::estimators::mc::{run_replications, Merge};
use heavytail::walk_engine::{walk_stopped, ScriptedSource, StoppingRule};
use heavytail::{Family, IncrementModel, RngState};

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        (1.2f64..6.0, 0.1f64..5.0, 0.0f64..10.0).prop_map(|(a, xm, b)| Family::pareto(a, xm, b)),
        (0.2f64..3.0, 0.1f64..5.0, 0.0f64..10.0).prop_map(|(k, s, b)| Family::weibull(k, s, b)),
        (-1.0f64..2.0, 0.1f64..2.0, 0.0f64..10.0).prop_map(|(mu, s, b)| Family::lognormal(mu, s, b)),
        (0.1f64..5.0, 0.0f64..10.0).prop_map(|(r, b)| Family::exponential(r, b)),
        (0.05f64..1.0, 2.2f64..6.0).prop_map(|(q, r)| Family::lattice(q, r)),
    ]
}

fn rule() -> impl Strategy<Value = StoppingRule> {
    prop_oneof![
        (0u64..30).prop_map(|n| StoppingRule::FixedN { n }),
        Just(StoppingRule::Tau),
        (1u64..4).prop_map(|k| StoppingRule::LadderK { k }),
        (0.0f64..20.0).prop_map(|x| StoppingRule::MuX { x }),
        (1u64..30).prop_map(|n| StoppingRule::min_of(StoppingRule::Tau, StoppingRule::FixedN { n })),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tail_is_a_nonincreasing_probability(f in family(), xs in prop::collection::vec(-20.0f64..200.0, 2..20)) {
        let m = IncrementModel::unchecked(f).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let tails: Vec<f64> = xs.iter().map(|&x| m.tail(x)).collect();
        for t in &tails {
            prop_assert!((0.0..=1.0).contains(t));
        }
        for w in tails.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn second_tail_is_capped_and_nonincreasing(f in family(), x in 0.0f64..100.0, dx in 0.0f64..50.0) {
        let m = IncrementModel::unchecked(f).unwrap();
        let (a, b) = (m.second_tail(x), m.second_tail(x + dx));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a * (1.0 + 1e-9) + 1e-300);
    }

    #[test]
    fn insensitivity_h_grows_slowly(f in family(), x in 0.0f64..1e6, t in 0.0f64..100.0) {
        let m = IncrementModel::unchecked(f).unwrap();
        let h = m.insensitivity_h(x).unwrap();
        let h2 = m.insensitivity_h(x + t).unwrap();
        prop_assert!(h <= 0.5 * x + 1e-12);
        prop_assert!(h2 >= h);
        prop_assert!(h2 <= h + t + 1e-9);
    }

    #[test]
    fn stopping_decision_ignores_future_increments(
        r in rule(),
        steps in prop::collection::vec(-3.0f64..3.0, 60),
        tail in prop::collection::vec(-3.0f64..3.0, 60),
        seed in any::<u64>(),
    ) {
        let plan = r.draw_plan(&mut RngState::from_seed(seed));
        let mut a = ScriptedSource::new(steps.clone());
        let out = walk_stopped(&mut a, plan, 60, &[], |_, _, _, _| {});
        prop_assume!(!out.capped);
        prop_assert_eq!(a.reads as u64, out.steps);
        let mut changed = steps[..out.steps as usize].to_vec();
        changed.extend_from_slice(&tail[out.steps as usize..]);
        let mut b = ScriptedSource::new(changed);
        let again = walk_stopped(&mut b, plan, 60, &[], |_, _, _, _| {});
        prop_assert_eq!(again, out);
    }

    #[test]
    fn passage_levels_are_reported_once_in_order(
        steps in prop::collection::vec(-2.0f64..4.0, 1..50),
        levels in prop::collection::vec(0.0f64..30.0, 1..6),
    ) {
        let mut levels = levels;
        levels.sort_by(f64::total_cmp);
        let n = steps.len() as u64;
        let mut seen = Vec::new();
        let out = walk_stopped(&mut ScriptedSource::new(steps), StoppingRule::FixedN { n }.draw_plan(&mut RngState::from_seed(0)), n, &levels, |i, _, pre, pos| {
            seen.push(i);
            assert!(pre <= levels[i] && pos > levels[i]);
        });
        prop_assert!(seen.windows(2).all(|w| w[1] > w[0]));
        prop_assert_eq!(seen.len(), levels.iter().filter(|&&l| l < out.max).count());
    }

    #[test]
    fn exact_exceedance_is_monotone_in_level(q in 0.3f64..0.95, ups in prop::collection::vec(0.0f64..1.0, 1..6), n in 1u64..15) {
        let total: f64 = ups.iter().sum();
        prop_assume!(total > 0.0);
        let law = FiniteSkipFree { q, up: ups.iter().map(|u| u / total * (1.0 - q)).collect() };
        for rule in [StoppingRule::Tau, StoppingRule::FixedN { n }, StoppingRule::min_of(StoppingRule::Tau, StoppingRule::FixedN { n })] {
            let mut prev = 1.0;
            for x in 0..12u64 {
                let (p, _) = exact_oracle_for(&law, &rule, x).unwrap();
                prop_assert!((0.0..=1.0 + 1e-12).contains(&p));
                prop_assert!(p <= prev + 1e-12, "{rule:?} x={x}: {p} > {prev}");
                prev = p;
            }
        }
    }

    #[test]
    fn numbers_survive_csv_formatting(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
    }
}

#[derive(Clone, Default)]
struct Draws(Vec<u64>);

impl Merge for Draws {
    fn merge(&mut self, other: Self) {
        self.0.extend(other.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn replications_do_not_depend_on_worker_count(n in 0u64..20_000, seed in any::<u64>(), workers in 2usize..6) {
        let draw = |w: usize| run_replications(n, seed, 9, Some(w), Draws::default, |acc, rng| acc.0.push((rng.uniform() * 1e9) as u64)).0;
        prop_assert_eq!(draw(1), draw(workers));
    }
}
