mod common;

use common::{gen_init, gen_program, GenOpts};
use proptest::prelude::*;
use revlang_core::checker::roundtrip;
use revlang_core::engine::{run_to_completion, Bundle, Config, DEFAULT_BUDGET};
use revlang_core::env::Counters;
use revlang_core::scheduler::{canonical_order, SchedulePolicy};
use revlang_core::syntax::ast::{ConstructId, ConstructKind, Program};
use revlang_core::syntax::visit::Orientation;
use revlang_core::syntax::{parse_program, render};
use revlang_core::transform::{
    ann, get_ai, inv, ire_l, ire_p, re_l, re_p, remove_ann, set_ai, AnnotationTable,
};

fn opts(par: bool) -> GenOpts {
    if par {
        GenOpts::parallel()
    } else {
        GenOpts::sequential()
    }
}

fn program(seed: u64, par: bool) -> Program {
    revlang_core::parse_and_validate(&gen_program(seed, opts(par))).unwrap()
}

fn executed(seed: u64, par: bool) -> Config {
    let p = program(seed, par);
    let mut c = Config::annotated(&p, &gen_init(seed)).unwrap();
    run_to_completion(&mut c, &mut SchedulePolicy::seeded(seed), DEFAULT_BUDGET).unwrap();
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>(), par in any::<bool>()) {
        let p = program(seed, par);
        prop_assert_eq!(parse_program(&render(&p)).unwrap(), p);
    }

    #[test]
    fn remove_ann_undoes_ann(seed in any::<u64>(), par in any::<bool>()) {
        let p = program(seed, par);
        let mut t = AnnotationTable::new();
        prop_assert_eq!(remove_ann(&ann(&p, &mut t).unwrap()), p);
    }

    #[test]
    fn inversion_is_an_involution(seed in any::<u64>(), par in any::<bool>()) {
        let c = executed(seed, par);
        let (e, _) = c.executed_program().unwrap();
        prop_assert_eq!(inv(&inv(&e).unwrap()).unwrap(), e);
    }

    #[test]
    fn set_ai_restores_get_ai(seed in any::<u64>(), mirrored in any::<bool>()) {
        let c = executed(seed, false);
        let (e, table) = c.executed_program().unwrap();
        let orient = if mirrored { Orientation::Mirrored } else { Orientation::Forward };
        let info = get_ai(&e, &table, orient);
        let mut wiped = table.clone();
        for (k, _) in &info {
            wiped.set(*k, Vec::new());
        }
        set_ai(&e, &info, &mut wiped, orient).unwrap();
        prop_assert_eq!(get_ai(&e, &wiped, orient), info);
    }

    #[test]
    fn versioning_round_trips(seed in any::<u64>(), rounds in 1usize..4) {
        let p = program(seed, true);
        let mut counters = Counters::default();
        let mut q = p.clone();
        for _ in 0..rounds {
            q = re_l(&q, &mut counters);
        }
        for _ in 0..rounds {
            q = ire_l(&q, &mut counters).unwrap();
        }
        prop_assert_eq!(q, p);
    }

    #[test]
    fn renaming_round_trips(seed in any::<u64>(), n in 1u32..50) {
        let p = program(seed, false);
        let cn = ConstructId::new(ConstructKind::Call, format!("c{n}"));
        prop_assert_eq!(ire_p(&re_p(&p, &cn), &cn).unwrap(), p);
    }

    #[test]
    fn recorded_schedule_replays_identically(seed in any::<u64>()) {
        let src = gen_program(seed, GenOpts::parallel());
        let p = revlang_core::parse_and_validate(&src).unwrap();
        let init = gen_init(seed);
        let mut c = Config::annotated(&p, &init).unwrap();
        let t = run_to_completion(&mut c, &mut SchedulePolicy::seeded(seed), DEFAULT_BUDGET).unwrap();
        let bundle = Bundle::new(&src, &init, &c, &t).unwrap();
        let replayed = bundle.replay(DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(replayed.dump_state(), c.dump_state());
    }

    #[test]
    fn at_most_one_reverse_m_redex(seed in any::<u64>(), par in any::<bool>()) {
        let mut r = Config::reverse_of(&executed(seed, par)).unwrap();
        let mut policy = SchedulePolicy::seeded(seed.rotate_left(7));
        loop {
            let en = r.enabled();
            if en.is_empty() {
                break;
            }
            prop_assert!(en.iter().filter(|x| x.is_m_rule()).count() <= 1);
            let i = policy.choose(&en, r.steps).unwrap();
            r.step(&en[i]).unwrap();
        }
        prop_assert!(r.aux.is_empty());
    }

    #[test]
    fn canonical_order_ignores_input_order(seed in any::<u64>(), shuffle in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let c = Config::annotated(&program(seed, true), &gen_init(seed)).unwrap();
        let en = c.enabled();
        let mut shuffled = en.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(shuffle));
        prop_assert_eq!(canonical_order(shuffled), en);
    }

    #[test]
    fn random_schedules_round_trip(seed in any::<u64>(), par in any::<bool>()) {
        let p = program(seed, par);
        let report = roundtrip(&p, &gen_init(seed), &mut SchedulePolicy::seeded(seed), DEFAULT_BUDGET).unwrap();
        prop_assert!(report.passed, "{:?}", report);
    }
}
