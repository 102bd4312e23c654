use fairdiv_core::allocation::Piece;
use fairdiv_core::generate;
use fairdiv_core::oracle::Oracle;
use fairdiv_core::predicates::ValueTable;
use fairdiv_core::protocols::{
    self, eps_perfect_partition, Participant, ProtocolKind, RunOptions, TraceEvent,
};
use fairdiv_core::rational::{self, int, rat};
use fairdiv_core::{scaling, Instance};
use proptest::prelude::*;

fn run(kind: ProtocolKind, inst: &Instance, eps: Option<i64>) -> protocols::ProtocolResult {
    let options = RunOptions {
        eps: eps.map(|m| rat(1, m)),
        ..RunOptions::default()
    };
    protocols::run(kind, inst, &options).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn algorithm1_shares(seed in any::<u64>(), n in 3usize..=6) {
        let inst = generate::random_instance(n, &mut generate::rng(seed));
        let r = run(ProtocolKind::Algorithm1, &inst, None);
        let t = ValueTable::new(&inst, &r.allocation).unwrap();
        let share = rat(1, n as i64);
        let floor = rat(1, 2 * n as i64);
        // Winners leave the loop with exactly 1/n; the last agent with at least that.
        let order: Vec<usize> = r
            .trace
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Assign { agent, .. } => Some(*agent),
                _ => None,
            })
            .collect();
        prop_assert_eq!(order.len(), n);
        for (pos, &i) in order.iter().enumerate() {
            if pos + 1 < n {
                prop_assert_eq!(t.value(i, i), &share);
            } else {
                prop_assert!(t.value(i, i) >= &share);
            }
        }
        prop_assert!(t.rows().iter().flatten().all(|v| v >= &floor));
        prop_assert!(t.chb(n).unwrap().passed());
    }

    #[test]
    fn algorithm2_guarantees(seed in any::<u64>(), n in 3usize..=4, m in prop::sample::select(vec![10i64, 20])) {
        let inst = generate::random_instance(n, &mut generate::rng(seed));
        let r = run(ProtocolKind::Algorithm2, &inst, Some(m));
        let t = ValueTable::new(&inst, &r.allocation).unwrap();
        let eps = rat(1, m);
        prop_assert!(t.proportional().passed());
        prop_assert!(t.eps_perfect(&eps).passed());
        prop_assert!(t.delta_clb(n, &(eps * int(n as i64))).unwrap().passed());
    }

    #[test]
    fn perfect_partition_contract(seed in any::<u64>(), z in 2usize..=5, lo in 0i64..40, hi in 60i64..=100) {
        let inst = generate::random_instance(3, &mut generate::rng(seed));
        let mut o = Oracle::honest(&inst);
        let region = Piece::from_interval(fairdiv_core::Interval::new(rat(lo, 100), rat(hi, 100)).unwrap());
        let eps = rat(1, 50);
        let participants = [Participant::Agent(0), Participant::Agent(2), Participant::Uniform];
        let totals: Vec<_> = inst.valuations().iter().map(|v| v.eval_piece(&region)).collect();
        prop_assume!(totals[0] > rational::zero() && totals[2] > rational::zero());
        let p = eps_perfect_partition(&mut o, &participants, z, &eps, &region).unwrap();
        prop_assert_eq!(p.parts.len(), z);
        let target = rat(1, z as i64);
        let mut union = Piece::empty();
        for part in &p.parts {
            prop_assert!(part.intersection(&union).is_empty());
            union = union.union(part);
            for a in [0usize, 2] {
                let share = inst.valuations()[a].eval_piece(part) / &totals[a];
                prop_assert!(rational::abs(&(share - &target)) <= eps);
            }
            let length = part.length() / region.length();
            prop_assert!(rational::abs(&(length - &target)) <= eps);
        }
        prop_assert_eq!(union, region);
    }
}

#[test]
fn baselines_on_random_instances() {
    for seed in 0..100u64 {
        let mut rng = generate::rng(seed);
        let n = 2 + (seed as usize % 6);
        let inst = generate::random_instance(n, &mut rng);
        for kind in [ProtocolKind::EvenPaz, ProtocolKind::LastDiminisher] {
            let r = run(kind, &inst, None);
            assert!(
                ValueTable::new(&inst, &r.allocation)
                    .unwrap()
                    .proportional()
                    .passed(),
                "{kind} seed {seed}"
            );
        }
    }
}

fn ladder(kind: ProtocolKind, ns: &[usize]) -> Vec<(f64, f64)> {
    ns.iter()
        .map(|&n| {
            (
                n as f64,
                run(kind, &Instance::uniform(n), None)
                    .ledger
                    .total_queries() as f64,
            )
        })
        .collect()
}

#[test]
fn even_paz_fits_n_log_n() {
    let ns: Vec<usize> = (1..=8).map(|e| 1 << e).collect();
    let points = ladder(ProtocolKind::EvenPaz, &ns);
    // Regress against n log n: a slope of one means the n log n shape fits.
    let against: Vec<(f64, f64)> = points.iter().map(|&(n, q)| (n * n.log2(), q)).collect();
    let slope = scaling::loglog_slope(&against).unwrap();
    assert!((slope - 1.0).abs() < 0.1, "slope {slope} on {points:?}");
}

#[test]
fn last_diminisher_is_quadratic() {
    let points = ladder(ProtocolKind::LastDiminisher, &[4, 8, 16, 32, 64]);
    let slope = scaling::loglog_slope(&points).unwrap();
    assert!((slope - 2.0).abs() < 0.15, "slope {slope} on {points:?}");
    for &(n, q) in &points {
        let n = n as u64;
        assert_eq!(q as u64, n * (n + 1) / 2 - 1);
    }
}

#[test]
fn algorithm1_uniform_ladder_stays_below_quartic() {
    let points = ladder(ProtocolKind::Algorithm1, &[4, 8, 16]);
    let slope = scaling::loglog_slope(&points).unwrap();
    assert!(slope <= 4.5, "slope {slope} on {points:?}");
}
