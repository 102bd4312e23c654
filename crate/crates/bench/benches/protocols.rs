use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use fairdiv_bench::{instance, instance_and_allocation};
use fairdiv_core::predicates::{BoundFamily, ValueTable};
use fairdiv_core::protocols::{self, ProtocolKind, RunOptions};
use fairdiv_core::{rat, Instance};

fn run(kind: ProtocolKind, inst: &Instance, options: &RunOptions) -> u64 {
    protocols::run(kind, inst, options)
        .expect("protocol succeeds")
        .ledger
        .total_queries()
}

fn baselines(c: &mut Criterion) {
    let mut g = c.benchmark_group("baselines");
    for n in [4usize, 16, 64] {
        let inst = instance(n, 1);
        for kind in [ProtocolKind::EvenPaz, ProtocolKind::LastDiminisher] {
            g.bench_with_input(BenchmarkId::new(kind.name(), n), &inst, |b, inst| {
                b.iter(|| run(kind, black_box(inst), &RunOptions::default()))
            });
        }
    }
    g.finish();
}

fn algorithm1(c: &mut Criterion) {
    let mut g = c.benchmark_group("alg1");
    g.sample_size(10);
    for n in [4usize, 8, 16] {
        let uniform = Instance::uniform(n);
        g.bench_with_input(BenchmarkId::new("uniform", n), &uniform, |b, inst| {
            b.iter(|| {
                run(
                    ProtocolKind::Algorithm1,
                    black_box(inst),
                    &RunOptions::default(),
                )
            })
        });
    }
    for n in [4usize, 8] {
        let inst = instance(n, 2);
        g.bench_with_input(BenchmarkId::new("random", n), &inst, |b, inst| {
            b.iter(|| {
                run(
                    ProtocolKind::Algorithm1,
                    black_box(inst),
                    &RunOptions::default(),
                )
            })
        });
    }
    g.finish();
}

fn algorithm2(c: &mut Criterion) {
    let mut g = c.benchmark_group("alg2");
    g.sample_size(10);
    let options = RunOptions {
        eps: Some(rat(1, 10)),
        ..RunOptions::default()
    };
    for n in [3usize, 5] {
        let inst = instance(n, 3);
        g.bench_with_input(BenchmarkId::new("random", n), &inst, |b, inst| {
            b.iter(|| run(ProtocolKind::Algorithm2, black_box(inst), &options))
        });
    }
    g.finish();
}

fn predicates(c: &mut Criterion) {
    let mut g = c.benchmark_group("predicates");
    for n in [6usize, 10] {
        let (inst, alloc) = instance_and_allocation(n, 4);
        let table = ValueTable::new(&inst, &alloc).unwrap();
        g.bench_with_input(BenchmarkId::new("clb-fast", n), &table, |b, t| {
            b.iter(|| t.clb(black_box(n)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("clb-brute", n), &table, |b, t| {
            b.iter(|| t.brute_force(black_box(n), &BoundFamily::Linear).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, baselines, algorithm1, algorithm2, predicates);
criterion_main!(benches);
