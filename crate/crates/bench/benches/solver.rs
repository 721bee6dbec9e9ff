use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use orc_cli::bench::{flow_document, Op, Workload};
use orc_core::{lang, solve, Viewport};

fn edits(c: &mut Criterion) {
    for op in [Op::Insert, Op::Delete, Op::Move, Op::ResizeWidget] {
        let mut g = c.benchmark_group(format!("edit/{op}"));
        for n in [5, 10, 20] {
            let w = Workload::new(op, n);
            g.bench_with_input(BenchmarkId::new("fresh", n), &w, |b, w| b.iter(|| w.fresh()));
            g.bench_with_input(BenchmarkId::new("incremental", n), &w, |b, w| {
                b.iter_batched(
                    || (w.before.clone(), w.warm.clone()),
                    |(base, warm)| w.incremental_on(base, warm),
                    BatchSize::SmallInput,
                )
            });
        }
        g.finish();
    }
}

fn viewports(c: &mut Criterion) {
    let mut g = c.benchmark_group("flow/viewport");
    let doc = flow_document(12);
    for width in [120.0, 200.0, 400.0] {
        let p = lang::lower(&doc, Some(Viewport::new(width, 2000.0))).unwrap().problem;
        g.bench_with_input(BenchmarkId::from_parameter(width), &p, |b, p| b.iter(|| solve(p, None).unwrap()));
    }
    g.finish();
}

fn parsing(c: &mut Criterion) {
    let text = lang::print(&flow_document(30));
    c.bench_function("parse/flow30", |b| b.iter(|| lang::parse(&text).unwrap()));
    c.bench_function("lower/flow30", |b| {
        let doc = lang::parse(&text).unwrap();
        b.iter(|| lang::lower(&doc, None).unwrap())
    });
}

criterion_group!(benches, edits, viewports, parsing);
criterion_main!(benches);
