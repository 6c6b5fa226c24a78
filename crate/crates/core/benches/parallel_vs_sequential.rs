use criterion::{criterion_group, criterion_main, Criterion};
use qinduce::par;
use qinduce::report::induce_report;
use qinduce::spec_file::{catalog_bundle, Problem};
use qinduce::suites::{self, Suite};

fn bench(c: &mut Criterion) {
    let problem = Problem::from_spec(&catalog_bundle("D4/C4").unwrap()).unwrap();
    let mut group = c.benchmark_group("D4/C4");
    group.sample_size(10);
    for (label, on) in [("parallel", true), ("sequential", false)] {
        group.bench_function(format!("induce/{label}"), |b| {
            par::set_enabled(on);
            b.iter(|| induce_report(&problem).unwrap())
        });
        group.bench_function(format!("verify-induction/{label}"), |b| {
            par::set_enabled(on);
            b.iter(|| suites::run(&problem, Suite::Induction).unwrap())
        });
    }
    par::set_enabled(true);
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
