use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use epimu::formulas::agreement_fixpoint;
use epimu::models::{
    protocol_model_iis, task_model_sak, TaskLabeling,
};
use epimu::solvability::search::{search_morphism, SearchConfig};
use epimu::subdivision::{enumerate_osp, subdivide_facet};
use epimu::Simplex;

const LIMIT: usize = 1_000_000;

fn bench_protocol_build(c: &mut Criterion) {
    let mut g = c.benchmark_group("protocol_build");
    g.bench_function("iis_n2_m1", |b| {
        b.iter(|| protocol_model_iis(2, 1, LIMIT).unwrap())
    });
    g.bench_function("iis_n1_m3", |b| {
        b.iter(|| protocol_model_iis(1, 3, LIMIT).unwrap())
    });
    g.finish();
}

fn bench_fixpoint_check(c: &mut Criterion) {
    let mut g = c.benchmark_group("fixpoint_check");
    for (n, k) in [(1, 1), (2, 2), (2, 3)] {
        let model = task_model_sak(n, k, TaskLabeling::InputsAndDecisions).unwrap();
        let phi = agreement_fixpoint(n, k);
        g.bench_function(format!("phi_n{n}_k{k}"), |b| {
            b.iter(|| model.valid(&phi).unwrap())
        });
    }
    g.finish();
}

fn bench_morphism_search(c: &mut Criterion) {
    let mut g = c.benchmark_group("morphism_search");
    g.sample_size(20);
    let config = SearchConfig::default();
    for (n, k, m, tag) in [(1, 1, 1, "refuted"), (1, 2, 1, "found"), (2, 3, 1, "found_wide")] {
        let protocol = protocol_model_iis(n, m, LIMIT).unwrap();
        g.bench_function(format!("n{n}_k{k}_m{m}_{tag}"), |b| {
            b.iter(|| search_morphism(&protocol, k, &config).unwrap())
        });
    }
    g.finish();
}

fn bench_subdivision(c: &mut Criterion) {
    let mut g = c.benchmark_group("subdivision");
    let partitions = enumerate_osp(2);
    let base = Simplex::from_base_values(&[0, 1, 2]);
    g.bench_function("one_round_n2", |b| {
        b.iter_batched(
            || base.clone(),
            |x| {
                for gamma in &partitions {
                    subdivide_facet(&x, gamma).unwrap();
                }
            },
            BatchSize::SmallInput,
        )
    });
    g.bench_function("enumerate_osp_3", |b| b.iter(|| enumerate_osp(3).len()));
    g.finish();
}

criterion_group!(
    benches,
    bench_protocol_build,
    bench_fixpoint_check,
    bench_morphism_search,
    bench_subdivision
);
criterion_main!(benches);
