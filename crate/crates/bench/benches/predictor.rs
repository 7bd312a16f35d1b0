use criterion::{criterion_group, criterion_main, Criterion};
use oadse::{builtin_network, network_cost, TechParams};
use oadse_bench::sample_config;
use std::hint::black_box;

fn predictor(c: &mut Criterion) {
    let tech = TechParams::default();
    let config = sample_config();
    for name in ["lenet5", "resnet18", "googlenet"] {
        let model = builtin_network(name).unwrap();
        c.bench_function(&format!("network_cost/{name}"), |b| {
            b.iter(|| network_cost(black_box(&model), black_box(&config), &tech).unwrap())
        });
    }
}

criterion_group!(benches, predictor);
criterion_main!(benches);
