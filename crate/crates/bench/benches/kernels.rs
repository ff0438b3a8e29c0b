use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tulik_core::inference::{gd_field, train, vi_field_network, Method, TrainConfig};
use tulik_core::model::intensity_record;
use tulik_core::simulate::{simulate_dataset_redrawn, Preset};

fn preset(p: Preset, count: usize) -> (tulik_core::ModelParams, Vec<tulik_core::model::Trajectory>) {
    let truth = p.truth(0).unwrap().params;
    let data = simulate_dataset_redrawn(&truth, count, 1, 100).unwrap().0;
    (truth, data)
}

fn per_trajectory(c: &mut Criterion) {
    let (net, net_data) = preset(Preset::Network, 1);
    let (large, large_data) = preset(Preset::TimeOnlyLarge, 1);
    c.bench_function("intensity/network", |b| b.iter(|| intensity_record(black_box(&net), &net_data[0]).unwrap()));
    c.bench_function("intensity/large-grid", |b| {
        b.iter(|| intensity_record(black_box(&large), &large_data[0]).unwrap())
    });
    c.bench_function("vi-field/network", |b| b.iter(|| vi_field_network(black_box(&net), &net_data[0]).unwrap()));
    c.bench_function("gd-field/large-grid", |b| b.iter(|| gd_field(black_box(&large), &large_data[0]).unwrap()));
}

fn epochs(c: &mut Criterion) {
    let (_, small) = preset(Preset::TimeOnlySmall, 2_000);
    let (_, net) = preset(Preset::Network, 2_000);
    let mut group = c.benchmark_group("epoch");
    group.sample_size(10);
    for method in [Method::Vi, Method::Gd] {
        let config = TrainConfig { max_epochs: 1, ..TrainConfig::time_only_small(method) };
        group.bench_function(format!("small-2000/{method}"), |b| b.iter(|| train(&config, &small, None).unwrap()));
    }
    let config = TrainConfig { max_epochs: 1, ..TrainConfig::network(Method::Vi, Some(0.6)) };
    group.bench_function("network-2000/vi+svd", |b| b.iter(|| train(&config, &net, None).unwrap()));
    group.finish();
}

criterion_group!(benches, per_trajectory, epochs);
criterion_main!(benches);
