use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hypergroup::data::{generate_synthetic, split_interactions, SplitSpec, SynthConfig};
use hypergroup::eval::{evaluate, EvalOptions};
use hypergroup::graph::Graphs;
use hypergroup::model::{Context, ModelConfig, ModelParams};
use hypergroup::par::Exec;
use hypergroup::training::{batch_loss, Task, Triple};

struct Setup {
    cfg: ModelConfig,
    params: ModelParams,
    graphs: Graphs,
    splits: hypergroup::data::Splits,
    triples: Vec<Triple>,
}

fn setup() -> Setup {
    let synth = SynthConfig { num_users: 300, num_items: 100, num_groups: 400, ..SynthConfig::default() };
    let ds = generate_synthetic(&synth).unwrap();
    let splits = split_interactions(&ds, &SplitSpec::default()).unwrap();
    let graphs = Graphs::build(&splits.train);
    let cfg = ModelConfig { dim: 32, zero_init_output: false, ..Default::default() };
    let params = ModelParams::init(&cfg, ds.num_users, ds.num_items, 0).unwrap();
    let triples = splits
        .train
        .group_item
        .iter()
        .take(256)
        .map(|&(g, v)| Triple { entity: g, pos: v, neg: (v + 1) % ds.num_items })
        .collect();
    Setup { cfg, params, graphs, splits, triples }
}

fn modes() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn bench(c: &mut Criterion) {
    let s = setup();
    let ctx = Context { params: &s.params, cfg: &s.cfg, social: &s.graphs.social, hyper: &s.graphs.hyper };

    let mut group = c.benchmark_group("batch_loss_256");
    group.sample_size(20);
    for (name, exec) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| batch_loss(ctx, Task::Group, &s.triples, 1e-5, 7, true, exec).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("evaluate_test_split");
    group.sample_size(20);
    for (name, exec) in modes() {
        let opts = EvalOptions { exec, ..Default::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| evaluate(ctx, &s.splits.test, &s.splits.train, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
