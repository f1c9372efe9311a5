//! Randomized invariant checks shared by the property tests and the
//! acceptance suite. Each check runs `cases` random instances.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use hypergroup::data::{generate_synthetic, load_dataset, split_interactions, write_dataset, IdMap, InteractionDataset, SplitSpec, SynthConfig};
use hypergroup::eval::{case_ndcg, hit_ratio, ndcg, rank_of, RankedCase};
use hypergroup::graph::{sample_neighbors, Graphs};
use hypergroup::model::{self, ModelConfig, ModelParams};
use hypergroup::numeric::{ops, ParamStore, Tape, Tensor};
use hypergroup::par::Exec;
use hypergroup::rng::stream;
use hypergroup::training::{batch_loss, build_triples, sample_negative, Task, Triple};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::seq::SliceRandom;
use rand::Rng;

use super::ctx;

pub type Check = fn(u32) -> Result<(), String>;

/// Every invariant with its name.
pub const ALL: &[(&str, Check)] = &[
    ("split partition", split_partition),
    ("synthetic datasets are valid", synthetic_valid),
    ("load is idempotent", load_idempotent),
    ("adjacency symmetry and common members", adjacency_symmetric),
    ("degree sum", degree_sum),
    ("sample length", sample_length),
    ("op gradients match finite differences", op_gradients),
    ("ops stay finite", ops_finite),
    ("concat/mean/weighted_sum exact", ops_exact),
    ("unit-norm embeddings", unit_norm),
    ("member order invariance", member_order),
    ("reproducible scores", reproducible_scores),
    ("shared item embeddings", shared_embeddings),
    ("negative-sample disjointness", negatives_disjoint),
    ("regularization monotonicity", reg_monotone),
    ("HR monotone in N", hr_monotone),
    ("per-case NDCG non-increasing in rank", ndcg_monotone),
    ("rank matches brute force", rank_brute_force),
];

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new(config).run(&strategy, test).map_err(|e| e.to_string())
}

/// Small random dataset in which every user, item and group appears in
/// at least one interaction.
pub fn random_dataset(seed: u64, users: usize, items: usize, groups: usize) -> InteractionDataset {
    let mut rng = stream(seed, &[]);
    let mut social_edges = Vec::new();
    for a in 0..users {
        for b in a + 1..users {
            if rng.gen_bool(0.2) {
                social_edges.push((a, b));
            }
        }
    }
    let mut user_item = BTreeSet::new();
    for u in 0..users {
        for _ in 0..rng.gen_range(1..=3) {
            user_item.insert((u, rng.gen_range(0..items)));
        }
    }
    for v in 0..items {
        user_item.insert((v % users, v));
    }
    let mut group_item = BTreeSet::new();
    for g in 0..groups {
        for _ in 0..rng.gen_range(1..=3) {
            group_item.insert((g, rng.gen_range(0..items)));
        }
    }
    let all: Vec<usize> = (0..users).collect();
    let memberships = (0..groups)
        .map(|_| {
            let size = rng.gen_range(1..=users.min(5));
            all.choose_multiple(&mut rng, size).copied().collect()
        })
        .collect();
    let ds = InteractionDataset {
        num_users: users,
        num_items: items,
        num_groups: groups,
        social_edges,
        user_item: user_item.into_iter().collect(),
        group_item: group_item.into_iter().collect(),
        memberships,
    };
    ds.validate().unwrap();
    ds
}

fn arb_dataset(max_users: usize, max_items: usize, max_groups: usize) -> impl Strategy<Value = InteractionDataset> {
    (any::<u64>(), 1..=max_users, 2..=max_items, 1..=max_groups).prop_map(|(s, u, i, g)| random_dataset(s, u, i, g))
}

fn split_partition(cases: u32) -> Result<(), String> {
    let strategy = (arb_dataset(12, 10, 12), 0.05..0.9f64, 0.05..0.95f64, any::<u64>());
    run(cases, strategy, |(ds, train, frac, seed)| {
        let val = (1.0 - train) * frac;
        let spec = SplitSpec { train_ratio: train, val_ratio: val, test_ratio: 1.0 - train - val, seed };
        let s = split_interactions(&ds, &spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for (name, get) in [
            ("group_item", (|d: &InteractionDataset| d.group_item.clone()) as fn(&InteractionDataset) -> Vec<(usize, usize)>),
            ("user_item", |d: &InteractionDataset| d.user_item.clone()),
        ] {
            let mut union = [get(&s.train), get(&s.val), get(&s.test)].concat();
            union.sort();
            let mut input = get(&ds);
            input.sort();
            prop_assert_eq!(&union, &input, "{} union", name);
            let parts: Vec<HashSet<_>> = [&s.train, &s.val, &s.test].iter().map(|d| get(d).into_iter().collect()).collect();
            prop_assert!(parts[0].is_disjoint(&parts[1]) && parts[0].is_disjoint(&parts[2]) && parts[1].is_disjoint(&parts[2]));
        }
        for part in [&s.train, &s.val, &s.test] {
            prop_assert_eq!(&part.memberships, &ds.memberships);
            prop_assert_eq!(&part.social_edges, &ds.social_edges);
        }
        Ok(())
    })
}

fn synthetic_valid(cases: u32) -> Result<(), String> {
    let strategy = (1usize..40, 2usize..30, 1usize..20, 1.0..4.0f64, 1usize..5, 0.0..=1.0f64, 0.0..=1.0f64, any::<u64>());
    run(cases, strategy, |(users, items, groups, size, topics, overlap, purity, seed)| {
        let cfg = SynthConfig {
            num_users: users,
            num_items: items,
            num_groups: groups,
            avg_group_size: size.min(users as f64),
            num_latent_topics: topics,
            overlap_strength: overlap,
            topic_purity: purity,
            interactions_per_user: 3.0,
            interactions_per_group: 2.0,
            seed,
            ..SynthConfig::default()
        };
        let ds = generate_synthetic(&cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(ds.validate().is_ok());
        prop_assert_eq!((ds.num_users, ds.num_items, ds.num_groups), (users, items, groups));
        Ok(())
    })
}

fn load_idempotent(cases: u32) -> Result<(), String> {
    run(cases, arb_dataset(10, 8, 8), |ds| {
        let dir = tempfile::tempdir().unwrap();
        let ids = IdMap {
            users: (0..ds.num_users).map(|i| format!("user{i}")).collect(),
            items: (0..ds.num_items).map(|i| format!("item{i}")).collect(),
            groups: (0..ds.num_groups).map(|i| format!("group{i}")).collect(),
        };
        write_dataset(dir.path(), &ds, &ids).unwrap();
        let a = load_dataset(dir.path()).unwrap();
        let b = load_dataset(dir.path()).unwrap();
        prop_assert_eq!(&a, &b);
        // same relations in raw-ID space, also after writing what was loaded
        prop_assert_eq!(raw_view(&a.dataset, &a.ids), raw_view(&ds, &ids));
        let dir2 = tempfile::tempdir().unwrap();
        write_dataset(dir2.path(), &a.dataset, &a.ids).unwrap();
        let c = load_dataset(dir2.path()).unwrap();
        prop_assert_eq!(raw_view(&c.dataset, &c.ids), raw_view(&ds, &ids));
        Ok(())
    })
}

type RawPairs = BTreeSet<(String, String)>;

/// Every relation as a set of raw-ID pairs; social pairs ordered by string.
pub fn raw_view(ds: &InteractionDataset, ids: &IdMap) -> [RawPairs; 4] {
    let pairs = |v: &[(usize, usize)], l: &[String], r: &[String]| -> RawPairs {
        v.iter().map(|&(a, b)| (l[a].clone(), r[b].clone())).collect()
    };
    let social = ds
        .social_edges
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (ids.users[a].clone(), ids.users[b].clone());
            if x < y { (x, y) } else { (y, x) }
        })
        .collect();
    let members = ds
        .memberships
        .iter()
        .enumerate()
        .flat_map(|(g, m)| m.iter().map(move |&u| (ids.groups[g].clone(), ids.users[u].clone())))
        .collect();
    [
        social,
        pairs(&ds.user_item, &ids.users, &ids.items),
        pairs(&ds.group_item, &ids.groups, &ids.items),
        members,
    ]
}

/// Brute-force pairwise intersections: `(g, g') -> common members`.
pub fn brute_force_adjacency(memberships: &[Vec<usize>]) -> BTreeMap<(usize, usize), Vec<usize>> {
    let mut out = BTreeMap::new();
    for g in 0..memberships.len() {
        for h in 0..memberships.len() {
            if g == h {
                continue;
            }
            let mut common: Vec<usize> = memberships[g].iter().filter(|u| memberships[h].contains(u)).copied().collect();
            common.sort();
            if !common.is_empty() {
                out.insert((g, h), common);
            }
        }
    }
    out
}

/// Adjacency as built by the library, in the same shape as the oracle.
pub fn built_adjacency(graphs: &Graphs) -> BTreeMap<(usize, usize), Vec<usize>> {
    let mut out = BTreeMap::new();
    for g in 0..graphs.hyper.num_groups() {
        for n in graphs.hyper.neighbors(g) {
            assert_eq!(n.weight, n.common.len());
            out.insert((g, n.group), n.common.clone());
        }
    }
    out
}

fn adjacency_symmetric(cases: u32) -> Result<(), String> {
    run(cases, arb_dataset(15, 4, 20), |ds| {
        let graphs = Graphs::build(&ds);
        let adj = built_adjacency(&graphs);
        for ((g, h), common) in &adj {
            prop_assert_eq!(adj.get(&(*h, *g)), Some(common));
            prop_assert!(common.iter().all(|u| ds.memberships[*g].contains(u) && ds.memberships[*h].contains(u)));
        }
        prop_assert_eq!(adj, brute_force_adjacency(&ds.memberships));
        Ok(())
    })
}

fn degree_sum(cases: u32) -> Result<(), String> {
    run(cases, arb_dataset(15, 4, 20), |ds| {
        let graphs = Graphs::build(&ds);
        let degrees: usize = graphs.hyper.vertex_degree.iter().sum();
        let sizes: usize = ds.memberships.iter().map(Vec::len).sum();
        prop_assert_eq!(degrees, sizes);
        Ok(())
    })
}

fn sample_length(cases: u32) -> Result<(), String> {
    let strategy = (proptest::collection::vec(0usize..50, 0..12), 1usize..8, any::<u64>());
    run(cases, strategy, |(pool, s, seed)| {
        let out = sample_neighbors(&pool, 99, s, &mut stream(seed, &[]));
        prop_assert_eq!(out.len(), s);
        if pool.is_empty() {
            prop_assert!(out.iter().all(|&x| x == 99));
        } else {
            prop_assert!(out.iter().all(|x| pool.contains(x)));
        }
        Ok(())
    })
}

fn vec_in(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0..1.0f64, len)
}

/// Which op a gradient case exercises.
#[derive(Debug, Clone, Copy)]
enum OpKind {
    Linear,
    Concat,
    Mean,
    WeightedSum,
    Relu,
    Sigmoid,
    Normalize,
    Dropout,
    Bpr,
}

const OPS: [OpKind; 9] = [
    OpKind::Linear,
    OpKind::Concat,
    OpKind::Mean,
    OpKind::WeightedSum,
    OpKind::Relu,
    OpKind::Sigmoid,
    OpKind::Normalize,
    OpKind::Dropout,
    OpKind::Bpr,
];

// scalar objective r . op(a, b, w) with every input a trainable tensor
fn op_objective(store: &ParamStore, kind: OpKind, r: &[f64], coeffs: (f64, f64)) -> (f64, hypergroup::numeric::Gradients) {
    let ids: Vec<_> = store.iter().map(|(id, _)| id).collect();
    let mut tape = Tape::new(store);
    let a = tape.param(ids[0]);
    let b = tape.param(ids[1]);
    let w = tape.param(ids[2]);
    let y = match kind {
        OpKind::Linear => tape.linear(w, Some(b), a, 3).unwrap(),
        OpKind::Concat => tape.concat(a, b),
        OpKind::Mean => tape.mean(&[a, b, a]).unwrap(),
        OpKind::WeightedSum => tape.weighted_sum(&[(coeffs.0, a), (coeffs.1, b)]).unwrap(),
        OpKind::Relu => tape.relu(a),
        OpKind::Sigmoid => tape.sigmoid(a),
        OpKind::Normalize => tape.l2_normalize(a),
        OpKind::Dropout => tape.dropout(a, 0.5, &mut stream(4, &[]), true),
        OpKind::Bpr => {
            let pa = tape.linear(w, None, a, 1).unwrap();
            let pb = tape.linear(w, None, b, 1).unwrap();
            tape.bpr_loss(pa, pb)
        }
    };
    let rv = tape.constant(r[..tape.value(y).len()].to_vec());
    let loss = tape.linear(rv, None, y, 1).unwrap();
    let value = tape.scalar(loss);
    (value, tape.backward(loss).unwrap())
}

fn op_gradients(cases: u32) -> Result<(), String> {
    // a: 3, b: 3, w: 3x3 (or 1x3 for bpr); r covers the longest output
    let strategy = (0..OPS.len(), vec_in(3), vec_in(3), vec_in(9), vec_in(6), -1.0..1.0f64, -1.0..1.0f64);
    run(cases, strategy, |(k, a, b, w, r, c0, c1)| {
        let kind = OPS[k];
        let mut store = ParamStore::new();
        store.add("a", Tensor::new(vec![3], a).unwrap(), true, false);
        store.add("b", Tensor::new(vec![3], b).unwrap(), true, false);
        let w = if matches!(kind, OpKind::Bpr) { Tensor::new(vec![1, 3], w[..3].to_vec()).unwrap() } else { Tensor::new(vec![3, 3], w).unwrap() };
        store.add("w", w, true, false);
        let (_, grads) = op_objective(&store, kind, &r, (c0, c1));
        let h = 1e-5;
        let ids: Vec<_> = store.iter().map(|(id, _)| id).collect();
        for id in ids {
            let analytic = grads.dense(id, &store);
            for i in 0..store.tensor(id).len() {
                let mut plus = store.clone();
                plus.tensor_mut(id).values_mut()[i] += h;
                let mut minus = store.clone();
                minus.tensor_mut(id).values_mut()[i] -= h;
                let numeric = (op_objective(&plus, kind, &r, (c0, c1)).0 - op_objective(&minus, kind, &r, (c0, c1)).0) / (2.0 * h);
                let rel = (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-6);
                prop_assert!(rel < 1e-4, "{:?} input {:?}[{}]: analytic {} numeric {}", kind, id, i, analytic[i], numeric);
            }
        }
        Ok(())
    })
}

fn ops_finite(cases: u32) -> Result<(), String> {
    let big = || proptest::collection::vec(-1e6..1e6f64, 4);
    run(cases, (big(), big(), -1e6..1e6f64), |(x, y, s)| {
        let outs = [
            ops::concat(&x, &y),
            ops::mean_vectors(&[&x, &y]).unwrap(),
            ops::weighted_sum(&[(s, &x), (1.0, &y)]).unwrap(),
            ops::relu(&x),
            ops::sigmoid(&x),
            ops::l2_normalize(&x),
            ops::l2_normalize(&[0.0; 4]),
            vec![ops::bpr_pair_loss(x[0], y[0]), ops::sigmoid_scalar(s)],
            {
                let (a, b) = ops::bpr_pair_grad(x[0], y[0]);
                vec![a, b]
            },
        ];
        for out in outs {
            prop_assert!(out.iter().all(|v| v.is_finite()), "{:?}", out);
        }
        Ok(())
    })
}

fn ops_exact(cases: u32) -> Result<(), String> {
    run(cases, (vec_in(5), vec_in(5), vec_in(5), -2.0..2.0f64, -2.0..2.0f64), |(x, y, z, a, b)| {
        let c = ops::concat(&x, &y);
        prop_assert_eq!(c.len(), 10);
        for i in 0..5 {
            prop_assert_eq!(c[i], x[i]);
            prop_assert_eq!(c[5 + i], y[i]);
        }
        let m = ops::mean_vectors(&[&x, &y, &z]).unwrap();
        let ws = ops::weighted_sum(&[(a, &x), (b, &y)]).unwrap();
        for i in 0..5 {
            let mut naive = 0.0;
            for v in [&x, &y, &z] {
                naive += v[i];
            }
            prop_assert!((m[i] - naive / 3.0).abs() <= 1e-12);
            prop_assert!((ws[i] - (a * x[i] + b * y[i])).abs() <= 1e-12);
        }
        Ok(())
    })
}

fn small_model(ds: &InteractionDataset, seed: u64, samples: usize) -> (ModelConfig, ModelParams, Graphs) {
    let cfg = ModelConfig { dim: 4, ipm_samples: samples, hrl_samples: samples, zero_init_output: false, ..Default::default() };
    let params = ModelParams::init(&cfg, ds.num_users, ds.num_items, seed).unwrap();
    (cfg, params, Graphs::build(ds))
}

fn is_unit_or_zero(v: &[f64]) -> bool {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    n == 0.0 || (n - 1.0).abs() < 1e-12
}

fn unit_norm(cases: u32) -> Result<(), String> {
    run(cases, (arb_dataset(8, 5, 8), any::<u64>(), 1usize..5), |(ds, seed, s)| {
        let (cfg, params, graphs) = small_model(&ds, seed, s);
        let c = ctx(&params, &cfg, &graphs);
        for u in 0..ds.num_users {
            prop_assert!(is_unit_or_zero(&model::ipm_embed(c, seed, u).unwrap()));
        }
        for g in 0..ds.num_groups {
            prop_assert!(is_unit_or_zero(&model::hrl_embed(c, seed, g).unwrap()));
        }
        Ok(())
    })
}

fn member_order(cases: u32) -> Result<(), String> {
    run(cases, (arb_dataset(8, 5, 6), any::<u64>()), |(ds, seed)| {
        let (cfg, params, graphs) = small_model(&ds, seed, 3);
        let mut shuffled = ds.clone();
        let mut rng = stream(seed, &[1]);
        for m in &mut shuffled.memberships {
            m.shuffle(&mut rng);
        }
        let graphs2 = Graphs::build(&shuffled);
        for g in 0..ds.num_groups {
            let a = model::group_init(ctx(&params, &cfg, &graphs), seed, g).unwrap();
            let b = model::group_init(ctx(&params, &cfg, &graphs2), seed, g).unwrap();
            prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
        }
        Ok(())
    })
}

fn reproducible_scores(cases: u32) -> Result<(), String> {
    run(cases, (arb_dataset(8, 5, 6), any::<u64>()), |(ds, seed)| {
        let (cfg, params, graphs) = small_model(&ds, seed, 2);
        let c = ctx(&params, &cfg, &graphs);
        for g in 0..ds.num_groups {
            let a = model::score_group(c, seed, g, 0).unwrap();
            prop_assert_eq!(a.to_bits(), model::score_group(c, seed, g, 0).unwrap().to_bits());
        }
        let a = model::score_user(c, seed, 0, 1).unwrap();
        prop_assert_eq!(a.to_bits(), model::score_user(c, seed, 0, 1).unwrap().to_bits());
        Ok(())
    })
}

fn shared_embeddings(cases: u32) -> Result<(), String> {
    run(cases, (arb_dataset(6, 5, 4), any::<u64>()), |(ds, seed)| {
        let (cfg, params, graphs) = small_model(&ds, seed, 2);
        let triple = [Triple { entity: 0, pos: 0, neg: 1 }];
        let c = ctx(&params, &cfg, &graphs);
        let g = batch_loss(c, Task::Group, &triple, 0.0, seed, false, Exec::Sequential).unwrap();
        let u = batch_loss(c, Task::User, &triple, 0.0, seed, false, Exec::Sequential).unwrap();
        for id in [params.item_embeddings, params.user_latent] {
            prop_assert!(g.grads.get(id).is_some(), "group task misses {:?}", id);
            prop_assert!(u.grads.get(id).is_some(), "user task misses {:?}", id);
        }
        Ok(())
    })
}

fn negatives_disjoint(cases: u32) -> Result<(), String> {
    let strategy = (2usize..30, proptest::collection::vec(0usize..30, 0..20), 1usize..5, any::<u64>());
    run(cases, strategy, |(n_items, pos, n_x, seed)| {
        let positives: HashSet<usize> = pos.into_iter().filter(|&v| v < n_items).collect();
        prop_assume!(positives.len() < n_items);
        let mut rng = stream(seed, &[]);
        let negs = sample_negative(&positives, n_items, n_x, &mut rng).unwrap();
        prop_assert_eq!(negs.len(), n_x);
        prop_assert!(negs.iter().all(|v| !positives.contains(v) && *v < n_items));
        let pairs: Vec<(usize, usize)> = positives.iter().map(|&v| (0, v)).collect();
        let triples = build_triples(&pairs, std::slice::from_ref(&positives), n_items, n_x, None, &mut rng).unwrap();
        prop_assert_eq!(triples.len(), pairs.len() * n_x);
        prop_assert!(triples.iter().all(|t| !positives.contains(&t.neg) && positives.contains(&t.pos)));
        Ok(())
    })
}

fn reg_monotone(cases: u32) -> Result<(), String> {
    run(cases, (arb_dataset(6, 5, 4), any::<u64>(), 0.0..1.0f64, 0.0..1.0f64), |(ds, seed, l1, l2)| {
        let (cfg, params, graphs) = small_model(&ds, seed, 2);
        let triples: Vec<Triple> = ds
            .group_item
            .iter()
            .map(|&(g, v)| Triple { entity: g, pos: v, neg: (v + 1) % ds.num_items })
            .collect();
        let c = ctx(&params, &cfg, &graphs);
        let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        let a = batch_loss(c, Task::Group, &triples, lo, seed, true, Exec::Sequential).unwrap();
        let b = batch_loss(c, Task::Group, &triples, hi, seed, true, Exec::Sequential).unwrap();
        prop_assert!(a.loss <= b.loss);
        Ok(())
    })
}

fn arb_cases() -> impl Strategy<Value = (Vec<RankedCase>, usize)> {
    (1usize..60).prop_flat_map(|n_items| {
        (proptest::collection::vec((0usize..10, 1..=n_items), 1..40), Just(n_items))
            .prop_map(|(v, n)| (v.into_iter().map(|(e, rank)| RankedCase { entity: e, item: 0, rank }).collect(), n))
    })
}

fn hr_monotone(cases: u32) -> Result<(), String> {
    run(cases, arb_cases(), |(cases, n_items)| {
        let mut prev = 0.0;
        for n in 1..=n_items {
            let hr = hit_ratio(&cases, n).unwrap();
            prop_assert!(hr >= prev);
            prev = hr;
        }
        prop_assert_eq!(hit_ratio(&cases, n_items).unwrap(), 1.0);
        prop_assert!(ndcg(&cases, n_items).unwrap() <= 1.0);
        Ok(())
    })
}

fn ndcg_monotone(cases: u32) -> Result<(), String> {
    run(cases, (1usize..500, 1usize..50), |(rank, n)| {
        prop_assert!(case_ndcg(rank + 1, n) <= case_ndcg(rank, n));
        prop_assert!(case_ndcg(rank, n) <= 1.0);
        Ok(())
    })
}

fn rank_brute_force(cases: u32) -> Result<(), String> {
    // coarse values to force ties
    let strategy = (proptest::collection::vec(-3i32..3, 1..30), any::<prop::sample::Index>(), any::<u64>());
    run(cases, strategy, |(raw, gt, seed)| {
        let scores: Vec<f64> = raw.iter().map(|&x| x as f64 * 0.5).collect();
        let gt = gt.index(scores.len());
        let mut rng = stream(seed, &[]);
        let excluded: HashSet<usize> = (0..scores.len()).filter(|&j| j != gt && rng.gen_bool(0.3)).collect();
        let mut order: Vec<usize> = (0..scores.len()).filter(|j| !excluded.contains(j)).collect();
        // insertion sort: higher score first, then lower index
        for i in 1..order.len() {
            let mut j = i;
            while j > 0 && (scores[order[j]] > scores[order[j - 1]] || (scores[order[j]] == scores[order[j - 1]] && order[j] < order[j - 1])) {
                order.swap(j, j - 1);
                j -= 1;
            }
        }
        let expected = order.iter().position(|&j| j == gt).unwrap() + 1;
        prop_assert_eq!(rank_of(&scores, gt, Some(&excluded)), expected);
        Ok(())
    })
}
