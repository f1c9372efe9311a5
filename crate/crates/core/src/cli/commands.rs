use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::manifest::{RunConfig, RunManifest, MANIFEST_FILE};
use super::{Cli, Command, EvalArgs, RecommendArgs, SynthArgs, TrainArgs};
use crate::data::{self, IdMap, InteractionDataset, LoadedDataset, SynthConfig};
use crate::error::{Error, Result};
use crate::eval::{self, EvalOptions, Target};
use crate::graph::Graphs;
use crate::model::{Context, ItemScorer, ModelParams, Pass, Variant};
use crate::numeric::{read_checkpoint, write_checkpoint};
use crate::par::{self, Exec};
use crate::training::{self, Strategy};

pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const LOSS_FILE: &str = "loss.csv";
pub const REPORT_FILE: &str = "train_report.json";
pub const ID_MAP_FILE: &str = "id_map.json";
pub const EVAL_FILE: &str = "eval_report.json";
pub const POP_FILE: &str = "pop_report.json";

pub(super) fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let threads = cli.threads;
    let command = cli.command;
    let text = par::with_threads(threads, move || match command {
        Command::Train(a) => train(a, exec),
        Command::Eval(a) => evaluate(a, exec),
        Command::Recommend(a) => recommend(a),
        Command::Synth(a) => synth(a),
    })?;
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn canonical(path: &Path) -> Result<PathBuf> {
    fs::canonicalize(path).map_err(|e| Error::io(path, e))
}

fn load_data_dir(dir: &Path) -> Result<LoadedDataset> {
    if !dir.is_dir() {
        return Err(Error::io(dir, std::io::Error::new(std::io::ErrorKind::NotFound, "data directory not found")));
    }
    data::load_dataset(dir)
}

fn train(args: TrainArgs, exec: Exec) -> Result<String> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &args.variant {
        cfg.model.variant = Variant::from_short(v).ok_or_else(|| Error::Config(format!("unknown variant {v}")))?;
    }
    if let Some(s) = &args.strategy {
        cfg.train.strategy = Strategy::from_flag(s).ok_or_else(|| Error::Config(format!("unknown strategy {s}")))?;
    }
    if let Some(seed) = args.seed {
        cfg.train.seed = seed;
        cfg.split.seed = seed;
    }
    cfg.train.record_timing |= args.timing;
    if !cfg.model.variant.has_user_task() {
        match cfg.train.strategy {
            Strategy::UserOnly => {
                return Err(Error::Config("variant u has no user task; user-only training is impossible".into()))
            }
            Strategy::GroupOnly => {}
            _ => cfg.train.strategy = Strategy::GroupOnly,
        }
    }
    cfg.validate()?;
    cfg.train.exec = exec;

    let loaded = load_data_dir(&args.data)?;
    let ds = &loaded.dataset;
    let splits = data::split_interactions(ds, &cfg.split)?;
    let graphs = Graphs::build(&splits.train);
    let mut params = ModelParams::init(&cfg.model, ds.num_users, ds.num_items, cfg.train.seed)?;
    if let Some(path) = &args.features {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let (_, store) = read_checkpoint(&bytes)?;
        let id = store
            .find("node_features")
            .ok_or_else(|| Error::Checkpoint(format!("{} has no node_features tensor", path.display())))?;
        params.set_node_features(store.tensor(id).clone())?;
    }
    let mut report = training::train(&mut params, &cfg.model, &graphs, &splits.train, Some(&splits.val), &cfg.train)?;

    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let config = cfg.to_value()?;
    let blob = write_checkpoint(&params.store, cfg.train.seed, &cfg.hash()?, config.clone())?;
    write_file(&args.out.join(CHECKPOINT_FILE), blob)?;
    report.checkpoint = Some(CHECKPOINT_FILE.into());
    write_file(&args.out.join(LOSS_FILE), report.to_csv())?;
    write_file(&args.out.join(REPORT_FILE), report.to_json()? + "\n")?;
    loaded.ids.save(&args.out.join(ID_MAP_FILE))?;

    let mut manifest = RunManifest::new("train", config, cfg.train.seed)?;
    manifest.data_dir = Some(canonical(&args.data)?.display().to_string());
    manifest.dataset_fingerprint = Some(data::dataset_fingerprint(&args.data)?);
    for (k, v) in [("checkpoint", CHECKPOINT_FILE), ("loss_curve", LOSS_FILE), ("train_report", REPORT_FILE), ("id_map", ID_MAP_FILE)] {
        manifest.artifacts.insert(k.into(), v.into());
    }
    manifest.save(&args.out)?;

    let mut text = String::new();
    let last = report.epochs.last();
    let _ = writeln!(
        text,
        "trained {:?} / {:?}: {} epochs, {} steps, final loss_g={} loss_u={}",
        cfg.model.variant,
        report.strategy,
        report.epochs.len(),
        report.optimizer_steps,
        last.and_then(|e| e.loss_g).map_or("-".into(), |x| format!("{x:.6}")),
        last.and_then(|e| e.loss_u).map_or("-".into(), |x| format!("{x:.6}")),
    );
    let _ = writeln!(text, "wrote {}", args.out.join(CHECKPOINT_FILE).display());
    Ok(text)
}

/// A trained model restored from a checkpoint.
pub struct LoadedModel {
    pub config: RunConfig,
    pub seed: u64,
    pub params: ModelParams,
}

pub fn load_model(path: &Path) -> Result<LoadedModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (header, store) = read_checkpoint(&bytes)?;
    let config: RunConfig = serde_json::from_value(header.config)
        .map_err(|e| Error::Checkpoint(format!("{}: bad config block: {e}", path.display())))?;
    let params = ModelParams::from_store(&config.model, store)?;
    Ok(LoadedModel { config, seed: header.seed, params })
}

fn data_dir_for(checkpoint: &Path, data: Option<&PathBuf>) -> Result<PathBuf> {
    if let Some(d) = data {
        return Ok(d.clone());
    }
    let manifest = checkpoint.parent().unwrap_or(Path::new(".")).join(MANIFEST_FILE);
    RunManifest::load(&manifest)?
        .data_dir
        .map(PathBuf::from)
        .ok_or_else(|| Error::Config(format!("{} records no data_dir; pass --data", manifest.display())))
}

fn check_sizes(params: &ModelParams, ds: &InteractionDataset) -> Result<()> {
    if params.num_users() != ds.num_users || params.num_items() != ds.num_items {
        return Err(Error::Dimension(format!(
            "checkpoint has {} users / {} items, dataset has {} / {}",
            params.num_users(),
            params.num_items(),
            ds.num_users,
            ds.num_items
        )));
    }
    Ok(())
}

fn evaluate(args: EvalArgs, exec: Exec) -> Result<String> {
    let model = load_model(&args.checkpoint)?;
    let dir = data_dir_for(&args.checkpoint, args.data.as_ref())?;
    let loaded = load_data_dir(&dir)?;
    check_sizes(&model.params, &loaded.dataset)?;
    let splits = data::split_interactions(&loaded.dataset, &model.config.split)?;
    let graphs = Graphs::build(&splits.train);
    let test = match args.split.as_str() {
        "train" => &splits.train,
        "val" => &splits.val,
        _ => &splits.test,
    };
    let target: Target = args.target.parse()?;
    let opts = EvalOptions {
        cutoffs: args.topn.clone(),
        target,
        seed: args.eval_seed.unwrap_or(model.seed),
        exclude_train: args.exclude_train,
        strata: args.strata,
        exec,
    };
    if opts.cutoffs.is_empty() || opts.cutoffs.contains(&0) {
        return Err(Error::Config("--topn needs positive cutoffs".into()));
    }
    let ctx = Context { params: &model.params, cfg: &model.config.model, social: &graphs.social, hyper: &graphs.hyper };
    let report = eval::evaluate(ctx, test, &splits.train, &opts)?;
    let pop = if args.pop { Some(eval::evaluate_pop(test, &splits.train, &opts)?) } else { None };

    if let Some(out) = &args.out {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        write_file(&out.join(EVAL_FILE), report.to_json()? + "\n")?;
        let config = serde_json::json!({
            "checkpoint": canonical(&args.checkpoint)?.display().to_string(),
            "topn": opts.cutoffs,
            "target": args.target,
            "split": args.split,
            "strata": opts.strata,
            "exclude_train": opts.exclude_train,
            "eval_seed": opts.seed,
            "run": model.config.to_value()?,
        });
        let mut manifest = RunManifest::new("eval", config, opts.seed)?;
        manifest.data_dir = Some(canonical(&dir)?.display().to_string());
        manifest.dataset_fingerprint = Some(data::dataset_fingerprint(&dir)?);
        manifest.artifacts.insert("eval_report".into(), EVAL_FILE.into());
        if let Some(p) = &pop {
            write_file(&out.join(POP_FILE), p.to_json()? + "\n")?;
            manifest.artifacts.insert("pop_report".into(), POP_FILE.into());
        }
        manifest.save(out)?;
    }

    let mut text = String::new();
    if args.json {
        let value = match &pop {
            Some(p) => serde_json::json!({ "model": report, "pop": p }),
            None => serde_json::to_value(&report)?,
        };
        text = serde_json::to_string_pretty(&value)? + "\n";
    } else {
        text += &report.to_table();
        if let Some(p) = &pop {
            text += "\npopularity baseline\n";
            text += &p.to_table();
        }
    }
    Ok(text)
}

fn recommend(args: RecommendArgs) -> Result<String> {
    let model = load_model(&args.checkpoint)?;
    let dir = data_dir_for(&args.checkpoint, args.data.as_ref())?;
    let loaded = load_data_dir(&dir)?;
    check_sizes(&model.params, &loaded.dataset)?;
    let id_map_path = args.checkpoint.parent().unwrap_or(Path::new(".")).join(ID_MAP_FILE);
    let ids = if id_map_path.exists() {
        let ids = IdMap::load(&id_map_path)?;
        if ids != loaded.ids {
            return Err(Error::Integrity(format!("{} does not match dataset {}", id_map_path.display(), dir.display())));
        }
        ids
    } else {
        loaded.ids.clone()
    };
    let mut members = Vec::new();
    for raw in &args.members {
        let u = ids.user_index(raw).ok_or_else(|| Error::Lookup(format!("unknown member {raw:?}")))?;
        if !members.contains(&u) {
            members.push(u);
        }
    }
    let graphs = Graphs::build(&loaded.dataset);
    let seed = args.eval_seed.unwrap_or(model.seed);
    let (hyper, g) = match graphs.hyper.find_group(&members) {
        Some(g) => (graphs.hyper.clone(), g),
        None => graphs.hyper.with_transient_group(&members),
    };
    let cfg = &model.config.model;
    let ctx = Context { params: &model.params, cfg, social: &graphs.social, hyper: &hyper };
    let embedding = {
        let mut pass = Pass::new(ctx, seed, false);
        // A group sharing no member with any known group skips the hyperedge GNN.
        let v = if hyper.neighbors(g).is_empty() && graphs.hyper.find_group(&members).is_none() {
            pass.group_init(g)?
        } else {
            pass.group_embedding(g)?
        };
        pass.tape.value(v).to_vec()
    };
    let scores = ItemScorer::new(&model.params, &model.params.group_tower).score_all(&embedding)?;
    let mut text = String::new();
    for (rank, &v) in eval::rank_items(&scores).iter().take(args.topn).enumerate() {
        let _ = writeln!(text, "{}\t{}\t{:.6}", rank + 1, ids.items[v], scores[v]);
    }
    Ok(text)
}

fn synth(args: SynthArgs) -> Result<String> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str::<SynthConfig>(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => SynthConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let ds = data::generate_synthetic(&cfg)?;
    let ids = IdMap {
        users: (0..ds.num_users).map(|i| format!("u{i}")).collect(),
        items: (0..ds.num_items).map(|i| format!("i{i}")).collect(),
        groups: (0..ds.num_groups).map(|i| format!("g{i}")).collect(),
    };
    data::write_dataset(&args.out, &ds, &ids)?;
    let mut manifest = RunManifest::new("synth", serde_json::to_value(&cfg)?, cfg.seed)?;
    manifest.dataset_fingerprint = Some(data::dataset_fingerprint(&args.out)?);
    for name in data::DATA_FILES {
        manifest.artifacts.insert(name.trim_end_matches(".tsv").into(), name.into());
    }
    manifest.save(&args.out)?;
    Ok(format!(
        "wrote {} users, {} items, {} groups ({} social edges, {} user-item, {} group-item) to {}\n",
        ds.num_users,
        ds.num_items,
        ds.num_groups,
        ds.social_edges.len(),
        ds.user_item.len(),
        ds.group_item.len(),
        args.out.display()
    ))
}

