//! `sgnn` — build proximity graphs, search them, classify, and benchmark.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use sgnn::classifier::{evaluate, evaluate_exact, ClassifierConfig};
use sgnn::data::{self, Dataset};
use sgnn::field::ScalarField;
use sgnn::graph::{build_knn_graph, Metric, ProximityGraph};
use sgnn::objective::QueryObjective;
use sgnn::optimizer::{exhaustive_search, sgnn_search, AnnealParams};
use sgnn::seeds;
use sgnn::smoothing::{exact_diffusion, exact_smooth, is_hcf, softmin_smooth_step};
use sgnn_cli::{bench, BenchConfig};

#[derive(Parser)]
#[command(name = "sgnn", version, about = "Smoothed graph-based nearest neighbor search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a k-NN proximity graph over a dataset and save it.
    BuildGraph(BuildGraphArgs),
    /// Approximate nearest-neighbor search for one or more queries.
    Search(SearchArgs),
    /// Evaluate classifiers over a test set and write reports.
    ClassifyEval(ClassifyEvalArgs),
    /// Apply a smoothing operator to a field file.
    SmoothDemo(SmoothDemoArgs),
    /// Run a benchmark grid from a config file.
    Bench(BenchArgs),
    /// Generate a synthetic Gaussian-cluster dataset.
    GenData(GenDataArgs),
}

/// Dataset input shared by several commands: CSV or an IDX image/label pair.
#[derive(Args)]
struct DataInput {
    /// CSV dataset path.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Label column name in CSV files.
    #[arg(long, default_value = "label")]
    label_column: String,
    /// IDX image file (pair with --labels).
    #[arg(long, requires = "labels")]
    images: Option<PathBuf>,
    /// IDX label file (pair with --images).
    #[arg(long, requires = "images")]
    labels: Option<PathBuf>,
}

impl DataInput {
    fn load(&self) -> Result<Dataset> {
        match (&self.data, &self.images) {
            (Some(csv), None) => data::load_csv(csv, Some(&self.label_column))
                .with_context(|| format!("loading {}", csv.display())),
            (None, Some(images)) => {
                let labels = self.labels.as_ref().expect("clap enforces the pair");
                data::load_idx(images, labels)
                    .with_context(|| format!("loading {}", images.display()))
            }
            (Some(_), Some(_)) => bail!("give either --data or --images/--labels, not both"),
            (None, None) => bail!("no dataset given: use --data or --images/--labels"),
        }
    }

    fn describe(&self) -> String {
        match (&self.data, &self.images) {
            (Some(csv), _) => csv.display().to_string(),
            (_, Some(images)) => images.display().to_string(),
            _ => String::new(),
        }
    }
}

#[derive(Args)]
struct BuildGraphArgs {
    #[command(flatten)]
    input: DataInput,
    /// Out-degree of the graph (each node links to its N nearest).
    #[arg(long = "graph-n")]
    graph_n: usize,
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    /// Keep only this fraction of rows (seeded subsample).
    #[arg(long)]
    subset: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output graph file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    /// Graph file built over --data.
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    input: DataInput,
    /// Use this row of the dataset as the query.
    #[arg(long, conflicts_with = "query_file")]
    query_row: Option<usize>,
    /// CSV of query vectors (feature columns only).
    #[arg(long)]
    query_file: Option<PathBuf>,
    /// Random restarts.
    #[arg(short = 'I', long, default_value_t = 20)]
    restarts: usize,
    /// Annealing steps per restart; 0 = ceil(ln n).
    #[arg(short = 'J', long, default_value_t = 0)]
    steps: usize,
    /// Random-walk length.
    #[arg(short = 'T', long, default_value_t = 1)]
    walk: usize,
    /// Candidates to return.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reuse the incumbent's sampled value until it moves.
    #[arg(long)]
    reuse_incumbent: bool,
    /// Also run the exhaustive oracle and report recall.
    #[arg(long)]
    oracle: bool,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Args)]
struct ClassifyEvalArgs {
    /// Training CSV.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Test CSV.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Training IDX images (pair with --train-labels).
    #[arg(long, requires = "train_labels")]
    train_images: Option<PathBuf>,
    #[arg(long, requires = "train_images")]
    train_labels: Option<PathBuf>,
    /// Test IDX images (pair with --test-labels).
    #[arg(long, requires = "test_labels")]
    test_images: Option<PathBuf>,
    #[arg(long, requires = "test_images")]
    test_labels: Option<PathBuf>,
    /// Existing graph file; when absent (or with --build) the graph is built.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Build the graph even if --graph was given.
    #[arg(long)]
    build: bool,
    #[arg(long = "graph-n", default_value_t = 30)]
    graph_n: usize,
    #[arg(short = 'I', long, default_value_t = 20)]
    restarts: usize,
    /// Annealing steps per restart; 0 = ceil(ln n_train).
    #[arg(short = 'J', long, default_value_t = 0)]
    steps: usize,
    #[arg(short = 'T', long, default_value_t = 1)]
    walk: usize,
    /// Neighbors in the vote.
    #[arg(long, default_value_t = 50)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Subsample this fraction of the training rows first.
    #[arg(long)]
    subset: Option<f64>,
    /// Distance-weighted voting.
    #[arg(long)]
    weighted: bool,
    #[arg(long, value_enum, default_value_t = EvalMethod::Both)]
    method: EvalMethod,
    /// Output prefix: writes <out>.<method>.json and appends to <out>.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SmoothDemoArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Input field CSV (header `value`).
    #[arg(long)]
    field: PathBuf,
    /// Smoothing increment; defaults to 1e-6 times the field's value range.
    #[arg(long)]
    c: Option<f64>,
    /// Rounds.
    #[arg(long, default_value_t = 1)]
    t: usize,
    #[arg(long, value_enum)]
    mode: SmoothMode,
    /// Softmin sharpness (softmin mode).
    #[arg(long, default_value_t = 100.0)]
    lambda: f64,
    /// Print whether the field is hill-climbing friendly before and after.
    #[arg(long)]
    check_hcf: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Grid config file (flat key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long, default_value_t = 2)]
    clusters: usize,
    /// Points per cluster.
    #[arg(long, default_value_t = 500)]
    per: usize,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    /// Distance between adjacent cluster means.
    #[arg(long, default_value_t = 10.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV (a .json sidecar records the parameters).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum EvalMethod {
    Exact,
    Sgnn,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmoothMode {
    Exact,
    Diffusion,
    Softmin,
}

fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_build_graph(args: &BuildGraphArgs) -> Result<()> {
    let mut dataset = args.input.load()?;
    if let Some(fraction) = args.subset {
        dataset = data::subset(&dataset, fraction, args.seed)?;
    }
    let started = Instant::now();
    let graph = build_knn_graph(&dataset, args.graph_n, args.metric)?;
    let build_seconds = started.elapsed().as_secs_f64();
    if args.graph_n >= dataset.len() {
        eprintln!(
            "warning: graph-n {} >= dataset size {}; graph is saturated",
            args.graph_n,
            dataset.len()
        );
    }
    graph.save(&args.out)?;
    let meta = json!({
        "command": "build-graph",
        "data": args.input.describe(),
        "n": graph.node_count(),
        "dim": dataset.dim(),
        "graph_n": args.graph_n,
        "metric": args.metric.to_string(),
        "subset": args.subset,
        "seed": args.seed,
    });
    fs::write(
        args.out.with_extension("meta.json"),
        format!("{}\n", serde_json::to_string_pretty(&meta)?),
    )?;
    println!(
        "built graph: n={} degree={} in {:.2}s -> {}",
        graph.node_count(),
        args.graph_n.min(graph.node_count() - 1),
        build_seconds,
        args.out.display()
    );
    Ok(())
}

fn cmd_search(args: &SearchArgs) -> Result<()> {
    let dataset = args.input.load()?;
    let graph = ProximityGraph::load(&args.graph)
        .with_context(|| format!("loading {}", args.graph.display()))?;
    if graph.node_count() != dataset.len() {
        bail!(
            "graph has {} nodes but dataset has {} rows",
            graph.node_count(),
            dataset.len()
        );
    }
    let queries: Vec<Vec<f64>> = match (args.query_row, &args.query_file) {
        (Some(row), None) => {
            if row >= dataset.len() {
                bail!(
                    "query row {row} out of range (dataset has {} rows)",
                    dataset.len()
                );
            }
            vec![dataset.row(row).to_vec()]
        }
        (None, Some(path)) => {
            let qs = data::load_csv(path, None)
                .with_context(|| format!("loading {}", path.display()))?;
            if qs.dim() != dataset.dim() {
                bail!(
                    "queries have dimension {} but dataset has {}",
                    qs.dim(),
                    dataset.dim()
                );
            }
            (0..qs.len()).map(|i| qs.row(i).to_vec()).collect()
        }
        (None, None) => bail!("give --query-row or --query-file"),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };

    let steps = if args.steps == 0 {
        AnnealParams::auto_steps(dataset.len())
    } else {
        args.steps
    };
    let mut results = Vec::new();
    let mut recall1_sum = 0.0;
    for (qidx, query) in queries.iter().enumerate() {
        let mut params = AnnealParams::new(
            args.restarts,
            steps,
            args.walk,
            args.k,
            seeds::derive(args.seed, qidx as u64),
        );
        params.reuse_incumbent = args.reuse_incumbent;
        let mut objective = QueryObjective::new(&dataset, query, Metric::Euclidean)?;
        let result = sgnn_search(&graph, &mut objective, &params)?;
        let mut entry = json!({
            "query": qidx,
            "candidates": result.candidates,
            "evaluations": result.evaluations,
            "wall_time_s": result.wall_time,
            "short": result.short,
        });
        if args.oracle {
            let mut oracle_objective = QueryObjective::new(&dataset, query, Metric::Euclidean)?;
            let oracle = exhaustive_search(&mut oracle_objective, args.k)?;
            let best_match = result.best().map(|b| b.0) == oracle.best().map(|b| b.0);
            let oracle_nodes: Vec<usize> = oracle.candidates.iter().map(|c| c.0).collect();
            let overlap = result
                .candidates
                .iter()
                .filter(|c| oracle_nodes.contains(&c.0))
                .count();
            let recall1 = if best_match { 1.0 } else { 0.0 };
            recall1_sum += recall1;
            entry["oracle"] = json!({
                "recall_at_1": recall1,
                "recall_at_k": overlap as f64 / args.k as f64,
                "best": oracle.best(),
            });
        }
        results.push(entry);
    }

    let config = json!({
        "command": "search",
        "graph": args.graph.display().to_string(),
        "data": args.input.describe(),
        "restarts": args.restarts,
        "steps": steps,
        "walk": args.walk,
        "k": args.k,
        "seed": args.seed,
        "reuse_incumbent": args.reuse_incumbent,
        "oracle": args.oracle,
    });
    let content = match args.format {
        OutputFormat::Json => {
            let mut doc = json!({ "config": config, "results": results });
            if args.oracle {
                doc["recall_at_1"] = json!(recall1_sum / results.len() as f64);
            }
            format!("{}\n", serde_json::to_string_pretty(&doc)?)
        }
        OutputFormat::Csv => {
            let mut s =
                String::from("query,best_node,best_value,evaluations,wall_time_s,short,recall_at_1\n");
            for r in &results {
                let best = &r["candidates"][0];
                let recall = r
                    .get("oracle")
                    .map(|o| o["recall_at_1"].to_string())
                    .unwrap_or_default();
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r["query"],
                    best[0],
                    best[1],
                    r["evaluations"],
                    r["wall_time_s"],
                    r["short"],
                    recall
                ));
            }
            s
        }
    };
    write_output(args.out.as_deref(), &content)
}

fn cmd_classify_eval(args: &ClassifyEvalArgs) -> Result<()> {
    let train_input = DataInput {
        data: args.train.clone(),
        label_column: args.label_column.clone(),
        images: args.train_images.clone(),
        labels: args.train_labels.clone(),
    };
    let test_input = DataInput {
        data: args.test.clone(),
        label_column: args.label_column.clone(),
        images: args.test_images.clone(),
        labels: args.test_labels.clone(),
    };
    let mut train = train_input.load().context("training set")?;
    let test = test_input.load().context("test set")?;
    let fraction = args.subset.unwrap_or(1.0);
    if args.subset.is_some() {
        train = data::subset(&train, fraction, args.seed)?;
    }
    let steps = if args.steps == 0 {
        AnnealParams::auto_steps(train.len())
    } else {
        args.steps
    };

    let mut reports = Vec::new();
    if args.method == EvalMethod::Exact || args.method == EvalMethod::Both {
        let mut report = evaluate_exact(
            &train,
            &test,
            args.k,
            Metric::Euclidean,
            args.weighted,
            args.seed,
        )?;
        report.subset_fraction = fraction;
        report.seed = args.seed;
        reports.push(report);
    }
    if args.method == EvalMethod::Sgnn || args.method == EvalMethod::Both {
        let graph = match (&args.graph, args.build) {
            (Some(path), false) => ProximityGraph::load(path)
                .with_context(|| format!("loading {}", path.display()))?,
            _ => build_knn_graph(&train, args.graph_n, Metric::Euclidean)?,
        };
        let classifier = ClassifierConfig {
            vote_k: args.k,
            graph_n: args.graph_n,
            anneal: AnnealParams::new(args.restarts, steps, args.walk, args.k, args.seed),
            metric: Metric::Euclidean,
            weighted: args.weighted,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let mut report = evaluate(&graph, &train, &test, &classifier, &mut rng)?;
        report.subset_fraction = fraction;
        report.seed = args.seed;
        reports.push(report);
    }

    let csv_path = args.out.with_extension("csv");
    let new_csv = !csv_path.exists();
    let mut csv = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&csv_path)?;
    if new_csv {
        writeln!(csv, "{}", sgnn::classifier::EVAL_CSV_HEADER)?;
    }
    for report in &reports {
        let json_path = args.out.with_extension(format!("{}.json", report.method));
        fs::write(
            &json_path,
            format!("{}\n", serde_json::to_string_pretty(report)?),
        )?;
        writeln!(csv, "{}", report.to_csv_row())?;
        println!(
            "{}: accuracy {:.4} ± {:.4} ({} queries, {:.1} evals/query, {:.2}s) -> {}",
            report.method,
            report.accuracy,
            report.ci95,
            report.n_queries,
            report.mean_evals,
            report.wall_time_s,
            json_path.display()
        );
    }
    Ok(())
}

fn cmd_smooth_demo(args: &SmoothDemoArgs) -> Result<()> {
    let graph = ProximityGraph::load(&args.graph)
        .with_context(|| format!("loading {}", args.graph.display()))?;
    let field = ScalarField::load_csv(&args.field)
        .with_context(|| format!("loading {}", args.field.display()))?;
    let c = args
        .c
        .unwrap_or_else(|| sgnn::smoothing::SmoothingParams::default_increment(&field));
    if args.check_hcf {
        println!("hcf before: {}", is_hcf(&graph, &field)?);
    }
    let out = match args.mode {
        SmoothMode::Exact => exact_smooth(&graph, &field, c, args.t)?,
        SmoothMode::Diffusion => exact_diffusion(&graph, &field, args.t)?,
        SmoothMode::Softmin => {
            let mut current = field.clone();
            for _ in 0..args.t {
                current = softmin_smooth_step(&graph, &current, c, args.lambda)?;
            }
            current
        }
    };
    if args.check_hcf {
        println!("hcf after: {}", is_hcf(&graph, &out)?);
    }
    out.save_csv(&args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let bytes = fs::read(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let config = BenchConfig::parse(&bytes)?;
    let (train, test) = bench::prepare_data(&config)?;
    println!(
        "bench: {} train rows, {} test rows, {} cells",
        train.len(),
        test.len(),
        config.fractions.len() * config.methods.len() * config.seeds.len()
    );
    let outcomes = bench::run_grid(&config, &train, &test);
    let mut content = String::new();
    content.push_str(&bench::csv_header());
    content.push('\n');
    for outcome in &outcomes {
        content.push_str(&outcome.row);
        content.push('\n');
    }
    fs::write(&args.out, content)?;
    let failures = outcomes.iter().filter(|o| o.row.contains("error:")).count();
    println!(
        "wrote {} rows ({} failed cells) -> {}",
        outcomes.len(),
        failures,
        args.out.display()
    );
    Ok(())
}

fn cmd_gen_data(args: &GenDataArgs) -> Result<()> {
    let dataset = data::make_gaussian_clusters(
        args.clusters,
        args.per,
        args.dim,
        args.separation,
        args.seed,
    )?;
    data::save_csv(&dataset, &args.out)?;
    let sidecar = json!({
        "command": "gen-data",
        "clusters": args.clusters,
        "per": args.per,
        "dim": args.dim,
        "separation": args.separation,
        "seed": args.seed,
        "rows": dataset.len(),
    });
    fs::write(
        args.out.with_extension("csv.json"),
        format!("{}\n", serde_json::to_string_pretty(&sidecar)?),
    )?;
    println!("wrote {} rows -> {}", dataset.len(), args.out.display());
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::BuildGraph(args) => cmd_build_graph(args),
        Command::Search(args) => cmd_search(args),
        Command::ClassifyEval(args) => cmd_classify_eval(args),
        Command::SmoothDemo(args) => cmd_smooth_demo(args),
        Command::Bench(args) => cmd_bench(args),
        Command::GenData(args) => cmd_gen_data(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
