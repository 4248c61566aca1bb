use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netinfer::config::{
    default_output_dir, gen_config, parse_counts, sha256_hex, sim_config, ExperimentConfig,
    KChoice, KvConfig, GEN_KEYS, SIM_KEYS,
};
use netinfer::core::cascade::{CascadeSet, IdMap};
use netinfer::core::graph::planted_partition;
use netinfer::core::inference::{run, Algorithm, Directedness};
use netinfer::core::sim::simulate_batch;
use netinfer::formats::{
    format_graph, format_inferred, format_partition, load_graph, load_inferred, load_partition,
    parse_cascades, read_to_string, write_cascades, write_string, CascadeFile, CascadeFormat,
};
use netinfer::pipeline::run_pipeline;
use netinfer::report::evaluate;
use netinfer::{Error, Result};

#[derive(Parser)]
#[command(name = "netinfer", version, about = "Network inference from diffusion cascades")]
struct Cli {
    /// Cap on worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted-partition graph and its communities.
    Generate(GenerateArgs),
    /// Simulate cascades over a graph.
    Simulate(SimulateArgs),
    /// Infer a top-K edge list from cascades.
    Infer(InferArgs),
    /// Compare an inferred edge list with the ground truth.
    Evaluate(EvaluateArgs),
    /// Run the whole experiment over a sweep of cascade counts.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct GenFlags {
    #[arg(long)]
    n: Option<usize>,
    /// `powerlaw:<min>:<max>:<exponent>` or `fixed:<s1>,<s2>,...`
    #[arg(long)]
    communities: Option<String>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    avg_degree: Option<f64>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    degree_exponent: Option<f64>,
}

#[derive(Args)]
struct SimFlags {
    #[arg(long)]
    cascades: Option<usize>,
    #[arg(long)]
    infection_prob: Option<f64>,
    #[arg(long)]
    delay_scale: Option<f64>,
    /// A positive count or `none`.
    #[arg(long)]
    max_cascade_size: Option<String>,
    #[arg(long)]
    retry_cap: Option<u32>,
}

#[derive(Args)]
struct GenerateArgs {
    /// key=value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    gen: GenFlags,
    #[arg(long)]
    seed: Option<u64>,
    /// Defaults to $NETINFER_OUTPUT_DIR or ./netinfer-out.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge TSV to spread over.
    #[arg(long)]
    graph: PathBuf,
    /// Treat the edge list as directed.
    #[arg(long)]
    directed: bool,
    #[command(flatten)]
    sim: SimFlags,
    /// Comma-separated counts; writes one prefix-consistent file per count.
    #[arg(long)]
    counts: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = FormatArg::Snap)]
    format: FormatArg,
    /// Output file. With `--counts`, `-<count>` is added before the extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InferArgs {
    #[arg(long)]
    cascades: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Snap)]
    format: FormatArg,
    /// Number of edges to keep, or `auto` for the edge count of `--truth`.
    #[arg(long)]
    k: KChoice,
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AlgoArg::Dani)]
    algo: AlgoArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Undirected)]
    mode: ModeArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    truth: PathBuf,
    /// Ground-truth communities; community metrics are null without it.
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long)]
    inferred: PathBuf,
    #[arg(long)]
    directed: bool,
    #[arg(long, default_value_t = 0)]
    detector_seed: u64,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_tsv: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    gen: GenFlags,
    #[command(flatten)]
    sim: SimFlags,
    #[arg(long)]
    gen_seed: Option<u64>,
    #[arg(long)]
    sim_seed: Option<u64>,
    #[arg(long)]
    counts: Option<String>,
    #[arg(long)]
    k: Option<KChoice>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    detector_seed: Option<u64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Snap,
    Tsv,
}

impl From<FormatArg> for CascadeFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Snap => CascadeFormat::Snap,
            FormatArg::Tsv => CascadeFormat::Tsv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Dani,
    Baseline,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Directed,
    Undirected,
}

impl ModeArg {
    fn name(self) -> &'static str {
        match self {
            ModeArg::Directed => "directed",
            ModeArg::Undirected => "undirected",
        }
    }
}

fn set_opt<T: ToString>(kv: &mut KvConfig, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        kv.set(key, v.to_string());
    }
}

impl GenFlags {
    fn apply(&self, kv: &mut KvConfig) {
        set_opt(kv, "n", &self.n);
        set_opt(kv, "communities", &self.communities);
        set_opt(kv, "mu", &self.mu);
        set_opt(kv, "avg_degree", &self.avg_degree);
        set_opt(kv, "max_degree", &self.max_degree);
        set_opt(kv, "degree_exponent", &self.degree_exponent);
    }
}

impl SimFlags {
    fn apply(&self, kv: &mut KvConfig) {
        set_opt(kv, "cascades", &self.cascades);
        set_opt(kv, "infection_prob", &self.infection_prob);
        set_opt(kv, "delay_scale", &self.delay_scale);
        set_opt(kv, "max_cascade_size", &self.max_cascade_size);
        set_opt(kv, "retry_cap", &self.retry_cap);
    }
}

fn load_kv(path: &Option<PathBuf>) -> Result<KvConfig> {
    path.as_deref().map_or_else(|| Ok(KvConfig::default()), KvConfig::load)
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let mut kv = load_kv(&a.config)?;
    a.gen.apply(&mut kv);
    set_opt(&mut kv, "gen_seed", &a.seed);
    kv.check_keys(GEN_KEYS)?;
    let cfg = gen_config(&kv)?;
    let (graph, partition) = planted_partition(&cfg).map_err(|e| Error::stage("generate", e))?;
    let dir = a.out_dir.unwrap_or_else(default_output_dir);
    let ids = IdMap::identity(graph.node_count());
    write_string(&dir.join("graph.tsv"), &format_graph(&graph, &ids))?;
    write_string(&dir.join("partition.tsv"), &format_partition(&partition, &ids))?;
    eprintln!(
        "wrote {} nodes, {} edges, {} communities to {}",
        graph.node_count(),
        graph.edge_count(),
        partition.community_count(),
        dir.display()
    );
    Ok(())
}

fn with_count_suffix(path: &Path, count: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("cascades");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}-{count}.{ext}"),
        None => format!("{stem}-{count}"),
    };
    path.with_file_name(name)
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let mut kv = load_kv(&a.config)?;
    a.sim.apply(&mut kv);
    set_opt(&mut kv, "sim_seed", &a.seed);
    kv.check_keys(SIM_KEYS)?;
    let cfg = sim_config(&kv)?;
    let counts = match &a.counts {
        Some(s) => Some(parse_counts(s).map_err(Error::Config)?),
        None => None,
    };
    let mut ids = IdMap::new();
    let graph = load_graph(&a.graph, &mut ids, a.directed)?;
    let out = a
        .out
        .unwrap_or_else(|| default_output_dir().join("cascades.txt"));
    let sweep = counts.clone().unwrap_or_else(|| vec![cfg.cascade_count]);
    let sets = simulate_batch(&graph, &cfg, &sweep).map_err(|e| Error::stage("simulate", e))?;
    for (set, count) in sets.into_iter().zip(&sweep) {
        let file = CascadeFile {
            cascades: CascadeSet::new(set.cascades().to_vec(), ids.clone()),
            names: Vec::new(),
        };
        let path = if counts.is_some() {
            with_count_suffix(&out, *count)
        } else {
            out.clone()
        };
        write_cascades(&path, &file, a.format.into())?;
        eprintln!("wrote {count} cascades to {}", path.display());
    }
    Ok(())
}

fn cmd_infer(a: InferArgs) -> Result<()> {
    let file = parse_cascades(&a.cascades, a.format.into())?;
    let k = match (a.k, &a.truth) {
        (KChoice::Fixed(k), _) => k,
        (KChoice::TruthEdges, Some(truth)) => {
            load_graph(truth, &mut IdMap::new(), matches!(a.mode, ModeArg::Directed))?.edge_count()
        }
        (KChoice::TruthEdges, None) => {
            return Err(Error::Config("--k auto requires --truth".into()));
        }
    };
    let algo = match a.algo {
        AlgoArg::Dani => Algorithm::Dani,
        AlgoArg::Baseline => Algorithm::Baseline,
    };
    let mode = match a.mode {
        ModeArg::Directed => Directedness::Directed,
        ModeArg::Undirected => Directedness::Undirected,
    };
    let inferred = run(algo, &file.cascades, k, mode);
    if inferred.saturated {
        eprintln!(
            "warning: requested K={k} but only {} {} pairs have a positive score",
            inferred.edges.len(),
            a.mode.name()
        );
    }
    let text = format_inferred(&inferred, file.cascades.ids());
    match a.out {
        Some(path) => write_string(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let mut ids = IdMap::new();
    let truth_text = read_to_string(&a.truth)?;
    let truth = load_graph(&a.truth, &mut ids, a.directed)?;
    let partition_path = a.partition.filter(|p| {
        let exists = p.exists();
        if !exists {
            eprintln!(
                "warning: partition file {} not found; community metrics skipped",
                p.display()
            );
        }
        exists
    });
    let (partition, partition_hash) = match &partition_path {
        Some(p) => (
            Some(load_partition(p, &mut ids)?),
            sha256_hex(read_to_string(p)?.as_bytes()),
        ),
        None => (None, "none".to_string()),
    };
    let inferred_text = read_to_string(&a.inferred)?;
    let inferred = load_inferred(&a.inferred, &mut ids)?;
    let config_hash = sha256_hex(
        format!(
            "detector_seed={}\ndirected={}\ninferred={}\npartition={}\ntruth={}\n",
            a.detector_seed,
            a.directed,
            sha256_hex(inferred_text.as_bytes()),
            partition_hash,
            sha256_hex(truth_text.as_bytes()),
        )
        .as_bytes(),
    );
    let truth = truth.with_node_count(ids.len());
    let report = evaluate(
        &truth,
        partition.as_ref(),
        &inferred,
        a.detector_seed,
        config_hash,
    )?;
    let dir = default_output_dir();
    let json_path = a.out_json.unwrap_or_else(|| dir.join("report.json"));
    let tsv_path = a.out_tsv.unwrap_or_else(|| dir.join("report.tsv"));
    write_string(&json_path, &report.to_json())?;
    write_string(&tsv_path, &report.to_tsv())?;
    print!("{}", report.to_json());
    Ok(())
}

fn cmd_pipeline(a: PipelineArgs) -> Result<()> {
    let mut kv = load_kv(&a.config)?;
    a.gen.apply(&mut kv);
    a.sim.apply(&mut kv);
    set_opt(&mut kv, "gen_seed", &a.gen_seed);
    set_opt(&mut kv, "sim_seed", &a.sim_seed);
    set_opt(&mut kv, "counts", &a.counts);
    set_opt(&mut kv, "k", &a.k);
    set_opt(&mut kv, "mode", &a.mode.map(ModeArg::name));
    set_opt(&mut kv, "detector_seed", &a.detector_seed);
    set_opt(&mut kv, "repeats", &a.repeats);
    set_opt(&mut kv, "output_dir", &a.out_dir.map(|p| p.display().to_string()));
    let cfg = ExperimentConfig::from_kv(&kv)?;
    let out = run_pipeline(&cfg)?;
    eprintln!(
        "wrote {} sweep rows to {} (config {})",
        out.rows.len(),
        out.sweep_path.display(),
        cfg.hash()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Infer(a) => cmd_infer(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Pipeline(a) => cmd_pipeline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
