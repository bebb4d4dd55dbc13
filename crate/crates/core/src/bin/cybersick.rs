use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cybersick::advisor::{self, builtin_matrix, CauseMapping, FrameStats};
use cybersick::dataset::{
    assemble_features, assemble_scenario, class_distribution, parse_sessions, write_dataset_csv, write_sessions_jsonl,
    FeatureVector, SessionFormat,
};
use cybersick::eval::{self, rank_attributes, run_experiment_grid};
use cybersick::learners::{load_model, parse_learners, save_model, LearnerKind, LearnerSpec, ModelFile, SplitCriterion};
use cybersick::model::{Game, LabelScheme, Scenario, SessionRecord};
use cybersick::serve::{self, ServeConfig};
use cybersick::synth::{generate_corpus_with_traces, write_risk_trace_csv, CorpusSpec, RiskWeights, SimParams, RISK_TRACE_HEADER};
use cybersick::viz::{self, Palette};

#[derive(Parser)]
#[command(name = "cybersick", version, about = "Cybersickness prediction from VR gameplay telemetry")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic corpus with latent risk traces.
    Synth(SynthArgs),
    /// Validate sessions and write them as JSONL or as the flat feature CSV.
    Ingest(IngestArgs),
    /// Train one learner and write a model file.
    Train(TrainArgs),
    /// Cross-validate learners over every scenario and label scheme.
    Eval(EvalArgs),
    /// Leave-one-attribute-out importance ranking.
    Rank(RankArgs),
    /// Per-frame predictions from a model file.
    Predict(PredictArgs),
    /// Mitigation suggestions per session, or export the knowledge base.
    Advise(AdviseArgs),
    /// Discomfort heatmaps over the track plane.
    Viz(VizArgs),
    /// Score telemetry frames over line-delimited JSON on TCP.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Args)]
struct Input {
    /// Sessions as JSONL, or the flat feature CSV (needs --game).
    #[arg(long)]
    data: PathBuf,
    /// Game of every session in a CSV input.
    #[arg(long)]
    game: Option<Game>,
}

#[derive(Args)]
struct SynthArgs {
    /// Sessions per game, e.g. race:20,flight:27. Defaults to 15 race and 22 flight sessions with 3993 and 5397 frames.
    #[arg(long)]
    games: Option<String>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: Format,
    /// Risk weights for time, rotation, acceleration and profile; must sum to 1.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    weights: Option<Vec<f64>>,
    #[arg(long)]
    report_prob: Option<f64>,
    /// Latent risk trace CSV; defaults to the output path with a `.risk.csv` suffix.
    #[arg(long)]
    traces: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: Format,
    /// Label scheme of the CSV output.
    #[arg(long, default_value = "quarterly")]
    scheme: LabelScheme,
    /// Restrict to one scenario (A race, B flight, C both).
    #[arg(long)]
    scenario: Option<Scenario>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Hyper {
    #[arg(long)]
    criterion: Option<SplitCriterion>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    min_leaf: Option<usize>,
    #[arg(long)]
    n_trees: Option<usize>,
    #[arg(long)]
    mtry: Option<usize>,
    #[arg(long)]
    prune_fraction: Option<f64>,
}

impl Hyper {
    fn apply(&self, mut spec: LearnerSpec, seed: u64) -> LearnerSpec {
        let c = &mut spec.config;
        c.seed = seed;
        if let Some(v) = self.criterion {
            c.criterion = v;
        }
        if let Some(v) = self.max_depth {
            c.max_depth = v;
        }
        if let Some(v) = self.min_leaf {
            c.min_leaf = v;
        }
        if let Some(v) = self.n_trees {
            c.n_trees = v;
        }
        if let Some(v) = self.mtry {
            c.mtry = v;
        }
        if let Some(v) = self.prune_fraction {
            c.prune_fraction = v;
        }
        spec
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value = "forest")]
    learner: LearnerKind,
    #[arg(long, default_value = "C")]
    scenario: Scenario,
    #[arg(long, default_value = "binary")]
    scheme: LabelScheme,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[command(flatten)]
    hyper: Hyper,
    /// Skip attaching the attribute ranking used for serve-time suggestions.
    #[arg(long)]
    no_rank: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value = "stump,tree,pruned_tree,forest")]
    learners: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Experiment grid JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value = "tree")]
    learner: LearnerKind,
    #[arg(long, default_value = "C")]
    scenario: Scenario,
    #[arg(long, default_value = "binary")]
    scheme: LabelScheme,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[command(flatten)]
    hyper: Hyper,
    /// Ranking JSON; the table goes to stdout either way.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AdviseArgs {
    #[arg(long, required_unless_present_any = ["export_matrix", "export_mapping"])]
    model: Option<PathBuf>,
    #[arg(long, required_unless_present_any = ["export_matrix", "export_mapping"])]
    data: Option<PathBuf>,
    #[arg(long)]
    game: Option<Game>,
    /// Attribute-to-cause mapping file (`attribute = Cause` lines).
    #[arg(long)]
    mapping: Option<PathBuf>,
    #[arg(long, default_value_t = advisor::DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = 5)]
    top_n: usize,
    /// Write the causes x strategies matrix as CSV and exit.
    #[arg(long)]
    export_matrix: Option<PathBuf>,
    /// Write the shipped attribute-to-cause mapping and exit.
    #[arg(long)]
    export_mapping: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VizArgs {
    #[arg(long, required_unless_present = "grid")]
    data: Option<PathBuf>,
    #[arg(long)]
    game: Option<Game>,
    /// Restrict to one game's sessions.
    #[arg(long)]
    only: Option<Game>,
    /// Grid resolution as NXxNZ.
    #[arg(long, default_value = "64x64")]
    resolution: String,
    /// Profile attribute to split by; outputs get a `-<value>` suffix.
    #[arg(long)]
    facet: Option<String>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Render an experiment grid JSON as text tables instead.
    #[arg(long, conflicts_with = "data")]
    grid: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    mapping: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 7878)]
    port: u16,
    #[arg(long, default_value_t = advisor::DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = 5)]
    top_n: usize,
}

/// Missing inputs are usage errors.
struct Usage(String);

fn require(path: &Path) -> Result<(), Usage> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Usage(format!("input file `{}` does not exist", path.display())))
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// A session file must exist, and a CSV one needs its game named.
fn require_sessions(path: &Path, game: Option<Game>) -> Result<(), Usage> {
    require(path)?;
    if is_csv(path) && game.is_none() {
        return Err(Usage(format!("CSV input `{}` needs --game race|flight", path.display())));
    }
    Ok(())
}

fn load_sessions(path: &Path, game: Option<Game>) -> anyhow::Result<Vec<SessionRecord>> {
    let format = match (is_csv(path), game) {
        (true, Some(game)) => SessionFormat::Csv { game },
        (true, None) => bail!("CSV input needs --game race|flight"),
        (false, _) => SessionFormat::Jsonl,
    };
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_sessions(BufReader::new(file), format).with_context(|| format!("reading {}", path.display()))
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn load_mapping(path: Option<&Path>) -> anyhow::Result<CauseMapping> {
    match path {
        Some(p) => Ok(CauseMapping::parse(&fs::read_to_string(p)?).with_context(|| format!("reading {}", p.display()))?),
        None => Ok(CauseMapping::default()),
    }
}

fn read_model(path: &Path) -> anyhow::Result<ModelFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_model(&text).with_context(|| format!("loading {}", path.display()))
}

fn parse_games(spec: &str) -> anyhow::Result<CorpusSpec> {
    let (mut race, mut flight) = (0, 0);
    for part in spec.split(',') {
        let (game, n) = part.split_once(':').with_context(|| format!("expected game:count, found `{part}`"))?;
        let n: usize = n.trim().parse().with_context(|| format!("invalid session count `{n}`"))?;
        match game.trim().parse::<Game>()? {
            Game::Race => race = n,
            Game::Flight => flight = n,
        }
    }
    Ok(CorpusSpec::from_counts(race, flight))
}

fn synth(a: SynthArgs) -> anyhow::Result<()> {
    let spec = match &a.games {
        Some(g) => parse_games(g)?,
        None => CorpusSpec::study_scale(),
    };
    let mut params = SimParams::default();
    if let Some(w) = &a.weights {
        params.risk_weights = RiskWeights::new(w[0], w[1], w[2], w[3]);
    }
    if let Some(p) = a.report_prob {
        params.report_prob = p;
    }
    let corpus = generate_corpus_with_traces(&spec, a.seed, &params)?;
    let sessions: Vec<SessionRecord> = corpus.iter().map(|(s, _)| s.clone()).collect();
    let mut out = output(Some(&a.out))?;
    match a.format {
        Format::Jsonl => write_sessions_jsonl(&sessions, &mut out)?,
        Format::Csv => write_dataset_csv(&assemble_features(&sessions, LabelScheme::Quarterly)?, &mut out)?,
    }
    out.flush()?;
    let trace_path = a.traces.unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".risk.csv");
        p.into()
    });
    let mut traces = output(Some(&trace_path))?;
    writeln!(traces, "{RISK_TRACE_HEADER}")?;
    for (s, t) in &corpus {
        write_risk_trace_csv(&s.session_id, t, &mut traces)?;
    }
    traces.flush()?;
    let frames: usize = sessions.iter().map(|s| s.frames.len()).sum();
    log::info!("wrote {} sessions ({frames} frames) to {}", sessions.len(), a.out.display());
    Ok(())
}

fn ingest(a: IngestArgs) -> anyhow::Result<()> {
    let mut sessions = load_sessions(&a.input.data, a.input.game)?;
    if let Some(s) = a.scenario {
        sessions.retain(|r| s.includes(r.game));
    }
    let mut out = output(a.out.as_deref())?;
    match a.format {
        Format::Jsonl => write_sessions_jsonl(&sessions, &mut out)?,
        Format::Csv => {
            let ds = match a.scenario {
                Some(s) => assemble_scenario(&sessions, s, a.scheme)?,
                None => assemble_features(&sessions, a.scheme)?,
            };
            let dist = class_distribution(&ds)?;
            eprintln!("{} sessions, {} rows, class counts {:?}", sessions.len(), ds.len(), dist.counts);
            write_dataset_csv(&ds, &mut out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn train(a: TrainArgs) -> anyhow::Result<()> {
    let sessions = load_sessions(&a.input.data, a.input.game)?;
    let ds = assemble_scenario(&sessions, a.scenario, a.scheme)?;
    let spec = a.hyper.apply(LearnerSpec::default_for(a.learner), a.seed);
    let table = cybersick::learners::FeatureTable::from_dataset(&ds);
    let model = spec.fit(&table)?;
    let ranking = if a.no_rank { None } else { Some(rank_attributes(&eval::ranking_spec(), &ds, a.seed)?) };
    write_file(&a.out, save_model(&ModelFile { spec, model, ranking }))?;
    log::info!("trained {} on {} rows", a.learner, ds.len());
    Ok(())
}

fn evaluate(a: EvalArgs) -> anyhow::Result<()> {
    let sessions = load_sessions(&a.input.data, a.input.game)?;
    let learners = parse_learners(&a.learners)?;
    let grid = run_experiment_grid(&sessions, &learners, a.k, a.seed)?;
    if let Some(p) = &a.out {
        write_file(p, serde_json::to_string_pretty(&grid)? + "\n")?;
    }
    print!("{}", viz::emit_grid_tables(&grid)?);
    Ok(())
}

fn rank(a: RankArgs) -> anyhow::Result<()> {
    let sessions = load_sessions(&a.input.data, a.input.game)?;
    let ds = assemble_scenario(&sessions, a.scenario, a.scheme)?;
    let base = if a.learner == LearnerKind::Tree { eval::ranking_spec() } else { LearnerSpec::default_for(a.learner) };
    let spec = a.hyper.apply(base, a.seed);
    let r = rank_attributes(&spec, &ds, a.seed)?;
    if let Some(p) = &a.out {
        write_file(p, serde_json::to_string_pretty(&r)? + "\n")?;
    }
    let mut out = io::stdout().lock();
    writeln!(out, "baseline accuracy {:.4}", r.baseline_accuracy)?;
    writeln!(out, "{:>4}  {:<26} {:>10} {:>8}", "rank", "attribute", "acc_without", "impact")?;
    for (i, e) in r.entries.iter().enumerate() {
        writeln!(out, "{:>4}  {:<26} {:>10.4} {:>8.4}", i + 1, e.attribute, e.accuracy_without, e.impact)?;
    }
    Ok(())
}

fn rows_of(sessions: &[SessionRecord]) -> anyhow::Result<Vec<FeatureVector>> {
    // Labels are irrelevant for prediction; sessions without reports still score.
    let mut rows = Vec::new();
    for s in sessions {
        for f in &s.frames {
            rows.push(FeatureVector {
                values: cybersick::dataset::encode_features(&s.profile, &s.pre_questionnaire, &s.config, f),
                label: 0,
                session_id: s.session_id.clone(),
                frame_timestamp: f.timestamp,
            });
        }
    }
    Ok(rows)
}

fn predict(a: PredictArgs) -> anyhow::Result<()> {
    let mf = read_model(&a.model)?;
    let sessions = load_sessions(&a.input.data, a.input.game)?;
    let mut out = output(a.out.as_deref())?;
    let k = mf.model.scheme().class_count();
    if let Format::Csv = a.format {
        let probs: Vec<String> = (0..k).map(|c| format!("p{c}")).collect();
        writeln!(out, "session_id,timestamp,predicted,{}", probs.join(","))?;
    }
    for row in rows_of(&sessions)? {
        let dist = mf.model.predict_distribution(&row)?;
        let label = mf.model.predict_label(&row)?;
        match a.format {
            Format::Jsonl => {
                let v = serde_json::json!({"session_id": row.session_id, "timestamp": row.frame_timestamp, "predicted": label, "distribution": dist});
                writeln!(out, "{v}")?;
            }
            Format::Csv => {
                let d: Vec<String> = dist.iter().map(f64::to_string).collect();
                writeln!(out, "{},{},{label},{}", row.session_id, row.frame_timestamp, d.join(","))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn advise(a: AdviseArgs) -> anyhow::Result<()> {
    if a.export_matrix.is_some() || a.export_mapping.is_some() {
        if let Some(p) = &a.export_matrix {
            write_file(p, builtin_matrix().to_csv())?;
        }
        if let Some(p) = &a.export_mapping {
            write_file(p, load_mapping(a.mapping.as_deref())?.format())?;
        }
        return Ok(());
    }
    let (Some(model), Some(data)) = (&a.model, &a.data) else { unreachable!("clap enforces --model and --data") };
    let mf = read_model(model)?;
    let Some(ranking) = &mf.ranking else { bail!("model has no attribute ranking; retrain without --no-rank") };
    let mapping = load_mapping(a.mapping.as_deref())?;
    let sessions = load_sessions(data, a.game)?;
    let mut out = output(a.out.as_deref())?;
    for s in &sessions {
        let rows = rows_of(std::slice::from_ref(s))?;
        let k = mf.model.scheme().class_count();
        let mut mean = vec![0.0; k];
        for r in &rows {
            for (m, p) in mean.iter_mut().zip(mf.model.predict_distribution(r)?) {
                *m += p / rows.len() as f64;
            }
        }
        let stats = FrameStats::from_session(s);
        let causes = mapping.infer(ranking, Some(&stats), a.top_n)?;
        let suggestions = advisor::advise_with_evidence(&mean, &causes.causes, a.threshold);
        let v = serde_json::json!({
            "session_id": s.session_id,
            "discomfort_probability": advisor::discomfort_probability(&mean),
            "mean_distribution": mean,
            "suggestions": suggestions,
            "unmapped_evidence": causes.unmapped,
        });
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{suffix}"),
    };
    path.with_file_name(name)
}

fn visualize(a: VizArgs) -> anyhow::Result<()> {
    if let Some(g) = &a.grid {
        let grid: eval::ExperimentGrid = serde_json::from_str(&fs::read_to_string(g)?).with_context(|| format!("reading {}", g.display()))?;
        print!("{}", viz::emit_grid_tables(&grid)?);
        return Ok(());
    }
    let data = a.data.as_ref().expect("clap enforces --data");
    let (nx, nz) = a
        .resolution
        .split_once('x')
        .and_then(|(x, z)| Some((x.parse().ok()?, z.parse().ok()?)))
        .with_context(|| format!("resolution must look like 64x64, found `{}`", a.resolution))?;
    let mut sessions = load_sessions(data, a.game)?;
    if let Some(g) = a.only {
        sessions.retain(|s| s.game == g);
    }
    let grids = match &a.facet {
        Some(f) => viz::facet_by(&sessions, f, (nx, nz))?.into_iter().map(|(k, g)| (Some(k), g)).collect(),
        None => vec![(None, viz::aggregate_track_heat(&sessions, (nx, nz))?)],
    };
    for (key, grid) in grids {
        let path_for = |p: &Path| key.as_deref().map_or_else(|| p.to_path_buf(), |k| suffixed(p, k));
        if let Some(p) = &a.csv {
            write_file(&path_for(p), viz::export_heat_csv(&grid))?;
        }
        if let Some(p) = &a.svg {
            write_file(&path_for(p), viz::export_heat_svg(&grid, &Palette::default()))?;
        }
        println!("{}: {} labeled frames in {} cells", key.as_deref().unwrap_or("all"), grid.total(), grid.nonzero().count());
    }
    Ok(())
}

fn run_serve(a: ServeArgs) -> anyhow::Result<()> {
    let mf = Arc::new(read_model(&a.model)?);
    let config = Arc::new(ServeConfig { threshold: a.threshold, top_n: a.top_n, mapping: load_mapping(a.mapping.as_deref())?, ..ServeConfig::default() });
    let listener = TcpListener::bind((a.host.as_str(), a.port)).with_context(|| format!("binding {}:{}", a.host, a.port))?;
    eprintln!("listening on {}", listener.local_addr()?);
    serve::serve(listener, mf, config)?;
    Ok(())
}

fn check_inputs(cmd: &Command) -> Result<(), Usage> {
    match cmd {
        Command::Synth(_) => Ok(()),
        Command::Ingest(a) => require_sessions(&a.input.data, a.input.game),
        Command::Train(a) => require_sessions(&a.input.data, a.input.game),
        Command::Eval(a) => require_sessions(&a.input.data, a.input.game),
        Command::Rank(a) => require_sessions(&a.input.data, a.input.game),
        Command::Predict(a) => require(&a.model).and(require_sessions(&a.input.data, a.input.game)),
        Command::Advise(a) => {
            for p in [&a.model, &a.mapping].into_iter().flatten() {
                require(p)?;
            }
            a.data.as_deref().map_or(Ok(()), |p| require_sessions(p, a.game))
        }
        Command::Viz(a) => {
            if let Some(g) = &a.grid {
                require(g)?;
            }
            a.data.as_deref().map_or(Ok(()), |p| require_sessions(p, a.game))
        }
        Command::Serve(a) => require(&a.model).and(a.mapping.as_deref().map_or(Ok(()), require)),
    }
}

/// Output piped into `head` and closed early is not a failure.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
            || c.downcast_ref::<cybersick::Error>().is_some_and(|ce| matches!(ce, cybersick::Error::Io(io) if io.kind() == io::ErrorKind::BrokenPipe))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    if let Err(Usage(msg)) = check_inputs(&cli.command) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Ingest(a) => ingest(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => evaluate(a),
        Command::Rank(a) => rank(a),
        Command::Predict(a) => predict(a),
        Command::Advise(a) => advise(a),
        Command::Viz(a) => visualize(a),
        Command::Serve(a) => run_serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
