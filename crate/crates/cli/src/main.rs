//! `qbn`: structure-feature posteriors for small Bayesian networks, by exact
//! enumeration and by simulating the state-preparation circuit.
//!
//! Every JSON report is `{"config": ..., "result": ...}`; passing a report
//! back through `--config` reruns it with the same settings.

mod config;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use qbn_core::estimate::{self, Mode};
use qbn_core::graphs::{self, FeatureSpec, Graph, ModularFeatureSet, Permutation};
use qbn_core::oracle::{self, Model};
use qbn_core::qprep::{Circuit, Scales};
use qbn_core::qsim::{self, StateVector};
use qbn_core::scoring::{build_score_table, load_dataset_path, Dataset};
use serde::Serialize;

use config::{load_config, parse_feature, parse_index_list, parse_parent_lists, parse_parent_prior, parse_phi, usage};
use config::{ModeName, RunConfig, UsageError};

const MAX_QUBITS_ENV: &str = "QBN_MAX_QUBITS";

#[derive(Parser)]
#[command(name = "qbn", version, about = "Bayesian network structure-feature posteriors")]
struct Cli {
    /// Worker threads for simulation (default: one per core)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List graphs, orders and combinations
    #[command(subcommand)]
    Enumerate(EnumerateCmd),
    /// Local score table ln h(j|S)
    Score(DataArgs),
    /// Exact feature posterior (or per-graph posteriors)
    Posterior(PosteriorArgs),
    /// Feature posterior from the simulated circuit, checked against the exact value
    Estimate(EstimateArgs),
    /// Run a circuit JSON file
    Simulate(SimulateArgs),
    /// Merge report files into one summary
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum EnumerateCmd {
    /// Subgraphs of the fully connected graph on 0..n
    Dags {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = graphs::DEFAULT_GRAPH_BOUND)]
        max_n: usize,
        #[arg(long)]
        json: bool,
    },
    /// k-element subsets of 0..n in lexicographic order
    Combinations {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        json: bool,
    },
    /// Fully connected graph for a node order, e.g. --sigma 2,0,1 (root first)
    FcgSigma {
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        json: bool,
    },
    /// Orders consistent with a graph given as `;`-separated parent lists, node 0 first
    SymG {
        #[arg(long)]
        graph: String,
        #[arg(long, default_value_t = graphs::DEFAULT_PERM_BOUND)]
        max_n: usize,
        #[arg(long)]
        json: bool,
    },
    /// All orders of 0..n in lexicographic order
    Permutations {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = graphs::DEFAULT_PERM_BOUND)]
        max_n: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct DataArgs {
    /// CSV (or .tsv) file with a header row
    #[arg(long)]
    data: Option<PathBuf>,
    /// Base settings (TOML, JSON, or an earlier report); flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// edge:J1-J2, trivial, or @file.json
    #[arg(long)]
    feature: Option<String>,
    /// uniform-subsets or uniform-sizes
    #[arg(long)]
    prior: Option<String>,
    /// Order potential: constant, delta-id, or @file.json
    #[arg(long)]
    phi: Option<String>,
    /// In-degree bound
    #[arg(long)]
    lmax: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PosteriorArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Also list the posterior of every graph (n <= 4)
    #[arg(long)]
    per_graph: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModelArg {
    Unordered,
    Ordered,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum)]
    mode: Option<ModeName>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the feature circuit as JSON
    #[arg(long)]
    emit_circuit: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Circuit JSON (as written by `estimate --emit-circuit`)
    #[arg(long)]
    circuit: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Qubits to sample, comma-separated (default: mu0,omega when the layout is known)
    #[arg(long)]
    qubits: Option<String>,
    /// Write PREFIX.bin (little-endian complex doubles) and PREFIX.json
    #[arg(long)]
    dump_state: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Report files to merge
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    result: T,
}

fn emit<T: Serialize>(config: &RunConfig, result: T, out: Option<&Path>) -> anyhow::Result<()> {
    let text = qbn_core::json::to_string(&Envelope { config, result })?;
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => write_stdout(&text)?,
    }
    Ok(())
}

/// Writes to stdout, treating a closed pipe (`qbn ... | head`) as success.
fn write_stdout(text: &str) -> std::io::Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}

fn print_lines<I: IntoIterator<Item = String>>(lines: I) -> anyhow::Result<()> {
    let mut text = String::new();
    for line in lines {
        text.push_str(&line);
        text.push('\n');
    }
    Ok(write_stdout(&text)?)
}

fn print_json<T: Serialize>(config: &RunConfig, result: T) -> anyhow::Result<()> {
    emit(config, result, None)
}

fn max_qubits() -> anyhow::Result<usize> {
    match std::env::var(MAX_QUBITS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{MAX_QUBITS_ENV}={v} is not a qubit count"))),
        Err(_) => Ok(qsim::DEFAULT_MAX_QUBITS),
    }
}

fn base_config(path: Option<&Path>, command: &str) -> anyhow::Result<RunConfig> {
    let mut c = match path {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    c.command = command.to_string();
    Ok(c)
}

fn apply_data_args(c: &mut RunConfig, a: &DataArgs) -> anyhow::Result<()> {
    if let Some(d) = &a.data {
        c.data = Some(d.clone());
    }
    if let Some(f) = &a.feature {
        c.feature = Some(parse_feature(f)?);
    }
    if let Some(p) = &a.prior {
        c.prior.parent_prior = parse_parent_prior(p)?;
    }
    if let Some(p) = &a.phi {
        c.prior.order_potential = parse_phi(p)?;
    }
    if a.lmax.is_some() {
        c.lmax = a.lmax;
    }
    Ok(())
}

fn load_data(c: &RunConfig) -> anyhow::Result<Dataset> {
    let path = c.data.as_ref().ok_or_else(|| usage("--data is required"))?;
    Ok(load_dataset_path(path)?)
}

fn feature_set(c: &RunConfig, n: usize) -> anyhow::Result<ModularFeatureSet> {
    let spec = c.feature.clone().unwrap_or(FeatureSpec::Trivial);
    Ok(ModularFeatureSet::from_spec(&spec, n)?)
}

fn cmd_enumerate(cmd: EnumerateCmd) -> anyhow::Result<()> {
    let mut c = base_config(None, "enumerate")?;
    match cmd {
        EnumerateCmd::Dags { n, max_n, json } => {
            c.command = "enumerate dags".into();
            c.n = Some(n);
            c.max_n = Some(max_n);
            let dags = graphs::enumerate_dags_bounded(n, max_n)?;
            if json {
                return print_json(&c, &dags);
            }
            print_lines(dags.iter().enumerate().map(|(k, g)| format!("G_{k} = {g}")))?;
        }
        EnumerateCmd::Combinations { n, k, json } => {
            c.command = "enumerate combinations".into();
            c.n = Some(n);
            c.k = Some(k);
            let rows = graphs::combinations(n, k)?;
            if json {
                return print_json(&c, &rows);
            }
            print_lines(rows.iter().map(|r| join(r)))?;
        }
        EnumerateCmd::FcgSigma { sigma, json } => {
            c.command = "enumerate fcg-sigma".into();
            let sigma = parse_index_list(&sigma)?;
            c.sigma = Some(sigma.clone());
            let g = graphs::fcg_sigma(&Permutation::new(sigma)?);
            if json {
                return print_json(&c, &g);
            }
            print_lines([g.to_string()])?;
        }
        EnumerateCmd::SymG { graph, max_n, json } => {
            c.command = "enumerate sym-g".into();
            let lists = parse_parent_lists(&graph)?;
            c.graph = Some(lists.clone());
            c.max_n = Some(max_n);
            let sets: Vec<&[usize]> = lists.iter().map(Vec::as_slice).collect();
            let perms = graphs::sym_g_bounded(&Graph::from_sets(&sets)?, max_n)?;
            if json {
                return print_json(&c, &perms);
            }
            print_lines(perms.iter().map(|p| join(p.sigma())))?;
        }
        EnumerateCmd::Permutations { n, max_n, json } => {
            c.command = "enumerate permutations".into();
            c.n = Some(n);
            c.max_n = Some(max_n);
            if n > max_n {
                return Err(qbn_core::Error::SizeBound {
                    what: "n",
                    value: n,
                    limit: max_n,
                }
                .into());
            }
            let perms: Vec<Permutation> = Permutation::all(n).collect();
            if json {
                return print_json(&c, &perms);
            }
            print_lines(perms.iter().map(|p| join(p.sigma())))?;
        }
    }
    Ok(())
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn cmd_score(a: DataArgs) -> anyhow::Result<()> {
    let mut c = base_config(a.config.as_deref(), "score")?;
    apply_data_args(&mut c, &a)?;
    let d = load_data(&c)?;
    let f = c.feature.as_ref().map(|_| feature_set(&c, d.n())).transpose()?;
    let table = build_score_table(&d, &c.prior, f.as_ref(), c.lmax)?;
    emit(&c, table.to_export(), a.out.as_deref())
}

fn cmd_posterior(a: PosteriorArgs) -> anyhow::Result<()> {
    let mut c = base_config(a.data.config.as_deref(), "posterior")?;
    apply_data_args(&mut c, &a.data)?;
    if let Some(m) = a.model {
        c.model = Some(match m {
            ModelArg::Unordered => Model::Unordered,
            ModelArg::Ordered => Model::Ordered,
        });
    }
    c.per_graph |= a.per_graph;
    let model = *c.model.get_or_insert(Model::Unordered);
    let d = load_data(&c)?;
    let f = feature_set(&c, d.n())?;
    let mut report = match model {
        Model::Unordered => {
            if c.lmax.is_some() {
                return Err(usage("--lmax applies to the ordered model only"));
            }
            oracle::unordered_feature_posterior(&d, &c.prior, &f)?
        }
        Model::Ordered => oracle::ordered_feature_posterior_restricted(&d, &c.prior, &f, c.lmax)?,
    };
    if c.per_graph {
        report.per_graph = oracle::graph_posterior(&d, &c.prior, model)?.per_graph;
    }
    emit(&c, report, a.data.out.as_deref())
}

fn cmd_estimate(a: EstimateArgs) -> anyhow::Result<()> {
    let mut c = base_config(a.data.config.as_deref(), "estimate")?;
    apply_data_args(&mut c, &a.data)?;
    if a.mode.is_some() {
        c.mode = a.mode;
    }
    if a.shots.is_some() {
        c.shots = a.shots;
    }
    if a.seed.is_some() {
        c.seed = a.seed;
    }
    let mode = match c.mode.get_or_insert(ModeName::Exact) {
        ModeName::Exact => Mode::ExactAmplitude,
        ModeName::Sampled => Mode::Sampled {
            shots: *c.shots.get_or_insert(10_000),
            seed: *c.seed.get_or_insert(0),
        },
    };
    let d = load_data(&c)?;
    let f = feature_set(&c, d.n())?;
    let limit = max_qubits()?;
    if let Some(path) = &a.emit_circuit {
        let num = build_score_table(&d, &c.prior, Some(&f), c.lmax)?;
        let den = build_score_table(&d, &c.prior, None, c.lmax)?;
        let circuit = estimate::circuit_for(&num, &Scales::from_table(&den))?;
        let text = qbn_core::json::to_string(&circuit)?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    let result = estimate::estimate_feature_posterior_with_limit(&d, &c.prior, &f, c.lmax, mode, limit)?;
    eprintln!(
        "posterior {:.12} oracle {:.12} discrepancy {:.3e}",
        result.posterior,
        result.oracle_value.unwrap_or(f64::NAN),
        result.discrepancy.unwrap_or(f64::NAN)
    );
    if let (Some(p), Some([lo, hi])) = (result.sampled_posterior, result.sampled_interval) {
        eprintln!("sampled posterior {p:.6} (95% Wilson interval [{lo:.6}, {hi:.6}])");
    }
    emit(&c, result, a.data.out.as_deref())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SimulationReport {
    qubit_count: usize,
    gate_count: usize,
    norm_sqr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    claim: Option<ClaimReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    claim_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    histogram: Option<BTreeMap<String, u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state_dump: Option<PathBuf>,
}

#[derive(Serialize)]
struct ClaimReport {
    z1: f64,
    z0: f64,
    ratio: f64,
}

fn cmd_simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let mut c = base_config(a.config.as_deref(), "simulate")?;
    if a.circuit.is_some() {
        c.circuit = a.circuit.clone();
    }
    if a.shots.is_some() {
        c.shots = a.shots;
    }
    if a.seed.is_some() {
        c.seed = a.seed;
    }
    if let Some(q) = &a.qubits {
        c.qubits = Some(parse_index_list(q)?);
    }
    let path = c.circuit.clone().ok_or_else(|| usage("--circuit is required"))?;
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let circuit: Circuit = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    circuit.validate()?;
    let state = StateVector::run_with_limit(&circuit, max_qubits()?)?;

    let (mut claim, mut claim_error) = (None, None);
    if let Some(layout) = circuit.layout() {
        match qsim::extract_claim_amplitudes(&state, layout) {
            Ok(p) => {
                claim = Some(ClaimReport {
                    z1: p.z1.re,
                    z0: p.z0.re,
                    ratio: p.ratio(),
                })
            }
            Err(e) => claim_error = Some(e.to_string()),
        }
    }
    let histogram = match c.shots {
        Some(shots) => {
            let qubits = match (&c.qubits, circuit.layout()) {
                (Some(q), _) => q.clone(),
                (None, Some(l)) => vec![l.mu0, l.omega],
                (None, None) => (0..circuit.qubit_count().min(20)).collect(),
            };
            Some(qsim::sample(&state, &qubits, shots, *c.seed.get_or_insert(0))?)
        }
        None => None,
    };
    if let Some(prefix) = &a.dump_state {
        let bin = prefix.with_extension("bin");
        std::fs::write(&bin, state.to_le_bytes()).with_context(|| format!("writing {}", bin.display()))?;
        let header = prefix.with_extension("json");
        std::fs::write(&header, qbn_core::json::to_string(&state.dump_header())?)
            .with_context(|| format!("writing {}", header.display()))?;
    }
    let report = SimulationReport {
        qubit_count: state.qubits(),
        gate_count: circuit.gates().len(),
        norm_sqr: state.norm_sqr(),
        claim,
        claim_error,
        histogram,
        state_dump: a.dump_state.as_ref().map(|p| p.with_extension("bin")),
    };
    emit(&c, report, a.out.as_deref())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ReportEntry {
    file: PathBuf,
    command: Option<String>,
    /// Headline value: posterior, feature value, or entry count.
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discrepancy: Option<f64>,
}

#[derive(Serialize)]
struct MergedReport {
    entries: Vec<ReportEntry>,
    reports: Vec<serde_json::Value>,
}

fn cmd_report(a: ReportArgs) -> anyhow::Result<()> {
    let mut c = base_config(None, "report")?;
    c.inputs = a.inputs.clone();
    let mut entries = Vec::new();
    let mut reports = Vec::new();
    for path in &a.inputs {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let result = value.get("result").unwrap_or(&value);
        let value_of = |key: &str| result.get(key).and_then(serde_json::Value::as_f64);
        entries.push(ReportEntry {
            file: path.clone(),
            command: value.pointer("/config/command").and_then(|v| v.as_str()).map(String::from),
            value: value_of("posterior")
                .or_else(|| value_of("featureValue"))
                .or_else(|| result.get("entries").and_then(|e| e.as_array()).map(|e| e.len() as f64)),
            discrepancy: value_of("discrepancy"),
        });
        reports.push(value);
    }
    emit(&c, MergedReport { entries, reports }, a.out.as_deref())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    match cli.command {
        Command::Enumerate(cmd) => cmd_enumerate(cmd),
        Command::Score(a) => cmd_score(a),
        Command::Posterior(a) => cmd_posterior(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
