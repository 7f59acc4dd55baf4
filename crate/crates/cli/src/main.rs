mod input;

use clap::{Args, Parser, Subcommand, ValueEnum};
use optimistic_cpd::bench::{
    run_blocks_study, run_covariance_study, run_single_shift_study, BlocksStudy, CovarianceStudy, ExperimentReport,
    SingleShiftStudy,
};
use optimistic_cpd::gain::{CovLogdetGain, CusumGain, GainKind};
use optimistic_cpd::segmentation::{default_threshold, obs, oseedbs, single_change, wbs};
use optimistic_cpd::signal::{
    blocks_signal, cancellation_signal, chain_network_signal, generate_gaussian, generate_multivariate,
    single_shift_signal, ChainLayout,
};
use optimistic_cpd::{
    CovarianceSignal, Gain, PiecewiseSignal, RngSpec, SearchConfig, SearchKind, Segmentation, SegmentationConfig,
    Selection, Series,
};
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const TABLE1_MAX_REPLICATES: usize = 100_000;

#[derive(Debug)]
enum CliError {
    Io(String),
    Parse(input::ParseError),
    Config(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Config(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Parse(e) => write!(f, "parse error: {e}"),
            CliError::Config(m) => write!(f, "{m}"),
        }
    }
}

impl From<optimistic_cpd::Error> for CliError {
    fn from(e: optimistic_cpd::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

type CliResult<T> = Result<T, CliError>;

/// Change point detection with optimistic search.
#[derive(Debug, Parser)]
#[command(name = "ocpd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect change points in a numeric table (one column per dimension).
    Detect(DetectArgs),
    /// Draw a series from a built-in signal or a signal JSON file.
    Simulate(SimulateArgs),
    /// Run one of the benchmark studies and write CSV and JSON reports.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Obs,
    Bs,
    Oseedbs,
    Seedbs,
    Wbs,
    Owbs,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SelectionArg {
    Not,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GainArg {
    Cusum,
    Covlogdet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Input file, or `-` for standard input.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Oseedbs)]
    method: MethodArg,
    /// naive, advanced, advanced2, combined or full [default: combined, or full
    /// for bs, seedbs and wbs].
    #[arg(long)]
    search: Option<SearchKind>,
    /// Relative step of the naive search.
    #[arg(long, default_value_t = 0.5)]
    nu: f64,
    /// Gain threshold [default for cusum: 1.3 * sigma * sqrt(2 ln T); required for
    /// covlogdet unless --K is given].
    #[arg(long)]
    gamma: Option<f64>,
    /// Noise scale used by the default threshold.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Number of change points for greedy selection.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Candidate selection for the interval methods [default: not, or greedy when --K is set].
    #[arg(long, value_enum)]
    selection: Option<SelectionArg>,
    /// Minimal segment length searched [default: max(2, ceil(T/100))].
    #[arg(long)]
    min_len: Option<usize>,
    /// Seeded interval decay.
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    decay: f64,
    /// Number of random intervals for wbs and owbs.
    #[arg(long = "M", default_value_t = 5000)]
    m_intervals: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = GainArg::Cusum)]
    gain: GainArg,
    /// Ridge added to segment covariances (covlogdet).
    #[arg(long, default_value_t = 0.007)]
    ridge: f64,
    /// Minimal segment length on each side of a split (covlogdet) [default: ceil(T/100)].
    #[arg(long)]
    min_seg: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file [default: standard output].
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LayoutArg {
    Single,
    Alternating,
    Uneven,
}

impl From<LayoutArg> for ChainLayout {
    fn from(l: LayoutArg) -> Self {
        match l {
            LayoutArg::Single => ChainLayout::Single,
            LayoutArg::Alternating => ChainLayout::Alternating,
            LayoutArg::Uneven => ChainLayout::Uneven,
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// example1, blocks, cancellation, chain-network, or a path to a signal JSON.
    signal: String,
    /// example1: observations after the shift [1000]; cancellation and
    /// chain-network: series length [1024, 2000].
    #[arg(long)]
    n: Option<usize>,
    /// Noise level [example1 and cancellation: 1, blocks: 10].
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Dimension of the chain network.
    #[arg(long, default_value_t = 20)]
    p: usize,
    #[arg(long, value_enum, default_value_t = LayoutArg::Single)]
    layout: LayoutArg,
    /// Series output [default: standard output].
    #[arg(long)]
    output: Option<PathBuf>,
    /// Truth JSON output [default: next to --output as <stem>.truth.json].
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Study {
    Table1,
    Blocks,
    Covariance,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(value_enum)]
    study: Study,
    /// Replicates per cell [table1: 2000, blocks: 100, covariance: 50].
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Cell sizes: n for table1, m for blocks, T for covariance (first value).
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Noise levels for table1.
    #[arg(long, value_delimiter = ',')]
    sigmas: Option<Vec<f64>>,
    /// Searches to compare.
    #[arg(long, value_delimiter = ',')]
    searches: Option<Vec<SearchKind>>,
    #[arg(long, default_value_t = 0.5)]
    nu: f64,
    /// Dimension for the covariance study.
    #[arg(long, default_value_t = 20)]
    p: usize,
    #[arg(long, default_value_t = 0.007)]
    ridge: f64,
    #[arg(long)]
    min_seg: Option<usize>,
    /// Covariance study: also compare multiple change point methods.
    #[arg(long)]
    multi: bool,
    /// Directory receiving <study>.csv and <study>.json.
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Detect(args) => detect(&args),
        Command::Simulate(args) => simulate(&args),
        Command::Bench(args) => bench(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn read_input(path: &Path) -> CliResult<String> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| io_err(path, e))?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| io_err(path, e))
    }
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn selection(args: &DetectArgs, gamma: f64) -> CliResult<Selection> {
    match (args.selection, args.k) {
        (Some(SelectionArg::Not), Some(_)) => Err(config("--K applies to greedy selection only")),
        (Some(SelectionArg::Not), None) | (None, None) => Ok(Selection::Not { threshold: gamma }),
        (_, Some(_)) if args.gamma.is_some() => Err(config("greedy selection takes either --K or --gamma, not both")),
        (_, Some(k)) => Ok(Selection::Greedy {
            max_points: Some(k),
            threshold: None,
        }),
        (Some(SelectionArg::Greedy), None) => Ok(Selection::Greedy {
            max_points: None,
            threshold: Some(gamma),
        }),
    }
}

fn method_name(m: MethodArg) -> String {
    m.to_possible_value()
        .map(|v| v.get_name().to_owned())
        .unwrap_or_default()
}

fn search_kind(args: &DetectArgs) -> CliResult<SearchKind> {
    let full_grid_only = matches!(args.method, MethodArg::Bs | MethodArg::Seedbs | MethodArg::Wbs);
    match args.search {
        Some(kind) if full_grid_only && kind != SearchKind::FullGrid => Err(config(format!(
            "method {} uses the full grid; use the optimistic variant for --search {kind}",
            method_name(args.method)
        ))),
        Some(kind) => Ok(kind),
        None if full_grid_only => Ok(SearchKind::FullGrid),
        None => Ok(SearchKind::Combined),
    }
}

fn run_detect(gain: &dyn Gain, args: &DetectArgs) -> CliResult<Segmentation> {
    let len = gain.len();
    let interval_method = !matches!(args.method, MethodArg::Obs | MethodArg::Bs | MethodArg::Single);
    let gamma = match (args.gamma, gain.kind()) {
        (Some(g), _) => g,
        (None, GainKind::CusumAbs) => default_threshold(len, args.sigma, 1.3),
        (None, _) if interval_method && args.k.is_some() => f64::NEG_INFINITY,
        (None, _) => {
            return Err(config(
                "--gamma is required with the covlogdet gain unless --K is given",
            ))
        }
    };
    let min_len = args.min_len.unwrap_or_else(|| len.div_ceil(100).max(2));
    let mut cfg = SegmentationConfig::new(gamma, min_len, search_kind(args)?);
    cfg.search_cfg = SearchConfig {
        step: args.nu,
        ..SearchConfig::default()
    };
    if !interval_method && (args.k.is_some() || args.selection.is_some()) {
        return Err(config("--K and --selection apply to the interval methods only"));
    }
    let seg = match args.method {
        MethodArg::Obs | MethodArg::Bs => obs(gain, &cfg)?,
        MethodArg::Single => single_change(gain, &cfg)?,
        MethodArg::Oseedbs | MethodArg::Seedbs => oseedbs(gain, args.decay, &cfg, &selection(args, gamma)?)?,
        MethodArg::Wbs | MethodArg::Owbs => {
            let mut rng = RngSpec::new(args.seed, 0).uniform();
            wbs(gain, args.m_intervals, &mut rng, &cfg, &selection(args, gamma)?)?
        }
    };
    Ok(seg)
}

fn segmentation_csv(seg: &Segmentation) -> String {
    let mut out = String::from("change_point,gain\n");
    for (cp, g) in seg.change_points.iter().zip(&seg.gains) {
        writeln!(out, "{cp},{g:?}").expect("writing to a String");
    }
    out
}

fn detect(args: &DetectArgs) -> CliResult<()> {
    let text = read_input(&args.input)?;
    let (values, dim) = input::parse_table(&text).map_err(CliError::Parse)?;
    let series = Series::multivariate(values, dim, args.seed)?;
    let seg = match args.gain {
        GainArg::Cusum => run_detect(&CusumGain::new(&series)?, args)?,
        GainArg::Covlogdet => run_detect(&CovLogdetGain::new(series, args.ridge, args.min_seg)?, args)?,
    };
    let body = match args.format {
        Format::Json => seg.to_json() + "\n",
        Format::Csv => segmentation_csv(&seg),
    };
    write_output(args.output.as_deref(), &body)?;
    let points: Vec<String> = seg.change_points.iter().map(usize::to_string).collect();
    let summary = format!("total_evals: {}\nchange_points: {}", seg.total_evals, points.join(","));
    if args.output.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

#[derive(Serialize)]
struct Truth {
    change_points: Vec<usize>,
    levels_or_covs: serde_json::Value,
}

enum Simulated {
    Mean(PiecewiseSignal),
    Cov(CovarianceSignal),
}

fn load_signal(args: &SimulateArgs) -> CliResult<Simulated> {
    let sigma = |default: f64| args.sigma.unwrap_or(default);
    Ok(match args.signal.as_str() {
        "example1" => Simulated::Mean(single_shift_signal(args.n.unwrap_or(1000), sigma(1.0))?),
        "blocks" => {
            let s = blocks_signal();
            let level = sigma(s.sigma());
            Simulated::Mean(s.with_sigma(level)?)
        }
        "cancellation" => Simulated::Mean(cancellation_signal(args.n.unwrap_or(1024), sigma(1.0))?),
        "chain-network" => Simulated::Cov(chain_network_signal(
            args.layout.into(),
            args.n.unwrap_or(2000),
            args.p,
        )?),
        path if Path::new(path).is_file() => {
            let text = fs::read_to_string(path).map_err(|e| io_err(Path::new(path), e))?;
            match serde_json::from_str::<PiecewiseSignal>(&text) {
                Ok(s) => Simulated::Mean(s),
                Err(mean_err) => match serde_json::from_str::<CovarianceSignal>(&text) {
                    Ok(s) => Simulated::Cov(s),
                    Err(cov_err) => {
                        return Err(config(format!(
                            "{path} is neither a mean signal ({mean_err}) nor a covariance signal ({cov_err})"
                        )))
                    }
                },
            }
        }
        other => return Err(config(format!("unknown signal '{other}'"))),
    })
}

fn series_text(series: &Series) -> String {
    let mut out = String::new();
    for row in series.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let rng = RngSpec::new(args.seed, 0);
    let (series, truth) = match load_signal(args)? {
        Simulated::Mean(s) => {
            let truth = Truth {
                change_points: s.change_points().to_vec(),
                levels_or_covs: serde_json::json!(s.levels()),
            };
            (generate_gaussian(&s, rng), truth)
        }
        Simulated::Cov(s) => {
            let covs: Vec<Vec<Vec<f64>>> = s
                .covariances()
                .iter()
                .map(|m| m.row_iter().map(|r| r.iter().copied().collect()).collect())
                .collect();
            let truth = Truth {
                change_points: s.change_points().to_vec(),
                levels_or_covs: serde_json::json!(covs),
            };
            (generate_multivariate(&s, rng)?, truth)
        }
    };
    write_output(args.output.as_deref(), &series_text(&series))?;
    let truth_path = args.truth.clone().or_else(|| {
        args.output.as_ref().map(|p| {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            p.with_file_name(format!("{stem}.truth.json"))
        })
    });
    if let Some(path) = truth_path {
        let json = serde_json::to_string_pretty(&truth).expect("truth serializes") + "\n";
        fs::write(&path, json).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

fn bench(args: &BenchArgs) -> CliResult<()> {
    let search_cfg = SearchConfig {
        step: args.nu,
        ..SearchConfig::default()
    };
    search_cfg.validate()?;
    let report: ExperimentReport = match args.study {
        Study::Table1 => {
            let mut study = SingleShiftStudy {
                seed: args.seed,
                search_cfg,
                ..SingleShiftStudy::default()
            };
            if let Some(r) = args.replicates {
                if r > TABLE1_MAX_REPLICATES {
                    return Err(config(format!(
                        "table1 is limited to {TABLE1_MAX_REPLICATES} replicates; got {r}"
                    )));
                }
                study.replicates = r;
            }
            if let Some(n) = &args.sizes {
                study.n_values = n.clone();
            }
            if let Some(s) = &args.sigmas {
                study.sigmas = s.clone();
            }
            if let Some(m) = &args.searches {
                study.methods = m.clone();
            }
            run_single_shift_study(&study)?
        }
        Study::Blocks => {
            let mut study = BlocksStudy {
                seed: args.seed,
                ..BlocksStudy::default()
            };
            if let Some(r) = args.replicates {
                study.replicates = r;
            }
            if let Some(m) = &args.sizes {
                study.m_values = m.clone();
            }
            if let Some(m) = &args.searches {
                study.methods = m.clone();
            }
            run_blocks_study(&study)?
        }
        Study::Covariance => {
            let mut study = CovarianceStudy {
                seed: args.seed,
                dim: args.p,
                ridge: args.ridge,
                min_seg: args.min_seg,
                multi: args.multi,
                ..CovarianceStudy::default()
            };
            if let Some(r) = args.replicates {
                study.replicates = r;
            }
            if let Some(&t) = args.sizes.as_ref().and_then(|s| s.first()) {
                study.len = t;
            }
            if let Some(m) = &args.searches {
                study.methods = m.clone();
            }
            run_covariance_study(&study)?
        }
    };
    fs::create_dir_all(&args.output_dir).map_err(|e| io_err(&args.output_dir, e))?;
    let csv = args.output_dir.join(format!("{}.csv", report.study));
    let json = args.output_dir.join(format!("{}.json", report.study));
    fs::write(&csv, report.to_csv()).map_err(|e| io_err(&csv, e))?;
    fs::write(&json, report.to_json() + "\n").map_err(|e| io_err(&json, e))?;
    println!(
        "{}: {} rows in {:.2}s -> {}, {}",
        report.study,
        report.rows.len(),
        report.wall_time_secs,
        csv.display(),
        json.display()
    );
    Ok(())
}
