//! `confounder-lab` command-line interface.
//!
//! Exit codes: 0 success, 1 property violations (`verify`), 2 invalid input,
//! 3 I/O failure. Every JSON document carries `"schema": "v1"`.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use confounder_lab::estimate::{self, data_report, transport};
use confounder_lab::mc::{self, figure_stats, ExperimentConfig};
use confounder_lab::monotonicity::{bounds_verdict, in_between, report};
use confounder_lab::suites::{run_suite, run_suite_inverted, Suite};
use confounder_lab::{summarize, Error, Params, SamplingScheme};
use serde::Serialize;
use serde_json::{json, Value};

const SCHEMA: &str = "v1";
const THREADS_ENV: &str = "CONFOUNDER_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "confounder-lab",
    version,
    about = "Effect measures under a mismeasured binary confounder"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Effect measures, directions and bound verdicts for one parameter file.
    Analyze {
        #[arg(long)]
        params: PathBuf,
        /// Slack of the in-between check.
        #[arg(long, default_value_t = mc::IN_BETWEEN_TOL)]
        tol: f64,
    },
    /// Random-parameterization study: per-run CSV plus summary JSON.
    Simulate {
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Per-run CSV output.
        #[arg(long)]
        out: PathBuf,
        /// Summary JSON output; stdout when omitted.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Scheme::NormalizedPair)]
        scheme: Scheme,
    },
    /// Runs one property suite; exits 1 on any violation.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Inverts the checked predicate to exercise the failure path.
        #[arg(long, hide = true)]
        invert_predicate: bool,
    },
    /// Plug-in estimates and sign verdict from an `a,d,y` CSV.
    Estimate {
        #[arg(long)]
        data: PathBuf,
    },
    /// Verdict for a third population combining two samples.
    Transport {
        /// Sample sharing the outcome mechanism with the target.
        #[arg(long)]
        pop1: PathBuf,
        /// Sample sharing the treatment policy with the target.
        #[arg(long)]
        pop2: PathBuf,
    },
    /// Synthetic `a,d,y` rows from a parameter file.
    Generate {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// CSV output; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Scheme {
    NormalizedPair,
    Uniform,
}

impl From<Scheme> for SamplingScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::NormalizedPair => SamplingScheme::NormalizedPair,
            Scheme::Uniform => SamplingScheme::Uniform,
        }
    }
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

#[derive(Debug)]
enum Failure {
    Input {
        code: &'static str,
        message: String,
    },
    Io {
        path: Option<PathBuf>,
        source: io::Error,
    },
    Violations,
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Violations => 1,
            Failure::Input { .. } => 2,
            Failure::Io { .. } => 3,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        Failure::Io {
            path: Some(path.to_path_buf()),
            source,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Csv(inner) if inner.is_io_error() => match inner.into_kind() {
                csv::ErrorKind::Io(source) => Failure::Io { path: None, source },
                _ => unreachable!("checked is_io_error"),
            },
            other => Failure::Input {
                code: other.code(),
                message: other.to_string(),
            },
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        return report_failure(f);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report_failure(f),
    }
}

fn report_failure(f: Failure) -> ExitCode {
    let code = f.exit_code();
    let body = match &f {
        Failure::Input { code, message } => {
            json!({ "schema": SCHEMA, "error": code, "message": message })
        }
        Failure::Io { path, source } => json!({
            "schema": SCHEMA,
            "error": "Io",
            "path": path.as_ref().map(|p| p.display().to_string()),
            "message": source.to_string(),
        }),
        Failure::Violations => return ExitCode::from(code),
    };
    eprintln!("{body}");
    ExitCode::from(code)
}

fn configure_threads() -> CmdResult {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize =
        raw.trim()
            .parse()
            .ok()
            .filter(|&t| t >= 1)
            .ok_or_else(|| Failure::Input {
                code: "InvalidThreads",
                message: format!("{THREADS_ENV} must be a positive integer, got '{raw}'"),
            })?;
    // Only fails if a pool already exists, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Analyze { params, tol } => cmd_analyze(&params, tol),
        Command::Simulate {
            n,
            seed,
            out,
            summary,
            scheme,
        } => cmd_simulate(n, seed, scheme.into(), &out, summary.as_deref()),
        Command::Verify {
            suite,
            n,
            seed,
            invert_predicate,
        } => cmd_verify(suite, n, seed, invert_predicate),
        Command::Estimate { data } => cmd_estimate(&data),
        Command::Transport { pop1, pop2 } => cmd_transport(&pop1, &pop2),
        Command::Generate {
            params,
            n,
            seed,
            out,
        } => cmd_generate(&params, n, seed, out.as_deref()),
    }
}

fn read_params(path: &Path) -> Result<Params, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let params: Params = serde_json::from_str(&text).map_err(|e| Failure::Input {
        code: "InvalidJson",
        message: e.to_string(),
    })?;
    params.validate()?;
    Ok(params)
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::io(path, e))
}

fn versioned<T: Serialize>(body: T) -> Value {
    let mut value = serde_json::to_value(body).expect("serializable report");
    if let Value::Object(map) = &mut value {
        map.insert("schema".into(), Value::from(SCHEMA));
    }
    value
}

fn print_json(value: &Value) -> CmdResult {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(io::Error::from)
        .and_then(|()| writeln!(out))
        .map_err(|source| Failure::Io { path: None, source })
}

fn write_json(path: &Path, value: &Value) -> CmdResult {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(io::Error::from)
        .and_then(|()| writeln!(w))
        .and_then(|()| w.flush())
        .map_err(|e| Failure::io(path, e))
}

fn cmd_analyze(path: &Path, tol: f64) -> CmdResult {
    let params = read_params(path)?;
    let summary = summarize(&params);
    let directions = report(&params);
    let doc = json!({
        "schema": SCHEMA,
        "params": params,
        "effects": summary,
        "monotonicity": directions,
        "alignment_in_d": directions.alignment_in_d(),
        "in_between": in_between(&summary, tol),
        "bounds": bounds_verdict(&params),
    });
    print_json(&doc)
}

fn cmd_simulate(
    n: u64,
    seed: u64,
    scheme: SamplingScheme,
    out: &Path,
    summary_path: Option<&Path>,
) -> CmdResult {
    let (summary, records) = mc::run_experiment_with(ExperimentConfig { n, seed, scheme });
    let mut w = create(out)?;
    mc::write_csv(&records, &mut w)?;
    w.flush().map_err(|e| Failure::io(out, e))?;

    let figure = figure_stats(&records).ok();
    let frac = |k: u64, d: u64| {
        if d == 0 {
            None
        } else {
            Some(k as f64 / d as f64)
        }
    };
    let doc = json!({
        "schema": SCHEMA,
        "summary": summary,
        "tie_convention": "constant directions are tabulated as nondecreasing",
        "monotone_in_d_fraction": frac(summary.n_monotone_in_d(), summary.n_runs),
        "in_between_fraction": frac(summary.n_in_between(), summary.n_runs),
        "in_between_fraction_neither": frac(summary.n_in_between_by_row[2], summary.n_neither_rows()),
        "off_block": summary.off_block(),
        "figure": figure.map(|f| json!({
            "n_records": f.n_records,
            "interval_histogram": f.interval_histogram,
            "median_rel_pos": f.median_rel_pos,
            "youden_rank_correlation": f.youden_rank_correlation,
        })),
    });
    match summary_path {
        Some(p) => write_json(p, &doc),
        None => print_json(&doc),
    }
}

fn cmd_verify(suite: Suite, n: u64, seed: u64, invert: bool) -> CmdResult {
    let result = if invert {
        run_suite_inverted(suite, n, seed)
    } else {
        run_suite(suite, n, seed)
    };
    let passed = result.passed();
    let mut doc = versioned(&result);
    doc["passed"] = Value::from(passed);
    print_json(&doc)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Violations)
    }
}

fn load_population(path: &Path) -> Result<estimate::PopulationEstimates, Failure> {
    let rows = estimate::read_rows(open(path)?)?;
    Ok(estimate::ingest(rows)?.estimate()?)
}

fn cmd_estimate(path: &Path) -> CmdResult {
    let est = load_population(path)?;
    print_json(&versioned(data_report(&est)))
}

fn cmd_transport(pop1: &Path, pop2: &Path) -> CmdResult {
    let p1 = load_population(pop1)?;
    let p2 = load_population(pop2)?;
    print_json(&versioned(transport(&p1, &p2)))
}

fn cmd_generate(path: &Path, n: u64, seed: u64, out: Option<&Path>) -> CmdResult {
    let params = read_params(path)?;
    let rows = estimate::generate(&params, n, seed)?;
    match out {
        Some(p) => {
            let mut w = create(p)?;
            estimate::write_rows(rows, &mut w)?;
            w.flush().map_err(|e| Failure::io(p, e))
        }
        None => Ok(estimate::write_rows(rows, io::stdout().lock())?),
    }
}
