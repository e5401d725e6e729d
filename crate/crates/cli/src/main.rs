//! `stabverify` command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid input, 3 resource cap.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use stabverify::codes::{Code, CodeKind};
use stabverify::graphlift::{self, y_label};
use stabverify::report::build_report;
use stabverify::sim::{self, CodeSource, ExperimentConfig};
use stabverify::spectral::{self, SpectralReport};
use stabverify::strategy::{self, StrategyKind, TestRecord, VerificationStrategy};
use stabverify::{Error, Limits};

#[derive(Parser, Debug)]
#[command(name = "stabverify", version, about = "Verify stabilizer code states with local Pauli measurements")]
struct Cli {
    /// Largest generator count for which the stabilizer group is enumerated.
    #[arg(long, global = true, default_value_t = 20)]
    enumeration_cap: usize,
    /// Largest qubit count for dense matrices.
    #[arg(long, global = true, default_value_t = 12)]
    dense_cap: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a code file and print its generators.
    Validate { code: PathBuf },
    /// Emit a strategy as JSON or CSV.
    Strategy {
        code: PathBuf,
        /// Builder name, or a strategy file (JSON or CSV).
        #[arg(long)]
        strategy: String,
        #[arg(long, value_enum, default_value_t = TableFormat::Json)]
        format: TableFormat,
    },
    /// List measurement settings, one line per test.
    Settings {
        code: PathBuf,
        #[arg(long)]
        strategy: String,
        /// Print the lifted graph with its colour classes in DOT instead.
        #[arg(long)]
        dot: bool,
    },
    /// Spectral gap of a strategy.
    Gap {
        code: PathBuf,
        #[arg(long)]
        strategy: String,
        #[arg(long, value_enum, default_value_t = Engine::Auto)]
        engine: Engine,
        /// Also print the worst-case pass probability at this infidelity.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Copies needed for a given gap, or for a code and strategy.
    Complexity {
        code: Option<PathBuf>,
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Run an experiment config through the protocol.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TableFormat::Json)]
        format: TableFormat,
    },
    /// Compare every applicable strategy.
    Report {
        code: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Engine {
    Auto,
    Dense,
    Syndrome,
    Both,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Lib(e) if e.is_resource_limit() => 3,
            Failure::Lib(Error::Parameter(_)) => 1,
            Failure::Lib(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Input(m) => f.write_str(m),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let limits = Limits { enumeration_cap: cli.enumeration_cap, dense_cap: cli.dense_cap };
    match run(cli.command, &limits) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(command: Command, limits: &Limits) -> Outcome {
    match command {
        Command::Validate { code } => validate(&code),
        Command::Strategy { code, strategy, format } => {
            let code = load_code(&code)?;
            let s = load_strategy(&strategy, &code, limits)?;
            strategy_table(&s, format)
        }
        Command::Settings { code, strategy, dot } => settings(&code, &strategy, dot, limits),
        Command::Gap { code, strategy, engine, epsilon } => gap(&code, &strategy, engine, epsilon, limits),
        Command::Complexity { code, strategy, nu, epsilon, delta } => {
            complexity(code.as_deref(), strategy.as_deref(), nu, epsilon, delta, limits)
        }
        Command::Simulate { config, seed, format } => simulate(&config, seed, format, limits),
        Command::Report { code, epsilon, delta, format } => {
            let report = build_report(&load_code(&code)?, epsilon, delta, limits)?;
            Ok(match format {
                ReportFormat::Text => report.to_text(),
                ReportFormat::Json => json(&report)?,
                ReportFormat::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    for row in &report.rows {
                        w.serialize(row).map_err(csv_failure)?;
                    }
                    csv_string(w)?
                }
            })
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_code(path: &Path) -> Result<Code, Failure> {
    Code::from_json(&read(path)?).map_err(|e| Failure::Lib(e.into())).map_err(|f| match f {
        Failure::Lib(e) if !e.is_resource_limit() => Failure::Input(format!("{}: {e}", path.display())),
        other => other,
    })
}

/// Builder name, else a strategy file next to the working directory.
fn load_strategy(spec: &str, code: &Code, limits: &Limits) -> Result<VerificationStrategy, Failure> {
    load_strategy_in(spec, code, limits, Path::new("."))
}

fn load_strategy_in(spec: &str, code: &Code, limits: &Limits, base: &Path) -> Result<VerificationStrategy, Failure> {
    if let Ok(kind) = spec.parse::<StrategyKind>() {
        return Ok(strategy::build(kind, code, limits)?);
    }
    let path = base.join(spec);
    if !path.exists() {
        return Err(Failure::Usage(format!("{spec:?} is neither a strategy name nor a file")));
    }
    let text = read(&path)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("strategy");
    let s = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        VerificationStrategy::from_records(name, code.stabilizer(), &read_csv(&text)?)?
    } else {
        VerificationStrategy::from_json(name, code.stabilizer(), &text)?
    };
    s.validate()?;
    Ok(s)
}

#[derive(Serialize, Deserialize)]
struct CsvRecord {
    weight: String,
    setting: String,
    /// Space-separated Pauli strings.
    required: String,
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure::Input(format!("CSV: {e}"))
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String, Failure> {
    let bytes = w.into_inner().map_err(|e| Failure::Input(format!("CSV: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Failure::Input(format!("CSV: {e}")))
}

fn read_csv(text: &str) -> Result<Vec<TestRecord>, Failure> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize::<CsvRecord>()
        .map(|r| {
            let r = r.map_err(csv_failure)?;
            Ok(TestRecord {
                weight: r.weight,
                setting: r.setting,
                required: r.required.split_whitespace().map(String::from).collect(),
            })
        })
        .collect()
}

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Lib(e.into()))?;
    s.push('\n');
    Ok(s)
}

fn strategy_table(s: &VerificationStrategy, format: TableFormat) -> Outcome {
    match format {
        TableFormat::Json => Ok(s.to_json() + "\n"),
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in s.records() {
                w.serialize(CsvRecord { weight: r.weight, setting: r.setting, required: r.required.join(" ") })
                    .map_err(csv_failure)?;
            }
            csv_string(w)
        }
    }
}

fn validate(path: &Path) -> Outcome {
    let code = load_code(path)?;
    let mut out = String::new();
    writeln!(out, "{}", code.label()).unwrap();
    writeln!(out, "n={} k={}", code.n(), code.k()).unwrap();
    let kind = match code.kind() {
        CodeKind::Stabilizer => "stabilizer",
        CodeKind::Graph(_) => "graph",
        CodeKind::Css(_) => "css",
    };
    writeln!(out, "type={kind}").unwrap();
    let labels: Option<Vec<String>> = match code.kind() {
        CodeKind::Graph(gc) => Some(gc.ys().iter().map(y_label).collect()),
        _ => None,
    };
    for (i, g) in code.stabilizer().generators().iter().enumerate() {
        match &labels {
            Some(l) => writeln!(out, "{i}\t{}\t{g}", l[i]).unwrap(),
            None => writeln!(out, "{i}\t{g}").unwrap(),
        }
    }
    if let Some(form) = code.graph_form() {
        let hadamard: Vec<String> = form.hadamard.ones().map(|q| q.to_string()).collect();
        writeln!(out, "graph_form n={} hadamard=[{}]", form.graph_code.n(), hadamard.join(",")).unwrap();
    }
    Ok(out)
}

fn settings(path: &Path, spec: &str, dot: bool, limits: &Limits) -> Outcome {
    let code = load_code(path)?;
    if dot {
        let gc = match (code.kind(), code.graph_form()) {
            (CodeKind::Graph(gc), _) => gc,
            (_, Some(form)) => &form.graph_code,
            _ => return Err(Failure::Usage("--dot needs a graph code or a graph form".into())),
        };
        if spec.parse::<StrategyKind>().ok() != Some(StrategyKind::Coloring) {
            return Err(Failure::Usage("--dot is only available for the coloring strategy".into()));
        }
        let plan = graphlift::coloring_plan(gc).map_err(|e| Failure::Lib(e.into()))?;
        return Ok(plan.lifted.to_dot(Some(&plan.cover)));
    }
    let s = load_strategy(spec, &code, limits)?;
    let mut out = String::new();
    for (i, t) in s.tests().iter().enumerate() {
        let required: Vec<String> = t.test.required().iter().map(|p| p.to_string()).collect();
        writeln!(out, "{i}\t{}\t{}\t{}", t.weight, t.test.setting(), required.join(" ")).unwrap();
    }
    Ok(out)
}

fn gap_lines(out: &mut String, r: &SpectralReport) {
    writeln!(out, "method={}", r.method).unwrap();
    writeln!(out, "nu={}", r.gap).unwrap();
    writeln!(out, "lambda_max_perp={}", r.lambda_max_perp).unwrap();
    if let Some(x) = &r.worst_syndrome {
        writeln!(out, "worst_syndrome={x}").unwrap();
    }
}

fn gap(path: &Path, spec: &str, engine: Engine, epsilon: Option<f64>, limits: &Limits) -> Outcome {
    let code = load_code(path)?;
    let s = load_strategy(spec, &code, limits)?;
    let mut out = String::new();
    let primary = match engine {
        Engine::Auto => spectral::spectral_gap(&s, limits)?,
        Engine::Dense => spectral::spectral_gap_dense(&s, limits)?,
        Engine::Syndrome => spectral::spectral_gap_syndrome(&s, limits)?,
        Engine::Both => {
            let dense = spectral::spectral_gap_dense(&s, limits)?;
            let syndrome = spectral::spectral_gap_syndrome(&s, limits)?;
            gap_lines(&mut out, &dense);
            gap_lines(&mut out, &syndrome);
            writeln!(out, "difference={:e}", (dense.gap - syndrome.gap).abs()).unwrap();
            syndrome
        }
    };
    if !matches!(engine, Engine::Both) {
        gap_lines(&mut out, &primary);
    }
    if let Some(eps) = epsilon {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Parameter(format!("epsilon {eps} not in (0, 1]")).into());
        }
        writeln!(out, "worst_case_pass_probability={}", 1.0 - primary.gap * eps).unwrap();
    }
    Ok(out)
}

fn complexity(
    code: Option<&Path>,
    spec: Option<&str>,
    nu: Option<f64>,
    epsilon: f64,
    delta: f64,
    limits: &Limits,
) -> Outcome {
    let nu = match (code, spec, nu) {
        (None, None, Some(nu)) => nu,
        (Some(code), Some(spec), None) => {
            let code = load_code(code)?;
            spectral::spectral_gap(&load_strategy(spec, &code, limits)?, limits)?.gap
        }
        _ => return Err(Failure::Usage("give either --nu, or a code file with --strategy".into())),
    };
    let c = spectral::sample_complexity(nu, epsilon, delta)?;
    let mut out = String::new();
    writeln!(out, "nu={}", c.nu).unwrap();
    writeln!(out, "epsilon={}", c.epsilon).unwrap();
    writeln!(out, "delta={}", c.delta).unwrap();
    writeln!(out, "bound={}", c.bound).unwrap();
    writeln!(out, "n_copies={}", c.n_copies).unwrap();
    writeln!(out, "n_copies_exact={}", c.n_copies_exact).unwrap();
    Ok(out)
}

fn simulate(path: &Path, seed: u64, format: TableFormat, limits: &Limits) -> Outcome {
    let cfg =
        ExperimentConfig::from_json(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if let Some(own) = cfg.seed {
        if own != seed {
            return Err(Failure::Usage(format!("--seed {seed} disagrees with the config seed {own}")));
        }
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let code = match &cfg.code {
        CodeSource::Path(p) => load_code(&base.join(p))?,
        CodeSource::Inline(file) => file.build().map_err(|e| Failure::Input(format!("inline code: {e}")))?,
    };
    let s = load_strategy_in(&cfg.strategy, &code, limits, base)?;
    let stats = sim::run_experiment(&s, &cfg.state, cfg.trials, seed, limits)?;
    match format {
        TableFormat::Json => json(&stats),
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.serialize(&stats).map_err(csv_failure)?;
            csv_string(w)
        }
    }
}
