use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::thread;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hamon::bench::{emit_plot_data, run_bench, PlanFile, PlotAxis};
use hamon::log::{format_log, generate_log, parse_log, GenerateConfig, LogReader, Sample, TimedWord};
use hamon::method::MethodRegistry;
use hamon::model::{builtin_base, builtin_model, model_from_json, model_to_json, spec_from_json, BuiltinSelector, Lha, Severity};
use hamon::monitor::{IndexVerdict, MonitorConfig, MonitorVerdict, Session, Verdict};
use hamon::numeric::Rational;
use hamon::translate::{export_external, word_product};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_ALARM: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

/// Samples buffered between the reader and the monitor in --follow mode.
const FOLLOW_QUEUE: usize = 64;

#[derive(Parser)]
#[command(name = "hamon", version, about = "Model-bounded monitoring of sampled hybrid-system logs")]
#[command(after_help = "Exit status: 0 no alarm, 2 alarm at some index, 3 inconclusive index, 1 error.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report which prefixes of a log the model accepts.
    Monitor(MonitorArgs),
    /// Write the product of the model with the log's word automaton as a model file.
    Product(TranslateArgs),
    /// Write the product in the external reachability dialect.
    Export(TranslateArgs),
    /// Simulate a model and write a sampled log as CSV.
    GenLog(GenLogArgs),
    /// Run a benchmark plan.
    Bench(BenchArgs),
    /// Check a model (and specification) file.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Model file, or a builtin name such as ACCI or ACCD:3:9/10.
    model: String,
    /// Safety specification; the monitored model becomes its violation automaton.
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Args)]
struct MonitorArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// CSV log; `-` reads standard input.
    log: PathBuf,
    /// `2`/`direct` or `1`/`product`.
    #[arg(long, default_value = "2")]
    method: String,
    /// Discrete steps explored per interval (default: ten per location).
    #[arg(long, env = "HAMON_CAP")]
    cap: Option<usize>,
    #[arg(long)]
    no_merge: bool,
    /// Print the verdict as JSON.
    #[arg(long)]
    json: bool,
    /// Attach a run to every accepted index.
    #[arg(long)]
    witness: bool,
    /// Read samples as they arrive and print one verdict per sample.
    #[arg(long)]
    follow: bool,
}

#[derive(Args)]
struct TranslateArgs {
    #[command(flatten)]
    model: ModelArgs,
    log: PathBuf,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Overwrite an existing output file.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct GenLogArgs {
    /// Model file or builtin name; builtins are simulated without their specification.
    model: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    length: usize,
    /// Range of gaps between samples, as `lo:hi`.
    #[arg(long, default_value = "1:5", value_parser = parse_interval)]
    interval: (Rational, Rational),
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON plan; relative model paths are resolved against its directory.
    #[arg(long)]
    plan: PathBuf,
    /// Report file; standard output when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Also write plot data to this file.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long, default_value = "length")]
    axis: PlotAxis,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    model: ModelArgs,
}

fn parse_interval(s: &str) -> Result<(Rational, Rational), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: Rational = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: Rational = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if lo.is_negative() || lo > hi {
        return Err(format!("need 0 <= lo <= hi, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn read_text(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("cannot read standard input")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// The model to monitor: the file (or builtin) composed with the specification when given.
fn load_model(args: &ModelArgs) -> Result<Lha> {
    let path = Path::new(&args.model);
    let base = if !path.exists() {
        if let Ok(sel) = args.model.parse::<BuiltinSelector>() {
            if args.spec.is_none() {
                return Ok(builtin_model(&sel)?);
            }
            builtin_base(&sel)?.0
        } else {
            bail!("cannot read {}: no such file, and not a builtin model", path.display());
        }
    } else {
        model_from_json(&read_text(path)?).with_context(|| format!("in model {}", path.display()))?
    };
    match &args.spec {
        Some(s) => {
            let spec = spec_from_json(&read_text(s)?, &base.space).with_context(|| format!("in spec {}", s.display()))?;
            Ok(base.against_safety(&spec)?)
        }
        None => Ok(base),
    }
}

fn load_log(path: &Path, m: &Lha) -> Result<TimedWord> {
    parse_log(&read_text(path)?, &m.space).with_context(|| format!("in log {}", path.display()))
}

fn write_output(out: Option<&Path>, force: bool, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            if p.exists() && !force {
                bail!("{} exists; pass --force to overwrite", p.display());
            }
            fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn exit_for(v: &MonitorVerdict) -> u8 {
    if v.has_alarm() {
        EXIT_ALARM
    } else if v.has_inconclusive() {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

fn verdict_row(v: &IndexVerdict) -> String {
    let mark = match v.verdict {
        Verdict::Accepted => "  ALARM",
        _ => "",
    };
    format!("{:>6}  {:>12}  {}{mark}", v.index, v.timestamp.to_string(), v.verdict)
}

fn witness_lines(v: &IndexVerdict) -> Vec<String> {
    let Some(w) = &v.witness else { return Vec::new() };
    w.steps
        .iter()
        .map(|s| {
            let via = s.edge.map_or_else(|| "start".to_string(), |e| format!("edge {e}"));
            format!("          run: i={} {} via {via}: {}", s.index, s.location, s.region.display())
        })
        .collect()
}

fn print_table(v: &MonitorVerdict) {
    println!("{:>6}  {:>12}  verdict", "i", "timestamp");
    for iv in &v.indices {
        println!("{}", verdict_row(iv));
        for line in witness_lines(iv) {
            println!("{line}");
        }
    }
    print_summary(v);
}

fn print_summary(v: &MonitorVerdict) {
    let c: Vec<String> = v.accepted().iter().map(usize::to_string).collect();
    println!("C = {{{}}}", c.join(", "));
    if !v.saturated_intervals.is_empty() {
        let s: Vec<String> = v.saturated_intervals.iter().map(usize::to_string).collect();
        println!("saturated intervals: {}", s.join(", "));
    }
    for d in &v.diagnostics {
        eprintln!("note: {d}");
    }
}

fn cmd_monitor(a: &MonitorArgs) -> Result<u8> {
    let m = load_model(&a.model)?;
    let cfg = MonitorConfig { cap: a.cap, merge: !a.no_merge, witness: a.witness };
    if a.follow {
        if !matches!(a.method.trim().to_ascii_lowercase().as_str(), "2" | "direct" | "method2") {
            bail!("--follow needs the direct method");
        }
        return follow(&m, cfg, &a.log, a.json);
    }
    let registry = MethodRegistry::default();
    let method = registry.get(&a.method)?;
    if a.witness && method.name() != "direct" {
        eprintln!("note: runs are only attached by the direct method");
    }
    let w = load_log(&a.log, &m)?;
    let v = method.verdicts(&m, &w, &cfg)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&v.to_json())?);
        for d in &v.diagnostics {
            eprintln!("note: {d}");
        }
    } else {
        print_table(&v);
    }
    Ok(exit_for(&v))
}

/// One reader thread feeds a bounded queue; this thread runs the monitor.
fn follow(m: &Lha, cfg: MonitorConfig, log: &Path, json: bool) -> Result<u8> {
    let input: Box<dyn BufRead + Send> = if log == Path::new("-") {
        Box::new(BufReader::new(io::stdin()))
    } else {
        Box::new(BufReader::new(fs::File::open(log).with_context(|| format!("cannot read {}", log.display()))?))
    };
    let (tx, rx) = mpsc::sync_channel::<Result<Sample>>(FOLLOW_QUEUE);
    let space = m.space.clone();
    let reader = thread::spawn(move || {
        let mut parser = LogReader::new(space);
        for line in input.lines() {
            let item = line.context("cannot read log").and_then(|l| Ok(parser.feed_line(&l)?));
            let stop = item.is_err();
            match item {
                Ok(None) => continue,
                Ok(Some(s)) => {
                    if tx.send(Ok(s)).is_err() {
                        return;
                    }
                }
                Err(e) => {
                    let _ = tx.send(Err(e));
                }
            }
            if stop {
                return;
            }
        }
    });

    let mut session = Session::new(m, cfg)?;
    let mut indices = Vec::new();
    let mut stdout = io::stdout().lock();
    if !json {
        writeln!(stdout, "{:>6}  {:>12}  verdict", "i", "timestamp")?;
    }
    let mut failure = None;
    for item in rx {
        let sample = match item {
            Ok(s) => s,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let iv = session.push(&sample)?;
        if json {
            writeln!(stdout, "{}", serde_json::to_string(&iv.to_json())?)?;
        } else {
            writeln!(stdout, "{}", verdict_row(&iv))?;
            for line in witness_lines(&iv) {
                writeln!(stdout, "{line}")?;
            }
        }
        stdout.flush()?;
        indices.push(iv);
    }
    drop(stdout);
    reader.join().expect("reader thread panicked");
    if let Some(e) = failure {
        return Err(e);
    }
    let v = session.into_verdict(indices);
    if json {
        let summary = serde_json::json!({ "C": v.accepted(), "saturated_intervals": v.saturated_intervals });
        println!("{summary}");
        for d in &v.diagnostics {
            eprintln!("note: {d}");
        }
    } else {
        print_summary(&v);
    }
    Ok(exit_for(&v))
}

fn cmd_product(a: &TranslateArgs) -> Result<u8> {
    let m = load_model(&a.model)?;
    let w = load_log(&a.log, &m)?;
    let p = word_product(&m, &w)?;
    write_output(a.out.as_deref(), a.force, &(model_to_json(&p) + "\n"))?;
    Ok(EXIT_OK)
}

fn cmd_export(a: &TranslateArgs) -> Result<u8> {
    let m = load_model(&a.model)?;
    let w = load_log(&a.log, &m)?;
    if let Some(p) = &a.out {
        if p.exists() && !a.force {
            bail!("{} exists; pass --force to overwrite", p.display());
        }
    }
    let text = export_external(&m, &w)?;
    write_output(a.out.as_deref(), true, &text)?;
    Ok(EXIT_OK)
}

fn cmd_gen_log(a: &GenLogArgs) -> Result<u8> {
    let path = Path::new(&a.model);
    let m = if path.exists() {
        model_from_json(&read_text(path)?).with_context(|| format!("in model {}", path.display()))?
    } else {
        let sel: BuiltinSelector = a.model.parse().with_context(|| format!("cannot read {}", path.display()))?;
        builtin_base(&sel)?.0
    };
    let cfg = GenerateConfig { seed: a.seed, length: a.length, interval: a.interval.clone(), ..GenerateConfig::default() };
    let w = generate_log(&m, &cfg)?;
    write_output(a.out.as_deref(), a.force, &format_log(&w))?;
    Ok(EXIT_OK)
}

fn cmd_bench(a: &BenchArgs) -> Result<u8> {
    let dir = a.plan.parent().unwrap_or(Path::new("."));
    let plan = PlanFile::parse(&read_text(&a.plan)?)?.resolve(dir)?;
    for p in [&a.out, &a.plot].into_iter().flatten() {
        if p.exists() && !a.force {
            bail!("{} exists; pass --force to overwrite", p.display());
        }
    }
    let report = run_bench(&plan);
    write_output(a.out.as_deref(), true, &(serde_json::to_string_pretty(&report.to_json())? + "\n"))?;
    if let Some(p) = &a.plot {
        let (text, warnings) = emit_plot_data(&report, a.axis)?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        write_output(Some(p), true, &text)?;
    }
    Ok(EXIT_OK)
}

fn cmd_validate(a: &ValidateArgs) -> Result<u8> {
    let m = load_model(&a.model)?;
    let diags = m.validate();
    for d in &diags {
        eprintln!("{d}");
    }
    if diags.iter().any(|d| d.severity == Severity::Error) {
        bail!("model is invalid");
    }
    println!("ok");
    Ok(EXIT_OK)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Monitor(a) => cmd_monitor(a),
        Command::Product(a) => cmd_product(a),
        Command::Export(a) => cmd_export(a),
        Command::GenLog(a) => cmd_gen_log(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Usage errors must not collide with the alarm status.
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
