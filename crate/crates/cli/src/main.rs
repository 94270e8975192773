mod config;
mod experiments;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::json;
use stretchperc::stats::{write_csv, EstimateRecord};
use stretchperc::suite::{self, DEFAULT_SEED};

use config::Resolved;

#[derive(Parser)]
#[command(name = "stretchperc", version, about = "Percolation experiments on stretched lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment; `key=value` pairs override the config file.
    Run {
        experiment: String,
        #[arg(value_name = "KEY=VALUE")]
        assignments: Vec<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an acceptance group.
    Suite {
        name: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List experiments and their keys.
    List,
}

#[derive(Debug)]
pub enum Failure {
    /// Rejected configuration or arguments; exit 2.
    Schema(String),
    /// I/O or budget exhaustion; exit 3.
    Resource(String),
}

impl From<stretchperc::Error> for Failure {
    fn from(e: stretchperc::Error) -> Self {
        use stretchperc::Error::*;
        match e {
            Resource(_) | Conditioning(_) => Failure::Resource(e.to_string()),
            _ => Failure::Schema(e.to_string()),
        }
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Resource(format!("{}: {e}", path.display()))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(io(path))
}

fn write_records(dir: &Path, stem: &str, records: &[EstimateRecord]) -> Result<PathBuf, Failure> {
    let path = dir.join(format!("{stem}.csv"));
    let file = std::fs::File::create(&path).map_err(io(&path))?;
    write_csv(records, file)?;
    Ok(path)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn run(
    name: &str,
    assignments: &[String],
    config: Option<&Path>,
    out: Option<&Path>,
) -> Result<bool, Failure> {
    let exp = experiments::find(name).ok_or_else(|| {
        let names: Vec<&str> = experiments::REGISTRY.iter().map(|e| e.name).collect();
        Failure::Schema(format!("unknown experiment `{name}`; expected one of {}", names.join(", ")))
    })?;
    let file = match config {
        Some(p) => config::read_file(p)?,
        None => Default::default(),
    };
    let mut overrides = assignments
        .iter()
        .map(|s| config::parse_override(s))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(o) = out {
        overrides.push(("out".into(), o.to_string_lossy().into_owned()));
    }
    let resolved: Resolved = config::resolve(name, exp.keys, file, &overrides)?;

    let started = unix_now();
    let clock = Instant::now();
    let output = (exp.run)(&resolved)?;
    let wall = clock.elapsed().as_secs_f64();

    let dir = PathBuf::from(resolved.text("out"));
    std::fs::create_dir_all(&dir).map_err(io(&dir))?;
    let csv = write_records(&dir, name, &output.records)?;
    let report = dir.join(format!("{name}.json"));
    let report_body = json!({ "experiment": name, "config": resolved.to_json(), "result": output.report });
    write(&report, serde_json::to_string_pretty(&report_body).expect("json"))?;
    let echo = dir.join("config.toml");
    write(&echo, resolved.to_toml(name))?;

    let passed = output.checks.iter().all(|(_, ok)| *ok);
    let manifest = json!({
        "experiment": name,
        "config": resolved.to_json(),
        "version": env!("CARGO_PKG_VERSION"),
        "started_unix": started,
        "wall_seconds": wall,
        "checks": output.checks.iter().map(|(c, ok)| json!({"check": c, "passed": ok})).collect::<Vec<_>>(),
        "passed": passed,
        "files": [file_name(&csv), file_name(&report), file_name(&echo)],
    });
    let mpath = dir.join("manifest.json");
    write(&mpath, serde_json::to_string_pretty(&manifest).expect("json"))?;

    for r in &output.records {
        println!("{} {} mean={} stderr={}", r.experiment, serde_json::Value::Object(r.params.clone()), r.mean, r.stderr);
    }
    for (c, ok) in &output.checks {
        println!("check {}: {c}", if *ok { "PASS" } else { "FAIL" });
    }
    println!("wrote {}", dir.display());
    Ok(passed)
}

fn run_suite(name: &str, seed: u64, out: Option<&Path>) -> Result<bool, Failure> {
    suite::suite_criteria(name)?;
    let started = unix_now();
    let clock = Instant::now();
    let outcomes = suite::run_suite(name, seed)?;
    for o in &outcomes {
        println!("{}", o.line());
    }
    let passed = outcomes.iter().all(|o| o.passed());
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let records: Vec<EstimateRecord> =
            outcomes.iter().flat_map(|o| o.records.iter().cloned()).collect();
        let csv = write_records(dir, &format!("suite_{name}"), &records)?;
        let manifest = json!({
            "suite": name,
            "seed": seed,
            "version": env!("CARGO_PKG_VERSION"),
            "started_unix": started,
            "wall_seconds": clock.elapsed().as_secs_f64(),
            "criteria": outcomes.iter().map(|o| json!({
                "id": o.id, "title": o.title, "passed": o.passed(), "checks": o.checks, "failures": o.failures,
            })).collect::<Vec<_>>(),
            "passed": passed,
            "files": [file_name(&csv)],
        });
        write(&dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("json"))?;
    }
    Ok(passed)
}

fn list() {
    for e in experiments::REGISTRY {
        let keys: Vec<String> = e
            .keys
            .iter()
            .chain(&config::COMMON)
            .map(|k| format!("{}={}", k.name, k.default))
            .collect();
        println!("{:<24} {}\n{:<24} {}", e.name, e.about, "", keys.join(" "));
    }
    println!("suites: {}", suite::SUITES.join(", "));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            experiment,
            assignments,
            config,
            out,
        } => run(experiment, assignments, config.as_deref(), out.as_deref()),
        Command::Suite { name, seed, out } => run_suite(name, *seed, out.as_deref()),
        Command::List => {
            list();
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Schema(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
