use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use identforge::algebra::DEFAULT_PRIME;
use identforge::basis::DEFAULT_POOL_CAP;
use identforge::groebner::{Budget, ExportFormat};
use identforge::pipeline::{bench_table, run_pipeline, Mode, RunConfig, RunOutcome};
use num_rational::BigRational;

#[global_allocator]
static ALLOC: identforge::mem::CountingAlloc = identforge::mem::CountingAlloc;

const EXIT_ERROR: u8 = 1;
const EXIT_BUDGET: u8 = 2;

/// Structural identifiability with transcendence-basis elimination.
#[derive(Parser)]
#[command(name = "identforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one model through the pipeline.
    Run {
        model: PathBuf,
        #[command(flatten)]
        opts: Opts,
        #[arg(long, value_parser = parse_mode, default_value = "default")]
        mode: Mode,
        /// Print a Maple, Magma or generic script instead of running the internal engine.
        #[arg(long, value_parser = parse_format)]
        export: Option<ExportFormat>,
        /// Print the candidate entropies as CSV.
        #[arg(long)]
        report_entropy: bool,
        /// Also run default mode and print a timing row.
        #[arg(long)]
        bench: bool,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        /// Write report, substitution record, timing row and pool dump here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Timing table over several models.
    Bench {
        #[arg(required = true)]
        models: Vec<PathBuf>,
        #[command(flatten)]
        opts: Opts,
        /// Comma-separated modes.
        #[arg(long, value_delimiter = ',', value_parser = parse_mode, default_value = "default,zerodim")]
        modes: Vec<Mode>,
        /// Write the CSV table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Opts {
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    prime: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Weight file for zerodim-weights (`name weight` per line).
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Cap on the candidate pool size.
    #[arg(long, default_value_t = DEFAULT_POOL_CAP)]
    candidates: usize,
    /// Target probability of correctness, as a decimal or a fraction.
    #[arg(long, default_value = "0.99", value_parser = parse_prob)]
    prob: BigRational,
    /// Cap on processed S-pairs (0 lifts it).
    #[arg(long, default_value_t = 1_000_000)]
    max_pairs: u64,
    /// Cap on Gröbner seconds (0 lifts it); IDENTFORGE_BUDGET_SECS overrides.
    #[arg(long, default_value_t = 600.0)]
    max_secs: f64,
}

impl Opts {
    fn config(&self, model: PathBuf, mode: Mode) -> RunConfig {
        RunConfig {
            prime: self.prime,
            seed: self.seed,
            candidates: self.candidates,
            mode,
            weights: self.weights.clone(),
            prob: self.prob.clone(),
            budget: Budget {
                max_pairs: (self.max_pairs > 0).then_some(self.max_pairs),
                max_secs: (self.max_secs > 0.0).then_some(self.max_secs),
            },
            ..RunConfig::new(model)
        }
    }
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: identforge::pipeline::PipelineError| e.to_string())
}

fn parse_format(s: &str) -> Result<ExportFormat, String> {
    s.parse().map_err(|e: identforge::groebner::ExportError| e.to_string())
}

fn parse_prob(s: &str) -> Result<BigRational, String> {
    let bad = || format!("\"{s}\" is not a probability");
    if let Some((n, d)) = s.split_once('/') {
        let n = n.trim().parse::<i64>().map_err(|_| bad())?;
        let d = d.trim().parse::<i64>().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(BigRational::new(n.into(), d.into()));
    }
    let (int, frac) = s.trim().split_once('.').unwrap_or((s.trim(), ""));
    let digits = format!("{int}{frac}");
    let n: i64 = digits.parse().map_err(|_| bad())?;
    Ok(BigRational::new(n.into(), 10i64.pow(frac.len() as u32).into()))
}

fn write(dir: &Option<PathBuf>, name: &str, text: &str) -> Result<()> {
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).with_context(|| format!("create {}", dir.display()))?;
        let path = dir.join(name);
        std::fs::write(&path, text).with_context(|| format!("write {}", path.display()))?;
    }
    Ok(())
}

fn report_outcome(out: &RunOutcome, json: bool, report_entropy: bool, dir: &Option<PathBuf>) -> Result<()> {
    if let Some(script) = &out.script {
        for w in &script.warnings {
            eprintln!("warning: {w}");
        }
        print!("{}", script.text);
        write(dir, "script.txt", &script.text)?;
    } else if json {
        let report = out.report.as_ref().map(|r| r.to_json()).unwrap_or_else(|| "null".into());
        println!("{report}");
    } else {
        print!("{}", out.summary());
    }
    if report_entropy {
        if let Some(csv) = out.entropy_csv() {
            print!("{csv}");
            write(dir, "entropy.csv", &csv)?;
        }
    }
    if let Some(r) = &out.report {
        write(dir, "report.json", &r.to_json())?;
    }
    if let Some(s) = &out.substitution {
        write(dir, "substitution.json", &s.to_json())?;
    }
    if let Some(p) = &out.pool {
        write(dir, "pool.txt", &p.dump())?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { model, opts, mode, export, report_entropy, bench, json, out } => {
            let mut cfg = opts.config(model.clone(), mode);
            cfg.export = export;
            cfg.report_entropy = report_entropy;
            let outcome = run_pipeline(&cfg).with_context(|| format!("{}", model.display()))?;
            report_outcome(&outcome, json, report_entropy, &out)?;
            let mut exhausted = outcome.budget_exhausted();
            if bench {
                let modes = if mode == Mode::Default { vec![Mode::Default, Mode::ZeroDim] } else { vec![Mode::Default, mode] };
                let table = bench_table(&[model], &modes, &cfg);
                print!("{}", table.text());
                write(&out, "timing.csv", &table.csv())?;
                exhausted |= table.rows.iter().flat_map(|r| &r.cells).any(|c| c.seconds.is_some() && !c.complete);
            } else if outcome.gb_stats.is_some() {
                let table = identforge::pipeline::BenchTable { modes: vec![mode], rows: vec![outcome.bench_row()] };
                write(&out, "timing.csv", &table.csv())?;
            }
            if exhausted {
                eprintln!("budget exhausted: the Gröbner basis is incomplete");
                return Ok(ExitCode::from(EXIT_BUDGET));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { models, opts, modes, csv } => {
            let cfg = opts.config(PathBuf::new(), Mode::Default);
            let table = bench_table(&models, &modes, &cfg);
            print!("{}", table.text());
            if let Some(path) = csv {
                std::fs::write(&path, table.csv()).with_context(|| format!("write {}", path.display()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
