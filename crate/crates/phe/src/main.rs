use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phe::campaign::{run_campaign, RunOptions};
use phe::config::{CampaignConfig, Check, ConfigError};
use phe::ode::run_ode;
use phe::report::{diff_reports, Status, VerificationReport};

#[derive(Parser)]
#[command(name = "phe", version, about = "Verify para-Hermite Einstein metrics numerically")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Run the checks listed in the config.
    Verify(RunArgs),
    /// Run only the Petrov and congruence checks.
    Classify(RunArgs),
    /// Integrate the config's `ode` section.
    Ode(RunArgs),
    /// Work with report files.
    Report {
        #[command(subcommand)]
        cmd: ReportCmd,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// List the places where two reports differ (timestamps are ignored).
    Diff { a: PathBuf, b: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Override the sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override every residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the number of sampled points.
    #[arg(long)]
    points: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record this text as the report timestamp.
    #[arg(long)]
    stamp: Option<String>,
}

impl RunArgs {
    fn load(&self) -> Result<CampaignConfig, ConfigError> {
        let mut cfg = CampaignConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            cfg.sampling.seed = s;
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(ConfigError::Invalid("--tol must be positive".into()));
            }
            cfg.tolerances.override_all(t);
        }
        if let Some(n) = self.points {
            cfg.sampling.count = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn options(&self) -> RunOptions {
        RunOptions { stamp: self.stamp.clone() }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn summarize(rep: &VerificationReport) {
    for c in &rep.checks {
        let status = match c.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::NotApplicable => "n/a",
        };
        let max = c.max_residual.map_or(String::new(), |m| format!(" max {m:.2e}"));
        let classes: Vec<String> = c.classifications.iter().map(|(k, n)| format!("{k}x{n}")).collect();
        let algebra = c.algebra.as_ref().map_or(String::new(), |a| format!(" algebra {}", a.name));
        eprintln!("{:<11} {status}{max} {}{algebra}", c.check, classes.join(" "));
        for n in &c.notes {
            eprintln!("            {n}");
        }
    }
}

fn run(cli: Cli) -> Result<i32, (i32, String)> {
    let config_err = |e: ConfigError| (2, e.to_string());
    match cli.verb {
        Verb::Verify(args) => {
            let cfg = args.load().map_err(config_err)?;
            let rep = run_campaign(&cfg, &args.options()).map_err(config_err)?;
            summarize(&rep);
            emit(args.out.as_deref(), &rep.to_json()).map_err(|e| (2, e))?;
            Ok(rep.exit_code())
        }
        Verb::Classify(args) => {
            let mut cfg = args.load().map_err(config_err)?;
            cfg.checks = vec![Check::Petrov, Check::Congruence];
            let rep = run_campaign(&cfg, &args.options()).map_err(config_err)?;
            summarize(&rep);
            emit(args.out.as_deref(), &rep.to_json()).map_err(|e| (2, e))?;
            Ok(rep.exit_code())
        }
        Verb::Ode(args) => {
            let cfg = args.load().map_err(config_err)?;
            let rep = run_ode(&cfg, &args.options()).map_err(config_err)?;
            if let Some(e) = &rep.error {
                eprintln!("ode: {e}");
            }
            emit(args.out.as_deref(), &rep.to_json()).map_err(|e| (2, e))?;
            Ok(rep.exit_code())
        }
        Verb::Report { cmd: ReportCmd::Diff { a, b } } => {
            let read = |p: &Path| -> Result<serde_json::Value, (i32, String)> {
                let text = std::fs::read_to_string(p).map_err(|e| (2, format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| (2, format!("{}: {e}", p.display())))
            };
            let diffs = diff_reports(&read(&a)?, &read(&b)?);
            for d in &diffs {
                println!("{d}");
            }
            Ok(if diffs.is_empty() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
