use clap::Parser;
use disorder_lab::runner::{self, Format, RunConfig};
use disorder_lab::LabError;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "disorder-lab",
    version,
    about = "Run one named experiment and emit its report"
)]
struct Cli {
    /// Experiment name (see --list).
    #[arg(required_unless_present = "list")]
    experiment: Option<String>,
    /// Flat key = value TOML file with the experiment parameters.
    #[arg(long, required_unless_present = "list")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    phase_guard_bits: Option<u32>,
    /// List the experiments and their parameters.
    #[arg(long)]
    list: bool,
}

fn list() {
    for e in runner::registry() {
        println!("{:<14} {}", e.name, e.summary);
        for p in e.schema {
            println!("    {:<18} {:?}, {:?}: {}", p.name, p.kind, p.default, p.doc);
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig, LabError> {
    let path = cli.config.as_ref().expect("clap enforces --config");
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(cli.experiment.as_deref(), &text)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(p) = &cli.out {
        cfg.output_path = Some(p.clone());
    }
    if let Some(f) = &cli.format {
        cfg.format = f.parse::<Format>()?;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if let Some(b) = cli.phase_guard_bits {
        cfg.phase_guard_bits = b;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        list();
        return ExitCode::SUCCESS;
    }
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("disorder-lab: {e}");
            return ExitCode::from(runner::error_exit_code(&e) as u8);
        }
    };
    let outcome = runner::run_experiment(&cfg);
    let code = runner::exit_code(&outcome);
    match &outcome {
        Ok(report) => {
            let written = match &cfg.output_path {
                Some(path) => runner::write_report(path, report, cfg.format),
                None => runner::emit_report(report, cfg.format)
                    .and_then(|b| std::io::stdout().write_all(&b).map_err(LabError::from)),
            };
            if let Err(e) = written {
                eprintln!("disorder-lab: {e}");
                return ExitCode::from(3);
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let failed = report.records.iter().filter(|r| !r.pass).count();
            eprintln!(
                "{}: {} records, {failed} failed, {:.2} s",
                report.experiment,
                report.records.len(),
                report.runtime_seconds
            );
        }
        Err(e) => eprintln!("disorder-lab: {e}"),
    }
    ExitCode::from(code as u8)
}
