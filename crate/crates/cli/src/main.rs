use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use nccz_cli::{
    assemble_config, emit_report, read_config_file, run_experiment, CliError, Experiment,
};

/// Run one experiment from the nccz catalog.
#[derive(Parser, Debug)]
#[command(name = "nccz", version)]
struct Args {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment name; overrides the config.
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json, csv or summary.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads for sample-level parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    /// Extra `key=value` assignment; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the canonical config and exit.
    #[arg(long)]
    print_config: bool,
    /// List experiment names and exit.
    #[arg(long)]
    list: bool,
}

fn overrides(a: &Args) -> Result<Vec<(String, String)>, CliError> {
    let mut o = Vec::new();
    for s in &a.set {
        let (k, v) = s.split_once('=').ok_or_else(|| CliError::Config {
            line: 0,
            msg: format!("--set expects KEY=VALUE, got `{s}`"),
        })?;
        o.push((k.trim().to_string(), v.trim().to_string()));
    }
    let mut push = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            o.push((k.to_string(), v));
        }
    };
    push("experiment", a.experiment.clone());
    push("seed", a.seed.map(|s| s.to_string()));
    push(
        "output.path",
        a.out.as_ref().map(|p| p.display().to_string()),
    );
    push("output.format", a.format.clone());
    push("jobs", a.jobs.map(|j| j.to_string()));
    Ok(o)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list {
        for e in Experiment::ALL {
            println!("{e}");
        }
        return ExitCode::SUCCESS;
    }
    let cfg = overrides(&args).and_then(|o| {
        let text = args.config.as_deref().map(read_config_file).transpose()?;
        assemble_config(text.as_deref(), &o)
    });
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("nccz: {e}");
            return ExitCode::from(2);
        }
    };
    if args.print_config {
        print!("{}", cfg.to_text());
        return ExitCode::SUCCESS;
    }
    let t0 = Instant::now();
    let result = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("nccz: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit_report(&result, cfg.format, cfg.out.as_deref()) {
        eprintln!("nccz: {e}");
        return ExitCode::from(3);
    }
    let c = result.counts;
    eprintln!(
        "nccz: {} pass {} fail {} measured {} error {} in {:.2}s",
        result.experiment,
        c.pass,
        c.fail,
        c.measured,
        c.error,
        t0.elapsed().as_secs_f64()
    );
    if result.failures() == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
