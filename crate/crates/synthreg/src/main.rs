use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use synthreg::{ExperimentConfig, HarnessError, Scenario};

#[derive(Parser, Debug)]
#[command(name = "synthreg", version, about = "Synthetic multivariate regression releases and their exact inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the model to a data file.
    Fit(Common),
    /// Fit a data file and write synthetic releases.
    Synthesize(Common),
    /// Simulate cut-off points for the configured cells.
    Cutoff(Common),
    /// Test hypotheses on synthetic releases of a data file.
    Test(Common),
    /// Coverage of the exact confidence sets.
    Coverage(Common),
    /// Confidence-set radius against its closed form.
    Radius(Common),
    /// Size and power along a line of alternatives.
    Power(Common),
    /// Disclosure-risk measures.
    Privacy(Common),
    /// Classical criteria against the pivot across the correlation of the
    /// error covariance.
    NonpivotalDemo(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration; defaults are used when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides `mc.seed`.
    #[arg(short, long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(short = 'j', long)]
    threads: Option<usize>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

impl Command {
    fn split(self) -> (Scenario, Common) {
        match self {
            Command::Fit(c) => (Scenario::Fit, c),
            Command::Synthesize(c) => (Scenario::Synthesize, c),
            Command::Cutoff(c) => (Scenario::CutoffTable, c),
            Command::Test(c) => (Scenario::Test, c),
            Command::Coverage(c) => (Scenario::Coverage, c),
            Command::Radius(c) => (Scenario::Radius, c),
            Command::Power(c) => (Scenario::Power, c),
            Command::Privacy(c) => (Scenario::Privacy, c),
            Command::NonpivotalDemo(c) => (Scenario::NonPivotalDemo, c),
        }
    }
}

fn resolve(scenario: Scenario, common: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let name = serde_json::to_value(scenario).ok().and_then(|v| v.as_str().map(str::to_owned));
            ExperimentConfig::new(scenario, PathBuf::from("results").join(name.unwrap_or_default()))
        }
    };
    if cfg.scenario != scenario {
        return Err(HarnessError::Config(format!(
            "configuration is for scenario {:?} but the {:?} command was used",
            cfg.scenario, scenario
        )));
    }
    if let Some(seed) = common.seed {
        cfg.mc.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let (scenario, common) = Cli::parse().command.split();
    let outcome = resolve(scenario, &common).and_then(|cfg| {
        if common.print_config {
            print!("{}", cfg.to_toml_string()?);
            return Ok(None);
        }
        match common.threads {
            Some(t) => synthreg::run_with_threads(&cfg, t),
            None => synthreg::run(&cfg),
        }
        .map(Some)
    });
    match outcome {
        Ok(Some(dir)) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = e.to_string();
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                if !msg.contains(&s.to_string()) {
                    msg.push_str(&format!(": {s}"));
                }
                source = s.source();
            }
            eprintln!("error: {msg}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
