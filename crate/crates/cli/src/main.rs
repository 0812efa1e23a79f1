use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use tipsel_core::config::{parse_override, ConfigMap};
use tipsel_core::experiments::{read_regions, Experiment, ExperimentResult};
use tipsel_core::math::{
    continental_takeover_rate, deanon_probability, entropy_degree, hypergeom_pmf, mixer_chain_probability,
    mixer_expected_identified, required_full_nodes, shannon_entropy, AnonymityProfile, AttackParams, ExpectationMode,
    MixerParams, RegionAction,
};
use tipsel_core::output::{self, format_number, OutputFormat};
use tipsel_core::validation::{run_checks, CheckGroup};
use tipsel_core::DEFAULT_SEED;

/// Tip-selection deanonymization toolkit: closed-form analytics, seeded
/// experiments and self-checks.
#[derive(Debug, Parser)]
#[command(name = "tipsel", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one closed-form quantity.
    Analytic {
        #[command(subcommand)]
        op: AnalyticOp,
    },
    /// Run a preset experiment and write its result files.
    Run(RunArgs),
    /// Run the fast self-checks; exits with status 2 if any fails.
    Validate {
        /// Restrict to these groups (repeatable): analytic, determinism, null, realworld.
        #[arg(long = "only", value_name = "GROUP")]
        only: Vec<CheckGroup>,
        /// Region distribution file to check instead of the embedded one.
        #[arg(long, value_name = "FILE")]
        regions: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum AnalyticOp {
    /// Probability that the followed response came from an adversary.
    Deanon {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        c: u64,
        #[arg(long)]
        m: u64,
    },
    /// Distribution of adversarial responses among the M requested.
    Pmf {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        c: u64,
        #[arg(long)]
        m: u64,
        /// Print only this k instead of the whole table.
        #[arg(long)]
        k: Option<u64>,
    },
    /// Shannon entropy and degree of anonymity of a sender distribution.
    Entropy {
        /// Comma-separated probabilities or weights.
        #[arg(long, value_delimiter = ',', required = true)]
        probs: Vec<f64>,
    },
    /// Probability that a mixer chain of length x is identified.
    MixerChain {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        x: u32,
    },
    /// Expected number of identified mixer participants.
    MixerExpected {
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = Mode::Normalized)]
        mode: Mode,
    },
    /// Smallest full-node count keeping the attack rate below a target.
    RequiredNodes {
        #[arg(long)]
        c: u64,
        #[arg(long)]
        target: f64,
    },
    /// Attack rate within one region after an adversarial action.
    Continental {
        /// Honest full nodes in the region.
        #[arg(long)]
        nodes: u64,
        #[arg(long, value_enum)]
        action: Action,
        #[arg(long, default_value_t = 1)]
        k: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Raw,
    Normalized,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Action {
    Takeover,
    Add,
    Collude,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// decentralized, realworld, heatmap, variance, mixer, mitigations or custom.
    experiment: Experiment,
    /// Flat key=value config file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output directory.
    #[arg(long, env = "TIPSEL_OUT", default_value = "results")]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Override one config key (repeatable). Bare keys resolve within the experiment's section.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads; defaults to every available core. Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

fn print_value(v: f64) {
    println!("{v:.6}");
}

fn analytic(op: AnalyticOp) -> Result<()> {
    match op {
        AnalyticOp::Deanon { n, c, m } => print_value(deanon_probability(&AttackParams::new(n, c, m)?)?.value()),
        AnalyticOp::Pmf { n, c, m, k } => {
            let params = AttackParams::new(n, c, m)?;
            match k {
                Some(k) => print_value(hypergeom_pmf(&params, k)?.value()),
                None => {
                    println!("k\tprobability");
                    for k in 0..=m {
                        println!("{k}\t{:.6}", hypergeom_pmf(&params, k)?.value());
                    }
                }
            }
        }
        AnalyticOp::Entropy { probs } => {
            let profile = AnonymityProfile::from_weights(&probs)?;
            println!("entropy\t{:.6}", shannon_entropy(&profile));
            println!("degree\t{:.6}", entropy_degree(&profile));
        }
        AnalyticOp::MixerChain { p, x } => print_value(mixer_chain_probability(&MixerParams::new(p, x)?).value()),
        AnalyticOp::MixerExpected { p, mode } => {
            let mode = match mode {
                Mode::Raw => ExpectationMode::Raw,
                Mode::Normalized => ExpectationMode::Normalized,
            };
            print_value(mixer_expected_identified(p, mode)?);
        }
        AnalyticOp::RequiredNodes { c, target } => println!("{}", required_full_nodes(c, target)?),
        AnalyticOp::Continental { nodes, action, k } => {
            let action = match action {
                Action::Takeover => RegionAction::Takeover(k),
                Action::Add => RegionAction::Add(k),
                Action::Collude => RegionAction::Collude(k),
            };
            print_value(continental_takeover_rate(nodes, action)?.value());
        }
    }
    Ok(())
}

fn read_config(path: &Path) -> Result<ConfigMap> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
    ConfigMap::parse(&text).with_context(|| format!("in {}", path.display()))
}

fn summarize(result: &ExperimentResult) {
    for row in &result.rows {
        match row.dispersion {
            Some(d) => println!("{}\t{}\t{}\t+-{}", row.label, row.metric, format_number(row.value), format_number(d)),
            None => println!("{}\t{}\t{}", row.label, row.metric, format_number(row.value)),
        }
    }
}

fn run(args: RunArgs) -> Result<()> {
    let file = args.config.as_deref().map(read_config).transpose()?;
    let overrides = args.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    let settings = args.experiment.settings(file.as_ref(), &overrides)?;
    let result = args.experiment.run(&settings, args.seed, args.workers)?;
    let paths = output::write_result(&result, &args.out, args.format)?;
    summarize(&result);
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

/// Returns whether every check passed.
fn validate(only: &[CheckGroup], regions: Option<&Path>) -> Result<bool> {
    let dist = regions.map(read_regions).transpose()?;
    let outcomes = run_checks(only, dist.as_ref());
    if outcomes.is_empty() {
        bail!("no checks selected");
    }
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("{status}\t{}\t{}\t{}", o.group, o.name, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} checks, {failed} failed", outcomes.len());
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Analytic { op } => analytic(op).map(|()| true),
        Command::Run(args) => run(args).map(|()| true),
        Command::Validate { only, regions } => validate(&only, regions.as_deref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
