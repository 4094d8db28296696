use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bayesvote::distributions::format_profile;
use bayesvote::experiment::{
    format_report, format_solve, parse_psm, psm_line_sum, run_complexity, run_evaluate, run_solve,
    run_sweep, sample_profiles, strategy_from_psm, ExperimentConfig,
};
use bayesvote::matching::decompose;
use bayesvote::Result;

#[derive(Parser)]
#[command(
    name = "bayesvote",
    version,
    about = "Optimal coalitional manipulation under uncertainty"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample profiles, solve for the best strategy and print its ballots.
    Solve(Experiment),
    /// Measure a strategy's success rate and regret on fresh profiles.
    Evaluate {
        #[command(flatten)]
        experiment: Experiment,
        /// Strategy matrix file, one row per candidate.
        #[arg(long)]
        strategy: PathBuf,
    },
    /// Solve and evaluate over a grid, writing CSV.
    Sweep(Experiment),
    /// Turn a strategy matrix file into explicit ballots.
    Recover {
        /// Matrix file, one row per candidate.
        psm: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print sufficient sample counts.
    Complexity {
        #[arg(long)]
        c: u32,
        #[arg(long)]
        m: usize,
        /// Approval count for the k-approval bound.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        /// Constant of the general bound.
        #[arg(long)]
        constant: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write sampled profiles in ballot-file format.
    Sample {
        #[command(flatten)]
        experiment: Experiment,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

#[derive(Args)]
struct Experiment {
    /// Flat key=value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// plurality | borda | kapproval:K | alpha:a1,...,am
    #[arg(long)]
    rule: Option<String>,
    /// ic | iac | mallows:PHI | mixture:FILE | ballots:FILE | point:FILE
    #[arg(long)]
    dist: Option<String>,
    /// Distribution for evaluation, if different from --dist.
    #[arg(long)]
    eval_dist: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    /// Mallows reference ranking, e.g. 0,1,2,3,4,5.
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    c: Option<u32>,
    /// Candidate index or rank:K.
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    tsolve: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    budget_secs: Option<f64>,
    /// drop | complete
    #[arg(long)]
    truncation: Option<String>,
    #[arg(long)]
    sweep_n: Option<String>,
    #[arg(long)]
    sweep_phi: Option<String>,
    #[arg(long)]
    sweep_d: Option<String>,
    /// Report wall-clock solve times.
    #[arg(long)]
    timings: bool,
    /// Extra KEY=VALUE settings.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Experiment {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let seed = self.seed.map(|s| s.to_string());
        let n = self.n.map(|v| v.to_string());
        let m = self.m.map(|v| v.to_string());
        let c = self.c.map(|v| v.to_string());
        let tsolve = self.tsolve.map(|v| v.to_string());
        let trials = self.trials.map(|v| v.to_string());
        let budget = self.budget_secs.map(|v| v.to_string());
        let pairs: [(&str, Option<&String>); 15] = [
            ("seed", seed.as_ref()),
            ("rule", self.rule.as_ref()),
            ("dist", self.dist.as_ref()),
            ("eval_dist", self.eval_dist.as_ref()),
            ("m", m.as_ref()),
            ("sigma", self.sigma.as_ref()),
            ("n", n.as_ref()),
            ("c", c.as_ref()),
            ("d", self.d.as_ref()),
            ("tsolve", tsolve.as_ref()),
            ("trials", trials.as_ref()),
            ("budget_secs", budget.as_ref()),
            ("truncation", self.truncation.as_ref()),
            ("sweep_n", self.sweep_n.as_ref()),
            ("sweep_phi", self.sweep_phi.as_ref()),
        ];
        for (key, value) in pairs {
            if let Some(value) = value {
                cfg.set(key, value)?;
            }
        }
        if let Some(value) = &self.sweep_d {
            cfg.set("sweep_d", value)?;
        }
        if self.timings {
            cfg.timings = true;
        }
        for item in &self.set {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| bayesvote::Error::Config {
                    key: item.clone(),
                    message: "expected KEY=VALUE".into(),
                })?;
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve(exp) => {
            let cfg = exp.config()?;
            let out = run_solve(&cfg)?;
            emit(exp.out.as_ref(), &format_solve(&out, cfg.timings))?;
        }
        Command::Evaluate {
            experiment,
            strategy,
        } => {
            let cfg = experiment.config()?;
            let strategy = strategy_from_psm(parse_psm(&fs::read_to_string(strategy)?)?)?;
            let report = run_evaluate(&cfg, &strategy)?;
            emit(experiment.out.as_ref(), &format_report(&report))?;
        }
        Command::Sweep(exp) => {
            let cfg = exp.config()?;
            let table = run_sweep(&cfg)?;
            emit(exp.out.as_ref(), &table.to_csv(cfg.timings))?;
            return Ok(table.all_ok());
        }
        Command::Recover { psm, out } => {
            let x = parse_psm(&fs::read_to_string(psm)?)?;
            let c = psm_line_sum(&x)?;
            let votes = bayesvote::Profile::new(x.m(), decompose(&x, c)?)?;
            emit(out.as_ref(), &format_profile(&votes))?;
        }
        Command::Complexity {
            c,
            m,
            k,
            eps,
            delta,
            constant,
            out,
        } => {
            emit(
                out.as_ref(),
                &run_complexity(c, m, k, eps, delta, constant)?,
            )?;
        }
        Command::Sample { experiment, count } => {
            let cfg = experiment.config()?;
            let profiles = sample_profiles(&cfg, count)?;
            let text: String = profiles
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    if count == 1 {
                        format_profile(p)
                    } else {
                        format!("# profile {}\n{}", i + 1, format_profile(p))
                    }
                })
                .collect();
            emit(experiment.out.as_ref(), &text)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
