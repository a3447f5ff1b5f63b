use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use geomhj_cli::commands::{self, Options};
use geomhj_cli::config::ScenarioConfig;
use geomhj_cli::scenario;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "geomhj", version, about = "Hamilton-Jacobi checks on geometric mechanics scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the defining identities of the configured structure.
    Validate(Common),
    /// Print the symbolic vector field.
    Vf(Common),
    /// Integrate the vector field and write a CSV trajectory.
    Flow(Common),
    /// Run the Hamilton-Jacobi evaluators on the configured sections.
    Hj(Common),
    /// Classify the bracket by antisymmetry, Leibniz and Jacobi.
    Audit(Common),
    /// List or run the bundled scenarios.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    List,
    /// validate, vf, flow, hj and audit against the expected verdicts.
    Run {
        name: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Directory for the CSV and report files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Approach {
    #[value(name = "I")]
    One,
    #[value(name = "II")]
    Two,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Hamiltonian,
    Gradient,
    Evolution,
    Conformal,
    Forced,
}

#[derive(Args)]
struct Common {
    /// Scenario file, or `builtin:<name>`.
    #[arg(long, conflicts_with = "builtin")]
    config: Option<String>,
    /// Name of a bundled scenario.
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Residual tolerance (relative to 1 + max|H∘γ|).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    approach: Option<Approach>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Run only the named section.
    #[arg(long)]
    section: Option<String>,
    /// Re-verify the defining contractions of the printed field.
    #[arg(long)]
    check: bool,
}

impl Common {
    fn load(&self) -> Result<(ScenarioConfig, Options)> {
        let mut cfg = match (&self.config, &self.builtin) {
            (Some(c), _) => match c.strip_prefix("builtin:") {
                Some(name) => scenario::load(name)?,
                None => ScenarioConfig::load(&PathBuf::from(c))?,
            },
            (None, Some(b)) => scenario::load(b)?,
            (None, None) => bail!("pass --config <path> or --builtin <name>"),
        };
        let opts = Options {
            seed: self.seed,
            tol: self.tol,
            out: self.out.clone(),
            approach: self.approach.map(|a| match a {
                Approach::One => "I".to_string(),
                Approach::Two => "II".to_string(),
            }),
            variant: self.variant.map(|v| {
                match v {
                    VariantArg::Hamiltonian => "hamiltonian",
                    VariantArg::Gradient => "gradient",
                    VariantArg::Evolution => "evolution",
                    VariantArg::Conformal => "conformal",
                    VariantArg::Forced => "forced",
                }
                .to_string()
            }),
            section: self.section.clone(),
            check: self.check,
        };
        opts.apply(&mut cfg);
        Ok((cfg, opts))
    }
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<bool> {
    type Cmd = fn(&ScenarioConfig, &Options, &mut dyn Write) -> Result<bool>;
    let (common, cmd): (&Common, Cmd) = match &cli.command {
        Command::Validate(c) => (c, commands::validate),
        Command::Vf(c) => (c, commands::vf),
        Command::Flow(c) => (c, commands::flow),
        Command::Hj(c) => (c, commands::hj),
        Command::Audit(c) => (c, commands::audit),
        Command::Scenario { action: ScenarioAction::List } => return commands::scenario_list(out),
        Command::Scenario { action: ScenarioAction::Run { name, seed, tol, out: dir } } => {
            let opts = Options { seed: *seed, tol: *tol, out: dir.clone(), ..Options::default() };
            return commands::scenario_run(name, &opts, out);
        }
    };
    let (cfg, opts) = common.load()?;
    cmd(&cfg, &opts, out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}
