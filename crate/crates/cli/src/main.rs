use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scriptswitch::eval::Scope;
use scriptswitch::fixtures::{self, FixtureConfig};
use scriptswitch::{LanguageCondition, Provenance};
use scriptswitch_cli::error::{CliError, CliResult, Context, ErrorKind};
use scriptswitch_cli::predict::run_predict;
use scriptswitch_cli::{Experiment, ExperimentConfig, Overrides, Runner, Stage};

#[derive(Parser)]
#[command(name = "scriptswitch", version, about = "Script-switch aware homophobia/transphobia detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    /// Experiment configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides `data_dir` from the config and SCRIPTSWITCH_DATA_DIR.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    languages: Option<Vec<LanguageCondition>>,
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<Provenance>>,
    #[arg(long, value_delimiter = ',')]
    scopes: Option<Vec<Scope>>,
    #[arg(long)]
    sample_fraction: Option<f64>,
    #[arg(long)]
    vocabulary_size: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Re-run the named stage even if its outputs are up to date.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus summary, class distribution and script-mix reports.
    Stats(ExperimentArgs),
    /// Build the synthetic (transliterated) adaptation corpus.
    Augment(ExperimentArgs),
    /// Build language profiles and mine the organic adaptation corpus.
    Mine(ExperimentArgs),
    /// Fit one feature model per adaptation corpus.
    Adapt(ExperimentArgs),
    /// Train every enabled classifier.
    Train(ExperimentArgs),
    /// Score every grid cell on its held-out test part.
    Evaluate(ExperimentArgs),
    /// Pick per-language winners and nominate a configuration.
    Select(ExperimentArgs),
    /// The whole pipeline.
    Run(ExperimentArgs),
    /// Label each line of a text file; writes JSON Lines.
    Predict {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(short, long)]
        input: PathBuf,
        /// Defaults to standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic ten-language data bundle and a matching config.
    Fixtures {
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Fraction of the shared-task dataset sizes.
        #[arg(long, default_value_t = FixtureConfig::default().scale)]
        scale: f64,
        #[arg(long, default_value_t = FixtureConfig::default().abstracts_per_language)]
        abstracts: usize,
        #[arg(long, default_value_t = FixtureConfig::default().stream_size)]
        stream: usize,
    },
}

impl ExperimentArgs {
    fn load(&self) -> CliResult<Experiment> {
        let overrides = Overrides {
            seed: self.seed,
            output_dir: self.output_dir.clone(),
            data_dir: self.data_dir.clone(),
            languages: self.languages.clone(),
            variants: self.variants.clone(),
            scopes: self.scopes.clone(),
            sample_fraction: self.sample_fraction,
            vocabulary_size: self.vocabulary_size,
            epochs: self.epochs,
        };
        Experiment::load(&self.config, &overrides)
    }
}

fn run_stage(args: &ExperimentArgs, stage: Option<Stage>) -> CliResult<()> {
    let mut runner = Runner::new(args.load()?, args.force);
    match stage {
        Some(stage) => {
            runner.run(stage)?;
        }
        None => runner.run_all()?,
    }
    println!("{}", runner.exp.output_dir.display());
    Ok(())
}

fn write_fixtures(out: &Path, seed: u64, config: FixtureConfig) -> CliResult<()> {
    const S: &str = "fixtures";
    let bundle = fixtures::generate(&config, seed).ctx(ErrorKind::Config, S)?;
    bundle.write(out).ctx(ErrorKind::Data, S)?;
    let experiment = ExperimentConfig {
        seed: Some(seed),
        ..Default::default()
    };
    std::fs::write(out.join("experiment.toml"), experiment.to_toml()).ctx(ErrorKind::Data, S)?;
    println!("{}", out.join("experiment.toml").display());
    Ok(())
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Stats(a) => run_stage(&a, Some(Stage::Stats)),
        Command::Augment(a) => run_stage(&a, Some(Stage::Augment)),
        Command::Mine(a) => run_stage(&a, Some(Stage::Mine)),
        Command::Adapt(a) => run_stage(&a, Some(Stage::Adapt)),
        Command::Train(a) => run_stage(&a, Some(Stage::Train)),
        Command::Evaluate(a) => run_stage(&a, Some(Stage::Evaluate)),
        Command::Select(a) => run_stage(&a, Some(Stage::Select)),
        Command::Run(a) => run_stage(&a, None),
        Command::Predict { model, input, output } => run_predict(&model, &input, output.as_deref()).map(|_| ()),
        Command::Fixtures {
            out,
            seed,
            scale,
            abstracts,
            stream,
        } => write_fixtures(
            &out,
            seed,
            FixtureConfig {
                scale,
                abstracts_per_language: abstracts,
                stream_size: stream,
                ..Default::default()
            },
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
