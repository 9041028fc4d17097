//! Command-line front end for bakesynth.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
pub mod config;
mod error;

pub use config::{BankName, Overrides, Preset, RunConfig, SEED_ENV};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "bakesynth",
    version,
    about = "Copy-paste synthesis of annotated object detection datasets"
)]
pub struct Cli {
    /// Directory every relative path is resolved against.
    #[arg(long, global = true, default_value = ".")]
    pub root: PathBuf,

    /// JSON run configuration; see `bakesynth config --defaults`.
    #[arg(long, short = 'c', global = true)]
    pub config: Option<PathBuf>,

    /// Maximum number of worker threads.
    #[arg(long, short = 'j', global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// Seed for every random choice. Falls back to the config file, then
    /// to the BAKESYNTH_SEED environment variable, then to 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// More log output; repeat for more.
    #[arg(long, short = 'v', global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Only warnings and errors.
    #[arg(long, short = 'q', global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive boxes and crops from single-object images with candidate masks.
    ///
    /// The input directory holds, per image id: `<id>.png` (or .jpg), a
    /// `<id>.label` text file with the class label, and a `<id>.masks/`
    /// directory of candidate mask PNGs, any nonzero pixel being
    /// foreground. The output directory becomes a crop bank.
    Annotate(IoArgs),
    /// Compose a synthetic dataset from object banks and backgrounds.
    Synthesize(SynthesizeArgs),
    /// Report image, annotation and class statistics of a dataset.
    Stats(StatsArgs),
    /// Standardize and augment a dataset for training.
    Augment(AugmentArgs),
    /// Check a dataset's labels against every invariant.
    Validate(DirArg),
    /// Print the resolved configuration, or the defaults.
    Config(ConfigArgs),
}

#[derive(Debug, Args)]
pub struct IoArgs {
    #[arg(long, short = 'i')]
    pub input: Option<PathBuf>,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Number of images to generate.
    #[arg(short = 'n', long = "images")]
    pub n_images: Option<u64>,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Object bank directory, as NAME=DIR (train_b, train_c or train_s).
    #[arg(long = "bank", value_name = "NAME=DIR", value_parser = config::parse_bank_arg)]
    pub banks: Vec<(BankName, PathBuf)>,
    #[arg(long)]
    pub backgrounds: Option<PathBuf>,
    /// Oversample underrepresented classes.
    #[arg(long, overrides_with = "no_balance")]
    pub balance: bool,
    #[arg(long)]
    pub no_balance: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub dir: PathBuf,
    /// Also write the report as JSON; `-` prints JSON instead of text.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Resize so the longer side has this many pixels; 0 keeps sizes.
    #[arg(long, value_name = "PX")]
    pub longest_side: Option<u32>,
    /// Skip the online augmentation chain; only standardize.
    #[arg(long)]
    pub no_dp: bool,
}

#[derive(Debug, Args)]
pub struct DirArg {
    pub dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Print the built-in defaults instead of the resolved configuration.
    #[arg(long)]
    pub defaults: bool,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        let mut o = Overrides {
            seed: self.seed,
            jobs: self.jobs,
            ..Default::default()
        };
        match &self.command {
            Command::Annotate(io) => {
                o.input = io.input.clone();
                o.output = io.output.clone();
            }
            Command::Synthesize(a) => {
                o.n_images = a.n_images;
                o.output = a.output.clone();
                o.preset = a.preset;
                o.banks = a.banks.clone();
                o.backgrounds = a.backgrounds.clone();
                o.balance = match (a.balance, a.no_balance) {
                    (true, _) => Some(true),
                    (_, true) => Some(false),
                    _ => None,
                };
            }
            Command::Augment(a) => {
                o.input = a.io.input.clone();
                o.output = a.io.output.clone();
                o.longest_side = a.longest_side.map(|s| (s > 0).then_some(s));
                o.no_augment = a.no_dp;
            }
            _ => {}
        }
        o
    }
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => "warn",
        (false, 0) => "info",
        (false, 1) => "debug",
        _ => "trace",
    };
    let env = env_logger::Env::default().default_filter_or(level);
    // a second init (tests running commands in-process) is harmless
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .format_target(false)
        .try_init();
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    init_logging(cli.verbose, cli.quiet);
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    if let Command::Config(ConfigArgs { defaults: true }) = cli.command {
        println!("{}", RunConfig::defaults_json());
        return Ok(0);
    }
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = RunConfig::resolve(
        &cli.root,
        cli.config.as_deref(),
        cli.overrides(),
        env_seed.as_deref(),
    )?;
    log::info!(
        "resolved config {}: {}",
        cfg.hash(),
        serde_json::to_string(&cfg).expect("config serializes")
    );

    match &cli.command {
        Command::Annotate(_) => commands::annotate(&cfg),
        Command::Synthesize(_) => commands::synthesize(&cfg),
        Command::Stats(a) => commands::stats(&cli.root, &a.dir, a.json.as_deref()),
        Command::Augment(_) => commands::augment(&cfg),
        Command::Validate(a) => commands::validate(&cfg, &cli.root.join(&a.dir)),
        Command::Config(_) => {
            println!("{}", cfg.to_json());
            Ok(0)
        }
    }
}
