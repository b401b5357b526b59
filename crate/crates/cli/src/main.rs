//! `stressdetect`: batch experiments on synthetic or recorded cohorts.

mod commands;
mod report;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;
use settings::Overrides;

#[derive(Parser)]
#[command(name = "stressdetect", version, about = "Personalized stress detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for participant jobs (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Flat `key = value` settings file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort with planted ground truth.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        generator: GeneratorArgs,
        /// Also write raw sensor streams.
        #[arg(long)]
        raw: bool,
    },
    /// Recompute feature files from raw streams and write fused datasets.
    Extract {
        #[arg(long)]
        cohort: PathBuf,
    },
    /// Train one model per participant.
    Train {
        #[arg(long)]
        cohort: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        experiment: ExperimentArgs,
    },
    /// Evaluate trained models and write report.json and traces.
    Eval {
        #[arg(long)]
        cohort: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        experiment: ExperimentArgs,
    },
    /// Write the cohort feature ranking of an evaluated run.
    Rank {
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize every run under a results directory as markdown.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate (unless --cohort is given), extract, train, evaluate, rank
    /// and report.
    All {
        #[arg(long)]
        out: PathBuf,
        /// Existing cohort to use instead of generating one under OUT/cohort.
        #[arg(long)]
        cohort: Option<PathBuf>,
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Run the comparison suite (classifiers, modalities, T=5) instead of
        /// a single configuration.
        #[arg(long)]
        suite: bool,
        #[arg(long)]
        raw: bool,
    },
}

#[derive(Args, Default)]
struct GeneratorArgs {
    /// Class separability in [0, 1].
    #[arg(long)]
    separability: Option<String>,
    /// Number of participants.
    #[arg(long = "cohort-size")]
    cohort_size: Option<String>,
    /// Generator profile: default or planted.
    #[arg(long)]
    profile: Option<String>,
}

#[derive(Args, Default)]
struct ExperimentArgs {
    /// phys, badge or combined.
    #[arg(long)]
    modality: Option<String>,
    /// adaboost, svm_linear or svm_rbf.
    #[arg(long)]
    classifier: Option<String>,
    /// AdaBoost rounds.
    #[arg(long = "T")]
    t: Option<String>,
    /// Linear SVM box constraint.
    #[arg(long = "C")]
    c: Option<String>,
    /// Seed for the generator and the train/test split.
    #[arg(long)]
    seed: Option<String>,
}

impl GeneratorArgs {
    fn push(&self, o: &mut Overrides) {
        o.push_opt("separability", &self.separability);
        o.push_opt("cohort_size", &self.cohort_size);
        o.push_opt("profile", &self.profile);
    }
}

impl ExperimentArgs {
    fn push(&self, o: &mut Overrides) {
        o.push_opt("modality", &self.modality);
        o.push_opt("classifier", &self.classifier);
        o.push_opt("T", &self.t);
        o.push_opt("C", &self.c);
        if let Some(seed) = &self.seed {
            o.push("seed", seed);
            o.push("synth_seed", seed);
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot start {} workers: {e}", cli.jobs)))?;
    let mut flags = Overrides::default();
    match &cli.command {
        Command::Synth { generator, .. } => generator.push(&mut flags),
        Command::Train { experiment, .. } | Command::Eval { experiment, .. } => experiment.push(&mut flags),
        Command::All { generator, experiment, .. } => {
            generator.push(&mut flags);
            experiment.push(&mut flags);
        }
        Command::Extract { .. } | Command::Rank { .. } | Command::Report { .. } => {}
    }
    let settings = settings::load(cli.config.as_deref(), &flags)?;
    match cli.command {
        Command::Synth { out, raw, .. } => commands::synth(&out, &settings.generator, raw),
        Command::Extract { cohort } => commands::extract(&cohort),
        Command::Train { cohort, out, .. } => commands::train(&cohort, &out, &settings.experiment),
        Command::Eval { cohort, out, .. } => commands::eval(&cohort, &out, &settings.experiment).map(|_| ()),
        Command::Rank { out } => commands::rank(&out),
        Command::Report { out } => commands::report(&out),
        Command::All { out, cohort, suite, raw, .. } => commands::all(&out, cohort.as_deref(), &settings, suite, raw),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            for line in &e.messages {
                eprintln!("error: {line}");
            }
            ExitCode::from(e.code)
        }
    }
}
