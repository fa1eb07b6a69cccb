use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use lowbow::geometry::Metric;
use lowbow::kernels::KernelFamily;
use lowbow_cli::{
    cmd_distance, cmd_embed, cmd_eval, cmd_features, cmd_vocab, EvalOptions, Format, Layout,
    Overrides, Split,
};

/// Documents as smooth curves of local word histograms.
#[derive(Parser)]
#[command(name = "lowbow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a vocabulary from a corpus.
    Vocab {
        corpus: PathBuf,
        /// Words seen fewer times map to a shared out-of-vocabulary token.
        #[arg(long, default_value_t = 1)]
        min_count: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Embed every document of a corpus as a curve.
    Embed {
        corpus: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[command(flatten)]
        settings: Settings,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Distance between corresponding curves of two curve files.
    Distance {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = Metric::Fisher)]
        metric: Metric,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Repeated train/test kNN evaluation.
    Eval {
        corpus: PathBuf,
        /// Vocabulary file; built from the corpus when omitted.
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
        #[arg(long, value_enum, default_value_t)]
        layout: Layout,
        /// Also report lowbow at the scale picked on a validation split.
        #[arg(long)]
        select_sigma: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Tangents, curvature and length of curves in a curve file.
    Features {
        curves: PathBuf,
        /// Metric for path length.
        #[arg(long, default_value_t = Metric::Euclidean)]
        metric: Metric,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Settings {
    /// TOML file with defaults for the options below (kebab-case keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Kernel scale; repeat or separate with commas to sweep in `eval`.
    #[arg(long, value_delimiter = ',')]
    sigma: Vec<f64>,
    #[arg(long)]
    smoothing_c: Option<f64>,
    /// Number of curve samples.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    kernel: Option<KernelFamily>,
    #[arg(long)]
    beta_floor: Option<f64>,
    #[arg(long)]
    metric: Option<Metric>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    train_sizes: Vec<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    min_count: Option<usize>,
    #[arg(long, value_enum)]
    split: Option<Split>,
}

impl Settings {
    fn resolve(self) -> Result<lowbow_cli::RunConfig> {
        let file = match &self.config {
            Some(path) => Overrides::from_toml_file(path)?,
            None => Overrides::default(),
        };
        let flags = Overrides {
            sigma: (!self.sigma.is_empty()).then_some(self.sigma),
            smoothing_c: self.smoothing_c,
            samples: self.samples,
            kernel: self.kernel,
            beta_floor: self.beta_floor,
            metric: self.metric,
            k: self.k,
            seed: self.seed,
            train_sizes: (!self.train_sizes.is_empty()).then_some(self.train_sizes),
            repetitions: self.repetitions,
            min_count: self.min_count,
            split: self.split,
        };
        flags.or(file).resolve()
    }
}

// Output is buffered so a failing command leaves no partial file behind.
fn emit(output: Option<&Path>, run: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    run(&mut buf)?;
    match output {
        Some(path) => fs::write(path, &buf).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(&buf)?;
            Ok(stdout.flush()?)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut diag = io::stderr();
    match cli.command {
        Command::Vocab {
            corpus,
            min_count,
            output,
        } => emit(output.as_deref(), |out| cmd_vocab(&corpus, min_count, out)),
        Command::Embed {
            corpus,
            vocab,
            settings,
            format,
            output,
        } => {
            let config = settings.resolve()?;
            emit(output.as_deref(), |out| {
                cmd_embed(&corpus, &vocab, &config, format, out, &mut diag)
            })
        }
        Command::Distance {
            a,
            b,
            metric,
            output,
        } => emit(output.as_deref(), |out| cmd_distance(&a, &b, metric, out)),
        Command::Eval {
            corpus,
            vocab,
            settings,
            layout,
            select_sigma,
            format,
            output,
        } => {
            let config = settings.resolve()?;
            let options = EvalOptions {
                vocab,
                layout,
                format,
                select_sigma,
            };
            emit(output.as_deref(), |out| {
                cmd_eval(&corpus, &config, &options, out, &mut diag)
            })
        }
        Command::Features {
            curves,
            metric,
            format,
            output,
        } => emit(output.as_deref(), |out| {
            cmd_features(&curves, metric, format, out)
        }),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
