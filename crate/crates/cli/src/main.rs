//! `mriseg` command-line front end.

mod commands;
mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mriseg::classifiers::ClassifierKind;

use config::{Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "mriseg", version, about = "Gabor-texture brain MR tissue segmentation")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate labeled phantom images and a manifest
    Phantom {
        #[arg(long, short = 'n')]
        count: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Write the nine feature channels of an image as PNGs
    Features {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Train one classifier on every image of a manifest
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Segment an image with a trained model
    Segment {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Color overlay PNG path
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
    /// Leave-one-out evaluation of one classifier
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Leave-one-out comparison of all classifiers, rule table and hybrid
    Compare {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Fuse four trained models with a rule table
    Hybrid {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        pnn: PathBuf,
        #[arg(long)]
        knn: PathBuf,
        #[arg(long)]
        isnn: PathBuf,
        #[arg(long)]
        svm: PathBuf,
        #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
        image: Option<PathBuf>,
        /// Ground-truth label map for scoring a single image
        #[arg(long, requires = "image")]
        truth: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Output label map (with --image) or directory (with --manifest)
        #[arg(long, short)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> mriseg::Result<()> {
    let cfg = RunConfig::resolve(&cli.overrides)?;
    match &cli.command {
        Command::Phantom { count, out } => commands::phantom(&cfg, *count, out),
        Command::Features { image, out } => commands::features(&cfg, image, out),
        Command::Train { manifest, out } => commands::train(&cfg, manifest, out),
        Command::Segment { image, model, out, overlay } => {
            commands::segment(&cfg, image, model, out, overlay.as_deref())
        }
        Command::Evaluate { manifest, out } => commands::evaluate(&cfg, manifest, out),
        Command::Compare { manifest, out } => commands::compare(&cfg, manifest, out),
        Command::Hybrid { rules, pnn, knn, isnn, svm, image, truth, manifest, out } => {
            let models = BTreeMap::from([
                (ClassifierKind::Pnn, pnn.clone()),
                (ClassifierKind::Knn, knn.clone()),
                (ClassifierKind::Isnn, isnn.clone()),
                (ClassifierKind::Svm, svm.clone()),
            ]);
            let input = match (image, manifest) {
                (Some(image), _) => commands::HybridInput::Image {
                    image,
                    truth: truth.as_deref(),
                },
                (None, Some(m)) => commands::HybridInput::Manifest(m),
                (None, None) => unreachable!("clap requires one input"),
            };
            commands::hybrid(&cfg, input, rules, &models, out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
