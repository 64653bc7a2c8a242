//! `wavelike` command-line front end.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "wavelike", version, about = "Wavelet-like transforms, threshold denoising and energy diagnostics")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a test signal, optionally rescaled and with seeded Gaussian noise.
    Signal(SignalArgs),
    /// Hard-threshold denoise a signal file through a transform.
    Denoise(DenoiseArgs),
    /// Lorenz curve (CSV) and energy profile (JSON) of a signal's coefficients.
    Lorenz(LorenzArgs),
    /// Extract atoms, the columns of the adjoint transform.
    Atoms(AtomsArgs),
    /// Polyphase determinant of a filter, or of the filter collapsed from a product.
    PolyphaseCheck(PolyphaseArgs),
    /// Monte Carlo AMSE comparison from a JSON config or a built-in table.
    Bench(BenchArgs),
    /// Monte Carlo denoising of a grayscale image with one 2-D transform.
    ImageDenoise(ImageArgs),
    /// Rank every product pair of candidate filters by AMSE.
    GridSearch(GridArgs),
}

#[derive(Args, Debug)]
pub struct SignalArgs {
    /// doppler, blocks, heavisine, bumps, combined or intermittent.
    #[arg(long)]
    pub name: String,
    #[arg(long)]
    pub n: usize,
    /// Rescale the clean signal to this variance.
    #[arg(long)]
    pub snr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Add Gaussian noise drawn from stream 0 of `--seed`.
    #[arg(long)]
    pub noisy: bool,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub recipe: String,
    /// `universal`, `universal,sigma=<value>` or `universal,mad`.
    #[arg(long, default_value = "universal")]
    pub rule: String,
    /// Leave scaling coefficients untouched.
    #[arg(long)]
    pub exempt_scaling: bool,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LorenzArgs {
    #[arg(long)]
    pub recipe: String,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Write `lorenz.csv` and `energy_profile.json` here instead of printing.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AtomsArgs {
    #[arg(long)]
    pub recipe: String,
    /// Transform size; recipes with a fixed size may omit it.
    #[arg(long)]
    pub n: Option<usize>,
    /// Coefficient indices; all of them when absent.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PolyphaseArgs {
    #[arg(long)]
    pub h1: String,
    /// Second factor of a product; the bank of `--h1` alone when absent.
    #[arg(long)]
    pub h2: Option<String>,
    #[arg(long, default_value_t = wavelike::filterbank::DEFAULT_GRID_SIZE)]
    pub grid: usize,
    /// Also write `(omega, re det, im det)` rows here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// McConfig JSON file.
    #[arg(long, conflicts_with = "table")]
    pub config: Option<PathBuf>,
    /// Built-in configuration: `table1` or `table2`.
    #[arg(long)]
    pub table: Option<String>,
    /// Replicates for a built-in table.
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Seed for a built-in table.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct ImageArgs {
    /// PGM file.
    #[arg(long = "in", required_unless_present = "synthetic")]
    pub input: Option<PathBuf>,
    /// Use the built-in texture at this size instead of a file.
    #[arg(long, conflicts_with = "input")]
    pub synthetic: Option<usize>,
    #[arg(long)]
    pub sigma: f64,
    /// Applied on both sides of the image.
    #[arg(long)]
    pub recipe: String,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the MAD estimate instead of the known sigma.
    #[arg(long)]
    pub mad: bool,
    #[arg(long)]
    pub exempt_scaling: bool,
    /// Write the first replicate's denoised image here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub candidates: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Score on this signal generator.
    #[arg(long, default_value = "doppler", conflicts_with_all = ["image", "synthetic"])]
    pub signal: String,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 5.0)]
    pub snr: f64,
    /// Score on a PGM image instead.
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Score on the built-in texture at this size instead.
    #[arg(long, conflicts_with = "image")]
    pub synthetic: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
