use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

mod commands;
mod input;

use commands::{JpArgs, Outcome, PaqArgs};
use input::CliError;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "spectral-forge",
    version,
    about = "Spectral sets, Hadamard triples and product-form digit sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify that (N, D, L) is a Hadamard triple
    CheckHadamard {
        #[arg(long)]
        base: Option<u64>,
        #[arg(long)]
        digits: PathBuf,
        #[arg(long)]
        spectrum: PathBuf,
    },
    /// Search for spectra L with (N, D, L) a Hadamard triple
    FindSpectrum {
        #[arg(long)]
        base: Option<u64>,
        #[arg(long)]
        digits: PathBuf,
        #[arg(long, default_value_t = 16)]
        limit: usize,
    },
    /// Validate a one-stage or k-stage product form
    ValidateForm {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Generate a product-form digit set from a spec or the four-digit construction
    GenProductForm {
        #[arg(long, conflicts_with = "four_digit")]
        spec: Option<PathBuf>,
        /// N,a,t,l,l'
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        four_digit: Option<Vec<i64>>,
        #[arg(long)]
        expand: bool,
    },
    /// Reduce a k-stage form (or a form with r > 1) to a one-stage form
    ReduceKstage {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Check the T1 and T2 conditions of a digit set modulo N
    CheckT1t2 {
        #[arg(long)]
        base: Option<u64>,
        #[arg(long)]
        digits: PathBuf,
    },
    /// Decide whether a set tiles Z_N
    CheckTile {
        #[arg(long)]
        base: Option<u64>,
        #[arg(long)]
        digits: PathBuf,
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = spectral_forge::cm_tiling::DEFAULT_TILE_BUDGET)]
        budget: u64,
    },
    /// Build and classify a p^a q tile from its factor-set family
    ClassifyPaq {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        alpha: u32,
        /// i, ii or iii
        #[arg(long)]
        variant: String,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        m: Vec<u64>,
        #[arg(long)]
        extra_q: bool,
        #[arg(long)]
        zshifts: Option<PathBuf>,
    },
    /// Factor the mask polynomial of a digit set into cyclotomic factors
    FactorMask {
        #[arg(long)]
        digits: PathBuf,
        #[arg(long)]
        max_index: Option<u64>,
    },
    /// Build a spectrum candidate and check the frame sums converge to 1
    VerifyJp {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Fixed truncation depth of the Fourier product; automatic when absent
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long, default_value_t = 128)]
        window: i64,
        #[arg(long, default_value_t = 1e-3)]
        threshold: f64,
        #[arg(long, value_delimiter = ',')]
        pk: Vec<u32>,
        #[arg(long, default_value_t = f64::INFINITY)]
        radius: f64,
        /// Extra random sample points in [0, 1)
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Digit set whose measure is tested, when it differs from the form's expansion
        #[arg(long)]
        digits: Option<PathBuf>,
        /// Rational rescaling of the candidate, such as 3 or 1/3
        #[arg(long)]
        scale: Option<String>,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Also write the full report to this file
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check the finite-level identity for a one-stage form
    CheckLemma42 {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Check that integer translates of the Fourier transform never vanish together
    WeaklyPeriodic {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, default_value_t = 64)]
        window: i64,
        #[arg(long, default_value_t = 4096)]
        resolution: usize,
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
    },
    /// Run the built-in corpus of cases with known verdicts
    RunAllFixtures,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CheckHadamard { .. } => "check-hadamard",
            Command::FindSpectrum { .. } => "find-spectrum",
            Command::ValidateForm { .. } => "validate-form",
            Command::GenProductForm { .. } => "gen-product-form",
            Command::ReduceKstage { .. } => "reduce-kstage",
            Command::CheckT1t2 { .. } => "check-t1t2",
            Command::CheckTile { .. } => "check-tile",
            Command::ClassifyPaq { .. } => "classify-paq",
            Command::FactorMask { .. } => "factor-mask",
            Command::VerifyJp { .. } => "verify-jp",
            Command::CheckLemma42 { .. } => "check-lemma42",
            Command::WeaklyPeriodic { .. } => "weakly-periodic",
            Command::RunAllFixtures => "run-all-fixtures",
        }
    }
}

fn dispatch(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::CheckHadamard { base, digits, spectrum } => commands::check_hadamard(*base, digits, spectrum),
        Command::FindSpectrum { base, digits, limit } => commands::find_spectrum(*base, digits, *limit),
        Command::ValidateForm { spec } => commands::validate_form(spec),
        Command::GenProductForm {
            spec,
            four_digit,
            expand,
        } => commands::gen_product_form(spec.as_deref(), four_digit.as_deref(), *expand),
        Command::ReduceKstage { spec } => commands::reduce_kstage(spec),
        Command::CheckT1t2 { base, digits } => commands::check_t1t2(*base, digits),
        Command::CheckTile {
            base,
            digits,
            exhaustive,
            budget,
        } => commands::check_tile(*base, digits, *exhaustive, *budget),
        Command::ClassifyPaq {
            p,
            q,
            alpha,
            variant,
            params,
            m,
            extra_q,
            zshifts,
        } => commands::classify_paq(PaqArgs {
            p: *p,
            q: *q,
            alpha: *alpha,
            variant,
            params: params.as_deref(),
            m,
            extra_q: *extra_q,
            zshifts: zshifts.as_deref(),
        }),
        Command::FactorMask { digits, max_index } => commands::factor_mask(digits, *max_index),
        Command::VerifyJp {
            form,
            levels,
            depth,
            grid,
            window,
            threshold,
            pk,
            radius,
            samples,
            seed,
            digits,
            scale,
            tolerance,
            report,
        } => commands::verify_jp(JpArgs {
            form,
            levels: *levels,
            depth: *depth,
            grid: *grid,
            window: *window,
            threshold: *threshold,
            pk,
            radius: *radius,
            samples: *samples,
            seed: *seed,
            digits: digits.as_deref(),
            scale: scale.as_deref(),
            tolerance: *tolerance,
            report: report.as_ref(),
        }),
        Command::CheckLemma42 {
            form,
            p,
            grid,
            tolerance,
        } => commands::check_lemma42(form, *p, *grid, *tolerance),
        Command::WeaklyPeriodic {
            form,
            window,
            resolution,
            tolerance,
        } => commands::weakly_periodic(form, *window, *resolution, *tolerance),
        Command::RunAllFixtures => commands::all_fixtures(),
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SPECTRAL_FORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("SPECTRAL_FORGE_THREADS={raw:?} is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let result = configure_threads().and_then(|()| dispatch(&cli.command));
    let (doc, code) = match result {
        Ok(o) => {
            eprintln!("{}", o.summary);
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": name,
                "valid": o.valid,
                "result": o.result,
            });
            (doc, if o.valid { 0 } else { 1 })
        }
        Err(e) => {
            let msg = e.message();
            eprintln!("{name}: {msg}");
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": name,
                "valid": false,
                "error": msg,
            });
            (doc, e.exit_code())
        }
    };
    println!("{}", serde_json::to_string_pretty(&doc).expect("output serializes"));
    ExitCode::from(code as u8)
}
