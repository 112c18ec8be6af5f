use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};

use qmpi_cli::experiment::{image_id, snr_tag};
use qmpi_cli::{report, run_experiment, ConfigError, RawConfig, ReportFormat};
use qmpi_core::{add_awgn_with, basis_at, denoise_image, quality, read_image, write_image, Pos, SnrConvention};

/// Patch-wise Hamiltonian image denoiser.
///
/// Logs go to stderr (set RUST_LOG to change the level); stdout carries only
/// machine-readable output. QMPI_THREADS sets the worker thread count.
#[derive(Parser)]
#[command(name = "qmpi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise one image and print the output path
    Denoise(DenoiseArgs),
    /// Add white Gaussian noise at a target SNR
    SynthNoise(SynthArgs),
    /// Print PSNR and SSIM of an image against a reference as CSV
    Evaluate(EvaluateArgs),
    /// Noise, denoise and score images over a list of SNRs
    Bench(BenchArgs),
}

/// Denoiser settings shared by `denoise` and `bench`. Flags override the
/// configuration file, which overrides the preset.
#[derive(Args, Debug, Default)]
struct Settings {
    /// `key = value` configuration file
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Parameter preset: lena16, house8 or lake2
    #[arg(long)]
    preset: Option<String>,
    /// Number of retained eigenvectors
    #[arg(long)]
    d: Option<String>,
    /// Interaction coupling
    #[arg(long)]
    p: Option<String>,
    /// Kinetic coefficient
    #[arg(long)]
    kinetic: Option<String>,
    #[arg(long, value_name = "P_H")]
    patch_half: Option<String>,
    #[arg(long, value_name = "W_H")]
    window_half: Option<String>,
    /// Spacing of reconstructed patch centers
    #[arg(long)]
    stride: Option<String>,
    /// Spacing of interaction neighbours inside the window
    #[arg(long)]
    window_stride: Option<String>,
    /// spatial or pixel-vector
    #[arg(long)]
    distance_mode: Option<String>,
    /// Factor applied to intensities before they enter the potential
    #[arg(long)]
    potential_scale: Option<String>,
    /// mirror, zero or replicate
    #[arg(long)]
    padding: Option<String>,
    /// Noise seed
    #[arg(long)]
    seed: Option<String>,
    /// power (mean square) or variance
    #[arg(long)]
    snr_convention: Option<String>,
}

impl Settings {
    fn raw(&self) -> Result<RawConfig, ConfigError> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::new(),
        };
        let flags = [
            ("preset", &self.preset),
            ("d", &self.d),
            ("p", &self.p),
            ("kinetic", &self.kinetic),
            ("patch_half", &self.patch_half),
            ("window_half", &self.window_half),
            ("stride", &self.stride),
            ("window_stride", &self.window_stride),
            ("distance_mode", &self.distance_mode),
            ("potential_scale", &self.potential_scale),
            ("padding", &self.padding),
            ("seed", &self.seed),
            ("snr_convention", &self.snr_convention),
        ];
        for (key, value) in flags {
            if let Some(value) = value {
                raw.set(key, value.as_str())?;
            }
        }
        Ok(raw)
    }
}

#[derive(Args)]
struct DenoiseArgs {
    /// Noisy 8-bit grayscale PGM or PNG
    #[arg(long)]
    input: PathBuf,
    /// Output file; defaults to `<output-dir>/<name>_denoised.png`
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    /// Also write the eigenbasis tiles and energies at this patch center
    #[arg(long, value_name = "ROW,COL")]
    dump_basis: Option<String>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct SynthArgs {
    /// Clean 8-bit grayscale PGM or PNG
    #[arg(long)]
    input: PathBuf,
    /// Target SNR in dB
    #[arg(long, allow_hyphen_values = true)]
    snr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// power (mean square) or variance
    #[arg(long, default_value = "power")]
    snr_convention: SnrConvention,
    /// Output file; defaults to `<output-dir>/<name>_snr<SNR>_seed<SEED>.png`
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Clean images, comma separated or repeated
    #[arg(long, value_delimiter = ',')]
    input: Vec<PathBuf>,
    /// SNRs in dB, comma separated; an empty list runs nothing
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// csv or markdown
    #[arg(long)]
    report: Option<String>,
    #[command(flatten)]
    settings: Settings,
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.into())
    }
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn absolute(path: &Path) -> Result<String, Failure> {
    let abs = std::path::absolute(path).map_err(|e| Failure::Config(e.into()))?;
    Ok(abs.to_string_lossy().into_owned())
}

fn parse_center(text: &str) -> Result<Pos, Failure> {
    let parsed = text
        .split_once(',')
        .and_then(|(r, c)| Some(Pos::new(r.trim().parse().ok()?, c.trim().parse().ok()?)));
    parsed.ok_or_else(|| Failure::Config(anyhow!("--dump-basis expects ROW,COL, got `{text}`")))
}

fn denoise(args: DenoiseArgs) -> Result<(), Failure> {
    let center = args.dump_basis.as_deref().map(parse_center).transpose()?;
    let cfg = args.settings.raw()?.denoise_config()?;
    let cfg = cfg.with_threads_from_env().map_err(ConfigError::from)?;
    if !args.input.exists() {
        return Err(ConfigError::MissingInput(args.input).into());
    }
    let noisy = read_image(&args.input).map_err(runtime)?;
    let id = image_id(&args.input);
    let output = args
        .output
        .unwrap_or_else(|| args.output_dir.join(format!("{id}_denoised.png")));
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(runtime)?;
    }

    if let Some(center) = center {
        let basis = basis_at(&noisy, center, &cfg).map_err(runtime)?;
        let stem = format!("{id}_basis_r{}_c{}", center.row, center.col);
        let dir = output.parent().unwrap_or(Path::new("."));
        write_image(dir.join(format!("{stem}.png")), &basis.tiles().map_err(runtime)?).map_err(runtime)?;
        let energies: String = basis.energies().iter().map(|e| format!("{e}\n")).collect();
        std::fs::write(dir.join(format!("{stem}_energies.txt")), energies).map_err(runtime)?;
    }

    log::info!(
        "denoising {} ({}x{}) with d = {}, p = {}, kinetic = {}",
        args.input.display(),
        noisy.width(),
        noisy.height(),
        cfg.d,
        cfg.p,
        cfg.kinetic
    );
    let denoised = denoise_image(&noisy, &cfg).map_err(runtime)?;
    write_image(&output, &denoised).map_err(runtime)?;
    println!("{}", output.display());
    Ok(())
}

fn synth_noise(args: SynthArgs) -> Result<(), Failure> {
    if !args.input.exists() {
        return Err(ConfigError::MissingInput(args.input).into());
    }
    let clean = read_image(&args.input).map_err(runtime)?;
    let id = image_id(&args.input);
    let output = args.output.unwrap_or_else(|| {
        args.output_dir
            .join(format!("{id}_snr{}_seed{}.png", snr_tag(args.snr), args.seed))
    });
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(runtime)?;
    }
    let (noisy, spec) = add_awgn_with(&clean, args.snr, args.seed, args.snr_convention).map_err(runtime)?;
    write_image(&output, &noisy).map_err(runtime)?;
    let sidecar = output.with_extension("txt");
    let text = format!(
        "snr_db = {}\nsigma = {}\nrealized_sigma = {}\nseed = {}\nconvention = {}\n",
        spec.snr_db, spec.sigma, spec.realized_sigma, spec.seed, spec.convention
    );
    std::fs::write(&sidecar, text).map_err(runtime)?;
    log::info!("sigma = {:.4}, realized {:.4}", spec.sigma, spec.realized_sigma);
    println!("{}", output.display());
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    for path in [&args.reference, &args.input] {
        if !path.exists() {
            return Err(ConfigError::MissingInput(path.clone()).into());
        }
    }
    let reference = read_image(&args.reference).map_err(runtime)?;
    let test = read_image(&args.input).map_err(runtime)?;
    let q = quality(&reference, &test).map_err(runtime)?;
    println!("psnr_db,ssim\n{},{}", q.psnr_db, q.ssim);
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let mut raw = args.settings.raw()?;
    if !args.input.is_empty() {
        let list = args.input.iter().map(|p| absolute(p)).collect::<Result<Vec<_>, _>>()?;
        raw.set("input", list.join(","))?;
    }
    if let Some(snr) = &args.snr {
        raw.set("snr", snr.as_str())?;
    }
    if let Some(dir) = &args.output_dir {
        raw.set("output_dir", absolute(dir)?)?;
    }
    if let Some(report) = &args.report {
        raw.set("report", report.as_str())?;
    }
    let mut spec = raw.resolve()?;
    spec.check_inputs()?;
    spec.config = spec.config.with_threads_from_env().map_err(ConfigError::from)?;

    let outcome = run_experiment(&spec).map_err(Failure::Runtime)?;
    match spec.report {
        ReportFormat::Csv => print!("{}", report::csv_string(&outcome.records)),
        ReportFormat::Markdown => print!("{}", report::markdown(&outcome.records)),
    }
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        let lines: Vec<String> = outcome
            .failures
            .iter()
            .map(|f| match f.snr_db {
                Some(snr) => format!("{} at {snr} dB: {}", f.image, f.message),
                None => format!("{}: {}", f.image, f.message),
            })
            .collect();
        Err(Failure::Runtime(anyhow!(
            "{} run(s) failed\n  {}",
            lines.len(),
            lines.join("\n  ")
        )))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();

    let result = match cli.command {
        Command::Denoise(args) => denoise(args),
        Command::SynthNoise(args) => synth_noise(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Bench(args) => bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
