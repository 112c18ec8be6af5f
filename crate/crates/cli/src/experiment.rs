//! Noise, denoise and score every (image, SNR) pair of an experiment.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use qmpi_core::{add_awgn_with, denoise_image, quality, read_image, write_image, DenoiseConfig, QualityReport};

use crate::config::ExperimentSpec;
use crate::report;

/// One scored run. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub image: String,
    pub snr_db: f64,
    #[serde(rename = "P_h")]
    pub patch_half: usize,
    #[serde(rename = "W_h")]
    pub window_half: usize,
    pub d: usize,
    pub p: f64,
    pub kinetic: f64,
    pub seed: u64,
    pub noisy_psnr: f64,
    pub noisy_ssim: f64,
    pub out_psnr: f64,
    pub out_ssim: f64,
    pub seconds: f64,
}

impl RunRecord {
    pub fn noisy(&self) -> QualityReport {
        QualityReport {
            psnr_db: self.noisy_psnr,
            ssim: self.noisy_ssim,
        }
    }

    pub fn denoised(&self) -> QualityReport {
        QualityReport {
            psnr_db: self.out_psnr,
            ssim: self.out_ssim,
        }
    }
}

/// A run that could not complete.
#[derive(Clone, Debug, PartialEq)]
pub struct RunFailure {
    pub image: String,
    pub snr_db: Option<f64>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentOutcome {
    /// Completed runs in spec order (images outer, SNR inner).
    pub records: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
    /// Files written: denoised images and reports.
    pub written: Vec<PathBuf>,
}

pub fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Formats an SNR for file names: `16` rather than `16.0`, `-2.5` as `m2.5`.
pub fn snr_tag(snr_db: f64) -> String {
    let text = format!("{snr_db}");
    text.replace('-', "m")
}

/// Noise, denoise and score a single clean image at one SNR.
pub fn run_one(
    id: &str,
    clean: &qmpi_core::ImageGrid,
    snr_db: f64,
    cfg: &DenoiseConfig,
    convention: qmpi_core::SnrConvention,
) -> qmpi_core::Result<(RunRecord, qmpi_core::ImageGrid)> {
    let (noisy, _) = add_awgn_with(clean, snr_db, cfg.seed, convention)?;
    let noisy_q = quality(clean, &noisy)?;
    let start = Instant::now();
    let denoised = denoise_image(&noisy, cfg)?;
    let seconds = start.elapsed().as_secs_f64();
    let out_q = quality(clean, &denoised)?;
    let record = RunRecord {
        image: id.to_string(),
        snr_db,
        patch_half: cfg.patch_half,
        window_half: cfg.window_half,
        d: cfg.d,
        p: cfg.p,
        kinetic: cfg.kinetic,
        seed: cfg.seed,
        noisy_psnr: noisy_q.psnr_db,
        noisy_ssim: noisy_q.ssim,
        out_psnr: out_q.psnr_db,
        out_ssim: out_q.ssim,
        seconds,
    };
    Ok((record, denoised))
}

/// Runs every (image, SNR) pair, writing the denoised images and `report.csv`
/// (plus `report.md` for markdown reports) into the output directory.
///
/// A failing run is recorded in [`ExperimentOutcome::failures`] and the
/// remaining runs continue. Only failure to create the output directory or
/// write the report is fatal.
pub fn run_experiment(spec: &ExperimentSpec) -> anyhow::Result<ExperimentOutcome> {
    let mut outcome = ExperimentOutcome::default();
    if spec.snr_db.is_empty() {
        return Ok(outcome);
    }
    std::fs::create_dir_all(&spec.output_dir)?;

    for path in &spec.inputs {
        let id = image_id(path);
        let clean = match read_image(path) {
            Ok(img) => img,
            Err(e) => {
                log::error!("{id}: {e}");
                outcome.failures.push(RunFailure {
                    image: id,
                    snr_db: None,
                    message: e.to_string(),
                });
                continue;
            }
        };
        for &snr_db in &spec.snr_db {
            log::info!("{id} at {snr_db} dB: denoising");
            match run_one(&id, &clean, snr_db, &spec.config, spec.convention) {
                Ok((record, denoised)) => {
                    let out = spec
                        .output_dir
                        .join(format!("{id}_snr{}_denoised.png", snr_tag(snr_db)));
                    if let Err(e) = write_image(&out, &denoised) {
                        log::error!("{id} at {snr_db} dB: {e}");
                        outcome.failures.push(RunFailure {
                            image: id.clone(),
                            snr_db: Some(snr_db),
                            message: e.to_string(),
                        });
                        continue;
                    }
                    log::info!(
                        "{id} at {snr_db} dB: {:.2} dB / {:.3} -> {:.2} dB / {:.3} in {:.1}s",
                        record.noisy_psnr,
                        record.noisy_ssim,
                        record.out_psnr,
                        record.out_ssim,
                        record.seconds
                    );
                    outcome.written.push(out);
                    outcome.records.push(record);
                }
                Err(e) => {
                    log::error!("{id} at {snr_db} dB: {e}");
                    outcome.failures.push(RunFailure {
                        image: id.clone(),
                        snr_db: Some(snr_db),
                        message: e.to_string(),
                    });
                }
            }
        }
    }

    let csv_path = spec.output_dir.join("report.csv");
    report::write_csv(&csv_path, &outcome.records)?;
    outcome.written.push(csv_path);
    if spec.report == crate::config::ReportFormat::Markdown {
        let md_path = spec.output_dir.join("report.md");
        std::fs::write(&md_path, report::markdown(&outcome.records))?;
        outcome.written.push(md_path);
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags() {
        assert_eq!(snr_tag(16.0), "16");
        assert_eq!(snr_tag(2.5), "2.5");
        assert_eq!(snr_tag(-3.0), "m3");
        assert_eq!(image_id(Path::new("/a/b/lena512.png")), "lena512");
    }
}
