//! Seeded white Gaussian noise at a requested SNR and full-reference quality
//! metrics (PSNR, SSIM).

mod awgn;
mod quality;

pub use awgn::{add_awgn, add_awgn_with, measured_snr_db, noise_sigma, NoiseSpec, SnrConvention};
pub use quality::{psnr, quality, ssim, ssim_with, QualityReport, SsimParams, DEFAULT_PEAK};
