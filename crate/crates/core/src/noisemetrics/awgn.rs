use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::imggrid::ImageGrid;

/// Which signal statistic an SNR in decibels is measured against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SnrConvention {
    /// Mean squared intensity of the clean image.
    #[default]
    Power,
    /// Intensity variance of the clean image.
    Variance,
}

impl SnrConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Power => "power",
            Self::Variance => "variance",
        }
    }

    /// The reference statistic of `img` under this convention.
    pub fn signal_level(self, img: &ImageGrid) -> f64 {
        let n = img.len() as f64;
        let mean_sq = img.pixels().iter().map(|v| v * v).sum::<f64>() / n;
        match self {
            Self::Power => mean_sq,
            Self::Variance => {
                let mean = img.pixels().iter().sum::<f64>() / n;
                img.pixels().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
            }
        }
    }
}

impl std::fmt::Display for SnrConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SnrConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(Self::Power),
            "variance" => Ok(Self::Variance),
            other => Err(Error::Config(format!(
                "unknown SNR convention `{other}` (expected power or variance)"
            ))),
        }
    }
}

/// Parameters and outcome of one noise synthesis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
    pub convention: SnrConvention,
    /// Standard deviation implied by `snr_db`.
    pub sigma: f64,
    /// Sample standard deviation of the noise actually drawn.
    pub realized_sigma: f64,
}

/// Noise standard deviation that puts `clean` at `snr_db`.
pub fn noise_sigma(clean: &ImageGrid, snr_db: f64, convention: SnrConvention) -> Result<f64> {
    if !snr_db.is_finite() {
        return Err(Error::Config(format!("SNR must be finite, got {snr_db}")));
    }
    let level = convention.signal_level(clean);
    if level <= 0.0 {
        return Err(Error::ZeroPower(convention.as_str()));
    }
    Ok((level / 10f64.powf(snr_db / 10.0)).sqrt())
}

/// Adds white Gaussian noise with power-convention SNR. The result is not clamped.
pub fn add_awgn(clean: &ImageGrid, snr_db: f64, seed: u64) -> Result<(ImageGrid, NoiseSpec)> {
    add_awgn_with(clean, snr_db, seed, SnrConvention::Power)
}

/// Adds white Gaussian noise at `snr_db` under `convention`.
///
/// Samples come from ChaCha20 seeded with `seed` (via `seed_from_u64`), drawn
/// in raster order through the ziggurat standard normal sampler, so the output
/// depends only on the seed and the image shape.
pub fn add_awgn_with(
    clean: &ImageGrid,
    snr_db: f64,
    seed: u64,
    convention: SnrConvention,
) -> Result<(ImageGrid, NoiseSpec)> {
    let sigma = noise_sigma(clean, snr_db, convention)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut sum_sq = 0.0;
    let mut sum = 0.0;
    let pixels: Vec<f64> = clean
        .pixels()
        .iter()
        .map(|&v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            let n = sigma * z;
            sum += n;
            sum_sq += n * n;
            v + n
        })
        .collect();
    let count = pixels.len() as f64;
    let mean = sum / count;
    let realized_sigma = (sum_sq / count - mean * mean).max(0.0).sqrt();
    let noisy = ImageGrid::new(clean.width(), clean.height(), pixels)?;
    Ok((
        noisy,
        NoiseSpec {
            snr_db,
            seed,
            convention,
            sigma,
            realized_sigma,
        },
    ))
}

/// SNR of `noisy` against `clean`, with the noise measured by its mean square.
pub fn measured_snr_db(clean: &ImageGrid, noisy: &ImageGrid, convention: SnrConvention) -> Result<f64> {
    clean.ensure_same_shape(noisy)?;
    let noise_power = clean
        .pixels()
        .iter()
        .zip(noisy.pixels())
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        / clean.len() as f64;
    Ok(10.0 * (convention.signal_level(clean) / noise_power).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_noise() {
        let clean = ImageGrid::from_fn(16, 16, |r, c| (r * 16 + c) as f64).unwrap();
        let (noisy, spec) = add_awgn(&clean, 300.0, 3).unwrap();
        assert!(spec.sigma < 1e-10);
        for (a, b) in noisy.pixels().iter().zip(clean.pixels()) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn constant_image_sigma() {
        let clean = ImageGrid::filled(512, 512, 128.0).unwrap();
        let (_, spec) = add_awgn(&clean, 16.0, 11).unwrap();
        let target = 128.0 / 10f64.powf(0.8);
        assert!((spec.sigma - target).abs() < 1e-12);
        assert!((spec.sigma - 20.29).abs() < 0.01);
        assert!((spec.realized_sigma / target - 1.0).abs() < 0.01);
    }

    #[test]
    fn same_seed_same_noise() {
        let clean = ImageGrid::from_fn(32, 8, |r, c| (r + c) as f64 + 1.0).unwrap();
        let a = add_awgn(&clean, 8.0, 42).unwrap().0;
        let b = add_awgn(&clean, 8.0, 42).unwrap().0;
        let c = add_awgn(&clean, 8.0, 43).unwrap().0;
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_power_is_rejected() {
        let black = ImageGrid::filled(4, 4, 0.0).unwrap();
        assert!(matches!(add_awgn(&black, 10.0, 0), Err(Error::ZeroPower("power"))));
        let flat = ImageGrid::filled(4, 4, 9.0).unwrap();
        assert!(matches!(
            add_awgn_with(&flat, 10.0, 0, SnrConvention::Variance),
            Err(Error::ZeroPower("variance"))
        ));
    }

    #[test]
    fn conventions_differ_by_signal_statistic() {
        let img = ImageGrid::new(2, 1, vec![1.0, 3.0]).unwrap();
        assert_eq!(SnrConvention::Power.signal_level(&img), 5.0);
        assert_eq!(SnrConvention::Variance.signal_level(&img), 1.0);
    }
}
