use crate::error::{Error, Result};
use crate::imggrid::ImageGrid;

/// Peak intensity of 8-bit images.
pub const DEFAULT_PEAK: f64 = 255.0;

/// PSNR and SSIM of a test image against its reference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QualityReport {
    pub psnr_db: f64,
    pub ssim: f64,
}

/// Peak signal-to-noise ratio in dB. Identical images give `f64::INFINITY`.
pub fn psnr(reference: &ImageGrid, test: &ImageGrid, peak: f64) -> Result<f64> {
    reference.ensure_same_shape(test)?;
    let mse = reference
        .pixels()
        .iter()
        .zip(test.pixels())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / reference.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// SSIM settings. The defaults are the 11x11 Gaussian window with
/// `sigma = 1.5`, `K1 = 0.01`, `K2 = 0.03` and an 8-bit dynamic range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub peak: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            peak: DEFAULT_PEAK,
        }
    }
}

impl SsimParams {
    pub fn c1(&self) -> f64 {
        (self.k1 * self.peak).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.peak).powi(2)
    }

    /// Normalised 1D Gaussian taps; the 2D window is their outer product.
    pub fn taps(&self) -> Vec<f64> {
        let half = (self.window / 2) as f64;
        let raw: Vec<f64> = (0..self.window)
            .map(|i| {
                let x = i as f64 - half;
                (-(x * x) / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }
}

/// Mean SSIM with default parameters.
pub fn ssim(reference: &ImageGrid, test: &ImageGrid) -> Result<f64> {
    ssim_with(reference, test, &SsimParams::default())
}

// Valid-mode separable filtering of a row-major field.
fn filter_valid(field: &[f64], width: usize, height: usize, taps: &[f64]) -> Vec<f64> {
    let w = taps.len();
    let out_w = width - w + 1;
    let out_h = height - w + 1;
    let mut horizontal = vec![0.0; out_w * height];
    for r in 0..height {
        let row = &field[r * width..(r + 1) * width];
        for c in 0..out_w {
            horizontal[r * out_w + c] = taps.iter().zip(&row[c..c + w]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; out_w * out_h];
    for r in 0..out_h {
        for c in 0..out_w {
            out[r * out_w + c] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * horizontal[(r + k) * out_w + c])
                .sum();
        }
    }
    out
}

/// Mean SSIM over every window position that fits inside the image.
pub fn ssim_with(reference: &ImageGrid, test: &ImageGrid, params: &SsimParams) -> Result<f64> {
    reference.ensure_same_shape(test)?;
    let (width, height) = (reference.width(), reference.height());
    if width < params.window || height < params.window || params.window == 0 {
        return Err(Error::TooSmallForWindow {
            width,
            height,
            window: params.window,
        });
    }
    let taps = params.taps();
    let x = reference.pixels();
    let y = test.pixels();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = filter_valid(x, width, height, &taps);
    let mu_y = filter_valid(y, width, height, &taps);
    let e_xx = filter_valid(&xx, width, height, &taps);
    let e_yy = filter_valid(&yy, width, height, &taps);
    let e_xy = filter_valid(&xy, width, height, &taps);

    let (c1, c2) = (params.c1(), params.c2());
    let total: f64 = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let var_x = e_xx[i] - mx * mx;
            let var_y = e_yy[i] - my * my;
            let cov = e_xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (var_x + var_y + c2))
        })
        .sum();
    Ok(total / mu_x.len() as f64)
}

/// PSNR (peak 255) and SSIM of `test` against `reference`.
pub fn quality(reference: &ImageGrid, test: &ImageGrid) -> Result<QualityReport> {
    Ok(QualityReport {
        psnr_db: psnr(reference, test, DEFAULT_PEAK)?,
        ssim: ssim(reference, test)?,
    })
}
