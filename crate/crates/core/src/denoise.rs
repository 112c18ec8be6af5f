//! Subspace projection onto per-patch Hamiltonian eigenbases and the full
//! interacting-patch denoising pipeline.
//!
//! For every patch center the pipeline
//!
//! 1. gathers the patches whose centers fall in the search window,
//! 2. sums their inverse-square interactions into an effective potential,
//! 3. builds and diagonalises the patch Hamiltonian,
//! 4. keeps the projection of the noisy patch on the `d` lowest-energy modes,
//!
//! and finally averages all overlapping reconstructions.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, eigendecompose, EigenBasis};
use crate::imggrid::{
    enumerate_window_centers, extract_patch_into, pad_image, AggregationBuffer, ImageGrid, PadMode, PatchVector, Pos,
};
use crate::interaction::{
    add_interaction, effective_potential, patch_distance_sq, value_distance_sq, DistanceMode, EffectivePotential,
    InteractionVector,
};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "QMPI_THREADS";

/// Rows of patch centers handed to the worker pool per batch.
const ROW_BATCH: usize = 16;

/// Hyperparameters of the denoiser.
#[derive(Clone, Debug, PartialEq)]
pub struct DenoiseConfig {
    /// Half patch size; patches are `(2 * patch_half + 1)^2` pixels.
    pub patch_half: usize,
    /// Half size of the square search window.
    pub window_half: usize,
    /// Number of lowest-energy modes kept.
    pub d: usize,
    /// Interaction strength.
    pub p: f64,
    /// Kinetic coefficient (hbar^2 / 2m) of the Hamiltonian.
    pub kinetic: f64,
    /// Step between processed patch centers.
    pub stride: usize,
    /// Step between neighbour centers inside the search window.
    pub window_stride: usize,
    pub distance_mode: DistanceMode,
    /// Multiplies intensities before they enter the potential. The default
    /// `1/255` maps 8-bit intensities onto a unit-peak potential.
    pub potential_scale: f64,
    /// Border fill used to give edge pixels complete patches.
    pub padding: PadMode,
    /// Seed for stochastic stages (noise synthesis in experiments).
    pub seed: u64,
    /// Worker thread cap; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            patch_half: 3,
            window_half: 10,
            d: 11,
            p: 0.085,
            kinetic: 1.53,
            stride: 1,
            window_stride: 1,
            distance_mode: DistanceMode::Spatial,
            potential_scale: 1.0 / 255.0,
            padding: PadMode::Mirror,
            seed: 0,
            threads: None,
        }
    }
}

impl DenoiseConfig {
    /// Default geometry (`P_h = 3`, `W_h = 10`) with the given `d`, `p` and kinetic term.
    pub fn new(d: usize, p: f64, kinetic: f64) -> Self {
        Self {
            d,
            p,
            kinetic,
            ..Self::default()
        }
    }

    pub fn side(&self) -> usize {
        2 * self.patch_half + 1
    }

    pub fn patch_dim(&self) -> usize {
        self.side() * self.side()
    }

    /// Sets `threads` from `QMPI_THREADS` when it holds a positive integer.
    pub fn with_threads_from_env(mut self) -> Result<Self> {
        self.threads = threads_from_env()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let max = self.patch_dim();
        if self.d == 0 || self.d > max {
            return Err(Error::SubspaceDim { d: self.d, max });
        }
        if !(self.kinetic.is_finite() && self.kinetic > 0.0) {
            return Err(Error::InvalidKinetic(self.kinetic));
        }
        if !(self.p.is_finite() && self.p >= 0.0) {
            return Err(Error::InvalidCoupling(self.p));
        }
        if self.stride == 0 || self.stride > self.side() {
            return Err(Error::Config(format!(
                "stride must satisfy 1 <= stride <= {} (patch side), got {}",
                self.side(),
                self.stride
            )));
        }
        if self.window_stride == 0 {
            return Err(Error::Config("window_stride must be at least 1".into()));
        }
        if !(self.potential_scale.is_finite() && self.potential_scale > 0.0) {
            return Err(Error::Config(format!(
                "potential_scale must be finite and positive, got {}",
                self.potential_scale
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("thread count must be at least 1".into()));
        }
        if self.window_half < self.patch_half {
            log::warn!(
                "search window half size {} is smaller than patch half size {}",
                self.window_half,
                self.patch_half
            );
        }
        Ok(())
    }
}

/// Parses a `QMPI_THREADS`-style value.
pub fn parse_threads(value: &str) -> Result<usize> {
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(Error::Config(format!(
            "{THREADS_ENV} must be a positive integer, got `{value}`"
        ))),
    }
}

/// Reads `QMPI_THREADS`; unset or empty means no cap.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => parse_threads(&v).map(Some),
        _ => Ok(None),
    }
}

/// Denoised patch with the coefficients that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchReconstruction {
    pub values: Vec<f64>,
    pub center: Pos,
    pub coefficients: Vec<f64>,
}

fn project_values(values: &[f64], basis: &EigenBasis, d: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if values.len() != basis.dim() {
        return Err(Error::LengthMismatch {
            expected: basis.dim(),
            actual: values.len(),
        });
    }
    if d == 0 || d > basis.dim() {
        return Err(Error::SubspaceDim { d, max: basis.dim() });
    }
    let mut recon = vec![0.0; values.len()];
    let mut coefficients = Vec::with_capacity(d);
    for k in 0..d {
        let v = basis.vector(k);
        let c: f64 = values.iter().zip(v).map(|(a, b)| a * b).sum();
        for (r, &x) in recon.iter_mut().zip(v) {
            *r += c * x;
        }
        coefficients.push(c);
    }
    Ok((coefficients, recon))
}

/// Projects `patch` on the `d` lowest-energy vectors of `basis` and rebuilds it
/// from those coefficients.
pub fn project_and_truncate(patch: &PatchVector, basis: &EigenBasis, d: usize) -> Result<PatchReconstruction> {
    let (coefficients, values) = project_values(patch.values(), basis, d)?;
    Ok(PatchReconstruction {
        values,
        center: patch.center(),
        coefficients,
    })
}

/// Source of pairwise patch interactions used by the pipeline.
pub trait InteractionModel: Sync {
    /// Adds the interaction of `neighbor` on `target` into `total`.
    fn add(&self, total: &mut [f64], target: &[f64], neighbor: &[f64], dist_sq: f64, p: f64);
}

/// The inverse-square law of [`crate::interaction`].
#[derive(Clone, Copy, Debug, Default)]
pub struct InverseSquare;

impl InteractionModel for InverseSquare {
    #[inline]
    fn add(&self, total: &mut [f64], target: &[f64], neighbor: &[f64], dist_sq: f64, p: f64) {
        add_interaction(total, target, neighbor, dist_sq, p);
    }
}

/// Interactions switched off: every patch sees only its own potential.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoInteraction;

impl InteractionModel for NoInteraction {
    #[inline]
    fn add(&self, _: &mut [f64], _: &[f64], _: &[f64], _: f64, _: f64) {}
}

// Padded copies of the noisy image in intensity and potential units.
struct Prepared<'a> {
    cfg: &'a DenoiseConfig,
    bounds: (usize, usize),
    intensity: ImageGrid,
    potential: ImageGrid,
}

impl<'a> Prepared<'a> {
    fn new(noisy: &ImageGrid, cfg: &'a DenoiseConfig) -> Result<Self> {
        cfg.validate()?;
        let intensity = pad_image(noisy, cfg.patch_half, cfg.padding)?;
        let scale = cfg.potential_scale;
        let potential = intensity.map(|v| v * scale)?;
        Ok(Self {
            cfg,
            bounds: noisy.bounds(),
            intensity,
            potential,
        })
    }

    fn effective_potential<M: InteractionModel>(&self, center: Pos, model: &M) -> Result<(Vec<f64>, Vec<f64>)> {
        let half = self.cfg.patch_half;
        let dim = self.cfg.patch_dim();
        let mut target = vec![0.0; dim];
        extract_patch_into(&self.potential, center.offset(half), half, &mut target)?;

        let mut total = vec![0.0; dim];
        let mut neighbor = vec![0.0; dim];
        let centers = enumerate_window_centers(center, self.cfg.window_half, self.cfg.window_stride, self.bounds);
        for nb in centers.into_iter().filter(|&nb| nb != center) {
            extract_patch_into(&self.potential, nb.offset(half), half, &mut neighbor)?;
            let dist_sq = match self.cfg.distance_mode {
                DistanceMode::Spatial => patch_distance_sq(center, nb),
                DistanceMode::PixelVector => value_distance_sq(&target, &neighbor),
            };
            if dist_sq > 0.0 {
                model.add(&mut total, &target, &neighbor, dist_sq, self.cfg.p);
            }
        }
        Ok((target, total))
    }

    fn patch<M: InteractionModel>(&self, center: Pos, model: &M) -> Result<PatchReconstruction> {
        let at = |source: Error| Error::AtPatch {
            row: center.row,
            col: center.col,
            source: Box::new(source),
        };
        let half = self.cfg.patch_half;
        let (target, total) = self.effective_potential(center, model).map_err(at)?;
        let potential: Vec<f64> = target.iter().zip(&total).map(|(a, b)| a + b).collect();
        let h = build_hamiltonian(&potential, self.cfg.side(), self.cfg.kinetic).map_err(at)?;
        let basis = eigendecompose(&h).map_err(at)?;

        let mut noisy = vec![0.0; self.cfg.patch_dim()];
        extract_patch_into(&self.intensity, center.offset(half), half, &mut noisy).map_err(at)?;
        let (coefficients, values) = project_values(&noisy, &basis, self.cfg.d).map_err(at)?;
        Ok(PatchReconstruction {
            values,
            center,
            coefficients,
        })
    }
}

/// `0, stride, 2 * stride, ...` plus the last index, so that a stride no
/// larger than the patch side covers every pixel.
fn stride_grid(len: usize, stride: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..len).step_by(stride.max(1)).collect();
    if out.last() != Some(&(len - 1)) {
        out.push(len - 1);
    }
    out
}

fn check_on_grid(center: Pos, bounds: (usize, usize), stride: usize) -> Result<()> {
    let (height, width) = bounds;
    let on = |v: usize, len: usize| v < len && (v.is_multiple_of(stride) || v == len - 1);
    if on(center.row, height) && on(center.col, width) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "center ({}, {}) is not on the stride-{stride} grid of a {height}x{width} image",
            center.row, center.col
        )))
    }
}

/// Runs the full interacting-patch denoiser.
pub fn denoise_image(noisy: &ImageGrid, cfg: &DenoiseConfig) -> Result<ImageGrid> {
    denoise_image_with(noisy, cfg, &InverseSquare)
}

/// [`denoise_image`] with a caller-supplied interaction model.
///
/// Output is bit-identical for any thread count: patches are computed in
/// parallel but merged in raster order.
pub fn denoise_image_with<M: InteractionModel>(noisy: &ImageGrid, cfg: &DenoiseConfig, model: &M) -> Result<ImageGrid> {
    let prepared = Prepared::new(noisy, cfg)?;
    let half = cfg.patch_half;
    let rows = stride_grid(noisy.height(), cfg.stride);
    let cols = stride_grid(noisy.width(), cfg.stride);

    let pool = match cfg.threads {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?,
        ),
        None => None,
    };

    let mut buffer = AggregationBuffer::new(prepared.intensity.width(), prepared.intensity.height());
    for (batch_index, batch) in rows.chunks(ROW_BATCH).enumerate() {
        let work = || {
            batch
                .par_iter()
                .map(|&row| {
                    cols.iter()
                        .map(|&col| prepared.patch(Pos::new(row, col), model))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Vec<_>>()
        };
        let results = match &pool {
            Some(pool) => pool.install(work),
            None => work(),
        };
        for row in results {
            for rec in row? {
                buffer.accumulate_values(rec.center.offset(half), half, &rec.values)?;
            }
        }
        log::debug!(
            "denoised {} / {} patch rows",
            (batch_index * ROW_BATCH + batch.len()).min(rows.len()),
            rows.len()
        );
    }
    buffer.finalize()?.crop(half)
}

/// The reconstruction `denoise_image` computes for the patch at `center`.
pub fn denoise_patch_at(noisy: &ImageGrid, center: Pos, cfg: &DenoiseConfig) -> Result<PatchReconstruction> {
    denoise_patch_at_with(noisy, center, cfg, &InverseSquare)
}

pub fn denoise_patch_at_with<M: InteractionModel>(
    noisy: &ImageGrid,
    center: Pos,
    cfg: &DenoiseConfig,
    model: &M,
) -> Result<PatchReconstruction> {
    let prepared = Prepared::new(noisy, cfg)?;
    check_on_grid(center, noisy.bounds(), cfg.stride)?;
    prepared.patch(center, model)
}

/// The effective potential the pipeline feeds to the Hamiltonian at `center`,
/// along with the total interaction that produced it.
pub fn effective_potential_at(
    noisy: &ImageGrid,
    center: Pos,
    cfg: &DenoiseConfig,
) -> Result<(InteractionVector, EffectivePotential)> {
    let prepared = Prepared::new(noisy, cfg)?;
    check_on_grid(center, noisy.bounds(), cfg.stride)?;
    let (target, total) = prepared.effective_potential(center, &InverseSquare)?;
    let total = InteractionVector::from_values(total);
    let potential = effective_potential(&target, &total)?;
    Ok((total, potential))
}

/// Eigenbasis used for the patch at `center`.
pub fn basis_at(noisy: &ImageGrid, center: Pos, cfg: &DenoiseConfig) -> Result<EigenBasis> {
    let (_, potential) = effective_potential_at(noisy, center, cfg)?;
    eigendecompose(&build_hamiltonian(potential.values(), cfg.side(), cfg.kinetic)?)
}
