//! Patch-wise image denoising with adaptive bases drawn from interacting
//! Schrödinger-type Hamiltonians.
//!
//! Every patch gets its own orthonormal basis: the eigenvectors of a discrete
//! Laplacian plus a diagonal potential made of the patch intensities and the
//! inverse-square interactions with the patches around it. Keeping only the
//! lowest-energy modes and averaging the overlapping reconstructions denoises
//! the image.
//!
//! ```
//! use qmpi_core::{add_awgn, denoise_image, quality, DenoiseConfig, ImageGrid};
//!
//! let clean = ImageGrid::from_fn(24, 24, |r, c| if r < 12 { 60.0 } else { 190.0 } + c as f64).unwrap();
//! let (noisy, _) = add_awgn(&clean, 10.0, 7).unwrap();
//! let cfg = DenoiseConfig { patch_half: 2, window_half: 4, d: 6, ..DenoiseConfig::default() };
//! let out = denoise_image(&noisy, &cfg).unwrap();
//! assert!(quality(&clean, &out).unwrap().psnr_db > quality(&clean, &noisy).unwrap().psnr_db);
//! ```

pub mod denoise;
pub mod error;
pub mod hamiltonian;
pub mod imggrid;
pub mod interaction;
pub mod io;
pub mod noisemetrics;
pub mod presets;

pub use denoise::{
    basis_at, denoise_image, denoise_image_with, denoise_patch_at, denoise_patch_at_with, effective_potential_at,
    project_and_truncate, threads_from_env, DenoiseConfig, InteractionModel, InverseSquare, NoInteraction,
    PatchReconstruction, THREADS_ENV,
};
pub use error::{Error, Result};
pub use hamiltonian::{build_hamiltonian, eigendecompose, EigenBasis, HamiltonianMatrix};
pub use imggrid::{
    enumerate_window_centers, extract_patch, pad_image, AggregationBuffer, ImageGrid, PadMode, PatchVector, Pos,
};
pub use interaction::{
    effective_potential, pairwise_interaction, patch_distance, total_interaction, total_interaction_with, DistanceMode,
    EffectivePotential, InteractionVector,
};
pub use io::{read_image, write_image};
pub use noisemetrics::{
    add_awgn, add_awgn_with, measured_snr_db, psnr, quality, ssim, NoiseSpec, QualityReport, SnrConvention,
};
pub use presets::Preset;
