//! Hyperparameter presets for the three reference experiments.

use crate::denoise::DenoiseConfig;
use crate::noisemetrics::SnrConvention;

/// A named experiment setting: noise level plus denoiser hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub snr_db: f64,
    pub d: usize,
    pub p: f64,
    pub kinetic: f64,
    pub patch_half: usize,
    pub window_half: usize,
    /// SNR convention the reference numbers were reproduced under.
    pub convention: SnrConvention,
}

pub const LENA16: Preset = Preset {
    name: "lena16",
    snr_db: 16.0,
    d: 22,
    p: 0.051,
    kinetic: 1.58,
    patch_half: 3,
    window_half: 10,
    convention: SnrConvention::Variance,
};

pub const HOUSE8: Preset = Preset {
    name: "house8",
    snr_db: 8.0,
    d: 11,
    p: 0.085,
    kinetic: 1.53,
    patch_half: 3,
    window_half: 10,
    convention: SnrConvention::Variance,
};

pub const LAKE2: Preset = Preset {
    name: "lake2",
    snr_db: 2.0,
    d: 7,
    p: 0.29,
    kinetic: 2.3,
    patch_half: 3,
    window_half: 10,
    convention: SnrConvention::Variance,
};

pub const ALL: [Preset; 3] = [LENA16, HOUSE8, LAKE2];

impl Preset {
    pub fn by_name(name: &str) -> Option<Self> {
        ALL.into_iter().find(|p| p.name == name)
    }

    /// Denoiser configuration with this preset's hyperparameters and defaults elsewhere.
    pub fn config(&self) -> DenoiseConfig {
        DenoiseConfig {
            patch_half: self.patch_half,
            window_half: self.window_half,
            d: self.d,
            p: self.p,
            kinetic: self.kinetic,
            ..DenoiseConfig::default()
        }
    }
}
