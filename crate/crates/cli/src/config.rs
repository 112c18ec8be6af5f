//! Experiment configuration: `key = value` files, command-line overrides and
//! validation into an [`ExperimentSpec`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qmpi_core::{DenoiseConfig, DistanceMode, PadMode, Preset, SnrConvention};

/// Keys accepted in configuration files and as flag overrides.
pub const KEYS: &[&str] = &[
    "input",
    "output_dir",
    "snr",
    "seed",
    "preset",
    "d",
    "p",
    "kinetic",
    "patch_half",
    "window_half",
    "stride",
    "window_stride",
    "distance_mode",
    "potential_scale",
    "padding",
    "snr_convention",
    "report",
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: key `{key}` given more than once")]
    Duplicate { line: usize, key: String },

    #[error("missing required key `{0}`")]
    Missing(&'static str),

    #[error("`{key}`: cannot use `{value}`: {reason}")]
    Invalid { key: String, value: String, reason: String },

    #[error("unknown preset `{0}` (available: lena16, house8, lake2)")]
    UnknownPreset(String),

    #[error("input image {} does not exist", .0.display())]
    MissingInput(PathBuf),

    #[error(transparent)]
    Core(#[from] qmpi_core::Error),

    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Format of the human-facing report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            _ => Err("expected csv or markdown".into()),
        }
    }
}

/// A fully validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub inputs: Vec<PathBuf>,
    pub snr_db: Vec<f64>,
    pub config: DenoiseConfig,
    pub convention: SnrConvention,
    pub output_dir: PathBuf,
    pub report: ReportFormat,
}

impl ExperimentSpec {
    /// Fails on the first input path that does not exist.
    pub fn check_inputs(&self) -> Result<(), ConfigError> {
        match self.inputs.iter().find(|p| !p.exists()) {
            Some(missing) => Err(ConfigError::MissingInput(missing.clone())),
            None => Ok(()),
        }
    }
}

/// Raw key/value settings before validation. Later [`RawConfig::set`] calls
/// override earlier ones; duplicates inside one file are rejected.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
    base_dir: Option<PathBuf>,
}

impl RawConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses configuration text. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Self::default();
        for (index, line) in text.lines().enumerate() {
            let line_no = index + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    text: content.to_string(),
                });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    text: content.to_string(),
                });
            }
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line: line_no,
                    key: key.to_string(),
                });
            }
            if raw.values.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(ConfigError::Duplicate {
                    line: line_no,
                    key: key.to_string(),
                });
            }
        }
        Ok(raw)
    }

    /// Reads a configuration file; relative input and output paths in it are
    /// resolved against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut raw = Self::parse(&text)?;
        raw.base_dir = path.parent().map(Path::to_path_buf);
        Ok(raw)
    }

    /// Overrides `key` (flags take precedence over the file).
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line: 0,
                key: key.to_string(),
            });
        }
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(value) => value.parse::<T>().map(Some).map_err(|e| ConfigError::Invalid {
                key: key.to_string(),
                value: value.to_string(),
                reason: e.to_string(),
            }),
        }
    }

    fn path(&self, value: &str) -> PathBuf {
        let p = PathBuf::from(value);
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p,
        }
    }

    fn preset(&self) -> Result<Option<Preset>, ConfigError> {
        match self.get("preset") {
            Some(name) => Preset::by_name(name)
                .map(Some)
                .ok_or_else(|| ConfigError::UnknownPreset(name.to_string())),
            None => Ok(None),
        }
    }

    /// The validated denoiser settings alone.
    ///
    /// A preset supplies `d`, `p`, `kinetic` and the patch and window sizes;
    /// explicit keys override it. Without a preset `d`, `p` and `kinetic` are
    /// required.
    pub fn denoise_config(&self) -> Result<DenoiseConfig, ConfigError> {
        let preset = self.preset()?;
        let mut cfg = preset.map(|p| p.config()).unwrap_or_default();
        match self.parsed::<usize>("d")? {
            Some(d) => cfg.d = d,
            None if preset.is_none() => return Err(ConfigError::Missing("d")),
            None => {}
        }
        match self.parsed::<f64>("p")? {
            Some(p) => cfg.p = p,
            None if preset.is_none() => return Err(ConfigError::Missing("p")),
            None => {}
        }
        match self.parsed::<f64>("kinetic")? {
            Some(k) => cfg.kinetic = k,
            None if preset.is_none() => return Err(ConfigError::Missing("kinetic")),
            None => {}
        }
        if let Some(v) = self.parsed("patch_half")? {
            cfg.patch_half = v;
        }
        if let Some(v) = self.parsed("window_half")? {
            cfg.window_half = v;
        }
        if let Some(v) = self.parsed("stride")? {
            cfg.stride = v;
        }
        if let Some(v) = self.parsed("window_stride")? {
            cfg.window_stride = v;
        }
        if let Some(v) = self.parsed::<DistanceMode>("distance_mode")? {
            cfg.distance_mode = v;
        }
        if let Some(v) = self.parsed("potential_scale")? {
            cfg.potential_scale = v;
        }
        if let Some(v) = self.parsed::<PadMode>("padding")? {
            cfg.padding = v;
        }
        if let Some(v) = self.parsed("seed")? {
            cfg.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Explicit `snr_convention`, else the preset's, else power.
    pub fn convention(&self) -> Result<SnrConvention, ConfigError> {
        Ok(match self.parsed::<SnrConvention>("snr_convention")? {
            Some(c) => c,
            None => self.preset()?.map(|p| p.convention).unwrap_or_default(),
        })
    }

    /// Validates and assembles the experiment. When `snr` is absent the
    /// preset's noise level is used; without a preset `snr` is required.
    pub fn resolve(&self) -> Result<ExperimentSpec, ConfigError> {
        let preset = self.preset()?;
        let cfg = self.denoise_config()?;
        let convention = self.convention()?;

        let snr_db = match self.get("snr") {
            Some(list) => parse_list::<f64>("snr", list)?,
            None => match preset {
                Some(p) => vec![p.snr_db],
                None => return Err(ConfigError::Missing("snr")),
            },
        };
        if let Some(bad) = snr_db.iter().find(|v| !v.is_finite()) {
            return Err(ConfigError::Invalid {
                key: "snr".into(),
                value: bad.to_string(),
                reason: "SNR must be finite".into(),
            });
        }

        let inputs: Vec<PathBuf> = match self.get("input") {
            Some(list) => split_list(list).map(|s| self.path(s)).collect(),
            None => return Err(ConfigError::Missing("input")),
        };
        if inputs.is_empty() {
            return Err(ConfigError::Missing("input"));
        }
        let output_dir = self
            .get("output_dir")
            .map(|v| self.path(v))
            .unwrap_or_else(|| PathBuf::from("."));
        let report = self.parsed::<ReportFormat>("report")?.unwrap_or_default();

        Ok(ExperimentSpec {
            inputs,
            snr_db,
            config: cfg,
            convention,
            output_dir,
            report,
        })
    }
}

fn split_list(list: &str) -> impl Iterator<Item = &str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_list<T: FromStr>(key: &str, list: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    split_list(list)
        .map(|item| {
            item.parse::<T>().map_err(|e| ConfigError::Invalid {
                key: key.to_string(),
                value: item.to_string(),
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Parses a configuration file into a validated experiment.
pub fn parse_config(path: &Path) -> Result<ExperimentSpec, ConfigError> {
    RawConfig::from_file(path)?.resolve()
}
