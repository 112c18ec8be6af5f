use std::path::PathBuf;

/// Errors produced by the denoising toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },

    #[error("pixel buffer holds {actual} values but {width}x{height} needs {expected}")]
    PixelCount {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite intensity at index {index}")]
    NonFinite { index: usize },

    #[error("mirror padding of {margin} exceeds the smaller image side {side}")]
    MirrorMarginTooLarge { margin: usize, side: usize },

    #[error("patch of half size {half} at ({row}, {col}) leaves the {height}x{width} image")]
    PatchOutOfBounds {
        row: usize,
        col: usize,
        half: usize,
        height: usize,
        width: usize,
    },

    #[error("pixel ({row}, {col}) received no patch contribution")]
    UncoveredPixel { row: usize, col: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("potential of length {len} is not a square patch of side {side}")]
    NotSquare { len: usize, side: usize },

    #[error("kinetic coefficient must be finite and positive, got {0}")]
    InvalidKinetic(f64),

    #[error("eigensolver did not converge on a {dim}x{dim} operator")]
    EigenNoConvergence { dim: usize },

    #[error("interaction distance must be positive and finite, got {0}")]
    InvalidDistance(f64),

    #[error("interaction constant must be finite and non-negative, got {0}")]
    InvalidCoupling(f64),

    #[error("neighbour at ({row}, {col}) coincides with the target patch")]
    SelfInteraction { row: usize, col: usize },

    #[error("subspace dimension d = {d} violates 1 <= d <= {max}")]
    SubspaceDim { d: usize, max: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("patch at ({row}, {col}): {source}")]
    AtPatch {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("signal has zero power under the {0} SNR convention")]
    ZeroPower(&'static str),

    #[error("images differ in size: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("image {width}x{height} is smaller than the {window}x{window} metric window")]
    TooSmallForWindow { width: usize, height: usize, window: usize },

    #[error("{path}: expected an 8-bit grayscale image, found {found}")]
    NotGrayscale { path: PathBuf, found: String },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
