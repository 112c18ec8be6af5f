//! Image and patch data model.
//!
//! Images are row-major grids of `f64` intensities with a nominal range of
//! `[0, 255]`. Patches are square windows of side `2 * half + 1` flattened in
//! lexicographic (row-major) order, which is the index convention the
//! Hamiltonian stencil relies on.

use crate::error::{Error, Result};

/// Lowest and highest representable output intensity.
pub const INTENSITY_MIN: f64 = 0.0;
pub const INTENSITY_MAX: f64 = 255.0;

/// A pixel position, `row` first.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub row: usize,
    pub col: usize,
}

impl Pos {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// Same position shifted by `margin` in both axes, i.e. its coordinates
    /// in an image padded by `margin`.
    pub const fn offset(self, margin: usize) -> Self {
        Self::new(self.row + margin, self.col + margin)
    }
}

impl From<(usize, usize)> for Pos {
    fn from((row, col): (usize, usize)) -> Self {
        Self { row, col }
    }
}

/// A grayscale image of real-valued intensities.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl ImageGrid {
    /// Wraps a row-major pixel buffer, checking its size and finiteness.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if pixels.len() != width * height {
            return Err(Error::PixelCount {
                width,
                height,
                expected: width * height,
                actual: pixels.len(),
            });
        }
        if let Some(index) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `(height, width)`, the bounds used for window enumeration.
    pub fn bounds(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Applies `f` to every intensity. Fails if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.width, self.height, self.pixels.iter().map(|&v| f(v)).collect())
    }

    /// Removes `margin` pixels from every side.
    pub fn crop(&self, margin: usize) -> Result<Self> {
        if 2 * margin >= self.width || 2 * margin >= self.height {
            return Err(Error::EmptyImage {
                width: self.width.saturating_sub(2 * margin),
                height: self.height.saturating_sub(2 * margin),
            });
        }
        let width = self.width - 2 * margin;
        let height = self.height - 2 * margin;
        Self::from_fn(width, height, |r, c| self.get(r + margin, c + margin))
    }

    /// Clamps every intensity to `[0, 255]`.
    pub fn clamped(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self
                .pixels
                .iter()
                .map(|v| v.clamp(INTENSITY_MIN, INTENSITY_MAX))
                .collect(),
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    /// Checks that `other` has the same dimensions.
    pub fn ensure_same_shape(&self, other: &Self) -> Result<()> {
        self.same_shape(other)
    }
}

/// Border fill used by [`pad_image`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PadMode {
    /// Symmetric reflection that repeats the edge pixel: `c b a | a b c | c b a`.
    #[default]
    Mirror,
    Zero,
    Replicate,
}

impl std::str::FromStr for PadMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mirror" => Ok(Self::Mirror),
            "zero" => Ok(Self::Zero),
            "replicate" => Ok(Self::Replicate),
            other => Err(Error::Config(format!("unknown padding mode `{other}`"))),
        }
    }
}

// Maps an index in the padded axis back into `0..len`, or `None` for zero fill.
fn source_index(padded: isize, len: usize, mode: PadMode) -> Option<usize> {
    let n = len as isize;
    if (0..n).contains(&padded) {
        return Some(padded as usize);
    }
    match mode {
        PadMode::Zero => None,
        PadMode::Replicate => Some(padded.clamp(0, n - 1) as usize),
        PadMode::Mirror => {
            let i = if padded < 0 { -padded - 1 } else { 2 * n - padded - 1 };
            Some(i as usize)
        }
    }
}

/// Grows the image by `margin` pixels on every side.
///
/// Mirror mode reflects once, so it needs `margin <= min(width, height)`.
pub fn pad_image(img: &ImageGrid, margin: usize, mode: PadMode) -> Result<ImageGrid> {
    if mode == PadMode::Mirror && margin > img.width.min(img.height) {
        return Err(Error::MirrorMarginTooLarge {
            margin,
            side: img.width.min(img.height),
        });
    }
    let m = margin as isize;
    ImageGrid::from_fn(img.width + 2 * margin, img.height + 2 * margin, |r, c| {
        let row = source_index(r as isize - m, img.height, mode);
        let col = source_index(c as isize - m, img.width, mode);
        match (row, col) {
            (Some(row), Some(col)) => img.get(row, col),
            _ => 0.0,
        }
    })
}

/// A flattened square patch together with its center in the source image.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchVector {
    side: usize,
    values: Vec<f64>,
    center: Pos,
}

impl PatchVector {
    pub fn new(side: usize, values: Vec<f64>, center: Pos) -> Result<Self> {
        if values.len() != side * side {
            return Err(Error::NotSquare {
                len: values.len(),
                side,
            });
        }
        Ok(Self { side, values, center })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn half(&self) -> usize {
        self.side / 2
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn center(&self) -> Pos {
        self.center
    }
}

fn check_window(img: &ImageGrid, center: Pos, half: usize) -> Result<()> {
    if center.row < half || center.col < half || center.row + half >= img.height || center.col + half >= img.width {
        return Err(Error::PatchOutOfBounds {
            row: center.row,
            col: center.col,
            half,
            height: img.height,
            width: img.width,
        });
    }
    Ok(())
}

/// Copies the window around `center` into `out` (length `(2 * half + 1)^2`).
pub(crate) fn extract_patch_into(img: &ImageGrid, center: Pos, half: usize, out: &mut [f64]) -> Result<()> {
    check_window(img, center, half)?;
    let side = 2 * half + 1;
    debug_assert_eq!(out.len(), side * side);
    let top = center.row - half;
    let left = center.col - half;
    for (r, dst) in out.chunks_exact_mut(side).enumerate() {
        let start = (top + r) * img.width + left;
        dst.copy_from_slice(&img.pixels[start..start + side]);
    }
    Ok(())
}

/// Reads the `(2 * half + 1)^2` window centered on `center`, row-major.
///
/// The window must lie inside `img`; pad the image first to reach borders.
pub fn extract_patch(img: &ImageGrid, center: Pos, half: usize) -> Result<PatchVector> {
    let side = 2 * half + 1;
    let mut values = vec![0.0; side * side];
    extract_patch_into(img, center, half, &mut values)?;
    Ok(PatchVector { side, values, center })
}

/// Patch centers inside the `(2 * window_half + 1)^2` window around `center`,
/// stepping by `stride` from the center and clipped to `bounds = (height, width)`.
///
/// The query center is always part of the result.
pub fn enumerate_window_centers(center: Pos, window_half: usize, stride: usize, bounds: (usize, usize)) -> Vec<Pos> {
    let stride = stride.max(1);
    let (height, width) = bounds;
    let axis = |c: usize, len: usize| -> Vec<usize> {
        let steps = window_half / stride;
        let lo = c.saturating_sub(steps * stride);
        let lo = lo + (c - lo) % stride;
        (lo..=c + steps * stride).step_by(stride).filter(|&v| v < len).collect()
    };
    let rows = axis(center.row, height);
    let cols = axis(center.col, width);
    let mut out = Vec::with_capacity(rows.len() * cols.len());
    for &row in &rows {
        for &col in &cols {
            out.push(Pos::new(row, col));
        }
    }
    out
}

/// Running sums and counts for averaging overlapping patches.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregationBuffer {
    width: usize,
    height: usize,
    sum: Vec<f64>,
    weight: Vec<f64>,
}

impl AggregationBuffer {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            sum: vec![0.0; width * height],
            weight: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn sum(&self) -> &[f64] {
        &self.sum
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    /// Adds `patch` with unit weight over its footprint.
    pub fn accumulate(&mut self, patch: &PatchVector) -> Result<()> {
        self.accumulate_values(patch.center, patch.half(), &patch.values)
    }

    pub(crate) fn accumulate_values(&mut self, center: Pos, half: usize, values: &[f64]) -> Result<()> {
        let side = 2 * half + 1;
        if values.len() != side * side {
            return Err(Error::LengthMismatch {
                expected: side * side,
                actual: values.len(),
            });
        }
        if center.row < half || center.col < half || center.row + half >= self.height || center.col + half >= self.width
        {
            return Err(Error::PatchOutOfBounds {
                row: center.row,
                col: center.col,
                half,
                height: self.height,
                width: self.width,
            });
        }
        let top = center.row - half;
        let left = center.col - half;
        for (r, src) in values.chunks_exact(side).enumerate() {
            let start = (top + r) * self.width + left;
            for (k, &v) in src.iter().enumerate() {
                self.sum[start + k] += v;
                self.weight[start + k] += 1.0;
            }
        }
        Ok(())
    }

    /// Divides sums by weights and clamps to `[0, 255]`.
    pub fn finalize(self) -> Result<ImageGrid> {
        let mut pixels = Vec::with_capacity(self.sum.len());
        for (i, (&s, &w)) in self.sum.iter().zip(&self.weight).enumerate() {
            if w <= 0.0 {
                return Err(Error::UncoveredPixel {
                    row: i / self.width,
                    col: i % self.width,
                });
            }
            pixels.push((s / w).clamp(INTENSITY_MIN, INTENSITY_MAX));
        }
        ImageGrid::new(self.width, self.height, pixels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(width: usize, height: usize) -> ImageGrid {
        ImageGrid::from_fn(width, height, |r, c| (r * width + c) as f64).unwrap()
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(matches!(
            ImageGrid::new(2, 2, vec![0.0; 3]),
            Err(Error::PixelCount { .. })
        ));
        assert!(matches!(ImageGrid::new(0, 2, vec![]), Err(Error::EmptyImage { .. })));
        assert!(matches!(
            ImageGrid::new(1, 2, vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn zero_pad_single_pixel() {
        let img = ImageGrid::new(1, 1, vec![7.0]).unwrap();
        let padded = pad_image(&img, 1, PadMode::Zero).unwrap();
        assert_eq!((padded.width(), padded.height()), (3, 3));
        assert_eq!(padded.pixels(), &[0.0, 0.0, 0.0, 0.0, 7.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_margin_is_identity() {
        let img = ramp(5, 3);
        for mode in [PadMode::Mirror, PadMode::Zero, PadMode::Replicate] {
            assert_eq!(pad_image(&img, 0, mode).unwrap(), img);
        }
    }

    #[test]
    fn mirror_repeats_edge() {
        let img = ImageGrid::new(2, 1, vec![3.0, 9.0]).unwrap();
        let padded = pad_image(&img, 1, PadMode::Mirror).unwrap();
        assert_eq!((padded.width(), padded.height()), (4, 3));
        for row in 0..3 {
            let line: Vec<f64> = (0..4).map(|c| padded.get(row, c)).collect();
            assert_eq!(line, vec![3.0, 3.0, 9.0, 9.0]);
        }
    }

    #[test]
    fn replicate_and_mirror_limits() {
        let img = ramp(3, 2);
        let rep = pad_image(&img, 4, PadMode::Replicate).unwrap();
        assert_eq!(rep.get(0, 0), 0.0);
        assert_eq!(rep.get(rep.height() - 1, rep.width() - 1), 5.0);
        assert!(matches!(
            pad_image(&img, 3, PadMode::Mirror),
            Err(Error::MirrorMarginTooLarge { margin: 3, side: 2 })
        ));
        assert!(pad_image(&img, 2, PadMode::Mirror).is_ok());
    }

    #[test]
    fn padding_keeps_interior() {
        let img = ramp(6, 4);
        for mode in [PadMode::Mirror, PadMode::Zero, PadMode::Replicate] {
            let padded = pad_image(&img, 3, mode).unwrap();
            assert_eq!(padded.crop(3).unwrap(), img);
        }
    }

    #[test]
    fn degenerate_patch_is_center_pixel() {
        let img = ramp(4, 4);
        let p = extract_patch(&img, Pos::new(2, 1), 0).unwrap();
        assert_eq!(p.values(), &[9.0]);
        assert_eq!(p.center(), Pos::new(2, 1));
    }

    #[test]
    fn whole_image_patch() {
        let img = ImageGrid::new(3, 3, (1..=9).map(f64::from).collect()).unwrap();
        let p = extract_patch(&img, Pos::new(1, 1), 1).unwrap();
        assert_eq!(p.values(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
    }

    #[test]
    fn ramp_patch_matches_brute_force() {
        let img = ramp(4, 4);
        let p = extract_patch(&img, Pos::new(1, 1), 1).unwrap();
        let mut expected = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                expected.push(img.pixels()[r * 4 + c]);
            }
        }
        assert_eq!(p.values(), expected.as_slice());
    }

    #[test]
    fn patch_outside_image_is_rejected() {
        let img = ramp(4, 4);
        assert!(matches!(
            extract_patch(&img, Pos::new(0, 1), 1),
            Err(Error::PatchOutOfBounds { .. })
        ));
        assert!(extract_patch(&img, Pos::new(3, 2), 1).is_err());
    }

    #[test]
    fn singleton_window() {
        assert_eq!(
            enumerate_window_centers(Pos::new(4, 4), 0, 1, (9, 9)),
            vec![Pos::new(4, 4)]
        );
    }

    #[test]
    fn full_three_by_three_window() {
        let centers = enumerate_window_centers(Pos::new(10, 10), 1, 1, (100, 100));
        let mut expected = Vec::new();
        for r in 9..=11 {
            for c in 9..=11 {
                expected.push(Pos::new(r, c));
            }
        }
        assert_eq!(centers, expected);
    }

    #[test]
    fn corner_window_is_clipped() {
        let centers = enumerate_window_centers(Pos::new(0, 0), 2, 1, (100, 100));
        let brute: Vec<Pos> = (-2i64..=2)
            .flat_map(|dr| (-2i64..=2).map(move |dc| (dr, dc)))
            .filter(|&(dr, dc)| dr >= 0 && dc >= 0)
            .map(|(dr, dc)| Pos::new(dr as usize, dc as usize))
            .collect();
        assert_eq!(centers.len(), 9);
        assert_eq!(centers, brute);
    }

    #[test]
    fn strided_window_includes_center_and_stays_on_grid() {
        let center = Pos::new(7, 3);
        let centers = enumerate_window_centers(center, 5, 2, (20, 20));
        assert!(centers.contains(&center));
        for p in &centers {
            assert_eq!((p.row as i64 - 7).rem_euclid(2), 0);
            assert_eq!((p.col as i64 - 3).rem_euclid(2), 0);
            assert!(p.row.abs_diff(7) <= 5 && p.col.abs_diff(3) <= 5);
        }
        // rows 3,5,7,9,11 and cols 1,3,5,7
        assert_eq!(centers.len(), 5 * 4);
    }

    #[test]
    fn single_patch_accumulation() {
        let mut buf = AggregationBuffer::new(4, 4);
        let patch = PatchVector::new(3, (1..=9).map(f64::from).collect(), Pos::new(1, 1)).unwrap();
        buf.accumulate(&patch).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let i = r * 4 + c;
                if r < 3 && c < 3 {
                    assert_eq!(buf.sum()[i], (r * 3 + c + 1) as f64);
                    assert_eq!(buf.weight()[i], 1.0);
                } else {
                    assert_eq!(buf.sum()[i], 0.0);
                    assert_eq!(buf.weight()[i], 0.0);
                }
            }
        }
    }

    #[test]
    fn repeated_patch_doubles() {
        let mut buf = AggregationBuffer::new(3, 3);
        let patch = PatchVector::new(3, vec![2.0; 9], Pos::new(1, 1)).unwrap();
        buf.accumulate(&patch).unwrap();
        buf.accumulate(&patch).unwrap();
        assert!(buf.sum().iter().all(|&s| s == 4.0));
        assert!(buf.weight().iter().all(|&w| w == 2.0));
    }

    #[test]
    fn overlap_is_averaged() {
        let mut buf = AggregationBuffer::new(5, 3);
        buf.accumulate(&PatchVector::new(3, vec![10.0; 9], Pos::new(1, 1)).unwrap())
            .unwrap();
        buf.accumulate(&PatchVector::new(3, vec![20.0; 9], Pos::new(1, 3)).unwrap())
            .unwrap();
        let out = buf.finalize().unwrap();
        assert_eq!(out.get(1, 2), 15.0);
        assert_eq!(out.get(0, 0), 10.0);
        assert_eq!(out.get(2, 4), 20.0);
    }

    #[test]
    fn accumulate_out_of_bounds() {
        let mut buf = AggregationBuffer::new(3, 3);
        let patch = PatchVector::new(3, vec![0.0; 9], Pos::new(2, 1)).unwrap();
        assert!(matches!(buf.accumulate(&patch), Err(Error::PatchOutOfBounds { .. })));
    }

    #[test]
    fn finalize_clamps_and_requires_coverage() {
        let mut buf = AggregationBuffer::new(1, 1);
        buf.accumulate(&PatchVector::new(1, vec![-5.0], Pos::new(0, 0)).unwrap())
            .unwrap();
        assert_eq!(buf.finalize().unwrap().pixels(), &[0.0]);

        let mut buf = AggregationBuffer::new(1, 1);
        buf.accumulate(&PatchVector::new(1, vec![300.0], Pos::new(0, 0)).unwrap())
            .unwrap();
        assert_eq!(buf.finalize().unwrap().pixels(), &[255.0]);

        let mut buf = AggregationBuffer::new(2, 1);
        buf.accumulate(&PatchVector::new(1, vec![1.0], Pos::new(0, 0)).unwrap())
            .unwrap();
        assert!(matches!(buf.finalize(), Err(Error::UncoveredPixel { row: 0, col: 1 })));
    }
}
