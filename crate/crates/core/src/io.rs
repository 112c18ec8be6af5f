//! 8-bit grayscale PGM (P5) and PNG reading and writing.

use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, GrayImage, ImageEncoder};

use crate::error::{Error, Result};
use crate::imggrid::ImageGrid;

/// Loads an 8-bit grayscale PGM or PNG. Color or 16-bit inputs are rejected.
pub fn read_image(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let path = path.as_ref();
    let wrap = |source| Error::Image {
        path: path.to_path_buf(),
        source,
    };
    let decoded = image::ImageReader::open(path)?
        .with_guessed_format()?
        .decode()
        .map_err(wrap)?;
    match decoded {
        DynamicImage::ImageLuma8(gray) => {
            let (width, height) = gray.dimensions();
            ImageGrid::new(
                width as usize,
                height as usize,
                gray.into_raw().into_iter().map(f64::from).collect(),
            )
        }
        other => Err(Error::NotGrayscale {
            path: path.to_path_buf(),
            found: format!("{:?}", other.color()),
        }),
    }
}

/// Rounds and clamps every intensity to `0..=255`.
pub fn quantize(img: &ImageGrid) -> Vec<u8> {
    img.pixels().iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect()
}

/// Writes `img` as 8-bit grayscale; the format follows the file extension
/// (`.pgm` gives binary P5, `.png` gives PNG).
pub fn write_image(path: impl AsRef<Path>, img: &ImageGrid) -> Result<()> {
    let path = path.as_ref();
    let wrap = |source| Error::Image {
        path: path.to_path_buf(),
        source,
    };
    let (width, height) = (img.width() as u32, img.height() as u32);
    let bytes = quantize(img);
    let is_pnm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("pnm"));
    if is_pnm {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        PnmEncoder::new(file)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&bytes, width, height, ExtendedColorType::L8)
            .map_err(wrap)
    } else {
        let buffer = GrayImage::from_raw(width, height, bytes).expect("buffer length matches image dimensions");
        buffer.save(path).map_err(wrap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_and_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = ImageGrid::from_fn(7, 5, |r, c| (r * 40 + c * 3) as f64).unwrap();
        for name in ["a.pgm", "a.png"] {
            let path = dir.path().join(name);
            write_image(&path, &img).unwrap();
            assert_eq!(read_image(&path).unwrap(), img);
        }
        let raw = std::fs::read(dir.path().join("a.pgm")).unwrap();
        assert_eq!(&raw[..2], b"P5");
    }

    #[test]
    fn export_quantizes() {
        let img = ImageGrid::new(4, 1, vec![-3.0, 0.4, 127.6, 300.0]).unwrap();
        assert_eq!(quantize(&img), vec![0, 0, 128, 255]);
    }

    #[test]
    fn color_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        image::RgbImage::new(3, 3).save(&path).unwrap();
        let err = read_image(&path).unwrap_err();
        assert!(matches!(err, Error::NotGrayscale { .. }), "{err}");
        assert!(err.to_string().contains("grayscale"));
    }
}
