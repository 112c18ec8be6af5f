//! Deterministic inputs shared by the benchmarks.

use qmpi_core::{add_awgn, ImageGrid, PatchVector, Pos};

/// Piecewise-constant test card with a few flat regions and straight edges.
pub fn card(width: usize, height: usize) -> ImageGrid {
    ImageGrid::from_fn(width, height, |r, c| {
        let band = (r * 4 / height.max(1)) as f64;
        let stripe = if c * 3 / width.max(1) == 1 { 60.0 } else { 0.0 };
        40.0 + band * 40.0 + stripe
    })
    .expect("nonempty dimensions")
}

/// [`card`] with white Gaussian noise at `snr_db`.
pub fn noisy_card(width: usize, height: usize, snr_db: f64) -> ImageGrid {
    add_awgn(&card(width, height), snr_db, 0)
        .expect("card has signal power")
        .0
}

/// Potential vector of a `side x side` patch with a smooth ramp and a bump.
pub fn potential(side: usize) -> Vec<f64> {
    let mid = side as f64 / 2.0;
    (0..side * side)
        .map(|i| {
            let (r, c) = ((i / side) as f64, (i % side) as f64);
            0.3 + 0.05 * r + 0.4 * (-((r - mid).powi(2) + (c - mid).powi(2)) / 4.0).exp()
        })
        .collect()
}

/// `count` patches of `side x side` spread along a row.
pub fn patches(side: usize, count: usize) -> Vec<PatchVector> {
    (0..count)
        .map(|k| {
            let values = (0..side * side).map(|i| ((i * 7 + k * 13) % 255) as f64).collect();
            PatchVector::new(side, values, Pos::new(10, k)).expect("values match side")
        })
        .collect()
}
