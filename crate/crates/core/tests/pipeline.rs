use std::f64::consts::PI;

use qmpi_core::{
    add_awgn, basis_at, denoise_image, denoise_image_with, denoise_patch_at, denoise_patch_at_with, psnr,
    DenoiseConfig, ImageGrid, NoInteraction, Pos,
};

fn noise_image(width: usize, height: usize, seed: u64) -> ImageGrid {
    // Small LCG so the fixture does not depend on the noise generator.
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    ImageGrid::from_fn(width, height, |_, _| {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 33) % 200) as f64 + 20.0
    })
    .unwrap()
}

fn square(side: usize) -> ImageGrid {
    let (lo, hi) = (side / 4, 3 * side / 4);
    ImageGrid::from_fn(side, side, |r, c| {
        if (lo..hi).contains(&r) && (lo..hi).contains(&c) {
            200.0
        } else {
            50.0
        }
    })
    .unwrap()
}

fn small_cfg(d: usize) -> DenoiseConfig {
    DenoiseConfig {
        patch_half: 2,
        window_half: 3,
        ..DenoiseConfig::new(d, 0.085, 1.53)
    }
}

fn flip_cols(img: &ImageGrid) -> ImageGrid {
    ImageGrid::from_fn(img.width(), img.height(), |r, c| img.get(r, img.width() - 1 - c)).unwrap()
}

#[test]
fn constant_image_ground_state_only() {
    // Interactions vanish, so every patch sees a flat potential whose ground
    // state is u_a * u_b with u_a = sin(pi a / 8) / norm. A patch contributes
    // c * sum(psi) * psi at each pixel, and each pixel averages the patches
    // whose centers lie inside the image.
    let (c, size, half) = (120.0, 16usize, 3usize);
    let img = ImageGrid::filled(size, size, c).unwrap();
    let out = denoise_image(&img, &DenoiseConfig::new(1, 0.085, 1.53)).unwrap();
    let raw: Vec<f64> = (1..=7).map(|k| (k as f64 * PI / 8.0).sin()).collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u: Vec<f64> = raw.iter().map(|v| v / norm).collect();
    let total = u.iter().sum::<f64>().powi(2);
    let mean_u = |x: usize| {
        let lo = x.saturating_sub(half);
        let hi = (x + half).min(size - 1);
        (lo..=hi).map(|center| u[x + half - center]).sum::<f64>() / (hi - lo + 1) as f64
    };
    for r in 0..size {
        for col in 0..size {
            let expected = c * total * mean_u(r) * mean_u(col);
            let v = out.get(r, col);
            assert!((v - expected).abs() < 1e-9, "({r},{col}) {v} vs {expected}");
        }
    }
    // Interior pixels lose about 18.5% of their intensity.
    assert!((out.get(8, 8) / c - 0.8148).abs() < 1e-4);
}

#[test]
fn constant_image_full_basis() {
    let img = ImageGrid::filled(16, 16, 77.0).unwrap();
    let out = denoise_image(&img, &DenoiseConfig::new(49, 0.3, 2.0)).unwrap();
    for v in out.pixels() {
        assert!((v - 77.0).abs() < 1e-6);
    }
}

#[test]
fn full_basis_patch_is_reproduced() {
    let img = noise_image(20, 20, 4);
    let cfg = small_cfg(25);
    let rec = denoise_patch_at(&img, Pos::new(10, 9), &cfg).unwrap();
    for (k, v) in rec.values.iter().enumerate() {
        let (r, c) = (8 + k / 5, 7 + k % 5);
        assert!((v - img.get(r, c)).abs() < 1e-8);
    }
}

#[test]
fn zero_coupling_matches_stubbed_interactions() {
    let img = noise_image(18, 15, 9);
    let cfg = DenoiseConfig { p: 0.0, ..small_cfg(6) };
    let a = denoise_patch_at(&img, Pos::new(7, 7), &cfg).unwrap();
    let b = denoise_patch_at_with(&img, Pos::new(7, 7), &cfg, &NoInteraction).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn mirrored_images_give_mirrored_reconstructions() {
    let img = noise_image(17, 13, 21);
    let flipped = flip_cols(&img);
    let cfg = small_cfg(7);
    let side = cfg.side();
    for center in [Pos::new(6, 5), Pos::new(0, 0), Pos::new(12, 3)] {
        let mirror = Pos::new(center.row, img.width() - 1 - center.col);
        let a = denoise_patch_at(&img, center, &cfg).unwrap();
        let b = denoise_patch_at(&flipped, mirror, &cfg).unwrap();
        for r in 0..side {
            for c in 0..side {
                let x = a.values[r * side + c];
                let y = b.values[r * side + side - 1 - c];
                assert!((x - y).abs() < 1e-8, "{center:?} ({r},{c}): {x} vs {y}");
            }
        }
    }
    let whole = denoise_image(&img, &cfg).unwrap();
    let whole_flipped = denoise_image(&flipped, &cfg).unwrap();
    for (x, y) in flip_cols(&whole).pixels().iter().zip(whole_flipped.pixels()) {
        assert!((x - y).abs() < 1e-8);
    }
}

#[test]
fn shifted_image_keeps_its_basis() {
    let img = noise_image(15, 15, 2);
    let shifted = img.map(|v| v + 10.0).unwrap();
    let cfg = small_cfg(5);
    let center = Pos::new(7, 8);
    let a = basis_at(&img, center, &cfg).unwrap();
    let b = basis_at(&shifted, center, &cfg).unwrap();
    let offset = 10.0 * cfg.potential_scale;
    for (e, f) in a.energies().iter().zip(b.energies()) {
        assert!((f - e - offset).abs() < 1e-10);
    }
    for (u, v) in a.vectors().zip(b.vectors()) {
        for (x, y) in u.iter().zip(v) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn two_level_square_at_8db() {
    let clean = square(64);
    let (noisy, _) = add_awgn(&clean, 8.0, 0).unwrap();
    let out = denoise_image(&noisy, &DenoiseConfig::new(11, 0.085, 1.53)).unwrap();
    let before = psnr(&clean, &noisy, 255.0).unwrap();
    let after = psnr(&clean, &out, 255.0).unwrap();
    assert!(after > before);
    // Regression baseline recorded from this implementation.
    assert!((before - 15.3572).abs() < 1e-3, "{before}");
    assert!((after - 21.8250).abs() < 1e-3, "{after}");
}

#[test]
fn thread_count_does_not_change_output() {
    let img = noise_image(40, 37, 5);
    let one = DenoiseConfig {
        threads: Some(1),
        ..small_cfg(6)
    };
    let four = DenoiseConfig {
        threads: Some(4),
        ..small_cfg(6)
    };
    let a = denoise_image(&img, &one).unwrap();
    let b = denoise_image(&img, &four).unwrap();
    assert!(a
        .pixels()
        .iter()
        .zip(b.pixels())
        .all(|(x, y)| x.to_bits() == y.to_bits()));
    let stubbed = denoise_image_with(&img, &one, &NoInteraction).unwrap();
    assert_ne!(a, stubbed);
}
