use std::path::Path;
use std::process::{Command, Output};

use qmpi_core::{read_image, write_image, ImageGrid};

fn qmpi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmpi"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("QMPI_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ramp(dir: &Path) -> String {
    let img = ImageGrid::from_fn(20, 16, |r, c| if c < 10 { 60.0 } else { 180.0 + r as f64 }).unwrap();
    let path = dir.join("ramp.pgm");
    write_image(&path, &img).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn synth_denoise_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let clean = ramp(dir.path());
    let out_dir = dir.path().join("out");
    let out_dir = out_dir.to_str().unwrap();

    let synth = qmpi(&[
        "synth-noise",
        "--input",
        &clean,
        "--snr",
        "8",
        "--seed",
        "5",
        "--output-dir",
        out_dir,
    ]);
    assert!(synth.status.success(), "{}", String::from_utf8_lossy(&synth.stderr));
    let noisy = stdout(&synth).trim().to_string();
    assert!(noisy.ends_with("ramp_snr8_seed5.png"), "{noisy}");
    let sidecar = std::fs::read_to_string(Path::new(&noisy).with_extension("txt")).unwrap();
    assert!(
        sidecar.contains("snr_db = 8\n") && sidecar.contains("seed = 5\n"),
        "{sidecar}"
    );

    let again = qmpi(&[
        "synth-noise",
        "--input",
        &clean,
        "--snr",
        "8",
        "--seed",
        "5",
        "--output",
        &format!("{out_dir}/again.png"),
    ]);
    assert!(again.status.success());
    assert_eq!(
        read_image(&noisy).unwrap(),
        read_image(format!("{out_dir}/again.png")).unwrap()
    );

    let den = qmpi(&[
        "denoise",
        "--input",
        &noisy,
        "--output-dir",
        out_dir,
        "--d",
        "3",
        "--p",
        "0.085",
        "--kinetic",
        "1.53",
        "--patch-half",
        "1",
        "--window-half",
        "2",
        "--dump-basis",
        "4,5",
    ]);
    assert!(den.status.success(), "{}", String::from_utf8_lossy(&den.stderr));
    let denoised = stdout(&den).trim().to_string();
    assert!(denoised.ends_with("ramp_snr8_seed5_denoised.png"));
    let tiles = Path::new(out_dir).join("ramp_snr8_seed5_basis_r4_c5.png");
    assert!(tiles.exists());
    let energies =
        std::fs::read_to_string(Path::new(out_dir).join("ramp_snr8_seed5_basis_r4_c5_energies.txt")).unwrap();
    assert_eq!(energies.lines().count(), 9);

    let before = qmpi(&["evaluate", "--reference", &clean, "--input", &noisy]);
    let after = qmpi(&["evaluate", "--reference", &clean, "--input", &denoised]);
    let parse = |o: &Output| -> (f64, f64) {
        let text = stdout(o);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("psnr_db,ssim"));
        let (a, b) = lines.next().unwrap().split_once(',').unwrap();
        (a.parse().unwrap(), b.parse().unwrap())
    };
    let (psnr_noisy, _) = parse(&before);
    let (psnr_out, _) = parse(&after);
    assert!(psnr_out > psnr_noisy, "{psnr_out} <= {psnr_noisy}");

    let same = qmpi(&["evaluate", "--reference", &clean, "--input", &clean]);
    assert_eq!(stdout(&same), "psnr_db,ssim\ninf,1\n");
}

#[test]
fn bench_prints_report() {
    let dir = tempfile::tempdir().unwrap();
    let clean = ramp(dir.path());
    let out_dir = dir.path().join("bench");
    let out = qmpi(&[
        "bench",
        "--input",
        &clean,
        "--snr",
        "16,8",
        "--d",
        "3",
        "--p",
        "0.1",
        "--kinetic",
        "1.5",
        "--patch-half",
        "1",
        "--window-half",
        "2",
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("image,snr_db,P_h,W_h,d,p,kinetic,seed,"));
    assert_eq!(std::fs::read_to_string(out_dir.join("report.csv")).unwrap(), text);

    let empty = qmpi(&["bench", "--input", &clean, "--snr", "", "--preset", "house8"]);
    assert!(empty.status.success());
    assert_eq!(stdout(&empty).lines().count(), 1);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let clean = ramp(dir.path());
    let missing_d = qmpi(&["denoise", "--input", &clean, "--p", "0.1", "--kinetic", "1"]);
    assert_eq!(missing_d.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing_d.stderr).contains("`d`"));

    let zero_d = qmpi(&["denoise", "--input", &clean, "--preset", "house8", "--d", "0"]);
    assert_eq!(zero_d.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&zero_d.stderr).contains("1 <= d <= 49"));

    let no_file = qmpi(&["denoise", "--input", "/nonexistent/x.pgm", "--preset", "house8"]);
    assert_eq!(no_file.status.code(), Some(1));

    let bad_flag = qmpi(&["denoise", "--bogus"]);
    assert_eq!(bad_flag.status.code(), Some(1));
    assert!(stdout(&bad_flag).is_empty());

    let threads = Command::new(env!("CARGO_BIN_EXE_qmpi"))
        .args(["denoise", "--input", &clean, "--preset", "house8"])
        .env("QMPI_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("junk.pgm");
    std::fs::write(&garbage, b"P5 nonsense").unwrap();
    let out = qmpi(&["denoise", "--input", garbage.to_str().unwrap(), "--preset", "house8"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).is_empty());

    let bench = qmpi(&[
        "bench",
        "--input",
        garbage.to_str().unwrap(),
        "--preset",
        "house8",
        "--output-dir",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(bench.status.code(), Some(2));
}
