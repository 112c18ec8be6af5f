//! CSV and markdown renderings of run records.

use std::io::{Read, Write};
use std::path::Path;

use crate::experiment::RunRecord;

/// CSV header, in column order.
pub const COLUMNS: [&str; 13] = [
    "image",
    "snr_db",
    "P_h",
    "W_h",
    "d",
    "p",
    "kinetic",
    "seed",
    "noisy_psnr",
    "noisy_ssim",
    "out_psnr",
    "out_ssim",
    "seconds",
];

pub fn write_csv_to<W: Write>(writer: W, records: &[RunRecord]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    if records.is_empty() {
        out.write_record(COLUMNS)?;
    }
    for record in records {
        out.serialize(record)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, records: &[RunRecord]) -> csv::Result<()> {
    write_csv_to(std::fs::File::create(path)?, records)
}

pub fn read_csv_from<R: Read>(reader: R) -> csv::Result<Vec<RunRecord>> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

pub fn read_csv(path: &Path) -> csv::Result<Vec<RunRecord>> {
    read_csv_from(std::fs::File::open(path)?)
}

pub fn csv_string(records: &[RunRecord]) -> String {
    let mut buf = Vec::new();
    write_csv_to(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

fn fmt_psnr(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.2}")
    }
}

/// Markdown table with PSNR(dB)/SSIM pairs before and after denoising.
pub fn markdown(records: &[RunRecord]) -> String {
    let mut out = String::from(
        "| image | SNR (dB) | d | p | kinetic | noisy PSNR/SSIM | denoised PSNR/SSIM | time (s) |\n\
         |---|---:|---:|---:|---:|---:|---:|---:|\n",
    );
    for r in records {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {}/{:.3} | {}/{:.3} | {:.1} |\n",
            r.image,
            r.snr_db,
            r.d,
            r.p,
            r.kinetic,
            fmt_psnr(r.noisy_psnr),
            r.noisy_ssim,
            fmt_psnr(r.out_psnr),
            r.out_ssim,
            r.seconds
        ));
    }
    out
}
