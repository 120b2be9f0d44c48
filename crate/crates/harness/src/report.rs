//! CSV emission. Every file starts with a `schema` column so readers can
//! reject layouts they do not know.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::runner::{ExperimentOutput, ResultRow};
use crate::HarnessError;

pub const SCHEMA: &str = "v1";

/// `%.6g`-style rendering: 6 significant digits, trailing zeros dropped.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub const RESULTS_HEADER: &str = "schema,snr_db,ablation,l_c,l_s,trials,bleu1_mean,bleu1_std,bleu4_mean,bleu4_std,ber_mean,ber_std,wer_mean,wer_std,codec_invocations";

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{SCHEMA},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            sig6(r.snr_db),
            r.ablation,
            r.l_c,
            r.l_s,
            r.trials,
            sig6(r.bleu1.mean),
            sig6(r.bleu1.std),
            sig6(r.bleu4.mean),
            sig6(r.bleu4.std),
            sig6(r.ber.mean),
            sig6(r.ber.std),
            sig6(r.wer.mean),
            sig6(r.wer.std),
            sig6(r.codec_invocations),
        );
    }
    out
}

/// Wall time varies run to run, so it lives apart from the results.
pub fn timing_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from("schema,snr_db,ablation,l_c,l_s,wall_ms_per_sentence\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{SCHEMA},{},{},{},{},{}",
            sig6(r.snr_db),
            r.ablation,
            r.l_c,
            r.l_s,
            sig6(r.wall_ms_per_sentence)
        );
    }
    out
}

pub fn histogram_csv(output: &ExperimentOutput, snr_db: &[f64]) -> String {
    let mut out = String::from("schema,snr_db,ablation,bin_lo,bin_hi,population,correct,correct_rate\n");
    for (&(s, ablation), h) in &output.histograms {
        let rates = h.correct_rate();
        for b in 0..h.num_bins() {
            let rate = rates[b].map(sig6).unwrap_or_default();
            let _ = writeln!(
                out,
                "{SCHEMA},{},{ablation},{},{},{},{},{rate}",
                sig6(snr_db[s]),
                sig6(h.bin_edges[b]),
                sig6(h.bin_edges[b + 1]),
                h.population(b),
                h.correct_counts[b],
            );
        }
    }
    out
}

/// `results.csv` → `results.<tag>.csv`.
pub fn sidecar_path(output: &Path, tag: &str) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.{tag}.csv"))
}

pub fn write(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io {
            path: dir.to_owned(),
            source: e,
        })?;
    }
    std::fs::write(path, contents).map_err(|e| HarnessError::Io {
        path: path.to_owned(),
        source: e,
    })
}

/// Writes the results CSV plus `.hist` and `.timing` sidecars; returns
/// the paths written.
pub fn write_all(output: &ExperimentOutput, snr_db: &[f64], path: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let hist = sidecar_path(path, "hist");
    let timing = sidecar_path(path, "timing");
    write(path, &results_csv(&output.rows))?;
    write(&hist, &histogram_csv(output, snr_db))?;
    write(&timing, &timing_csv(&output.rows))?;
    Ok(vec![path.to_owned(), hist, timing])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(-3.0), "-3");
        assert_eq!(sig6(0.123456789), "0.123457");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(12345.67), "12345.7");
        assert_eq!(sig6(0.000012345678), "1.23457e-5");
        assert_eq!(sig6(0.00012345678), "0.000123457");
        assert_eq!(sig6(0.5), "0.5");
        assert_eq!(sig6(2.0 / 3.0), "0.666667");
    }

    #[test]
    fn sidecars_sit_next_to_output() {
        assert_eq!(sidecar_path(Path::new("out/r.csv"), "hist"), PathBuf::from("out/r.hist.csv"));
    }
}
