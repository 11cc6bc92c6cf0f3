//! `<name>.csv` (one row per record) and `<name>.summary.json`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::runner::{Record, ScenarioReport};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.display().to_string(), source }
}

pub fn write_csv<W: Write>(records: &[Record], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|source| HarnessError::Io { path: "<csv>".into(), source })?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<Record>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<Record>, _>>()?)
}

/// Writes both files into `dir` (created if needed) and returns their paths.
pub fn write_outputs(report: &ScenarioReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv_path = dir.join(format!("{}.csv", report.scenario));
    let json_path = dir.join(format!("{}.summary.json", report.scenario));
    let file = File::create(&csv_path).map_err(io_err(&csv_path))?;
    write_csv(&report.records, BufWriter::new(file))?;
    let mut file = BufWriter::new(File::create(&json_path).map_err(io_err(&json_path))?);
    serde_json::to_writer_pretty(&mut file, report)?;
    writeln!(file).and_then(|_| file.flush()).map_err(io_err(&json_path))?;
    Ok((csv_path, json_path))
}

/// One line per group, for terminal output.
pub fn format_summary(report: &ScenarioReport) -> String {
    let mut s = format!("{} ({}), seed {}\n", report.scenario, report.study, report.seed);
    for g in &report.groups {
        s.push_str(&format!("  n={:<6} {:<30} reps={:<5}", g.n, g.method, g.reps));
        let fields = [
            ("coverage", g.coverage),
            ("width", g.mean_width),
            ("ks", g.ks),
            ("ks_limit", g.ks_limit),
            ("ks_mean_free", g.ks_mean_free),
            ("df_lower", g.df_lower),
            ("mean_gap", g.mean_gap),
            ("gap_flagged", g.gap_flagged_fraction),
            ("rejection", g.rejection_rate),
            ("l3", g.first_order_l3),
            ("rate", g.rate_exponent),
            ("r_nb", g.r_nb),
        ];
        for (name, v) in fields {
            if let Some(v) = v {
                s.push_str(&format!(" {name}={v:.4}"));
            }
        }
        if let Some(b) = g.boot_below_total {
            s.push_str(&format!(" boot_below={b}"));
        }
        s.push('\n');
    }
    s
}
