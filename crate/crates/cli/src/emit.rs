use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use lielab_core::analysis::ScanResult;
use serde::Serialize;

use crate::manifest::RunManifest;
use crate::CliError;

/// A table with a header row; every cell already formatted.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }
}

/// CSV with the manifest on a leading `#` comment line.
pub fn csv_string(manifest: &RunManifest, table: &Table) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).expect("csv output is utf-8");
    Ok(format!("# manifest {}\n{body}", serde_json::to_string(manifest)?))
}

pub fn json_string<T: Serialize>(manifest: &RunManifest, result: &T) -> Result<String, CliError> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        manifest: &'a RunManifest,
        result: &'a T,
    }
    Ok(serde_json::to_string_pretty(&Doc { manifest, result })? + "\n")
}

/// Writes to `path`, or stdout when there is none.
pub fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

/// Companion path for the JSON verdict of a CSV output.
pub fn companion(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Log-log data of a scan with the fitted and predicted lines as comments.
///
/// Fails without touching `path` when the scan has no rows.
pub fn emit_plotdata(scan: &ScanResult, path: &Path) -> Result<(), CliError> {
    fs::write(path, plotdata_string(scan)?).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn plotdata_string(scan: &ScanResult) -> Result<String, CliError> {
    if scan.rows.is_empty() {
        return Err(CliError::Usage("empty scan, nothing to plot".into()));
    }
    let mut s = String::new();
    s.push_str(&format!(
        "# {} {} I={:?} J={:?} p={}\n",
        scan.quantity.as_str(),
        scan.type_label,
        scan.i,
        scan.j,
        scan.p
    ));
    s.push_str(&format!("# fit: y = {} * x + {}  (slope se {})\n", scan.fitted_slope, scan.intercept, scan.slope_se));
    // reference line through the data centroid
    let n = scan.rows.len() as f64;
    let mx = scan.rows.iter().map(|r| (r.n as f64).ln()).sum::<f64>() / n;
    let my = scan.rows.iter().map(|r| r.value.ln()).sum::<f64>() / n;
    s.push_str(&format!("# predicted: y = {} * x + {}\n", scan.predicted_exponent, my - scan.predicted_exponent * mx));
    s.push_str("log_n,log_value\n");
    for r in &scan.rows {
        s.push_str(&format!("{},{}\n", (r.n as f64).ln(), r.value.ln()));
    }
    Ok(s)
}
