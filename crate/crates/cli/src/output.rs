//! Artifact writers: results.csv, the JSON run manifest, per-frame CSVs, and
//! gnuplot-ready .dat extraction from a results file.

use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use tdls_core::{GridFunction, SolveReport, TrigGrid};

pub fn write_results_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)
}

/// Fixed-width scientific formatting so equal runs produce equal bytes.
pub fn fnum(v: f64) -> String {
    format!("{v:.12e}")
}

#[derive(Debug, Serialize)]
pub struct NodeReport {
    pub index: usize,
    pub s_re: f64,
    pub s_im: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub wall_s: f64,
}

pub fn node_reports(nodes: &[tdls_core::ComplexFrequency], reports: &[SolveReport]) -> Vec<NodeReport> {
    nodes
        .iter()
        .zip(reports)
        .enumerate()
        .map(|(index, (s, r))| NodeReport {
            index,
            s_re: s.value().re,
            s_im: s.value().im,
            iterations: r.iterations,
            residual: r.final_residual,
            converged: r.converged,
            wall_s: r.wall_time,
        })
        .collect()
}

/// Stability expression of the reported (never enforced) time-step
/// constraint: dt against B * N^{-1/13}.
#[derive(Debug, Serialize)]
pub struct StabilityLog {
    pub dt: f64,
    pub n: usize,
    pub sup_delta: f64,
    pub floor: f64,
    pub dt_above_floor: bool,
}

pub fn write_manifest<T: Serialize>(dir: &Path, manifest: &T) -> std::io::Result<PathBuf> {
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(&path, text)?;
    Ok(path)
}

/// One frame as CSV: node coordinates then Re/Im of the field.
pub fn write_frame_csv(path: &Path, grid: &TrigGrid, frame: &GridFunction) -> std::io::Result<()> {
    let file = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    if grid.dim() == 2 {
        writeln!(w, "x1,x2,re_u,im_u")?;
    } else {
        writeln!(w, "x1,x2,x3,re_u,im_u")?;
    }
    for (i, v) in frame.values().iter().enumerate() {
        let x = grid.node(i);
        if grid.dim() == 2 {
            writeln!(w, "{},{},{},{}", fnum(x[0]), fnum(x[1]), fnum(v.re), fnum(v.im))?;
        } else {
            writeln!(
                w,
                "{},{},{},{},{}",
                fnum(x[0]),
                fnum(x[1]),
                fnum(x[2]),
                fnum(v.re),
                fnum(v.im)
            )?;
        }
    }
    w.flush()
}

/// Extract gnuplot-ready (coordinate, error) columns from a sweep results
/// file: one .dat per fixed parameter, log-log friendly (both columns
/// positive). Returns the paths written.
pub fn emit_plot_data(results_csv: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, String> {
    let text = fs::read_to_string(results_csv)
        .map_err(|e| format!("cannot read {}: {e}", results_csv.display()))?;
    let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#'));
    let header = lines.next().ok_or("results file is empty")?;
    let cols: Vec<&str> = header.split(',').collect();
    let find = |name: &str| cols.iter().position(|c| *c == name);
    let (mode_c, n_c, m_c, err_c) = (
        find("mode").ok_or("missing 'mode' column")?,
        find("n").ok_or("missing 'n' column")?,
        find("m").ok_or("missing 'm' column")?,
        find("error").ok_or("missing 'error' column")?,
    );
    // rows keyed by the fixed parameter
    let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.first() == Some(&"FAILED") {
            continue;
        }
        if f.len() <= err_c.max(mode_c).max(n_c).max(m_c) {
            return Err(format!("malformed row: {line}"));
        }
        let err: f64 = f[err_c]
            .parse()
            .map_err(|_| format!("non-numeric error field: {}", f[err_c]))?;
        if err.is_nan() || err <= 0.0 || !err.is_finite() {
            return Err(format!("error field must be finite and positive: {err}"));
        }
        let (key, coord) = match f[mode_c] {
            "sweep-time" => (format!("sweep_time_N{}", f[n_c]), f[m_c]),
            "sweep-space" => (format!("sweep_space_M{}", f[m_c]), f[n_c]),
            other => (other.to_string(), f[n_c]),
        };
        let coord: f64 = coord
            .parse()
            .map_err(|_| format!("non-numeric sweep coordinate: {coord}"))?;
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, rows)) => rows.push((coord, err)),
            None => groups.push((key, vec![(coord, err)])),
        }
    }
    let mut written = Vec::new();
    if groups.is_empty() {
        // header-only results produce a header-only .dat
        let path = out_dir.join("sweep.dat");
        fs::write(&path, "# coordinate error\n").map_err(|e| e.to_string())?;
        written.push(path);
        return Ok(written);
    }
    for (key, rows) in groups {
        let path = out_dir.join(format!("{key}.dat"));
        let mut out = String::from("# coordinate error\n");
        for (coord, err) in rows {
            out.push_str(&format!("{coord} {}\n", fnum(err)));
        }
        fs::write(&path, out).map_err(|e| e.to_string())?;
        written.push(path);
    }
    Ok(written)
}
