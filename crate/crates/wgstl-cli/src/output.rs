//! Shared console/file output helpers: number formatting, plain-text
//! tables, and the optional worker pool used by per-sample commands.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use wgstl::{Error, Result, Sample};

/// Format a float with four decimal places, the house style for weights.
pub fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

/// Format a vector as `[a, b, c]` with four decimal places per entry.
pub fn fmt_vec4(xs: &[f64]) -> String {
    let body = xs.iter().map(|&x| fmt4(x)).collect::<Vec<_>>().join(", ");
    format!("[{body}]")
}

/// Render a left-aligned plain-text table with a header row and a dashed
/// separator. Column widths adapt to the widest cell.
pub fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let cols = headers.len();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate().take(cols) {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let write_row = |out: &mut String, cells: &[String]| {
        for (i, cell) in cells.iter().enumerate().take(cols) {
            if i > 0 {
                out.push_str("  ");
            }
            let _ = write!(out, "{cell:<width$}", width = widths[i]);
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    };
    write_row(
        &mut out,
        &headers.iter().map(|h| h.to_string()).collect::<Vec<_>>(),
    );
    let mut dashes = Vec::with_capacity(cols);
    for w in &widths {
        dashes.push("-".repeat(*w));
    }
    write_row(&mut out, &dashes);
    for row in rows {
        write_row(&mut out, row);
    }
    out
}

/// Write `text` to `path`, creating parent directories as needed.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

/// Apply `f` to every sample, optionally fanned out over `jobs` worker
/// threads. Results come back in sample order either way.
pub fn map_samples<T, F>(jobs: usize, samples: &[Sample], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &Sample) -> Result<T> + Sync,
{
    if jobs <= 1 {
        return samples.iter().enumerate().map(|(i, s)| f(i, s)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::BadConfig(format!("cannot build a pool of {jobs} workers: {e}")))?;
    pool.install(|| {
        samples
            .par_iter()
            .enumerate()
            .map(|(i, s)| f(i, s))
            .collect()
    })
}
