//! CSV exports. Every table has a header row; reals are written in their
//! shortest round-trip form.

use std::path::Path;

use crate::contour::{ContourSet, Point};
use crate::error::{Error, Result};
use crate::lcp::LcpField;
use crate::mc::{ErrorMetrics, McDivergenceEstimate, McHistogram, Normal};

pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn write_lcp_csv(lcp: &LcpField, path: &Path) -> Result<()> {
    let g = lcp.grid;
    let cx = g.cells_x();
    write_table(
        path,
        &["i", "j", "x", "y", "lcp"],
        lcp.probabilities.iter().enumerate().map(|(c, p)| {
            let (i, j) = (c % cx, c / cx);
            let x = (i as f64 + 0.5) * g.dx();
            let y = (j as f64 + 0.5) * g.dy();
            [
                i.to_string(),
                j.to_string(),
                x.to_string(),
                y.to_string(),
                p.to_string(),
            ]
        }),
    )
}

/// Polylines from several sets are numbered consecutively.
pub fn write_contours_csv(sets: &[ContourSet], path: &Path) -> Result<()> {
    let rows = sets
        .iter()
        .flat_map(|s| s.polylines.iter())
        .enumerate()
        .flat_map(|(id, line)| {
            line.iter()
                .map(move |p| [id.to_string(), p[0].to_string(), p[1].to_string()])
        });
    write_table(path, &["polyline_id", "x", "y"], rows)
}

pub fn read_contours_csv(path: &Path) -> Result<Vec<Vec<Point>>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut lines: Vec<Vec<Point>> = Vec::new();
    let mut current: Option<u64> = None;
    for row in reader.deserialize::<(u64, f64, f64)>() {
        let (id, x, y) = row?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite contour point in polyline {id}"
            )));
        }
        if current != Some(id) {
            lines.push(Vec::new());
            current = Some(id);
        }
        lines.last_mut().expect("pushed above").push([x, y]);
    }
    Ok(lines)
}

pub fn write_estimate_csv(est: &McDivergenceEstimate, path: &Path) -> Result<()> {
    let nx = est.grid.nx();
    write_table(
        path,
        &["i", "j", "mean", "std"],
        est.mean
            .iter()
            .zip(&est.std)
            .enumerate()
            .map(|(k, (m, s))| {
                [
                    (k % nx).to_string(),
                    (k / nx).to_string(),
                    m.to_string(),
                    s.to_string(),
                ]
            }),
    )
}

pub fn write_metrics_csv(metrics: &ErrorMetrics, n_samples: u64, path: &Path) -> Result<()> {
    write_table(
        path,
        &["n_samples", "e_m", "e_sigma", "sse"],
        [[
            n_samples.to_string(),
            metrics.e_m.to_string(),
            metrics.e_sigma.to_string(),
            metrics.sse.to_string(),
        ]],
    )
}

/// Histogram with the analytic density averaged over each bin alongside.
pub fn write_histogram_csv(hist: &McHistogram, analytic: Normal, path: &Path) -> Result<()> {
    let mass = hist.normal_bin_mass(analytic);
    let rows = hist
        .bin_edges
        .windows(2)
        .zip(hist.counts.iter().zip(hist.densities()))
        .zip(mass)
        .map(|((e, (count, density)), p)| {
            [
                e[0].to_string(),
                e[1].to_string(),
                count.to_string(),
                density.to_string(),
                (p / (e[1] - e[0])).to_string(),
            ]
        });
    write_table(
        path,
        &[
            "bin_lo",
            "bin_hi",
            "count",
            "mc_density",
            "analytic_density",
        ],
        rows,
    )
}
