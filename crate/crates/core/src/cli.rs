//! Command-line front end. Every subcommand reads and writes files only, so
//! stages compose through the filesystem.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or I/O error.

use std::ffi::OsString;
use std::hint::black_box;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::contour::{marching_squares, ContourSet};
use crate::divergence::{divergence_deterministic_with, propagate_divergence_with};
use crate::error::{Error, Result};
use crate::fit::{fit_gaussian_with, gradient_ensemble, velocity_magnitude};
use crate::grid::{ScalarField2, UniformGrid2, VectorField2};
use crate::io::{self, tables, EnsembleFile, SyntheticKind};
use crate::lcp::lcp_with;
use crate::mc::{
    error_metrics, mc_divergence_with, sample_moments, sample_stencil_divergence, McConfig,
    McHistogram, Normal, StencilNeighbors,
};
use crate::parallel::{bench, BenchReport, ParallelConfig, Threads};
use crate::render::{overlay_contours, render_colormap, Colormap, Rgb};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "divuq",
    version,
    about = "Divergence uncertainty for 2D vector-field ensembles"
)]
struct Cli {
    /// Worker threads for data-parallel kernels: a positive integer or "auto".
    #[arg(long, global = true, default_value = "auto", value_parser = parse_threads)]
    threads: Threads,

    #[command(subcommand)]
    command: Command,
}

fn parse_threads(s: &str) -> std::result::Result<Threads, String> {
    s.parse::<Threads>().map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic ensemble.
    Gen(GenArgs),
    /// Fit per-vertex Gaussians to an ensemble.
    Fit(FitArgs),
    /// Closed-form divergence distribution of a Gaussian model.
    Div(DivArgs),
    /// Monte Carlo estimate of the divergence distribution.
    Mc(McArgs),
    /// Level-crossing probability of a divergence distribution.
    Lcp(LcpArgs),
    /// Marching-squares isocontours of every member of a file.
    Contour(ContourArgs),
    /// Colormap a field to a PPM image.
    Render(RenderArgs),
    /// Replace each member by the gradient of its velocity magnitude.
    Gradmag(GradmagArgs),
    /// Single-vertex comparison of Monte Carlo and closed-form divergence.
    #[command(name = "validate-1d")]
    Validate1d(Validate1dArgs),
    /// Time closed-form propagation against Monte Carlo.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    SourceSink,
    Vortex,
    WindLike,
}

impl From<Kind> for SyntheticKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::SourceSink => SyntheticKind::SourceSink,
            Kind::Vortex => SyntheticKind::Vortex,
            Kind::WindLike => SyntheticKind::WindLike,
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    nx: usize,
    #[arg(long)]
    ny: usize,
    #[arg(long, default_value_t = 1.0)]
    dx: f64,
    #[arg(long, default_value_t = 1.0)]
    dy: f64,
    #[arg(long)]
    members: usize,
    /// Standard deviation of the per-member noise.
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out_mu: PathBuf,
    #[arg(long)]
    out_sigma: PathBuf,
}

#[derive(Debug, Args)]
struct DivArgs {
    #[arg(long)]
    in_mu: PathBuf,
    #[arg(long)]
    in_sigma: PathBuf,
    #[arg(long)]
    out_mu: PathBuf,
    #[arg(long)]
    out_sigma: PathBuf,
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long)]
    in_mu: PathBuf,
    #[arg(long)]
    in_sigma: PathBuf,
    #[arg(long)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_mean: PathBuf,
    #[arg(long)]
    out_std: PathBuf,
    /// Compare against the closed-form solution and write e_m, e_sigma and
    /// SSE to this CSV.
    #[arg(long, value_name = "METRICS_CSV")]
    sse_against: Option<PathBuf>,
    /// Also write the per-vertex estimate as CSV.
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LcpArgs {
    #[arg(long)]
    in_mu: PathBuf,
    #[arg(long)]
    in_sigma: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    iso: f64,
    /// Output path; `.ppm` writes an image, anything else CSV. Repeatable.
    #[arg(long, required = true)]
    out: Vec<PathBuf>,
    /// Colormap CSV (`r,g,b` rows) for PPM output; built-in when omitted.
    #[arg(long)]
    lut: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FieldSel {
    U,
    V,
    Magnitude,
    Divergence,
}

#[derive(Debug, Args)]
struct ContourArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    iso: f64,
    #[arg(long)]
    out_csv: PathBuf,
    /// Scalar extracted from each member.
    #[arg(long, value_enum, default_value = "u")]
    field: FieldSel,
    /// Only this member (default: all members, i.e. a spaghetti plot).
    #[arg(long)]
    member: Option<usize>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    lo: f64,
    #[arg(long, allow_negative_numbers = true)]
    hi: f64,
    /// Colormap CSV (`r,g,b` rows); built-in when omitted or "builtin".
    #[arg(long)]
    lut: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "u")]
    field: FieldSel,
    #[arg(long, default_value_t = 0)]
    member: usize,
    /// Contour CSV (`polyline_id,x,y`) drawn over the image.
    #[arg(long)]
    contours: Option<PathBuf>,
    #[arg(long, default_value = "0,255,255", value_parser = parse_rgb)]
    contour_color: Rgb,
}

fn parse_rgb(s: &str) -> std::result::Result<Rgb, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected r,g,b, got {s:?}"));
    }
    let mut out = [0u8; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("bad channel {p:?}"))?;
    }
    Ok(out)
}

#[derive(Debug, Args)]
struct GradmagArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct Validate1dArgs {
    #[arg(long, default_value_t = 5.98, allow_negative_numbers = true)]
    mu_uim: f64,
    #[arg(long, default_value_t = 0.96)]
    sigma_uim: f64,
    #[arg(long, default_value_t = 6.40, allow_negative_numbers = true)]
    mu_uip: f64,
    #[arg(long, default_value_t = 0.38)]
    sigma_uip: f64,
    #[arg(long, default_value_t = 6.50, allow_negative_numbers = true)]
    mu_vjm: f64,
    #[arg(long, default_value_t = 0.94)]
    sigma_vjm: f64,
    #[arg(long, default_value_t = 4.30, allow_negative_numbers = true)]
    mu_vjp: f64,
    #[arg(long, default_value_t = 0.65)]
    sigma_vjp: f64,
    #[arg(long, default_value_t = 1.0)]
    dx: f64,
    #[arg(long, default_value_t = 1.0)]
    dy: f64,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Histogram table (bin edges, counts, MC and analytic densities).
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000")]
    samples_list: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    threads_list: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_csv: PathBuf,
}

/// Entry point used by the binary; writes diagnostics to the process stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    let par = ParallelConfig {
        threads: cli.threads,
        ..ParallelConfig::default()
    };
    match dispatch(cli.command, &par, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Config(_) | Error::Range { .. } => EXIT_USAGE,
                _ => EXIT_DATA,
            }
        }
    }
}

fn dispatch(command: Command, par: &ParallelConfig, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Gen(a) => cmd_gen(a),
        Command::Fit(a) => cmd_fit(a, par),
        Command::Div(a) => cmd_div(a, par),
        Command::Mc(a) => cmd_mc(a, par, out),
        Command::Lcp(a) => cmd_lcp(a, par, out),
        Command::Contour(a) => cmd_contour(a, par, out),
        Command::Render(a) => cmd_render(a, par),
        Command::Gradmag(a) => cmd_gradmag(a),
        Command::Validate1d(a) => cmd_validate_1d(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    }
}

fn stdout_line(out: &mut dyn Write, line: std::fmt::Arguments<'_>) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let grid =
        UniformGrid2::new(a.nx, a.ny, a.dx, a.dy).map_err(|e| Error::Config(e.to_string()))?;
    if a.members < 2 {
        return Err(Error::Config(format!(
            "--members must be at least 2, got {}",
            a.members
        )));
    }
    if !(a.sigma.is_finite() && a.sigma >= 0.0) {
        return Err(Error::Config(format!(
            "--sigma must be non-negative, got {}",
            a.sigma
        )));
    }
    let ensemble = io::generate_synthetic(a.kind.into(), grid, a.members, a.sigma, a.seed)?;
    io::write_ensemble(&EnsembleFile::from(&ensemble), &a.out)
}

fn cmd_fit(a: FitArgs, par: &ParallelConfig) -> Result<()> {
    let ensemble = io::read_ensemble(&a.input)?
        .into_ensemble()
        .map_err(|e| Error::Data(format!("{}: {e}", a.input.display())))?;
    let model = fit_gaussian_with(&ensemble, par)?;
    io::write_model(&model, &a.out_mu, &a.out_sigma)
}

fn cmd_div(a: DivArgs, par: &ParallelConfig) -> Result<()> {
    let model = io::read_model(&a.in_mu, &a.in_sigma)?;
    let div = propagate_divergence_with(&model, par);
    io::write_gaussian_scalar(&div, &a.out_mu, &a.out_sigma)
}

fn cmd_mc(a: McArgs, par: &ParallelConfig, out: &mut dyn Write) -> Result<()> {
    let config = McConfig::new(a.samples, a.seed)?;
    let model = io::read_model(&a.in_mu, &a.in_sigma)?;
    let est = mc_divergence_with(&model, &config, par)?;
    let grid = est.grid;
    io::write_scalar(&ScalarField2::new(grid, est.mean.clone())?, &a.out_mean)?;
    io::write_scalar(&ScalarField2::new(grid, est.std.clone())?, &a.out_std)?;
    if let Some(path) = &a.out_csv {
        tables::write_estimate_csv(&est, path)?;
    }
    if let Some(path) = &a.sse_against {
        let analytic = propagate_divergence_with(&model, par);
        let m = error_metrics(&est, &analytic)?;
        tables::write_metrics_csv(&m, est.n_samples, path)?;
        stdout_line(
            out,
            format_args!("e_m={} e_sigma={} sse={}", m.e_m, m.e_sigma, m.sse),
        )?;
    }
    Ok(())
}

fn load_colormap(lut: Option<&Path>) -> Result<Colormap> {
    match lut {
        None => Ok(Colormap::builtin()),
        Some(p) if p.as_os_str() == "builtin" => Ok(Colormap::builtin()),
        Some(p) => Colormap::from_csv(p),
    }
}

fn is_ppm(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("ppm"))
}

fn cmd_lcp(a: LcpArgs, par: &ParallelConfig, out: &mut dyn Write) -> Result<()> {
    if !a.iso.is_finite() {
        return Err(Error::Config("--iso must be finite".into()));
    }
    let field = io::read_gaussian_scalar(&a.in_mu, &a.in_sigma)?;
    let result = lcp_with(&field, a.iso, par);
    let colormap = load_colormap(a.lut.as_deref())?;
    for path in &a.out {
        if is_ppm(path) {
            render_colormap(&result, (0.0, 1.0), &colormap)?.write_ppm(path)?;
        } else {
            tables::write_lcp_csv(&result, path)?;
        }
    }
    stdout_line(
        out,
        format_args!(
            "isovalue={} cells={} max_lcp={}",
            result.isovalue,
            result.probabilities.len(),
            result.max()
        ),
    )
}

fn member_scalar(
    member: &VectorField2,
    which: FieldSel,
    par: &ParallelConfig,
) -> Result<ScalarField2> {
    let grid = *member.grid();
    match which {
        FieldSel::U => ScalarField2::new(grid, member.u().to_vec()),
        FieldSel::V => ScalarField2::new(grid, member.v().to_vec()),
        FieldSel::Magnitude => Ok(velocity_magnitude(member)),
        FieldSel::Divergence => Ok(divergence_deterministic_with(member, par)),
    }
}

fn select_members(file: EnsembleFile, member: Option<usize>) -> Result<Vec<VectorField2>> {
    match member {
        None => Ok(file.members),
        Some(m) if m < file.members.len() => Ok(vec![file.members[m].clone()]),
        Some(m) => Err(Error::Config(format!(
            "--member {m} out of range, file has {} members",
            file.members.len()
        ))),
    }
}

fn cmd_contour(a: ContourArgs, par: &ParallelConfig, out: &mut dyn Write) -> Result<()> {
    if !a.iso.is_finite() {
        return Err(Error::Config("--iso must be finite".into()));
    }
    let members = select_members(io::read_ensemble(&a.input)?, a.member)?;
    let sets = members
        .iter()
        .map(|m| Ok(marching_squares(&member_scalar(m, a.field, par)?, a.iso)))
        .collect::<Result<Vec<ContourSet>>>()?;
    tables::write_contours_csv(&sets, &a.out_csv)?;
    let lines: usize = sets.iter().map(|s| s.polylines.len()).sum();
    stdout_line(
        out,
        format_args!("members={} polylines={lines}", sets.len()),
    )
}

fn cmd_render(a: RenderArgs, par: &ParallelConfig) -> Result<()> {
    let members = select_members(io::read_ensemble(&a.input)?, Some(a.member))?;
    let field = member_scalar(&members[0], a.field, par)?;
    let colormap = load_colormap(a.lut.as_deref())?;
    let mut raster = render_colormap(&field, (a.lo, a.hi), &colormap)?;
    if let Some(path) = &a.contours {
        let contours = ContourSet {
            isovalue: f64::NAN,
            polylines: tables::read_contours_csv(path)?,
        };
        raster = overlay_contours(&raster, &contours, a.contour_color);
    }
    raster.write_ppm(&a.out)
}

fn cmd_gradmag(a: GradmagArgs) -> Result<()> {
    let ensemble = io::read_ensemble(&a.input)?
        .into_ensemble()
        .map_err(|e| Error::Data(format!("{}: {e}", a.input.display())))?;
    let grad = gradient_ensemble(&ensemble)?;
    io::write_ensemble(&EnsembleFile::from(&grad), &a.out)
}

fn cmd_validate_1d(a: Validate1dArgs, out: &mut dyn Write) -> Result<()> {
    let neighbors = StencilNeighbors {
        u_im: Normal::new(a.mu_uim, a.sigma_uim),
        u_ip: Normal::new(a.mu_uip, a.sigma_uip),
        v_jm: Normal::new(a.mu_vjm, a.sigma_vjm),
        v_jp: Normal::new(a.mu_vjp, a.sigma_vjp),
    };
    let spacing = (a.dx, a.dy);
    if a.samples < 2 {
        return Err(Error::Config(format!(
            "--samples must be at least 2, got {}",
            a.samples
        )));
    }
    let config = McConfig::new(a.samples, a.seed)?;
    let samples = sample_stencil_divergence(&neighbors, spacing, &config)?;
    let hist = McHistogram::from_samples(&samples, a.bins)?;
    let analytic = neighbors.analytic(spacing);
    let (mc_mean, mc_std) = sample_moments(&samples);
    if let Some(path) = &a.out_csv {
        tables::write_histogram_csv(&hist, analytic, path)?;
    }
    let rows = [
        ("analytic_mu", analytic.mu.to_string()),
        ("analytic_sigma", analytic.sigma.to_string()),
        ("mc_mean", mc_mean.to_string()),
        ("mc_std", mc_std.to_string()),
        ("e_m", (mc_mean - analytic.mu).abs().to_string()),
        ("e_sigma", (mc_std - analytic.sigma).abs().to_string()),
        ("hist_l1", hist.l1_distance(analytic).to_string()),
        ("n_samples", a.samples.to_string()),
    ];
    stdout_line(out, format_args!("quantity,value"))?;
    for (k, v) in rows {
        stdout_line(out, format_args!("{k},{v}"))?;
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<()> {
    if a.samples_list.is_empty() || a.threads_list.is_empty() {
        return Err(Error::Config(
            "--samples-list and --threads-list must not be empty".into(),
        ));
    }
    if let Some(&t) = a.threads_list.iter().find(|&&t| t == 0) {
        return Err(Error::Config(format!(
            "thread count must be positive, got {t}"
        )));
    }
    let configs = a
        .samples_list
        .iter()
        .map(|&n| {
            if n < 2 {
                Err(Error::Config(format!(
                    "sample counts must be at least 2, got {n}"
                )))
            } else {
                McConfig::new(n, a.seed)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let ensemble = io::read_ensemble(&a.input)?
        .into_ensemble()
        .map_err(|e| Error::Data(format!("{}: {e}", a.input.display())))?;
    let model = fit_gaussian_with(&ensemble, &ParallelConfig::default())?;
    let analytic = propagate_divergence_with(&model, &ParallelConfig::serial());

    struct Row {
        report: BenchReport,
        method: &'static str,
        threads: usize,
        samples: Option<u64>,
        sse: Option<f64>,
        speedup: f64,
    }
    let mut rows = Vec::new();
    for &threads in &a.threads_list {
        let par = ParallelConfig::with_threads(threads);
        let base = bench::<Error, _>(&format!("analytic/t{threads}"), a.runs, || {
            black_box(propagate_divergence_with(black_box(&model), &par));
            Ok(())
        })?;
        let base_mean = base.mean_seconds;
        rows.push(Row {
            report: base,
            method: "analytic",
            threads,
            samples: None,
            sse: None,
            speedup: 1.0,
        });
        for config in &configs {
            let mut last = None;
            let report = bench::<Error, _>(
                &format!("mc/n{}/t{threads}", config.n_samples()),
                a.runs,
                || {
                    last = Some(mc_divergence_with(black_box(&model), config, &par)?);
                    Ok(())
                },
            )?;
            let est = last.expect("bench ran at least once");
            let sse = error_metrics(&est, &analytic)?.sse;
            let speedup = report.mean_seconds / base_mean;
            rows.push(Row {
                report,
                method: "mc",
                threads,
                samples: Some(config.n_samples()),
                sse: Some(sse),
                speedup,
            });
        }
    }

    let mut header: Vec<&str> = BenchReport::CSV_HEADER.to_vec();
    header.extend(["method", "threads", "samples", "sse", "analytic_speedup"]);
    let opt = |v: Option<String>| v.unwrap_or_default();
    tables::write_table(
        &a.out_csv,
        &header,
        rows.iter().map(|r| {
            let mut rec = r.report.csv_record().to_vec();
            rec.extend([
                r.method.to_string(),
                r.threads.to_string(),
                opt(r.samples.map(|n| n.to_string())),
                opt(r.sse.map(|s| s.to_string())),
                r.speedup.to_string(),
            ]);
            rec
        }),
    )?;
    for r in &rows {
        stdout_line(
            out,
            format_args!(
                "{:<16} mean {:.6}s  min {:.6}s  max {:.6}s  speedup {:.2}",
                r.report.label,
                r.report.mean_seconds,
                r.report.min_seconds,
                r.report.max_seconds,
                r.speedup
            ),
        )?;
    }
    Ok(())
}
