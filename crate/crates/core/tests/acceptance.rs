//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero when any of them fails.
//!
//! A positional argument runs only the criteria whose label contains it.

mod common;

use std::hint::black_box;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use divuq::contour::is_closed;
use divuq::io::{self, generate_synthetic, EnsembleFile, SyntheticKind};
use divuq::lcp::cell_crossing_probability;
use divuq::parallel::max_threads;
use divuq::{
    divergence_deterministic, divergence_deterministic_with, error_metrics, fit_gaussian_with,
    gradient, gradient_ensemble, lcp_with, marching_squares, mc_divergence_with,
    propagate_divergence, propagate_divergence_with, render_colormap, Colormap, McConfig, Normal,
    ParallelConfig, ScalarField2, StencilNeighbors, UniformGrid2, VectorField2,
};
use rand::rngs::SmallRng;
use rand::{Rng, RngCore, SeedableRng};
use statrs::distribution::ContinuousCDF;

use common::{cli, key_values, lookup, median, random_model, rng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn fig1() -> StencilNeighbors {
    StencilNeighbors {
        u_im: Normal::new(5.98, 0.96),
        u_ip: Normal::new(6.40, 0.38),
        v_jm: Normal::new(6.50, 0.94),
        v_jp: Normal::new(4.30, 0.65),
    }
}

fn fig1_analytic() -> Outcome {
    // Hand evaluation with unit spacing: the mean is a difference of means
    // over 2h, the variance a sum of squared sigmas over (2h)^2.
    let want_mu = (6.40 - 5.98) / 2.0 + (4.30 - 6.50) / 2.0;
    let want_sigma =
        ((0.96f64.powi(2) + 0.38f64.powi(2) + 0.94f64.powi(2) + 0.65f64.powi(2)) / 4.0).sqrt();
    ensure!(
        (want_sigma - 0.770_081_164_553_451_4).abs() < 1e-15,
        "oracle drift: {want_sigma}"
    );

    let start = Instant::now();
    let (code, out, err) = cli(&["validate-1d", "--samples", "1000000", "--seed", "1"]);
    let elapsed = start.elapsed();
    ensure!(code == 0, "validate-1d exited {code}: {err}");
    let rows = key_values(&out);
    let mu = lookup(&rows, "analytic_mu");
    let sigma = lookup(&rows, "analytic_sigma");
    ensure!((mu - -0.89).abs() <= 1e-12, "analytic mean {mu}");
    ensure!(
        (mu - want_mu).abs() <= 1e-12,
        "analytic mean {mu} vs oracle {want_mu}"
    );
    ensure!(
        (sigma - want_sigma).abs() <= 1e-9,
        "analytic std {sigma} vs {want_sigma}"
    );

    let n = lookup(&rows, "n_samples");
    let mc_mean = lookup(&rows, "mc_mean");
    let mc_std = lookup(&rows, "mc_std");
    ensure!(n == 1e6, "n_samples {n}");
    ensure!(
        (mc_mean - mu).abs() < 5.0 * sigma / n.sqrt(),
        "MC mean {mc_mean}"
    );
    ensure!(
        (mc_std - sigma).abs() < 5.0 * sigma / (2.0 * n).sqrt(),
        "MC std {mc_std}"
    );
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!(
        "mu={mu} sigma={sigma} (MC 1e6: {mc_mean:.5}, {mc_std:.5}) in {:.3}s",
        elapsed.as_secs_f64()
    ))
}

fn fig1_convergence() -> Outcome {
    let start = Instant::now();
    let analytic = fig1().analytic((1.0, 1.0));
    let mean_abs_error = |n: u64| -> divuq::Result<f64> {
        let mut total = 0.0;
        for seed in 0..10 {
            let samples = divuq::mc::sample_stencil_divergence(
                &fig1(),
                (1.0, 1.0),
                &McConfig::new(n, seed)?,
            )?;
            total += (divuq::mc::sample_moments(&samples).0 - analytic.mu).abs();
        }
        Ok(total / 10.0)
    };
    let e3 = mean_abs_error(1_000).map_err(|e| e.to_string())?;
    let e5 = mean_abs_error(100_000).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!((3e-3..=3e-2).contains(&e3), "n=1e3: {e3}");
    ensure!((2e-4..=3e-3).contains(&e5), "n=1e5: {e5}");
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!(
        "e_m(1e3)={e3:.2e} e_m(1e5)={e5:.2e} in {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn field_oracle() -> Outcome {
    let start = Instant::now();
    let grid = UniformGrid2::unit(32, 32).unwrap();
    let model = random_model(grid, 3, 0.1, 2.0);
    let analytic = propagate_divergence(&model);
    let n = 100_000u64;
    let est = mc_divergence_with(
        &model,
        &McConfig::new(n, 11).unwrap(),
        &ParallelConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let total = grid.len() as f64;
    let mean_ok = (0..grid.len())
        .filter(|&k| {
            (est.mean[k] - analytic.mu()[k]).abs() < 6.0 * analytic.sigma()[k] / (n as f64).sqrt()
        })
        .count() as f64
        / total;
    let std_ok = (0..grid.len())
        .filter(|&k| (est.std[k] - analytic.sigma()[k]).abs() <= 0.02 * analytic.sigma()[k])
        .count() as f64
        / total;
    ensure!(
        mean_ok >= 0.99,
        "mean within 6 sigma/sqrt(n) at {:.2}% of vertices",
        mean_ok * 100.0
    );
    ensure!(
        std_ok >= 0.95,
        "std within 2% at {:.2}% of vertices",
        std_ok * 100.0
    );
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "mean ok {:.1}%, std ok {:.1}% in {:.2}s",
        mean_ok * 100.0,
        std_ok * 100.0,
        elapsed.as_secs_f64()
    ))
}

fn sse_trend() -> Outcome {
    let grid = UniformGrid2::unit(64, 64).unwrap();
    let model = random_model(grid, 5, 0.1, 2.0);
    let analytic = propagate_divergence(&model);
    let sizes = [100u64, 1_000, 10_000, 100_000];
    let seeds = 0..5u64;
    let mut medians = Vec::new();
    for &n in &sizes {
        let mut sse = Vec::new();
        for seed in seeds.clone() {
            let config = McConfig::new(n, 100 + seed).unwrap();
            let est = mc_divergence_with(&model, &config, &ParallelConfig::default())
                .map_err(|e| e.to_string())?;
            sse.push(
                error_metrics(&est, &analytic)
                    .map_err(|e| e.to_string())?
                    .sse,
            );
        }
        medians.push(median(sse));
    }
    ensure!(
        medians.windows(2).all(|w| w[1] < w[0]),
        "median SSE not decreasing: {medians:?}"
    );
    Ok(format!(
        "median SSE {}",
        medians
            .iter()
            .map(|s| format!("{s:.3e}"))
            .collect::<Vec<_>>()
            .join(" > ")
    ))
}

fn performance_and_determinism() -> Outcome {
    let grid = UniformGrid2::unit(500, 500).unwrap();
    let ensemble =
        generate_synthetic(SyntheticKind::WindLike, grid, 20, 0.3, 9).map_err(|e| e.to_string())?;
    let serial = ParallelConfig::serial();
    let model = fit_gaussian_with(&ensemble, &serial).map_err(|e| e.to_string())?;

    let analytic = divuq::bench::<divuq::Error, _>("analytic", 5, || {
        black_box(propagate_divergence_with(black_box(&model), &serial));
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    let config = McConfig::new(500, 1).unwrap();
    let start = Instant::now();
    let mc = mc_divergence_with(black_box(&model), &config, &serial).map_err(|e| e.to_string())?;
    let mc_seconds = start.elapsed().as_secs_f64();
    black_box(&mc);
    let speedup = mc_seconds / analytic.mean_seconds;
    ensure!(speedup >= 100.0, "speedup only {speedup:.1}x");

    let mut threads = vec![1, 2, max_threads()];
    threads.dedup();
    let small_mc = McConfig::new(16, 2).unwrap();
    let run = |t: usize| {
        let par = ParallelConfig::with_threads(t);
        let fitted = fit_gaussian_with(&ensemble, &par).unwrap();
        let prop = propagate_divergence_with(&fitted, &par);
        let det = divergence_deterministic_with(&ensemble.members()[0], &par);
        let lcp = lcp_with(&prop, 0.0, &par);
        let est = mc_divergence_with(&fitted, &small_mc, &par).unwrap();
        (fitted, prop, det, lcp, est)
    };
    let reference = run(1);
    for &t in &threads[1..] {
        let other = run(t);
        ensure!(other.0 == reference.0, "fit differs at {t} threads");
        ensure!(other.1 == reference.1, "propagation differs at {t} threads");
        ensure!(
            other.2 == reference.2,
            "deterministic divergence differs at {t} threads"
        );
        ensure!(other.3 == reference.3, "LCP differs at {t} threads");
        ensure!(other.4 == reference.4, "MC differs at {t} threads");
    }
    Ok(format!(
        "analytic {:.2} ms, MC(500) {:.2} s, speedup {speedup:.0}x; identical at threads {threads:?}",
        analytic.mean_seconds * 1e3,
        mc_seconds
    ))
}

/// Crossing frequency over `n` joint draws of the four corner side events.
/// Corner `k` lands at or below `theta` with probability `Phi((theta - mu) / sigma)`,
/// evaluated with an independent normal CDF.
fn sampled_crossing(corners: &[(f64, f64); 4], theta: f64, n: u64, rng: &mut SmallRng) -> f64 {
    let std_normal = statrs::distribution::Normal::standard();
    // 32-bit uniforms; the threshold 2^32 means "always below".
    let t = corners
        .map(|(mu, sigma)| (std_normal.cdf((theta - mu) / sigma) * 2f64.powi(32)).round() as u64);
    let mut crossings = 0u64;
    for _ in 0..n {
        let (a, b) = (rng.next_u64(), rng.next_u64());
        let below = ((a & 0xFFFF_FFFF) < t[0]) as u32
            + ((a >> 32) < t[1]) as u32
            + ((b & 0xFFFF_FFFF) < t[2]) as u32
            + ((b >> 32) < t[3]) as u32;
        crossings += u64::from(!below.is_multiple_of(4));
    }
    crossings as f64 / n as f64
}

fn lcp_properties() -> Outcome {
    let mut r = rng(6);
    let cells: Vec<([(f64, f64); 4], f64)> = (0..10_000)
        .map(|_| {
            let theta = r.random_range(-3.0..3.0);
            let corners = std::array::from_fn(|_| {
                (theta + r.random_range(-3.0..3.0), r.random_range(0.05..2.0))
            });
            (corners, theta)
        })
        .collect();

    for (corners, theta) in &cells {
        let p = cell_crossing_probability(*corners, *theta);
        ensure!((0.0..=1.0).contains(&p), "LCP {p} out of range");

        let negated = corners.map(|(mu, sigma)| (-mu, sigma));
        let q = cell_crossing_probability(negated, -theta);
        ensure!(
            p.to_bits() == q.to_bits(),
            "negation symmetry broken: {p} vs {q}"
        );

        let above = corners.iter().filter(|(mu, _)| mu > theta).count();
        let indicator = if above == 0 || above == 4 { 0.0 } else { 1.0 };
        for sigma in [0.0, 1e-300, 1e-15] {
            let sharp = corners.map(|(mu, _)| (mu, sigma));
            let gap = corners
                .iter()
                .map(|(mu, _)| (mu - theta).abs())
                .fold(f64::INFINITY, f64::min);
            if sigma == 0.0 || gap > 1e-6 {
                let got = cell_crossing_probability(sharp, *theta);
                ensure!(
                    got == indicator,
                    "sigma={sigma}: {got} vs indicator {indicator}"
                );
            }
        }
    }

    let n = 1_000_000u64;
    let mut agree = 0usize;
    for (c, (corners, theta)) in cells.iter().enumerate() {
        let p = cell_crossing_probability(*corners, *theta);
        let mut g = SmallRng::seed_from_u64(c as u64);
        let f = sampled_crossing(corners, *theta, n, &mut g);
        if (f - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt() {
            agree += 1;
        }
    }
    let share = agree as f64 / cells.len() as f64;
    ensure!(
        share >= 0.99,
        "MC agreement at {:.2}% of cells",
        share * 100.0
    );
    Ok(format!(
        "1e4 cells in range and symmetric; MC agreement {:.2}%",
        share * 100.0
    ))
}

fn bump(x: f64, y: f64) -> f64 {
    (-((x - 4.3).powi(2) + (y - 3.7).powi(2)) / 6.0).exp()
}

fn exactness() -> Outcome {
    for (dx, dy, exact) in [(1.0, 1.0, true), (0.5, 0.25, true), (0.1, 0.3, false)] {
        let grid = UniformGrid2::new(17, 13, dx, dy).unwrap();
        let tol = if exact { 0.0 } else { 1e-12 };
        let source = divergence_deterministic(&VectorField2::from_fn(grid, |x, y| (x, y)).unwrap());
        ensure!(
            source.values().iter().all(|&d| (d - 2.0).abs() <= tol),
            "div(x, y) != 2 at spacing ({dx}, {dy})"
        );
        let rotation =
            divergence_deterministic(&VectorField2::from_fn(grid, |x, y| (-y, x)).unwrap());
        ensure!(
            rotation.values().iter().all(|&d| d.abs() <= tol),
            "div(-y, x) != 0 at spacing ({dx}, {dy})"
        );
        let affine = ScalarField2::from_fn(grid, |x, y| 1.5 - 0.75 * x + 2.25 * y).unwrap();
        let g = gradient(&affine);
        ensure!(
            g.u().iter().all(|&d| (d + 0.75).abs() <= 1e-12)
                && g.v().iter().all(|&d| (d - 2.25).abs() <= 1e-12),
            "gradient of affine field inexact at spacing ({dx}, {dy})"
        );
    }

    let grid = UniformGrid2::new(41, 33, 0.25, 0.25).unwrap();
    let field = ScalarField2::from_fn(grid, bump).unwrap();
    let mut points = 0;
    for iso in [0.3, 0.5, 0.8, 0.95] {
        let set = marching_squares(&field, iso);
        ensure!(
            set.polylines.len() == 1 && is_closed(&set.polylines[0]),
            "iso {iso}: expected one closed loop"
        );
        for p in set.polylines.iter().flatten() {
            let value = edge_value(&field, p[0], p[1]);
            ensure!(
                (value - iso).abs() <= 1e-9,
                "point {p:?} interpolates to {value}, iso {iso}"
            );
            points += 1;
        }
    }

    let model = random_model(UniformGrid2::new(23, 19, 0.7, 1.3).unwrap(), 8, 0.0, 1.0);
    let mu = propagate_divergence(&model).mu_field();
    let det = divergence_deterministic(&model.mean_field());
    ensure!(
        mu.values()
            .iter()
            .zip(det.values())
            .all(|(a, b)| a.to_bits() == b.to_bits()),
        "propagated mean differs from divergence of the mean field"
    );
    Ok(format!(
        "stencils exact; {points} contour points on the isovalue; mean path bit-identical"
    ))
}

/// Linear interpolation of `field` along the grid edge containing `(x, y)`.
fn edge_value(field: &ScalarField2, x: f64, y: f64) -> f64 {
    let g = field.grid();
    let (fx, fy) = (x / g.dx(), y / g.dy());
    let on_vertical = (fx - fx.round()).abs() < 1e-9;
    if on_vertical {
        let i = fx.round() as usize;
        let j = (fy.floor() as usize).min(g.ny() - 2);
        let t = fy - j as f64;
        field.at(i, j) * (1.0 - t) + field.at(i, j + 1) * t
    } else {
        let j = fy.round() as usize;
        let i = (fx.floor() as usize).min(g.nx() - 2);
        let t = fx - i as f64;
        field.at(i, j) * (1.0 - t) + field.at(i + 1, j) * t
    }
}

fn round_trips() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut r = rng(10);
    for case in 0..40 {
        let nx = r.random_range(2..24);
        let ny = r.random_range(2..24);
        let dx = r.random_range(0.01..10.0);
        let dy = r.random_range(0.01..10.0);
        let grid = UniformGrid2::new(nx, ny, dx, dy).unwrap();
        let members: Vec<VectorField2> = (0..r.random_range(1..6))
            .map(|_| {
                let mut plane = || {
                    (0..grid.len())
                        .map(|_| (r.random::<f32>() * 200.0 - 100.0) as f64)
                        .collect()
                };
                VectorField2::new(grid, plane(), plane()).unwrap()
            })
            .collect();
        let file = EnsembleFile::new(members).unwrap();
        let a = dir.path().join(format!("a{case}.duq"));
        let b = dir.path().join(format!("b{case}.duq"));
        io::write_ensemble(&file, &a).map_err(|e| e.to_string())?;
        io::write_ensemble(&file, &b).map_err(|e| e.to_string())?;
        let (ba, bb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        ensure!(
            ba == bb,
            "case {case}: ensemble bytes differ between writes"
        );
        let back = io::read_ensemble(&a).map_err(|e| e.to_string())?;
        ensure!(back == file, "case {case}: read(write(x)) != x");
    }

    let grid = UniformGrid2::unit(37, 21).unwrap();
    let field = ScalarField2::from_fn(grid, |x, y| bump(x / 4.0, y / 2.0)).unwrap();
    let image =
        render_colormap(&field, (0.0, 1.0), &Colormap::builtin()).map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a.ppm"), dir.path().join("b.ppm"));
    image.write_ppm(&a).map_err(|e| e.to_string())?;
    image.write_ppm(&b).map_err(|e| e.to_string())?;
    let (pa, pb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    ensure!(pa == pb, "PPM bytes differ between writes");
    ensure!(
        pa.starts_with(b"P6\n37 21\n255\n") && pa.len() == 13 + 37 * 21 * 3,
        "PPM layout"
    );
    let ensemble =
        generate_synthetic(SyntheticKind::Vortex, grid, 3, 0.2, 4).map_err(|e| e.to_string())?;
    let again = gradient_ensemble(&ensemble).map_err(|e| e.to_string())?;
    ensure!(
        again == gradient_ensemble(&ensemble).unwrap(),
        "gradient ensemble not reproducible"
    );
    Ok("40 randomized ensembles round-trip; ensemble and PPM bytes deterministic".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 fig1-analytic", fig1_analytic),
        ("2 fig1-mc-convergence", fig1_convergence),
        ("3 field-oracle-equivalence", field_oracle),
        ("4 sse-trend", sse_trend),
        ("5 performance-determinism", performance_and_determinism),
        ("6 lcp-properties", lcp_properties),
        ("7 exactness", exactness),
        ("8 format-round-trips", round_trips),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (label, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(outcome) => outcome,
            Err(panic) => Err(panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {label}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {label}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
