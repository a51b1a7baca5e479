#![allow(dead_code)]

use divuq::{GaussianVectorField, UniformGrid2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random model with means in `[-5, 5]` and sigmas in `[sigma_lo, sigma_hi]`.
pub fn random_model(
    grid: UniformGrid2,
    seed: u64,
    sigma_lo: f64,
    sigma_hi: f64,
) -> GaussianVectorField {
    let mut r = rng(seed);
    let n = grid.len();
    let mut draw =
        |lo: f64, hi: f64| -> Vec<f64> { (0..n).map(|_| r.random_range(lo..=hi)).collect() };
    let mu_u = draw(-5.0, 5.0);
    let mu_v = draw(-5.0, 5.0);
    let sigma_u = draw(sigma_lo, sigma_hi);
    let sigma_v = draw(sigma_lo, sigma_hi);
    GaussianVectorField::new(grid, mu_u, mu_v, sigma_u, sigma_v).unwrap()
}

/// Runs the CLI in-process and returns `(exit code, stdout, stderr)`.
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("divuq").chain(args.iter().copied());
    let code = divuq::cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

/// Parses `quantity,value` rows.
pub fn key_values(text: &str) -> Vec<(String, f64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let (k, v) = l.split_once(',').expect("two columns");
            (k.to_string(), v.parse().expect("numeric value"))
        })
        .collect()
}

pub fn lookup(rows: &[(String, f64)], key: &str) -> f64 {
    rows.iter()
        .find(|(k, _)| k == key)
        .unwrap_or_else(|| panic!("missing {key}"))
        .1
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
