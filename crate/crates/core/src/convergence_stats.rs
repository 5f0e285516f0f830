//! Empirical transforms, distances, trend verdicts and the reproducible
//! random-stream contract shared by the experiment modules.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};

/// Default relative slack allowed between consecutive distances.
pub const DEFAULT_TREND_SLACK: f64 = 0.05;

/// Replications per chunk; each chunk owns one derived stream position.
pub const DEFAULT_CHUNK_SIZE: usize = 4096;

/// Words of keystream reserved for one chunk.
const CHUNK_WORD_STRIDE: u128 = 1 << 40;

/// Identifies one reproducible random stream.
///
/// The master seed keys a ChaCha8 generator, the stream index selects one of
/// its `2^64` independent streams, and chunk `c` of a replicated experiment
/// starts at keystream word `c * 2^40`. Streams are therefore a pure function
/// of `(seed, index, chunk)` and can be used from any worker in any order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStreamSpec {
    pub seed: u64,
    pub index: u64,
}

impl RandomStreamSpec {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    /// Same seed, another stream index.
    pub fn with_index(self, index: u64) -> Self {
        Self { index, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        self.chunk_rng(0)
    }

    pub fn chunk_rng(&self, chunk: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng.set_word_pos(chunk as u128 * CHUNK_WORD_STRIDE);
        rng
    }
}

/// Runs `draw` `reps` times, chunk by chunk in parallel.
///
/// The output is ordered by replication index and does not depend on the
/// number of worker threads: replication `i` always runs in chunk
/// `i / chunk_size` with that chunk's stream.
pub fn replicate<T, F>(stream: RandomStreamSpec, reps: usize, chunk_size: usize, draw: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    let chunk_size = chunk_size.max(1);
    let chunks = reps.div_ceil(chunk_size);
    let parts: Vec<Result<Vec<T>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.chunk_rng(c as u64);
            let len = chunk_size.min(reps - c * chunk_size);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(reps);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// `(1/n) Σ exp(i t x_j)`.
pub fn empirical_cf(sample: &[f64], t: f64) -> Result<Complex64> {
    if sample.is_empty() {
        return domain("empirical characteristic function of an empty sample");
    }
    let (c, s) = sample.iter().fold((0.0, 0.0), |(c, s), &x| {
        let (sin, cos) = (t * x).sin_cos();
        (c + cos, s + sin)
    });
    let n = sample.len() as f64;
    Ok(Complex64::new(c / n, s / n))
}

/// `(1/n) Σ exp(-s x_j)` for a nonnegative sample.
pub fn empirical_lt(sample: &[f64], s: f64) -> Result<f64> {
    if sample.is_empty() {
        return domain("empirical Laplace transform of an empty sample");
    }
    Ok(sample.iter().map(|&x| (-s * x).exp()).sum::<f64>() / sample.len() as f64)
}

/// Kolmogorov–Smirnov distance between a sample and a distribution function.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    if sample.is_empty() {
        return domain("KS distance of an empty sample");
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        let upper = (i + 1) as f64 / n - f;
        let lower = f - i as f64 / n;
        d.max(upper.abs()).max(lower.abs())
    }))
}

/// Values whose pointwise distance is a modulus.
pub trait GridValue: Copy {
    fn distance(self, other: Self) -> f64;
}

impl GridValue for f64 {
    fn distance(self, other: Self) -> f64 {
        (self - other).abs()
    }
}

impl GridValue for Complex64 {
    fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

/// `max over grid of |f - g|`; zero on an empty grid.
pub fn sup_grid_distance<P, V, F, G>(f: F, g: G, grid: &[P]) -> f64
where
    P: Copy,
    V: GridValue,
    F: Fn(P) -> V,
    G: Fn(P) -> V,
{
    grid.iter().map(|&p| f(p).distance(g(p))).fold(0.0, f64::max)
}

/// Passes iff every entry is at most the previous one times `1 + slack` and
/// the last entry does not exceed the first. Lists shorter than two pass.
pub fn trend_check(distances: &[f64], slack: f64) -> bool {
    if distances.len() < 2 {
        return true;
    }
    let stepwise = distances.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack));
    stepwise && distances[distances.len() - 1] <= distances[0]
}

/// Monte Carlo tolerance for grid distances: `max(0.02, 3 * grid_factor / sqrt(reps))`.
pub fn mc_tolerance(reps: usize, grid_factor: f64) -> f64 {
    (3.0 * grid_factor / (reps as f64).sqrt()).max(0.02)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    /// `θ`, or `n` for attraction schedules.
    pub schedule_value: f64,
    pub distance: f64,
    pub residual: Option<f64>,
}

/// Per-schedule distances with the trend and tolerance verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Entries in convergence order (θ decreasing, or n increasing).
    pub entries: Vec<ReportEntry>,
    pub trend_pass: bool,
    pub final_distance: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ConvergenceReport {
    /// Verdict: trend within `slack` and final distance within `tolerance`.
    pub fn new(entries: Vec<ReportEntry>, tolerance: f64, slack: f64) -> Self {
        Self::build(entries, tolerance, Some(slack))
    }

    /// Verdict on the final distance alone.
    pub fn final_only(entries: Vec<ReportEntry>, tolerance: f64) -> Self {
        Self::build(entries, tolerance, None)
    }

    fn build(entries: Vec<ReportEntry>, tolerance: f64, slack: Option<f64>) -> Self {
        let distances = entries.iter().map(|e| e.distance).collect::<Vec<_>>();
        let trend_pass = slack.is_none_or(|s| trend_check(&distances, s));
        let final_distance = distances.last().copied().unwrap_or(f64::NAN);
        let pass = trend_pass && final_distance <= tolerance;
        Self { entries, trend_pass, final_distance, tolerance, pass }
    }

    pub fn distances(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.distance).collect()
    }

    pub fn residuals(&self) -> Vec<Option<f64>> {
        self.entries.iter().map(|e| e.residual).collect()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.entries.last().and_then(|e| e.residual)
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` points equispaced in `log` between `lo` and `hi`, both included.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}

/// Cartesian product of two axes.
pub fn grid2(xs: &[f64], ys: &[f64]) -> Vec<[f64; 2]> {
    xs.iter().flat_map(|&x| ys.iter().map(move |&y| [x, y])).collect()
}
