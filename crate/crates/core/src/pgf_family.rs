//! The count family `P_θ(s) = s^j φ((1 - s^k)/θ)` generated by a Laplace
//! transform `φ`.
//!
//! Every member is a probability generating function: it is a mixed Poisson
//! law shifted by `j` and dilated by `k`, `N = j + k·Poisson(Z/θ)` with `Z ~ φ`.
//! Masses are extracted numerically from the generating function itself (see
//! [`pgf_pmf`]), so the sampler never relies on that representation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;

use crate::convergence_stats::{sup_grid_distance, ConvergenceReport, ReportEntry, DEFAULT_TREND_SLACK};
use crate::error::{domain, Error, Result};
use crate::transforms::LtSpec;

/// Largest admissible `n_max + 1` for the sampler's mass table.
pub const SUPPORT_CAP: usize = 1 << 22;

/// Cumulative mass the sampler table must reach before it is used.
pub const SAMPLER_COVERAGE: f64 = 1.0 - 1e-9;

/// Masses above this negative floor are rounding noise and are clipped to 0.
pub const MASS_FLOOR: f64 = -1e-12;

/// Largest tolerated imaginary part in extracted coefficients.
pub const EXTRACTION_RESIDUAL_LIMIT: f64 = 1e-8;

/// Target aliasing level `r^M` of the Cauchy contour.
const ALIASING_LEVEL: f64 = 1e-14;

/// Default `θ` schedule for the scaling-law diagnostics.
pub const DEFAULT_THETA_SCHEDULE: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// A member of the count family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgfSpec {
    /// Shift: `N ≥ j`.
    pub j: u32,
    /// Block size: `N - j` is a multiple of `k`.
    pub k: u32,
    pub theta: f64,
    pub phi: LtSpec,
}

impl PgfSpec {
    pub fn new(j: u32, k: u32, theta: f64, phi: LtSpec) -> Result<Self> {
        let spec = Self { j, k, theta, phi };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return domain("block size k must be >= 1");
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return domain(format!("theta must be > 0 (got {})", self.theta));
        }
        self.phi.validate()
    }

    /// Same `j`, `k` and `φ` at another `θ`.
    pub fn at_theta(&self, theta: f64) -> Self {
        Self { theta, ..*self }
    }

    /// `E[N] = j + k E[Z] / θ`.
    pub fn mean(&self) -> f64 {
        self.j as f64 + self.k as f64 * self.phi.mean() / self.theta
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return domain(format!("generating function argument must lie in [0,1] (got {s})"));
        }
        let one_minus_sk = -(self.k as f64 * s.ln()).exp_m1();
        Ok(s.powi(self.j as i32) * self.phi.eval_nonneg(one_minus_sk / self.theta))
    }

    /// `P_θ(s)` on the closed unit disc.
    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        self.compose(s, Complex64::new(1.0, 0.0) - s)
    }

    /// `P_θ(h) = h^j φ((1 - h^k)/θ)` given `h` and `1 - h` separately, so that
    /// `1 - h` keeps full relative accuracy when `h` is close to 1.
    pub fn compose(&self, h: Complex64, one_minus_h: Complex64) -> Complex64 {
        // 1 - h^k = (1 - h)(1 + h + ... + h^{k-1})
        let mut power = Complex64::new(1.0, 0.0);
        let mut geometric = Complex64::new(0.0, 0.0);
        for _ in 0..self.k {
            geometric += power;
            power *= h;
        }
        let one_minus_hk = one_minus_h * geometric;
        h.powu(self.j) * self.phi.eval_complex(one_minus_hk / self.theta)
    }

    /// Real version of [`PgfSpec::compose`] for arguments in `[0, 1]`.
    pub fn compose_real(&self, h: f64, one_minus_h: f64) -> f64 {
        let geometric: f64 = (0..self.k).map(|i| h.powi(i as i32)).sum();
        h.powi(self.j as i32) * self.phi.eval_nonneg(one_minus_h * geometric / self.theta)
    }
}

pub fn pgf_eval(spec: &PgfSpec, s: f64) -> Result<f64> {
    spec.eval(s)
}

/// Masses `p_0..p_{n_max}` with the mass left beyond `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PmfTable {
    pub masses: Vec<f64>,
    pub truncation_mass: f64,
    /// Largest imaginary part seen during extraction.
    pub extraction_residual: f64,
}

impl PmfTable {
    pub fn n_max(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn cumulative(&self) -> Vec<f64> {
        self.masses
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    /// `Σ p_n s^n` over the table.
    pub fn reconstruct(&self, s: f64) -> f64 {
        self.masses.iter().rev().fold(0.0, |acc, &p| acc * s + p)
    }
}

/// Extracts `p_0..p_{n_max}` by the Cauchy coefficient formula.
///
/// `P_θ` is sampled at `M ≥ 4(n_max + 1)` equispaced points of the circle of
/// radius `r = 1e-14^(1/M)` and inverted with one FFT:
/// `p_n ≈ r^{-n} (1/M) Σ_m P(r ω^m) ω^{-mn}`. The aliased contribution
/// `Σ_{l≥1} p_{n+lM} r^{lM}` is below `1e-14`, and rounding is amplified by at
/// most `r^{-n_max} ≤ 1e-14^{-1/4}`.
pub fn pgf_pmf(spec: &PgfSpec, n_max: usize) -> Result<PmfTable> {
    if n_max < 1 {
        return domain("n_max must be >= 1");
    }
    spec.validate()?;
    let m = (4 * (n_max + 1)).next_power_of_two();
    let log_r = ALIASING_LEVEL.ln() / m as f64;
    let radius = log_r.exp();
    let mut samples: Vec<Complex64> = (0..m)
        .map(|i| spec.eval_complex(Complex64::from_polar(radius, 2.0 * PI * i as f64 / m as f64)))
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(m).process(&mut samples);

    let mut masses = Vec::with_capacity(n_max + 1);
    let mut residual = 0.0_f64;
    for (n, c) in samples.iter().take(n_max + 1).enumerate() {
        let coeff = c / m as f64 * (-(n as f64) * log_r).exp();
        residual = residual.max(coeff.im.abs());
        if coeff.re < MASS_FLOOR {
            return Err(Error::Numeric(format!("extracted mass p_{n} = {:e} is negative", coeff.re)));
        }
        let on_support = n >= spec.j as usize && (n - spec.j as usize).is_multiple_of(spec.k as usize);
        masses.push(if on_support { coeff.re.max(0.0) } else { 0.0 });
    }
    if residual > EXTRACTION_RESIDUAL_LIMIT {
        return Err(Error::Numeric(format!("coefficient extraction residual {residual:e} exceeds {EXTRACTION_RESIDUAL_LIMIT:e}")));
    }
    let total: f64 = masses.iter().sum();
    Ok(PmfTable { masses, truncation_mass: (1.0 - total).max(0.0), extraction_residual: residual })
}

/// Inversion sampler for `N_θ` over a cumulative mass table.
///
/// The table is grown by doubling until it covers `1 - 1e-9` of the mass. A
/// count law that still misses that coverage at the support cap is reported
/// as [`Error::HeavyTail`]; this is the expected outcome for the positive
/// stable family, whose counts have infinite mean.
#[derive(Debug, Clone)]
pub struct CountSampler {
    spec: PgfSpec,
    cdf: Vec<f64>,
    cap: usize,
}

impl CountSampler {
    pub fn new(spec: PgfSpec) -> Result<Self> {
        Self::with_cap(spec, SUPPORT_CAP)
    }

    pub fn with_cap(spec: PgfSpec, cap: usize) -> Result<Self> {
        spec.validate()?;
        let cdf = grow_cdf(&spec, 64.min(cap), cap, SAMPLER_COVERAGE)?;
        Ok(Self { spec, cdf, cap })
    }

    pub fn spec(&self) -> &PgfSpec {
        &self.spec
    }

    pub fn support_len(&self) -> usize {
        self.cdf.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        let u: f64 = rng.random();
        self.sample_from_uniform(u)
    }

    /// `min{n : F(n) > u}` for `u ∈ [0, 1)`.
    pub fn sample_from_uniform(&self, u: f64) -> Result<u64> {
        let n = self.cdf.partition_point(|&c| c <= u);
        if n < self.cdf.len() {
            return Ok(n as u64);
        }
        // u falls in the uncovered tail; extend without caching.
        let cdf = grow_cdf(&self.spec, 2 * self.cdf.len(), self.cap, u.max(SAMPLER_COVERAGE))?;
        let n = cdf.partition_point(|&c| c <= u);
        if n < cdf.len() {
            Ok(n as u64)
        } else {
            Err(Error::HeavyTail { cap: self.cap, covered: cdf[cdf.len() - 1] })
        }
    }
}

fn grow_cdf(spec: &PgfSpec, start: usize, cap: usize, coverage: f64) -> Result<Vec<f64>> {
    let mut size = start.max(2);
    loop {
        let size_now = size.min(cap);
        let cdf = pgf_pmf(spec, size_now - 1)?.cumulative();
        let covered = cdf[cdf.len() - 1];
        if covered >= coverage {
            return Ok(cdf);
        }
        if size_now >= cap {
            return Err(Error::HeavyTail { cap, covered });
        }
        size *= 2;
    }
}

/// One draw of `N_θ`. Builds the mass table on every call; reuse a
/// [`CountSampler`] for repeated draws.
pub fn sample_count<R: Rng + ?Sized>(spec: &PgfSpec, rng: &mut R) -> Result<u64> {
    CountSampler::new(*spec)?.sample(rng)
}

/// Laplace transform of `θ N_θ`: `exp(-vjθ) φ((1 - exp(-vkθ))/θ)`.
pub fn scaled_count_lt(spec: &PgfSpec, v: f64) -> Result<f64> {
    if !(v >= 0.0) {
        return domain(format!("Laplace argument must be >= 0 (got {v})"));
    }
    let theta = spec.theta;
    let shift = (-v * spec.j as f64 * theta).exp();
    let arg = -(-v * spec.k as f64 * theta).exp_m1() / theta;
    Ok(shift * spec.phi.eval_nonneg(arg))
}

/// Distance of the transform of `θ N_θ` from `φ(kv)` along a `θ` schedule.
///
/// Each entry is `sup_v |E[exp(-vθN_θ)] - φ(kv)|`; the report passes when the
/// distances are nonincreasing (5% slack) and the last one is within
/// `tolerance`.
pub fn lemma22_report(spec: &PgfSpec, schedule: &[f64], v_grid: &[f64], tolerance: f64) -> Result<ConvergenceReport> {
    check_schedule(schedule)?;
    if let Some(&v) = v_grid.iter().find(|&&v| !(v >= 0.0)) {
        return domain(format!("v grid must be nonnegative (got {v})"));
    }
    let k = spec.k as f64;
    let entries = schedule
        .iter()
        .map(|&theta| {
            let at = spec.at_theta(theta);
            at.validate()?;
            let distance = sup_grid_distance(
                |v: f64| scaled_count_lt(&at, v).expect("nonnegative grid"),
                |v: f64| spec.phi.eval_nonneg(k * v),
                v_grid,
            );
            Ok(ReportEntry { schedule_value: theta, distance, residual: None })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(entries, tolerance, DEFAULT_TREND_SLACK))
}

/// `sup_z |P_θ(z) - φ(φ^{-1}(z)/θ)|`: zero exactly when the count and `φ`
/// form an N-sum-stable pair at this `θ`.
pub fn semigroup_residual(spec: &PgfSpec, z_grid: &[f64]) -> Result<f64> {
    semigroup_residual_with(spec, spec.theta, z_grid)
}

/// As [`semigroup_residual`], with the stability relation evaluated at
/// `relation_theta` instead of the count's own `θ`.
///
/// The Harris counts (`φ` gamma with shape `1/k`, `j = 1`) satisfy the relation
/// exactly once the count parameter `θ'` and the relation parameter `θ` are
/// matched by `θ = θ'/(1 + θ')`.
pub fn semigroup_residual_with(spec: &PgfSpec, relation_theta: f64, z_grid: &[f64]) -> Result<f64> {
    if !(relation_theta > 0.0) {
        return domain("relation theta must be > 0");
    }
    let mut worst = 0.0_f64;
    for &z in z_grid {
        if !(z > 0.0 && z < 1.0) {
            return domain(format!("z grid must lie in (0,1) (got {z})"));
        }
        let lhs = spec.eval(z)?;
        let rhs = spec.phi.eval_nonneg(spec.phi.inverse(z)? / relation_theta);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

pub(crate) fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return domain("schedule must be nonempty");
    }
    if !schedule.windows(2).all(|w| w[1] < w[0]) || !(schedule[schedule.len() - 1] > 0.0) {
        return domain("theta schedule must be positive and strictly decreasing");
    }
    Ok(())
}
