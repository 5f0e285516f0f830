//! Random sums `X_1 + ... + X_N` with `N` drawn from the count family, and the
//! checks that their laws approach `φ(kψ)`.

use num_complex::Complex64;
use rand::Rng;
use rand::distr::Open01;
use rand_distr::{Cauchy, Distribution, Exp1, Gamma};

use crate::convergence_stats::{
    empirical_cf, empirical_lt, replicate, sup_grid_distance, ConvergenceReport, RandomStreamSpec, ReportEntry,
    DEFAULT_CHUNK_SIZE, DEFAULT_TREND_SLACK,
};
use crate::error::{domain, Result};
use crate::pgf_family::{check_schedule, CountSampler, PgfSpec};
use crate::transforms::{kanter_positive_stable, LtSpec, PsiSpec};

/// Triangular array of summands indexed by `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SummandFamily {
    /// `θ · Exp(1)`, CF `1/(1 - iθt)`.
    ExponentialScaled,
    /// `θ · Cauchy`, CF `exp(-θ|t|)`.
    CauchyScaled,
    /// `θ^{1/α} · S_α`, LT `exp(-θ s^α)`.
    PositiveStableScaled { index: f64 },
    /// `sqrt(θ) · Exp(1)`, CF `1/(1 - i sqrt(θ) t)`. Deliberately mis-scaled:
    /// `(1 - h_θ)/θ` diverges, so no `φ(ψ)` limit exists.
    ExponentialSqrtScaled,
}

impl SummandFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SummandFamily::PositiveStableScaled { index } if !(index > 0.0 && index < 1.0) => {
                domain(format!("positive stable summand index must lie in (0,1) (got {index})"))
            }
            _ => Ok(()),
        }
    }

    /// Positive summands are compared through Laplace transforms.
    pub fn uses_laplace(&self) -> bool {
        matches!(self, SummandFamily::PositiveStableScaled { .. })
    }

    /// `h_θ(x)`: the CF at `t = x`, or the LT at `s = x` for positive families.
    pub fn transform(&self, theta: f64, x: f64) -> Complex64 {
        Complex64::new(1.0, 0.0) - self.one_minus_transform(theta, x)
    }

    /// `1 - h_θ(x)` computed without cancellation.
    pub fn one_minus_transform(&self, theta: f64, x: f64) -> Complex64 {
        let exponential = |scale: f64| {
            let z = Complex64::new(0.0, -scale * x);
            z / (Complex64::new(1.0, 0.0) + z)
        };
        match *self {
            SummandFamily::ExponentialScaled => exponential(theta),
            SummandFamily::ExponentialSqrtScaled => exponential(theta.sqrt()),
            SummandFamily::CauchyScaled => Complex64::new(-(-theta * x.abs()).exp_m1(), 0.0),
            SummandFamily::PositiveStableScaled { index } => Complex64::new(-(-theta * x.powf(index)).exp_m1(), 0.0),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> f64 {
        match *self {
            SummandFamily::ExponentialScaled => theta * rng.sample::<f64, _>(Exp1),
            SummandFamily::ExponentialSqrtScaled => theta.sqrt() * rng.sample::<f64, _>(Exp1),
            SummandFamily::CauchyScaled => theta * Cauchy::new(0.0, 1.0).expect("unit Cauchy").sample(rng),
            SummandFamily::PositiveStableScaled { index } => theta.powf(1.0 / index) * positive_stable(index, rng),
        }
    }

    /// One draw of `X_1 + ... + X_n`, sampled directly from the law of the block
    /// sum: `Gamma(n)` for exponentials, a Cauchy of scale `nθ`, and the stable
    /// variate scaled by `(nθ)^{1/α}`. The empty sum is exactly 0.
    pub fn sample_block_sum<R: Rng + ?Sized>(&self, theta: f64, n: u64, rng: &mut R) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let n = n as f64;
        match *self {
            SummandFamily::ExponentialScaled => theta * gamma_n(n, rng),
            SummandFamily::ExponentialSqrtScaled => theta.sqrt() * gamma_n(n, rng),
            SummandFamily::CauchyScaled => n * theta * Cauchy::new(0.0, 1.0).expect("unit Cauchy").sample(rng),
            SummandFamily::PositiveStableScaled { index } => (n * theta).powf(1.0 / index) * positive_stable(index, rng),
        }
    }
}

fn gamma_n<R: Rng + ?Sized>(n: f64, rng: &mut R) -> f64 {
    Gamma::new(n, 1.0).expect("positive shape").sample(rng)
}

fn positive_stable<R: Rng + ?Sized>(index: f64, rng: &mut R) -> f64 {
    let u: f64 = std::f64::consts::PI * rng.sample::<f64, _>(Open01);
    let e: f64 = rng.sample::<f64, _>(Exp1);
    kanter_positive_stable(index, u, e)
}

/// Limit exponent of `(1 - h_θ)/θ`: a characteristic exponent for real
/// summands, or the Laplace exponent `s^index` for positive stable summands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Characteristic(PsiSpec),
    Laplace { index: f64 },
}

impl From<PsiSpec> for Exponent {
    fn from(psi: PsiSpec) -> Self {
        Exponent::Characteristic(psi)
    }
}

impl Exponent {
    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            Exponent::Characteristic(psi) => psi.eval(x),
            Exponent::Laplace { index } => Complex64::new(x.powf(*index), 0.0),
        }
    }

    pub fn uses_laplace(&self) -> bool {
        matches!(self, Exponent::Laplace { .. })
    }

    /// The limit transform `φ(k · exponent(x))`.
    pub fn limit_transform(&self, phi: &LtSpec, k: u32, x: f64) -> Complex64 {
        phi.eval_complex(self.eval(x) * k as f64)
    }
}

fn check_pairing(x: &SummandFamily, exponent: &Exponent) -> Result<()> {
    x.validate()?;
    if x.uses_laplace() != exponent.uses_laplace() {
        return domain("positive summands pair with a Laplace exponent, real summands with a characteristic exponent");
    }
    if let Exponent::Characteristic(psi) = exponent {
        psi.validate()?;
    }
    Ok(())
}

/// Monte Carlo settings shared by the simulation reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub reps: usize,
    pub stream: RandomStreamSpec,
    pub chunk_size: usize,
}

impl MonteCarlo {
    pub fn new(reps: usize, stream: RandomStreamSpec) -> Self {
        Self { reps, stream, chunk_size: DEFAULT_CHUNK_SIZE }
    }
}

/// `reps` independent realizations of the random sum `X_1 + ... + X_N`.
pub fn simulate_n_sum(x: &SummandFamily, count: &CountSampler, mc: &MonteCarlo) -> Result<Vec<f64>> {
    x.validate()?;
    if mc.reps == 0 {
        return domain("reps must be >= 1");
    }
    let theta = count.spec().theta;
    replicate(mc.stream, mc.reps, mc.chunk_size, |rng| {
        let n = count.sample(rng)?;
        Ok(x.sample_block_sum(theta, n, rng))
    })
}

/// `sup_x |(1 - h_θ(x))/θ - ψ(x)|`.
pub fn nas_sum_residual(x: &SummandFamily, exponent: &Exponent, theta: f64, grid: &[f64]) -> Result<f64> {
    check_pairing(x, exponent)?;
    if !(theta > 0.0) {
        return domain("theta must be > 0");
    }
    Ok(sup_grid_distance(|t: f64| x.one_minus_transform(theta, t) / theta, |t: f64| exponent.eval(t), grid))
}

/// Simulated random sums against the limit `φ(kψ)` along a `θ` schedule.
///
/// Every `θ` reuses the same random stream, so Monte Carlo noise is common to
/// the whole schedule and the distance trend reflects the `θ` bias. Entries
/// carry the distance `sup |empirical transform - φ(kψ)|` and the
/// [`nas_sum_residual`] at that `θ`.
pub fn sum_limit_report(
    x: &SummandFamily,
    count: &PgfSpec,
    exponent: &Exponent,
    schedule: &[f64],
    grid: &[f64],
    mc: &MonteCarlo,
    tolerance: f64,
) -> Result<ConvergenceReport> {
    check_pairing(x, exponent)?;
    check_schedule(schedule)?;
    let mut entries = Vec::with_capacity(schedule.len());
    for &theta in schedule {
        let sampler = CountSampler::new(count.at_theta(theta))?;
        let sample = simulate_n_sum(x, &sampler, mc)?;
        let mut distance = 0.0_f64;
        for &t in grid {
            let target = exponent.limit_transform(&count.phi, count.k, t);
            let empirical = if x.uses_laplace() {
                Complex64::new(empirical_lt(&sample, t)?, 0.0)
            } else {
                empirical_cf(&sample, t)?
            };
            distance = distance.max((empirical - target).norm());
        }
        let residual = nas_sum_residual(x, exponent, theta, grid)?;
        entries.push(ReportEntry { schedule_value: theta, distance, residual: Some(residual) });
    }
    Ok(ConvergenceReport::new(entries, tolerance, DEFAULT_TREND_SLACK))
}

/// Unnormalized characteristic function `h` of a domain-of-attraction scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseCf {
    /// `exp(-|t|^index)`; `index = 1` is the Cauchy law.
    SymmetricStable { index: f64 },
    /// `1/(1 - it)`.
    Exponential,
}

impl BaseCf {
    /// `1 - h(t)` without cancellation.
    pub fn one_minus(&self, t: f64) -> Complex64 {
        match *self {
            BaseCf::SymmetricStable { index } => Complex64::new(-(-t.abs().powf(index)).exp_m1(), 0.0),
            BaseCf::Exponential => {
                let z = Complex64::new(0.0, -t);
                z / (Complex64::new(1.0, 0.0) + z)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IndexRule {
    /// `θ_n = 1/n` along the listed `n`.
    Full(Vec<u64>),
    /// `θ = 1/n_m` along a strictly increasing subsequence.
    Subsequence(Vec<u64>),
}

/// `h_n(t) = h(t/a_n)` with `a_n = n^norming_power` and centering `b_n = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractionScheme {
    pub base: BaseCf,
    pub norming_power: f64,
    pub rule: IndexRule,
}

impl AttractionScheme {
    pub fn schedule(&self) -> &[u64] {
        match &self.rule {
            IndexRule::Full(n) | IndexRule::Subsequence(n) => n,
        }
    }

    pub fn norming(&self, n: u64) -> f64 {
        (n as f64).powf(self.norming_power)
    }

    fn validate(&self) -> Result<()> {
        let n = self.schedule();
        if n.is_empty() || n[0] == 0 || !n.windows(2).all(|w| w[1] > w[0]) {
            return domain("attraction schedule must be positive and strictly increasing");
        }
        if !(self.norming_power > 0.0) {
            return domain("norming power must be > 0");
        }
        Ok(())
    }
}

/// Analytic composition `P_{1/n}(h_n(t))` against `φ(kψ(t))` along the
/// scheme's schedule.
///
/// Entries carry the distance of the composition from the target and, as the
/// residual, the classical distance `sup |exp(-n(1 - h_n)) - exp(-ψ)|`. The
/// report passes only when both converge: the two domains of attraction are
/// checked jointly.
pub fn sum_attraction_report(
    scheme: &AttractionScheme,
    count: &PgfSpec,
    psi: &PsiSpec,
    grid: &[f64],
    tolerance: f64,
) -> Result<ConvergenceReport> {
    scheme.validate()?;
    psi.validate()?;
    count.validate()?;
    let entries = scheme
        .schedule()
        .iter()
        .map(|&n| {
            let at = count.at_theta(1.0 / n as f64);
            let a_n = scheme.norming(n);
            let composed = |t: f64| {
                let u = scheme.base.one_minus(t / a_n);
                at.compose(Complex64::new(1.0, 0.0) - u, u)
            };
            let distance = sup_grid_distance(composed, |t: f64| count.phi.eval_complex(psi.eval(t) * count.k as f64), grid);
            let classical = sup_grid_distance(
                |t: f64| (-(scheme.base.one_minus(t / a_n) * n as f64)).exp(),
                |t: f64| (-psi.eval(t)).exp(),
                grid,
            );
            ReportEntry { schedule_value: n as f64, distance, residual: Some(classical) }
        })
        .collect::<Vec<_>>();
    let classical = entries.iter().map(|e| e.residual.unwrap_or(0.0)).collect::<Vec<_>>();
    let mut report = ConvergenceReport::new(entries, tolerance, DEFAULT_TREND_SLACK);
    report.pass = report.pass
        && crate::convergence_stats::trend_check(&classical, DEFAULT_TREND_SLACK)
        && classical.last().is_some_and(|&c| c <= tolerance);
    Ok(report)
}
