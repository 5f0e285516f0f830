//! Bivariate random maxima and the φ-MID checks: exponent-measure structure,
//! subordination, transfer limits along `θ ↓ 0`, and max-attraction.

use rand::Rng;
use rand_distr::Exp1;

use crate::convergence_stats::{replicate, ConvergenceReport, RandomStreamSpec, ReportEntry, DEFAULT_TREND_SLACK};
use crate::error::{domain, Error, Result};
use crate::pgf_family::{check_schedule, CountSampler, PgfSpec};
use crate::sum_limits::{IndexRule, MonteCarlo};
use crate::transforms::{ExponentMeasureSpec, LtSpec, Point2};

/// Slack allowed in the rectangle inequality of [`mid_supermodularity_check`].
pub const SUPERMODULARITY_SLACK: f64 = 1e-9;

/// Triangular array of maxima with `H_θ = G^θ = exp(-θT)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxSchemeSpec {
    pub mu: ExponentMeasureSpec,
    pub theta: f64,
}

impl MaxSchemeSpec {
    pub fn new(mu: ExponentMeasureSpec, theta: f64) -> Result<Self> {
        mu.validate()?;
        if !(theta > 0.0 && theta.is_finite()) {
            return domain(format!("theta must be > 0 (got {theta})"));
        }
        Ok(Self { mu, theta })
    }

    /// `H_θ(y)`; zero at and below the bottom.
    pub fn df(&self, y: Point2) -> f64 {
        self.mu.eval(y).map_or(0.0, |t| (-self.theta * t).exp())
    }

    /// `1 - H_θ(y)` without cancellation.
    pub fn one_minus_df(&self, y: Point2) -> Result<f64> {
        Ok(-(-self.theta * self.mu.eval(y)?).exp_m1())
    }

    fn frechet_indices(&self) -> Result<[f64; 2]> {
        match self.mu {
            ExponentMeasureSpec::IndepFrechet { a1, a2 } => Ok([a1, a2]),
            ExponentMeasureSpec::Logistic { .. } => Err(Error::UnsupportedSampler("logistic exponent measure".into())),
        }
    }
}

/// One draw from `H_θ` for independent Fréchet margins, by componentwise
/// inversion: `Y_i = (θ/E_i)^{1/α_i}` with `E_i ~ Exp(1)`.
pub fn sample_mid_vector<R: Rng + ?Sized>(scheme: &MaxSchemeSpec, rng: &mut R) -> Result<Point2> {
    sample_block_max(scheme, 1, rng)
}

/// The inversion of [`sample_mid_vector`] applied to given uniforms.
pub fn sample_mid_vector_from_uniforms(scheme: &MaxSchemeSpec, u: [f64; 2]) -> Result<Point2> {
    let alpha = scheme.frechet_indices()?;
    if !u.iter().all(|&x| x > 0.0 && x < 1.0) {
        return domain("uniforms must lie in (0,1)");
    }
    Ok([0, 1].map(|i| (scheme.theta / -u[i].ln()).powf(1.0 / alpha[i])))
}

/// Componentwise maximum of `n` draws from `H_θ`, sampled from its law
/// `H_θ^n = exp(-nθT)`; `n = 0` gives the bottom `λ`.
pub fn sample_block_max<R: Rng + ?Sized>(scheme: &MaxSchemeSpec, n: u64, rng: &mut R) -> Result<Point2> {
    let alpha = scheme.frechet_indices()?;
    if n == 0 {
        return Ok(scheme.mu.bottom());
    }
    let scale = n as f64 * scheme.theta;
    Ok(alpha.map(|a| {
        let e: f64 = rng.sample::<f64, _>(Exp1);
        (scale / e).powf(1.0 / a)
    }))
}

/// Empirical distribution function of a bivariate sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDf2 {
    points: Vec<Point2>,
}

impl EmpiricalDf2 {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.is_empty() {
            return domain("empirical distribution of an empty sample");
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    /// Fraction of points `≤ y` componentwise.
    pub fn eval(&self, y: Point2) -> f64 {
        let hits = self.points.iter().filter(|p| p[0] <= y[0] && p[1] <= y[1]).count();
        hits as f64 / self.points.len() as f64
    }
}

/// `reps` realizations of the componentwise maximum of `N` draws from `H_θ`.
pub fn simulate_n_max(scheme: &MaxSchemeSpec, count: &CountSampler, mc: &MonteCarlo) -> Result<EmpiricalDf2> {
    if count.spec().theta != scheme.theta {
        return domain(format!("count theta {} differs from scheme theta {}", count.spec().theta, scheme.theta));
    }
    if mc.reps == 0 {
        return domain("reps must be >= 1");
    }
    scheme.frechet_indices()?;
    let points = replicate(mc.stream, mc.reps, mc.chunk_size, |rng| {
        let n = count.sample(rng)?;
        sample_block_max(scheme, n, rng)
    })?;
    EmpiricalDf2::new(points)
}

/// `sup_y |(1 - H_θ(y))/θ - T(y)|`.
pub fn nas_max_residual(scheme: &MaxSchemeSpec, y_grid: &[Point2]) -> Result<f64> {
    y_grid.iter().try_fold(0.0_f64, |worst, &y| {
        let t = scheme.mu.eval(y)?;
        Ok(worst.max((scheme.one_minus_df(y)? / scheme.theta - t).abs()))
    })
}

/// Simulated random maxima against `φ(kT)` along a `θ` schedule.
///
/// The random stream is shared across the schedule. Entries carry the sup
/// grid distance and the [`nas_max_residual`] at that `θ`.
pub fn max_limit_report(
    mu: &ExponentMeasureSpec,
    count: &PgfSpec,
    schedule: &[f64],
    y_grid: &[Point2],
    mc: &MonteCarlo,
    tolerance: f64,
) -> Result<ConvergenceReport> {
    check_schedule(schedule)?;
    mu.validate()?;
    let target = y_grid
        .iter()
        .map(|&y| count.phi.eval(count.k as f64 * mu.eval(y)?))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::with_capacity(schedule.len());
    for &theta in schedule {
        let scheme = MaxSchemeSpec::new(*mu, theta)?;
        let sampler = CountSampler::new(count.at_theta(theta))?;
        let df = simulate_n_max(&scheme, &sampler, mc)?;
        let distance = y_grid.iter().zip(&target).map(|(&y, &f)| (df.eval(y) - f).abs()).fold(0.0, f64::max);
        let residual = nas_max_residual(&scheme, y_grid)?;
        entries.push(ReportEntry { schedule_value: theta, distance, residual: Some(residual) });
    }
    Ok(ConvergenceReport::new(entries, tolerance, DEFAULT_TREND_SLACK))
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// `P{Y(Z) ≤ y} = E[exp(-Z T(y))]` estimated from `draws` subordinator draws.
pub fn subordinated_cdf(phi: &LtSpec, mu: &ExponentMeasureSpec, y: Point2, draws: usize, stream: RandomStreamSpec) -> Result<Estimate> {
    Ok(subordinated_cdf_grid(phi, mu, &[y], draws, stream)?[0])
}

/// [`subordinated_cdf`] over a grid, with one set of draws shared by all points.
pub fn subordinated_cdf_grid(phi: &LtSpec, mu: &ExponentMeasureSpec, grid: &[Point2], draws: usize, stream: RandomStreamSpec) -> Result<Vec<Estimate>> {
    phi.validate()?;
    let phi = *phi;
    subordinated_cdf_with(move |rng| phi.sample(rng), mu, grid, draws, stream)
}

/// As [`subordinated_cdf_grid`] with an arbitrary subordinator sampler.
pub fn subordinated_cdf_with<S>(subordinator: S, mu: &ExponentMeasureSpec, grid: &[Point2], draws: usize, stream: RandomStreamSpec) -> Result<Vec<Estimate>>
where
    S: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    if draws < 2 {
        return domain("at least two subordinator draws are needed");
    }
    mu.validate()?;
    let z = replicate(stream, draws, crate::convergence_stats::DEFAULT_CHUNK_SIZE, |rng| Ok(subordinator(rng)))?;
    grid.iter()
        .map(|&y| {
            let t = mu.eval(y)?;
            let n = z.len() as f64;
            let mean = z.iter().map(|&zi| (-zi * t).exp()).sum::<f64>() / n;
            let var = z.iter().map(|&zi| ((-zi * t).exp() - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Ok(Estimate { value: mean, std_error: (var / n).sqrt() })
        })
        .collect()
}

/// Outcome of [`mid_supermodularity_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct SupermodularityVerdict {
    pub pass: bool,
    /// Largest `T(a) + T(b) - T(a1,b2) - T(b1,a2)` over the lattice.
    pub worst_delta: f64,
    /// Lower and upper corners of the rectangle attaining `worst_delta`.
    pub worst_rectangle: Option<(Point2, Point2)>,
}

/// Checks that `T = -log F` satisfies `T(a) + T(b) ≤ T(a1, b2) + T(b1, a2)` for
/// every rectangle `a ≤ b` of the lattice `xs × ys` (the bivariate criterion
/// for `F` to have an exponent measure).
pub fn mid_supermodularity_check<F>(df: F, xs: &[f64], ys: &[f64]) -> Result<SupermodularityVerdict>
where
    F: Fn(Point2) -> Result<f64>,
{
    let mut co_survival = vec![vec![0.0; ys.len()]; xs.len()];
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let f = df([x, y])?;
            if !(f > 0.0) {
                return domain(format!("distribution function vanishes at ({x}, {y}); support is not a rectangle containing the lattice"));
            }
            co_survival[i][j] = -f.ln();
        }
    }
    let mut worst_delta = f64::NEG_INFINITY;
    let mut worst_rectangle = None;
    for i in 0..xs.len() {
        for i2 in i + 1..xs.len() {
            for j in 0..ys.len() {
                for j2 in j + 1..ys.len() {
                    let t = &co_survival;
                    let delta = (t[i][j] + t[i2][j2]) - (t[i][j2] + t[i2][j]);
                    if delta > worst_delta {
                        worst_delta = delta;
                        worst_rectangle = Some(([xs[i], ys[j]], [xs[i2], ys[j2]]));
                    }
                }
            }
        }
    }
    if worst_rectangle.is_none() {
        worst_delta = 0.0;
    }
    Ok(SupermodularityVerdict { pass: worst_delta <= SUPERMODULARITY_SLACK, worst_delta, worst_rectangle })
}

/// `G(y) (1 - (1 - G_1(y1))(1 - G_2(y2))/2)`: a negative-dependence
/// perturbation of `G` with the same margins, which has no exponent measure.
pub fn negative_dependence_perturbation(mu: &ExponentMeasureSpec, y: Point2) -> Result<f64> {
    let g = crate::transforms::mid_df_eval(mu, y)?;
    let alpha = mu.marginal_indices();
    let margin = |i: usize| (-y[i].powf(-alpha[i])).exp();
    Ok(g * (1.0 - 0.5 * (1.0 - margin(0)) * (1.0 - margin(1))))
}

/// Base law `H = exp(-T_base)` normed by `a_{i,n} = n^{p_i}`, centering 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxAttractionScheme {
    pub base: ExponentMeasureSpec,
    pub norming_powers: [f64; 2],
    pub rule: IndexRule,
}

impl MaxAttractionScheme {
    pub fn schedule(&self) -> &[u64] {
        match &self.rule {
            IndexRule::Full(n) | IndexRule::Subsequence(n) => n,
        }
    }

    /// `1 - H_n(y)` with `H_n(y) = H(a_{1,n} y1, a_{2,n} y2)`.
    pub fn one_minus_h_n(&self, n: u64, y: Point2) -> Result<f64> {
        let scaled = [0, 1].map(|i| (n as f64).powf(self.norming_powers[i]) * y[i]);
        Ok(-(-self.base.eval(scaled)?).exp_m1())
    }
}

/// Analytic composition `P_{1/n}(H_n(y))` against `φ(kT(y))`.
pub fn max_attraction_report(
    scheme: &MaxAttractionScheme,
    count: &PgfSpec,
    mu: &ExponentMeasureSpec,
    y_grid: &[Point2],
    tolerance: f64,
) -> Result<ConvergenceReport> {
    let n = scheme.schedule();
    if n.is_empty() || n[0] == 0 || !n.windows(2).all(|w| w[1] > w[0]) {
        return domain("attraction schedule must be positive and strictly increasing");
    }
    if !scheme.norming_powers.iter().all(|&p| p > 0.0) {
        return domain("norming powers must be > 0");
    }
    scheme.base.validate()?;
    mu.validate()?;
    count.validate()?;
    let entries = n
        .iter()
        .map(|&n| {
            let at = count.at_theta(1.0 / n as f64);
            let distance = y_grid.iter().try_fold(0.0_f64, |worst, &y| {
                let u = scheme.one_minus_h_n(n, y)?;
                let composed = at.compose_real(1.0 - u, u);
                let target = count.phi.eval(count.k as f64 * mu.eval(y)?)?;
                Ok::<_, Error>(worst.max((composed - target).abs()))
            })?;
            Ok(ReportEntry { schedule_value: n as f64, distance, residual: None })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(entries, tolerance, DEFAULT_TREND_SLACK))
}
