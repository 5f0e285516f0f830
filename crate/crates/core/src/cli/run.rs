//! Dispatch from an [`ExperimentConfig`] to the library checks.

use crate::cli::config::{ExperimentConfig, ExperimentKind};
use crate::cli::report::{rows_from_report, ReportRow};
use crate::convergence_stats::{ConvergenceReport, RandomStreamSpec, ReportEntry, DEFAULT_TREND_SLACK};
use crate::error::{Error, Result};
use crate::max_limits::{
    max_attraction_report, max_limit_report, mid_supermodularity_check, nas_max_residual,
    negative_dependence_perturbation, subordinated_cdf_grid, MaxAttractionScheme, MaxSchemeSpec,
};
use crate::pgf_family::{lemma22_report, semigroup_residual, semigroup_residual_with, PgfSpec};
use crate::sum_limits::{nas_sum_residual, sum_attraction_report, sum_limit_report, AttractionScheme, Exponent, IndexRule, MonteCarlo};
use crate::transforms::{mid_df_eval, phi_mid_df_eval, recover_mid_from_phi_mid, LtSpec};

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: ConvergenceReport,
    pub rows: Vec<ReportRow>,
}

fn missing(what: &str) -> Error {
    Error::Config(format!("missing {what}"))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let report = dispatch(config)?;
    let rows = rows_from_report(&config.id, &report);
    Ok(ExperimentOutcome { report, rows })
}

fn dispatch(c: &ExperimentConfig) -> Result<ConvergenceReport> {
    let phi = || c.phi.ok_or_else(|| missing("phi"));
    let mu = || c.mu.ok_or_else(|| missing("mu"));
    let count = |theta: f64| -> Result<PgfSpec> { PgfSpec::new(c.j, c.k, theta, phi()?) };
    let mc = MonteCarlo { reps: c.reps, stream: RandomStreamSpec::new(c.seed, 0), chunk_size: c.chunk_size };
    let n_rule = || {
        let n = c.schedule.iter().map(|&n| n as u64).collect::<Vec<_>>();
        if c.subsequence {
            IndexRule::Subsequence(n)
        } else {
            IndexRule::Full(n)
        }
    };

    match c.kind {
        ExperimentKind::Lemma22 => lemma22_report(&count(1.0)?, &c.schedule, &c.grid, c.tolerance),
        ExperimentKind::NasSum => {
            let x = c.summand.ok_or_else(|| missing("summand"))?;
            let e = c.exponent.ok_or_else(|| missing("psi"))?;
            let entries = c
                .schedule
                .iter()
                .map(|&theta| {
                    let r = nas_sum_residual(&x, &e, theta, &c.grid)?;
                    Ok(ReportEntry { schedule_value: theta, distance: r, residual: Some(r) })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ConvergenceReport::new(entries, c.tolerance, DEFAULT_TREND_SLACK))
        }
        ExperimentKind::SumLimit => {
            let x = c.summand.ok_or_else(|| missing("summand"))?;
            let e = c.exponent.ok_or_else(|| missing("psi"))?;
            sum_limit_report(&x, &count(1.0)?, &e, &c.schedule, &c.grid, &mc, c.tolerance)
        }
        ExperimentKind::SumAttraction => {
            let psi = match c.exponent {
                Some(Exponent::Characteristic(psi)) => psi,
                _ => return Err(missing("characteristic psi")),
            };
            let scheme = AttractionScheme { base: c.base_cf.ok_or_else(|| missing("base"))?, norming_power: c.norming[0], rule: n_rule() };
            sum_attraction_report(&scheme, &count(1.0)?, &psi, &c.grid, c.tolerance)
        }
        ExperimentKind::NasMax => {
            let mu = mu()?;
            let entries = c
                .schedule
                .iter()
                .map(|&theta| {
                    let r = nas_max_residual(&MaxSchemeSpec::new(mu, theta)?, &c.y_grid)?;
                    Ok(ReportEntry { schedule_value: theta, distance: r, residual: Some(r) })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ConvergenceReport::new(entries, c.tolerance, DEFAULT_TREND_SLACK))
        }
        ExperimentKind::MaxLimit => max_limit_report(&mu()?, &count(1.0)?, &c.schedule, &c.y_grid, &mc, c.tolerance),
        ExperimentKind::MaxAttraction => {
            let scheme = MaxAttractionScheme { base: c.base_measure.ok_or_else(|| missing("base"))?, norming_powers: c.norming, rule: n_rule() };
            max_attraction_report(&scheme, &count(1.0)?, &mu()?, &c.y_grid, c.tolerance)
        }
        ExperimentKind::Subordination => subordination(c, &phi()?, &mu()?),
        ExperimentKind::MidCheck => mid_check(c, &mu()?),
        ExperimentKind::Semigroup => {
            let entries = c
                .schedule
                .iter()
                .map(|&theta| {
                    let spec = count(theta)?;
                    let r = if c.matched {
                        semigroup_residual_with(&spec, theta / (1.0 + theta), &c.grid)?
                    } else {
                        semigroup_residual(&spec, &c.grid)?
                    };
                    Ok(ReportEntry { schedule_value: theta, distance: r, residual: Some(r) })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ConvergenceReport::final_only(entries, c.tolerance))
        }
    }
}

/// Schedule entries are draw counts; the distance is the largest standardized
/// error `|estimate - φ(T)| / SE` over the grid and the residual the largest
/// absolute error.
fn subordination(c: &ExperimentConfig, phi: &LtSpec, mu: &crate::transforms::ExponentMeasureSpec) -> Result<ConvergenceReport> {
    let exact = c.y_grid.iter().map(|&y| phi_mid_df_eval(phi, mu, y)).collect::<Result<Vec<_>>>()?;
    let entries = c
        .schedule
        .iter()
        .map(|&draws| {
            let draws = draws as usize;
            let estimates = subordinated_cdf_grid(phi, mu, &c.y_grid, draws, RandomStreamSpec::new(c.seed, 1))?;
            let (mut z, mut abs) = (0.0_f64, 0.0_f64);
            for (est, &f) in estimates.iter().zip(&exact) {
                let err = (est.value - f).abs();
                abs = abs.max(err);
                z = z.max(if est.std_error > 0.0 { err / est.std_error } else if err == 0.0 { 0.0 } else { f64::INFINITY });
            }
            Ok(ReportEntry { schedule_value: draws as f64, distance: z, residual: Some(abs) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::final_only(entries, c.tolerance))
}

/// Single entry: distance `max(0, worst Δ)`, residual the signed worst `Δ`.
/// With `phi` set, the φ-MID law is mapped back through `exp(-φ^{-1}(F))`
/// before the check.
fn mid_check(c: &ExperimentConfig, mu: &crate::transforms::ExponentMeasureSpec) -> Result<ConvergenceReport> {
    let verdict = match (c.corrupt, c.phi) {
        (true, _) => mid_supermodularity_check(|y| negative_dependence_perturbation(mu, y), &c.lattice, &c.lattice)?,
        (false, Some(phi)) => mid_supermodularity_check(
            |y| recover_mid_from_phi_mid(&phi, phi_mid_df_eval(&phi, mu, y)?),
            &c.lattice,
            &c.lattice,
        )?,
        (false, None) => mid_supermodularity_check(|y| mid_df_eval(mu, y), &c.lattice, &c.lattice)?,
    };
    if let (false, Some((a, b))) = (verdict.pass, verdict.worst_rectangle) {
        eprintln!("[{}] worst rectangle ({}, {})-({}, {}), Δ = {:e}", c.id, a[0], a[1], b[0], b[1], verdict.worst_delta);
    }
    let entry = ReportEntry { schedule_value: c.lattice.len() as f64, distance: verdict.worst_delta.max(0.0), residual: Some(verdict.worst_delta) };
    Ok(ConvergenceReport::final_only(vec![entry], c.tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::{load_experiments, ConfigFile};

    fn run(text: &str) -> ExperimentOutcome {
        let configs = load_experiments(&ConfigFile::parse(text).unwrap()).unwrap();
        run_experiment(&configs[0]).unwrap()
    }

    #[test]
    fn lemma22_passes() {
        let out = run("[l]\nkind = lemma22\nphi = gamma(1,1)\n");
        assert!(out.report.pass && out.report.final_distance <= 1e-3);
        assert_eq!(out.rows.len(), 5);
        assert_eq!(out.rows[0].schedule_value, Some(0.1));
    }

    #[test]
    fn mid_check_variants() {
        assert!(run("[m]\nkind = mid-check\nmu = indep-frechet(1,1)\n").report.pass);
        assert!(run("[m]\nkind = mid-check\nmu = logistic(1,0.5)\nphi = positive-stable(0.5)\n").report.pass);
        assert!(!run("[m]\nkind = mid-check\nmu = indep-frechet(1,1)\ncorrupt = true\n").report.pass);
    }

    #[test]
    fn semigroup_and_nas() {
        assert!(!run("[s]\nkind = semigroup\nphi = gamma(1,1)\nschedule = 0.3\n").report.pass);
        assert!(run("[s]\nkind = semigroup\nphi = gamma(0.5,1)\nj = 1\nk = 2\nmatched = true\n").report.pass);
        let nas = run("[n]\nkind = nas-max\nmu = indep-frechet(1,1)\ny = 1, 1\nschedule = 0.01\ntolerance = 0.02\n");
        assert!((nas.report.final_distance - 0.019867330675530222).abs() < 1e-12);
        assert!(run("[n]\nkind = nas-sum\nsummand = cauchy\npsi = symmetric-stable(1)\n").report.pass);
    }

    #[test]
    fn analytic_attraction() {
        assert!(run("[a]\nkind = sum-attraction\nphi = gamma(1,1)\nbase = cauchy\npsi = symmetric-stable(1)\n").report.pass);
        assert!(run("[a]\nkind = max-attraction\nphi = gamma(1,1)\nbase = indep-frechet(1,1)\nmu = indep-frechet(1,1)\n").report.pass);
    }
}
