//! Acceptance suite. Every criterion prints one `PASS`/`FAIL` line; the run
//! exits nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use philab::convergence_stats::{
    empirical_cf, grid2, ks_distance, linspace, logspace, trend_check, RandomStreamSpec, DEFAULT_TREND_SLACK,
};
use philab::max_limits::{
    max_limit_report, mid_supermodularity_check, nas_max_residual, negative_dependence_perturbation, subordinated_cdf_grid,
    MaxSchemeSpec,
};
use philab::pgf_family::{lemma22_report, pgf_eval, pgf_pmf, CountSampler, PgfSpec, DEFAULT_THETA_SCHEDULE};
use philab::sum_limits::{
    nas_sum_residual, simulate_n_sum, sum_attraction_report, sum_limit_report, AttractionScheme, BaseCf, Exponent, IndexRule,
    MonteCarlo, SummandFamily,
};
use philab::transforms::{mid_df_eval, phi_mid_df_eval, recover_mid_from_phi_mid, ExponentMeasureSpec, LtSpec, Point2, PsiSpec};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn gamma(shape: f64) -> LtSpec {
    LtSpec::gamma(shape, 1.0).unwrap()
}

fn stable(index: f64) -> LtSpec {
    LtSpec::positive_stable(index).unwrap()
}

fn t_grid() -> Vec<f64> {
    linspace(-5.0, 5.0, 101)
}

fn y_grid() -> Vec<Point2> {
    let axis = logspace(0.25, 4.0, 7);
    grid2(&axis, &axis)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let suffix = format!(" ({:.2}s, limit {:.0}s)", elapsed.as_secs_f64(), limit.as_secs_f64());
    match out {
        Ok(d) if elapsed <= limit => Ok(d + &suffix),
        Ok(d) => Err(d + &suffix),
        Err(d) => Err(d + &suffix),
    }
}

fn pgf_validity() -> Outcome {
    timed(Duration::from_secs(5), || {
        let (mut worst_norm, mut worst_abel, mut members) = (0.0_f64, 0.0_f64, 0);
        for phi in [gamma(1.0), stable(0.5)] {
            for j in 0..=2u32 {
                for k in 1..=3u32 {
                    for &theta in &[0.1, 0.5, 1.0, 2.0] {
                        let spec = PgfSpec::new(j, k, theta, phi).unwrap();
                        // extraction itself rejects any mass below -1e-12
                        let table = pgf_pmf(&spec, 1024).map_err(|e| format!("{spec:?}: {e}"))?;
                        let total: f64 = table.masses.iter().sum();
                        if phi.mean().is_finite() {
                            worst_norm = worst_norm.max((total - 1.0).abs());
                        } else {
                            worst_norm = worst_norm.max(total - 1.0);
                        }
                        for i in 1..=9 {
                            let s = i as f64 / 10.0;
                            worst_abel = worst_abel.max((table.reconstruct(s) - pgf_eval(&spec, s).unwrap()).abs());
                        }
                        members += 1;
                    }
                }
            }
        }
        check(
            worst_norm <= 1e-8 && worst_abel <= 1e-8,
            format!("{members} members, normalization error {worst_norm:.2e}, power-series error {worst_abel:.2e}"),
        )
    })
}

fn harris_identity() -> Outcome {
    timed(Duration::from_secs(1), || {
        let mut worst = 0.0_f64;
        for k in 1..=3u32 {
            for &theta in &[0.25, 1.0, 4.0] {
                let spec = PgfSpec::new(1, k, theta, gamma(1.0 / k as f64)).unwrap();
                let a = (theta + 1.0) / theta;
                for i in 1..=9 {
                    let s = i as f64 / 10.0;
                    let closed = s / (a - (a - 1.0) * s.powi(k as i32)).powf(1.0 / k as f64);
                    worst = worst.max((pgf_eval(&spec, s).unwrap() - closed).abs());
                }
            }
        }
        check(worst <= 1e-12, format!("max deviation {worst:.2e}"))
    })
}

fn scaled_count_limit() -> Outcome {
    timed(Duration::from_secs(2), || {
        let v_grid = linspace(0.0, 10.0, 101);
        let mut lines = Vec::new();
        let mut ok = true;
        for (j, k, shape) in [(0, 1, 1.0), (1, 1, 1.0), (0, 2, 0.5), (1, 3, 2.0)] {
            let spec = PgfSpec::new(j, k, 1.0, gamma(shape)).unwrap();
            let r = lemma22_report(&spec, &DEFAULT_THETA_SCHEDULE, &v_grid, 1e-3).unwrap();
            let monotone = r.distances().windows(2).all(|w| w[1] <= w[0]);
            ok &= monotone && r.final_distance <= 1e-3;
            lines.push(format!("gamma({shape}) j{j} k{k}: {:.2e}", r.final_distance));
        }
        for (j, k) in [(0, 1), (2, 3)] {
            let spec = PgfSpec::new(j, k, 1.0, stable(0.5)).unwrap();
            let r = lemma22_report(&spec, &DEFAULT_THETA_SCHEDULE, &v_grid, 1e-3).unwrap();
            ok &= r.distances().windows(2).all(|w| w[1] <= w[0]);
            lines.push(format!("stable j{j} k{k}: trend {:?}", r.distances().iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>()));
        }
        check(ok, lines.join("; "))
    })
}

fn geometric_exponential_ks() -> Outcome {
    timed(Duration::from_secs(10), || {
        let sampler = CountSampler::new(PgfSpec::new(1, 1, 1e-3, gamma(1.0)).unwrap()).unwrap();
        let sample =
            simulate_n_sum(&SummandFamily::ExponentialScaled, &sampler, &MonteCarlo::new(100_000, RandomStreamSpec::new(101, 0))).unwrap();
        let ks = ks_distance(&sample, |x| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() }).unwrap();
        check(ks <= 0.02, format!("KS distance {ks:.4}"))
    })
}

fn linnik_cf() -> Outcome {
    let sampler = CountSampler::new(PgfSpec::new(0, 1, 1e-3, gamma(1.0)).unwrap()).unwrap();
    let sample = simulate_n_sum(&SummandFamily::CauchyScaled, &sampler, &MonteCarlo::new(100_000, RandomStreamSpec::new(102, 0))).unwrap();
    let d = t_grid()
        .iter()
        .map(|&t| (empirical_cf(&sample, t).unwrap() - Complex64::new(1.0 / (1.0 + t.abs()), 0.0)).norm())
        .fold(0.0, f64::max);
    check(d <= 0.02, format!("sup CF distance {d:.4}"))
}

fn broken_scaling_fails() -> Outcome {
    let count = PgfSpec::new(0, 1, 1.0, gamma(1.0)).unwrap();
    let exponent: Exponent = PsiSpec::Drift { b: 1.0 }.into();
    let report = sum_limit_report(
        &SummandFamily::ExponentialSqrtScaled,
        &count,
        &exponent,
        &[1e-1, 1e-2, 1e-3],
        &t_grid(),
        &MonteCarlo::new(20_000, RandomStreamSpec::new(103, 0)),
        0.02,
    )
    .unwrap();
    let trend = trend_check(&report.distances(), DEFAULT_TREND_SLACK);
    let residuals: Vec<f64> = report.residuals().into_iter().flatten().collect();
    let diverging = residuals.windows(2).all(|w| w[1] > w[0]);
    check(
        !trend && !report.pass && diverging,
        format!(
            "distances {:?}, trend_check {trend}, residuals increasing {diverging}",
            report.distances().iter().map(|d| format!("{d:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn nas_halving() -> Outcome {
    let cases: [(SummandFamily, Exponent); 2] = [
        (SummandFamily::ExponentialScaled, PsiSpec::Drift { b: 1.0 }.into()),
        (SummandFamily::CauchyScaled, PsiSpec::SymmetricStable { index: 1.0 }.into()),
    ];
    let mut worst = 0.0_f64;
    for (x, e) in &cases {
        for &theta in &[1e-1, 1e-2, 1e-3] {
            let r = nas_sum_residual(x, e, theta, &t_grid()).unwrap();
            let half = nas_sum_residual(x, e, theta / 2.0, &t_grid()).unwrap();
            worst = worst.max(half / r);
        }
    }
    check(worst <= 0.6, format!("worst ratio {worst:.4}"))
}

fn attraction_coincidence() -> Outcome {
    let count = PgfSpec::new(0, 1, 1.0, gamma(1.0)).unwrap();
    let psi = PsiSpec::SymmetricStable { index: 1.0 };
    let scheme = |rule| AttractionScheme { base: BaseCf::SymmetricStable { index: 1.0 }, norming_power: 1.0, rule };
    let full = sum_attraction_report(&scheme(IndexRule::Full(vec![100, 1000, 10_000])), &count, &psi, &t_grid(), 1e-3).unwrap();
    let sub = sum_attraction_report(&scheme(IndexRule::Subsequence(vec![10, 10_000])), &count, &psi, &t_grid(), 1e-3).unwrap();
    let gap = (full.final_distance - sub.final_distance).abs();
    check(
        full.pass && full.final_distance <= 1e-3 && gap <= 1e-9,
        format!("distance at n=1e4 {:.2e}, subsequence gap {gap:.1e}", full.final_distance),
    )
}

fn subordination_equivalences() -> Outcome {
    let grid = y_grid();
    let measures = [ExponentMeasureSpec::IndepFrechet { a1: 1.0, a2: 2.0 }, ExponentMeasureSpec::Logistic { alpha: 1.0, r: 0.5 }];
    let (mut worst_z, mut worst_roundtrip) = (0.0_f64, 0.0_f64);
    for (i, phi) in [gamma(1.0), stable(0.5)].iter().enumerate() {
        for (m, mu) in measures.iter().enumerate() {
            let est = subordinated_cdf_grid(phi, mu, &grid, 100_000, RandomStreamSpec::new(109, (2 * i + m) as u64)).unwrap();
            for (e, &y) in est.iter().zip(&grid) {
                let f = phi_mid_df_eval(phi, mu, y).unwrap();
                worst_z = worst_z.max((e.value - f).abs() / e.std_error);
                let g = mid_df_eval(mu, y).unwrap();
                worst_roundtrip = worst_roundtrip.max((recover_mid_from_phi_mid(phi, f).unwrap() - g).abs());
            }
        }
    }
    check(
        worst_z <= 3.0 && worst_roundtrip <= 1e-10,
        format!("max |error|/SE {worst_z:.3} over 196 points, roundtrip {worst_roundtrip:.1e}"),
    )
}

fn max_limit() -> Outcome {
    let mu = ExponentMeasureSpec::IndepFrechet { a1: 1.0, a2: 1.0 };
    let count = PgfSpec::new(0, 1, 1.0, gamma(1.0)).unwrap();
    let report =
        max_limit_report(&mu, &count, &[1e-1, 1e-2], &y_grid(), &MonteCarlo::new(100_000, RandomStreamSpec::new(110, 0)), 0.02).unwrap();
    let nas = nas_max_residual(&MaxSchemeSpec::new(mu, 0.01).unwrap(), &[[1.0, 1.0]]).unwrap();
    check(
        report.pass && report.final_distance <= 0.02 && (nas - 0.0198673).abs() <= 1e-7,
        format!("distance at θ=1e-2 {:.4}, residual at (1,1) {nas:.9}", report.final_distance),
    )
}

fn mid_structure() -> Outcome {
    let lattice = logspace(0.1, 10.0, 20);
    let indep = ExponentMeasureSpec::IndepFrechet { a1: 1.0, a2: 1.0 };
    let logistic = ExponentMeasureSpec::Logistic { alpha: 1.0, r: 0.5 };
    let a = mid_supermodularity_check(|y| mid_df_eval(&indep, y), &lattice, &lattice).unwrap();
    let b = mid_supermodularity_check(|y| mid_df_eval(&logistic, y), &lattice, &lattice).unwrap();
    let c = mid_supermodularity_check(|y| negative_dependence_perturbation(&indep, y), &lattice, &lattice).unwrap();
    check(
        a.pass && a.worst_delta.abs() <= 1e-12 && b.pass && b.worst_delta <= 0.0 && !c.pass && c.worst_rectangle.is_some(),
        format!(
            "independent Δ {:.1e}, logistic worst Δ {:.2e}, corrupted Δ {:.3} at {:?}",
            a.worst_delta, b.worst_delta, c.worst_delta, c.worst_rectangle
        ),
    )
}

const DETERMINISM_CONFIG: &str = "\
[sum]
kind = sum-limit
phi = gamma(1,1)
summand = cauchy
psi = symmetric-stable(1)
reps = 20000
chunk_size = 1000

[max]
kind = max-limit
phi = gamma(1,1)
mu = indep-frechet(1,1)
reps = 20000
chunk_size = 1000
";

fn run_cli(config: &Path, out: &Path, workers: &str) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_philab"))
        .arg("run")
        .arg(config)
        .args(["--seed", "7", "--out"])
        .arg(out)
        .env("PHILAB_WORKERS", workers)
        .status()
        .unwrap();
    assert!(status.code().is_some_and(|c| c <= 1), "{status:?}");
    std::fs::read(out).unwrap()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("det.conf");
    std::fs::write(&config, DETERMINISM_CONFIG).unwrap();
    let first = run_cli(&config, &dir.path().join("a.csv"), "1");
    let second = run_cli(&config, &dir.path().join("b.csv"), "1");
    let other_workers = run_cli(&config, &dir.path().join("c.csv"), "3");
    check(
        first == second && first == other_workers && !first.is_empty(),
        format!("{} bytes, rerun identical {}, 3 workers identical {}", first.len(), first == second, first == other_workers),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("1 generating-function validity", pgf_validity),
        ("2 Harris identity", harris_identity),
        ("3 scaled count limit", scaled_count_limit),
        ("4 geometric-exponential KS", geometric_exponential_ks),
        ("5 Linnik characteristic function", linnik_cf),
        ("6 broken scaling detected", broken_scaling_fails),
        ("7 residual halving", nas_halving),
        ("8 attraction coincidence", attraction_coincidence),
        ("9 subordination equivalences", subordination_equivalences),
        ("10 random maxima limit", max_limit),
        ("11 exponent-measure structure", mid_structure),
        ("12 deterministic reports", determinism),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                println!("FAIL  {name}: {detail}");
                failed.push(name);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
