//! Parametric Laplace transforms, characteristic exponents and exponent
//! measures, together with the compositions `φ(ψ)` and `φ(T)` that define the
//! φ-ID characteristic functions and φ-MID distribution functions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand::distr::Open01;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::error::{domain, Error, Result};

/// A point of the plane, componentwise ordered.
pub type Point2 = [f64; 2];

/// Laplace transform `φ(v) = E[exp(-vZ)]` of a positive mixing variable `Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LtSpec {
    /// `φ(v) = (1 + v/rate)^(-shape)`.
    Gamma { shape: f64, rate: f64 },
    /// `φ(v) = exp(-v^index)`, `index ∈ (0, 1)`.
    PositiveStable { index: f64 },
}

impl LtSpec {
    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        let spec = LtSpec::Gamma { shape, rate };
        spec.validate()?;
        Ok(spec)
    }

    pub fn positive_stable(index: f64) -> Result<Self> {
        let spec = LtSpec::PositiveStable { index };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LtSpec::Gamma { shape, rate } => {
                if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) {
                    return domain(format!("gamma transform needs shape, rate > 0 (got {shape}, {rate})"));
                }
            }
            LtSpec::PositiveStable { index } => {
                if !(index > 0.0 && index < 1.0) {
                    return domain(format!("positive stable index must lie in (0,1) (got {index})"));
                }
            }
        }
        Ok(())
    }

    /// `E[Z]`; infinite for the positive stable family.
    pub fn mean(&self) -> f64 {
        match *self {
            LtSpec::Gamma { shape, rate } => shape / rate,
            LtSpec::PositiveStable { .. } => f64::INFINITY,
        }
    }

    pub fn eval(&self, v: f64) -> Result<f64> {
        if !(v >= 0.0) {
            return domain(format!("Laplace transform argument must be >= 0 (got {v})"));
        }
        Ok(self.eval_nonneg(v))
    }

    /// Evaluation without the sign check; callers guarantee `v >= 0`.
    pub(crate) fn eval_nonneg(&self, v: f64) -> f64 {
        match *self {
            LtSpec::Gamma { shape, rate } => (-shape * (v / rate).ln_1p()).exp(),
            LtSpec::PositiveStable { index } => (-v.powf(index)).exp(),
        }
    }

    /// Analytic extension to `Re v >= 0` using principal branches.
    pub fn eval_complex(&self, v: Complex64) -> Complex64 {
        match *self {
            LtSpec::Gamma { shape, rate } => (-shape * (Complex64::new(1.0, 0.0) + v / rate).ln()).exp(),
            LtSpec::PositiveStable { index } => {
                if v == Complex64::new(0.0, 0.0) {
                    Complex64::new(1.0, 0.0)
                } else {
                    (-v.powf(index)).exp()
                }
            }
        }
    }

    /// `φ^{-1}(z)` from the closed forms of the implemented families.
    pub fn inverse(&self, z: f64) -> Result<f64> {
        check_unit_value(z)?;
        let v = match *self {
            LtSpec::Gamma { shape, rate } => rate * (-z.ln() / shape).exp_m1(),
            LtSpec::PositiveStable { index } => (-z.ln()).powf(1.0 / index),
        };
        Ok(v.max(0.0))
    }

    /// `φ^{-1}(z)` by monotone bisection: the bracket `[0, 2^m]` is doubled until
    /// `φ(2^m) < z`, then halved down to an absolute width of `1e-12`.
    pub fn inverse_bisect(&self, z: f64) -> Result<f64> {
        check_unit_value(z)?;
        if z == 1.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0_f64;
        while self.eval_nonneg(hi) >= z {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Numeric(format!("no bracket for φ^-1({z})")));
            }
        }
        let mut lo = 0.0_f64;
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval_nonneg(mid) >= z {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Draw `Z` with Laplace transform `φ`.
    ///
    /// Gamma uses the standard gamma generator; the positive stable family uses
    /// Kanter's representation `Z = (A(U)/E)^((1-α)/α)` with `U ~ U(0, π)` and
    /// `E ~ Exp(1)`, which has transform `exp(-v^α)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            LtSpec::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate)
                .expect("validated gamma parameters")
                .sample(rng),
            LtSpec::PositiveStable { index } => {
                let u: f64 = PI * rng.sample::<f64, _>(Open01);
                let e: f64 = rng.sample::<f64, _>(Exp1);
                kanter_positive_stable(index, u, e)
            }
        }
    }
}

/// Kanter's map from `(U, E)` to a one-sided stable variate with transform
/// `exp(-v^α)`.
pub(crate) fn kanter_positive_stable(alpha: f64, u: f64, e: f64) -> f64 {
    let a = (alpha * u).sin().powf(alpha / (1.0 - alpha)) * ((1.0 - alpha) * u).sin()
        / u.sin().powf(1.0 / (1.0 - alpha));
    (a / e).powf((1.0 - alpha) / alpha)
}

fn check_unit_value(z: f64) -> Result<()> {
    if !(z > 0.0 && z <= 1.0) {
        return domain(format!("value must lie in (0,1] (got {z})"));
    }
    Ok(())
}

pub fn lt_eval(phi: &LtSpec, v: f64) -> Result<f64> {
    phi.eval(v)
}

pub fn lt_inverse(phi: &LtSpec, z: f64) -> Result<f64> {
    phi.inverse(z)
}

pub fn sample_subordinator<R: Rng + ?Sized>(phi: &LtSpec, rng: &mut R) -> f64 {
    phi.sample(rng)
}

/// Characteristic exponent `ψ` of an infinitely divisible law, `ω = exp(-ψ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsiSpec {
    /// `ψ(t) = -i b t`: point mass at `b`.
    Drift { b: f64 },
    /// `ψ(t) = |t|^index`, `index ∈ (0, 2]`.
    SymmetricStable { index: f64 },
    /// `ψ(t) = log(1 - i t / rate)`: exponential law with the given rate.
    ExpExponent { rate: f64 },
}

impl PsiSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PsiSpec::Drift { b } if !b.is_finite() => domain("drift must be finite"),
            PsiSpec::SymmetricStable { index } if !(index > 0.0 && index <= 2.0) => {
                domain(format!("symmetric stable index must lie in (0,2] (got {index})"))
            }
            PsiSpec::ExpExponent { rate } if !(rate > 0.0 && rate.is_finite()) => {
                domain(format!("exponential rate must be > 0 (got {rate})"))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        match *self {
            PsiSpec::Drift { b } => Complex64::new(0.0, -b * t),
            PsiSpec::SymmetricStable { index } => Complex64::new(t.abs().powf(index), 0.0),
            PsiSpec::ExpExponent { rate } => Complex64::new(1.0, -t / rate).ln(),
        }
    }
}

pub fn psi_eval(psi: &PsiSpec, t: f64) -> Complex64 {
    psi.eval(t)
}

/// `f(t) = φ(ψ(t))`, the φ-ID characteristic function built from `ψ`.
pub fn phi_id_cf(phi: &LtSpec, psi: &PsiSpec, t: f64) -> Complex64 {
    phi.eval_complex(psi.eval(t))
}

/// Bivariate exponent measure through its co-survival functional
/// `T(y) = μ([λ, y]^c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExponentMeasureSpec {
    /// `T(y) = y1^(-a1) + y2^(-a2)`: independent Fréchet margins.
    IndepFrechet { a1: f64, a2: f64 },
    /// `T(y) = (y1^(-α/r) + y2^(-α/r))^r`, `r ∈ (0, 1]`.
    Logistic { alpha: f64, r: f64 },
}

impl ExponentMeasureSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ExponentMeasureSpec::IndepFrechet { a1, a2 } => {
                if !(a1 > 0.0 && a2 > 0.0 && a1.is_finite() && a2.is_finite()) {
                    return domain(format!("Fréchet indices must be > 0 (got {a1}, {a2})"));
                }
            }
            ExponentMeasureSpec::Logistic { alpha, r } => {
                if !(alpha > 0.0 && alpha.is_finite() && r > 0.0 && r <= 1.0) {
                    return domain(format!("logistic needs alpha > 0 and r in (0,1] (got {alpha}, {r})"));
                }
            }
        }
        Ok(())
    }

    /// Bottom `λ` of the support rectangle.
    pub fn bottom(&self) -> Point2 {
        [0.0, 0.0]
    }

    /// Marginal indices `(α1, α2)`; each margin is `exp(-y^(-α_i))`.
    pub fn marginal_indices(&self) -> [f64; 2] {
        match *self {
            ExponentMeasureSpec::IndepFrechet { a1, a2 } => [a1, a2],
            ExponentMeasureSpec::Logistic { alpha, .. } => [alpha, alpha],
        }
    }

    /// `T(y)`. A coordinate equal to `+∞` contributes nothing.
    pub fn eval(&self, y: Point2) -> Result<f64> {
        let lambda = self.bottom();
        for i in 0..2 {
            if !(y[i] > lambda[i]) {
                return domain(format!("point ({}, {}) is not above the bottom ({}, {})", y[0], y[1], lambda[0], lambda[1]));
            }
        }
        Ok(match *self {
            ExponentMeasureSpec::IndepFrechet { a1, a2 } => y[0].powf(-a1) + y[1].powf(-a2),
            ExponentMeasureSpec::Logistic { alpha, r } => {
                let e = -alpha / r;
                (y[0].powf(e) + y[1].powf(e)).powf(r)
            }
        })
    }
}

pub fn exponent_measure_eval(mu: &ExponentMeasureSpec, y: Point2) -> Result<f64> {
    mu.eval(y)
}

/// `G(y) = exp(-T(y))`.
pub fn mid_df_eval(mu: &ExponentMeasureSpec, y: Point2) -> Result<f64> {
    Ok((-mu.eval(y)?).exp())
}

/// `F(y) = φ(T(y))`.
pub fn phi_mid_df_eval(phi: &LtSpec, mu: &ExponentMeasureSpec, y: Point2) -> Result<f64> {
    Ok(phi.eval_nonneg(mu.eval(y)?))
}

/// `exp(-φ^{-1}(F))`: maps a φ-MID value back to the underlying MID value.
pub fn recover_mid_from_phi_mid(phi: &LtSpec, f_value: f64) -> Result<f64> {
    Ok((-phi.inverse(f_value)?).exp())
}
