//! Scalar special functions: the standard normal CDF, density and quantile,
//! and the regularized lower incomplete gamma function with its inverse.
//!
//! The checked entry points validate their arguments and return
//! [`Probability`] where the result is a probability. The `pub(crate)`
//! unchecked variants are used on hot paths (Monte Carlo, curve sampling)
//! where the arguments are already known to be valid.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// 1/√(2π)
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// A value in the closed unit interval.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::domain(format!("{value} is not a probability")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// True when the value lies strictly inside (0, 1).
    #[inline]
    pub fn is_interior(self) -> bool {
        self.0 > 0.0 && self.0 < 1.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

fn require_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} requires a finite argument, got {x}")))
    }
}

/// Standard normal distribution function Φ(x).
pub fn std_normal_cdf(x: f64) -> Result<Probability> {
    require_finite(x, "std_normal_cdf")?;
    Ok(Probability(norm_cdf(x)))
}

/// Standard normal density φ(x) = exp(−x²/2)/√(2π).
pub fn std_normal_pdf(x: f64) -> Result<f64> {
    require_finite(x, "std_normal_pdf")?;
    Ok(norm_pdf(x))
}

/// Standard normal quantile Φ⁻¹(u) for u strictly inside (0, 1).
pub fn std_normal_quantile(u: Probability) -> Result<f64> {
    if !u.is_interior() {
        return Err(Error::domain(format!(
            "normal quantile is infinite at u = {}",
            u.value()
        )));
    }
    Ok(norm_quantile(u.value()))
}

/// Regularized lower incomplete gamma function P(a, x).
pub fn regularized_gamma_p(a: f64, x: f64) -> Result<Probability> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("gamma shape must be positive, got {a}")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!(
            "incomplete gamma requires x >= 0, got {x}"
        )));
    }
    Ok(Probability(gamma_p(a, x)))
}

/// Inverse of `x ↦ P(a, x)` for p strictly inside (0, 1).
pub fn inverse_regularized_gamma_p(a: f64, p: Probability) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("gamma shape must be positive, got {a}")));
    }
    if !p.is_interior() {
        return Err(Error::domain(format!(
            "inverse incomplete gamma is undefined at p = {}",
            p.value()
        )));
    }
    Ok(gamma_p_inv(a, p.value()))
}

#[inline]
pub(crate) fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

#[inline]
pub(crate) fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

// Rational approximation of the lower-half normal quantile, relative error
// below 1.2e-9 before polishing.
const QA: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const QB: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const QC: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const QD: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const Q_LOW: f64 = 0.02425;

/// Φ⁻¹ on the lower half, `0 < q <= 0.5`.
fn lower_half_quantile(q: f64) -> f64 {
    let x = if q < Q_LOW {
        let r = (-2.0 * q.ln()).sqrt();
        (((((QC[0] * r + QC[1]) * r + QC[2]) * r + QC[3]) * r + QC[4]) * r + QC[5])
            / ((((QD[0] * r + QD[1]) * r + QD[2]) * r + QD[3]) * r + 1.0)
    } else {
        let s = q - 0.5;
        let r = s * s;
        (((((QA[0] * r + QA[1]) * r + QA[2]) * r + QA[3]) * r + QA[4]) * r + QA[5]) * s
            / (((((QB[0] * r + QB[1]) * r + QB[2]) * r + QB[3]) * r + QB[4]) * r + 1.0)
    };
    // One Newton step against the accurate CDF. The lower tail of Φ is
    // computed without cancellation, so the residual keeps full relative
    // precision even for tiny q.
    x - (norm_cdf(x) - q) / norm_pdf(x)
}

pub(crate) fn norm_quantile(u: f64) -> f64 {
    debug_assert!(u > 0.0 && u < 1.0);
    if u <= 0.5 {
        lower_half_quantile(u)
    } else {
        // 1 - u is exact here
        -lower_half_quantile(1.0 - u)
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0 (Lanczos, g = 7, nine terms).
pub(crate) fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

const GAMMA_MAX_ITER: usize = 1000;
const GAMMA_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

/// P(a, x) without argument checks. Series below `a + 1`, Lentz continued
/// fraction for the complement above.
pub(crate) fn gamma_p(a: f64, x: f64) -> f64 {
    gamma_p_with(a, x, ln_gamma(a))
}

/// P(a, x) given a precomputed ln Γ(a).
fn gamma_p_with(a: f64, x: f64, ln_gamma_a: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma_a;
    if x < a + 1.0 {
        gamma_series(a, x, log_prefactor)
    } else {
        1.0 - gamma_cont_fraction(a, x, log_prefactor)
    }
}

/// Σ xⁿ / (a(a+1)…(a+n)), scaled by the prefactor.
fn gamma_series(a: f64, x: f64, log_prefactor: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    (sum.ln() + log_prefactor).exp().min(1.0)
}

/// Q(a, x) by the modified Lentz method.
fn gamma_cont_fraction(a: f64, x: f64, log_prefactor: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / CF_TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = b + an / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (log_prefactor.exp() * h).clamp(0.0, 1.0)
}

/// Initial guess for the inverse of P(a, ·).
fn gamma_inv_seed(a: f64, p: f64, ln_gamma_a: f64) -> f64 {
    if a >= 1.0 {
        // Wilson–Hilferty: (X/a)^{1/3} is close to normal
        let z = norm_quantile(p);
        let c = 1.0 / (9.0 * a);
        let w = 1.0 - c + z * c.sqrt();
        let x = a * w * w * w;
        if x > 0.0 {
            x
        } else {
            // far lower tail: P(a, x) ≈ xᵃ / Γ(a + 1)
            ((p.ln() + ln_gamma_a + a.ln()) / a).exp()
        }
    } else {
        let t = 1.0 - a * (0.253 + a * 0.12);
        if p < t {
            (p / t).powf(1.0 / a)
        } else {
            1.0 - (1.0 - (p - t) / (1.0 - t)).ln()
        }
    }
}

/// x with P(a, x) = p, for 0 < p < 1. Halley iteration kept inside a
/// shrinking bracket; steps that leave the bracket fall back to bisection
/// (geometric once the bracket is bounded away from zero).
pub(crate) fn gamma_p_inv(a: f64, p: f64) -> f64 {
    debug_assert!(a > 0.0 && p > 0.0 && p < 1.0);
    let ln_gamma_a = ln_gamma(a);
    let mut x = gamma_inv_seed(a, p, ln_gamma_a);
    if !(x.is_finite() && x > 0.0) {
        x = a;
    }
    let mut lo = 0.0_f64;
    let mut hi = f64::INFINITY;

    for _ in 0..200 {
        let err = gamma_p_with(a, x, ln_gamma_a) - p;
        if err == 0.0 {
            return x;
        }
        if err < 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        // density of Gamma(a, 1) at x
        let dens = (-x + (a - 1.0) * x.ln() - ln_gamma_a).exp();
        let mut next = if dens > 0.0 && dens.is_finite() {
            let u = err / dens;
            let halley = 1.0 - 0.5 * (u * ((a - 1.0) / x - 1.0)).min(1.0);
            x - u / halley
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = if hi.is_infinite() {
                2.0 * x.max(lo) + 1.0
            } else if lo > 0.0 {
                (lo * hi).sqrt()
            } else {
                0.5 * hi
            };
        }
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x || (hi.is_finite() && hi - lo <= 4.0 * f64::EPSILON * hi) {
            break;
        }
    }
    x
}
