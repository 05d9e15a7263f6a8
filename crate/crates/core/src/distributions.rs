//! Population models, the distribution and quantile functions of their
//! standardized sample mean, and the population cumulants that feed the
//! expansions.
//!
//! The standardized mean of an i.i.d. sample `Y₁…Yₙ` is
//! `Zₙ = (ΣYᵢ − n·E[Y]) / (√n · sd(Y))`, which converges to a standard normal.
//! For a Gamma(k, θ) population the sum is Gamma(n·k, θ), so `Zₙ` has a
//! closed-form distribution function; the lognormal family does not and is
//! handled by simulation.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::Xoshiro256;
use crate::special::{self, Probability};

/// Skewness λ and excess kurtosis κ of a population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cumulants {
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl Cumulants {
    /// Cumulants of the normal family (all corrections vanish).
    pub const NORMAL: Cumulants = Cumulants {
        skewness: 0.0,
        excess_kurtosis: 0.0,
    };

    /// Validates the moment-feasibility bound κ ≥ λ² − 2.
    pub fn new(skewness: f64, excess_kurtosis: f64) -> Result<Self> {
        if !skewness.is_finite() || !excess_kurtosis.is_finite() {
            return Err(Error::domain("cumulants must be finite"));
        }
        let bound = skewness * skewness - 2.0;
        if excess_kurtosis < bound - 1e-12 * bound.abs().max(1.0) {
            return Err(Error::domain(format!(
                "excess kurtosis {excess_kurtosis} violates the bound λ² − 2 = {bound}"
            )));
        }
        Ok(Cumulants {
            skewness,
            excess_kurtosis,
        })
    }
}

/// λ = 2/√k, κ = 6/k for a Gamma population of shape k (any scale).
pub fn gamma_cumulants(shape: f64) -> Result<Cumulants> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::domain(format!("gamma shape must be positive, got {shape}")));
    }
    Ok(Cumulants {
        skewness: 2.0 / shape.sqrt(),
        excess_kurtosis: 6.0 / shape,
    })
}

/// Standardized cumulants of LogNormal(μ, σ); they do not depend on μ.
pub fn lognormal_cumulants(mu: f64, sigma: f64) -> Result<Cumulants> {
    if !mu.is_finite() {
        return Err(Error::domain("lognormal mu must be finite"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("lognormal sigma must be positive, got {sigma}")));
    }
    let s2 = sigma * sigma;
    let w = s2.exp();
    // e^{σ²} − 1 without cancellation for small σ
    let wm1 = s2.exp_m1();
    let skewness = (w + 2.0) * wm1.sqrt();
    // e^{4σ²} + 2e^{3σ²} + 3e^{2σ²} − 6, expanded around σ = 0 through expm1
    let excess_kurtosis =
        (4.0 * s2).exp_m1() + 2.0 * (3.0 * s2).exp_m1() + 3.0 * (2.0 * s2).exp_m1();
    Ok(Cumulants {
        skewness,
        excess_kurtosis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Population {
    Gamma { shape: f64, scale: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

impl Population {
    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) || !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain(format!(
                "gamma population needs shape > 0 and scale > 0, got ({shape}, {scale})"
            )));
        }
        Ok(Population::Gamma { shape, scale })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!(
                "lognormal population needs finite mu and sigma > 0, got ({mu}, {sigma})"
            )));
        }
        Ok(Population::LogNormal { mu, sigma })
    }

    pub fn cumulants(&self) -> Cumulants {
        match *self {
            Population::Gamma { shape, .. } => {
                gamma_cumulants(shape).expect("validated at construction")
            }
            Population::LogNormal { mu, sigma } => {
                lognormal_cumulants(mu, sigma).expect("validated at construction")
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Population::Gamma { shape, scale } => shape * scale,
            Population::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
        }
    }

    pub fn std_dev(&self) -> f64 {
        match *self {
            Population::Gamma { shape, scale } => shape.sqrt() * scale,
            Population::LogNormal { mu, sigma } => {
                let s2 = sigma * sigma;
                (s2.exp_m1()).sqrt() * (mu + 0.5 * s2).exp()
            }
        }
    }

    /// One draw by inverse-CDF transform of an open-interval uniform.
    #[inline]
    pub fn sample(&self, rng: &mut Xoshiro256) -> f64 {
        let u = rng.next_open01();
        match *self {
            Population::Gamma { shape, scale } => scale * special::gamma_p_inv(shape, u),
            Population::LogNormal { mu, sigma } => (mu + sigma * special::norm_quantile(u)).exp(),
        }
    }

    pub fn has_closed_form(&self) -> bool {
        matches!(self, Population::Gamma { .. })
    }
}

/// Formats as `gamma:SHAPE:SCALE` or `lognormal:MU:SIGMA`, the same syntax
/// accepted by [`FromStr`].
impl fmt::Display for Population {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Population::Gamma { shape, scale } => write!(f, "gamma:{shape}:{scale}"),
            Population::LogNormal { mu, sigma } => write!(f, "lognormal:{mu}:{sigma}"),
        }
    }
}

fn parse_param(s: &str) -> Result<f64> {
    let s = s.trim();
    // allow simple fractions such as 1/16
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|_| Error::config(format!("bad number {s:?}")))?;
        let den: f64 = den.trim().parse().map_err(|_| Error::config(format!("bad number {s:?}")))?;
        return Ok(num / den);
    }
    s.parse()
        .map_err(|_| Error::config(format!("bad number {s:?}")))
}

impl FromStr for Population {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            [family, a, b] if family.eq_ignore_ascii_case("gamma") => {
                Population::gamma(parse_param(a)?, parse_param(b)?)
                    .map_err(|e| Error::config(e.to_string()))
            }
            [family, a, b] if family.eq_ignore_ascii_case("lognormal") => {
                Population::lognormal(parse_param(a)?, parse_param(b)?)
                    .map_err(|e| Error::config(e.to_string()))
            }
            _ => Err(Error::config(format!(
                "population {s:?} is not gamma:SHAPE:SCALE or lognormal:MU:SIGMA"
            ))),
        }
    }
}

/// The standardized mean of `sample_size` draws from `population`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMeanModel {
    pub population: Population,
    pub sample_size: usize,
}

impl SampleMeanModel {
    pub fn new(population: Population, sample_size: usize) -> Result<Self> {
        if sample_size == 0 {
            return Err(Error::domain("sample size must be at least 1"));
        }
        Ok(SampleMeanModel {
            population,
            sample_size,
        })
    }

    pub fn cumulants(&self) -> Cumulants {
        self.population.cumulants()
    }

    /// Shape of the Gamma law of the sum, or an error for families without
    /// a closed form.
    fn sum_shape(&self, what: &'static str) -> Result<f64> {
        match self.population {
            Population::Gamma { shape, .. } => Ok(self.sample_size as f64 * shape),
            other => Err(Error::UnsupportedClosedForm {
                what,
                population: other.to_string(),
            }),
        }
    }
}

/// Fₙ(x) for x finite; unchecked.
#[inline]
pub(crate) fn gamma_mean_cdf(sum_shape: f64, x: f64) -> f64 {
    let y = sum_shape + x * sum_shape.sqrt();
    if y <= 0.0 {
        0.0
    } else {
        special::gamma_p(sum_shape, y)
    }
}

#[inline]
pub(crate) fn gamma_mean_quantile(sum_shape: f64, u: f64) -> f64 {
    (special::gamma_p_inv(sum_shape, u) - sum_shape) / sum_shape.sqrt()
}

/// Closed-form distribution function of the standardized mean.
pub fn true_cdf(model: &SampleMeanModel, x: f64) -> Result<Probability> {
    let a = model.sum_shape("distribution function")?;
    if !x.is_finite() {
        return Err(Error::domain(format!("true_cdf requires finite x, got {x}")));
    }
    Probability::new(gamma_mean_cdf(a, x))
}

/// Closed-form quantile function of the standardized mean.
pub fn true_quantile(model: &SampleMeanModel, u: Probability) -> Result<f64> {
    let a = model.sum_shape("quantile function")?;
    if !u.is_interior() {
        return Err(Error::domain(format!(
            "quantile of the standardized mean is unbounded at u = {}",
            u.value()
        )));
    }
    Ok(gamma_mean_quantile(a, u.value()))
}

/// Simulates `draws` standardized sample means from one seeded stream.
/// Each mean consumes `sample_size` consecutive uniforms.
pub fn simulate_standardized_means(
    model: &SampleMeanModel,
    draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if draws == 0 {
        return Err(Error::domain("draws must be at least 1"));
    }
    let n = model.sample_size;
    let pop = model.population;
    let center = n as f64 * pop.mean();
    let denom = (n as f64).sqrt() * pop.std_dev();
    let mut rng = Xoshiro256::seed_from_u64(seed);
    let out = (0..draws)
        .map(|_| {
            let sum: f64 = (0..n).map(|_| pop.sample(&mut rng)).sum();
            (sum - center) / denom
        })
        .collect();
    Ok(out)
}

/// Raw population draws, for checking moments against the cumulant formulas.
pub fn simulate_population(population: &Population, draws: usize, seed: u64) -> Vec<f64> {
    let mut rng = Xoshiro256::seed_from_u64(seed);
    (0..draws).map(|_| population.sample(&mut rng)).collect()
}

/// Empirical distribution of simulated means, kept sorted for lookups.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("empirical CDF needs at least one sample"));
        }
        if samples.iter().any(|v| v.is_nan()) {
            return Err(Error::domain("empirical CDF samples contain NaN"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Fraction of samples ≤ x.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }
}

/// Monte Carlo estimate of Fₙ on an ascending grid.
pub fn mc_cdf(
    model: &SampleMeanModel,
    grid: &[f64],
    draws: usize,
    seed: u64,
) -> Result<Vec<Probability>> {
    if grid.is_empty() {
        return Err(Error::domain("mc_cdf needs a non-empty grid"));
    }
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::domain("mc_cdf grid must be sorted ascending"));
    }
    let ecdf = EmpiricalCdf::from_samples(simulate_standardized_means(model, draws, seed)?)?;
    grid.iter().map(|&x| Probability::new(ecdf.eval(x))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma_model(shape: f64, scale: f64, n: usize) -> SampleMeanModel {
        SampleMeanModel::new(Population::gamma(shape, scale).unwrap(), n).unwrap()
    }

    #[test]
    fn gamma_cumulant_examples() {
        let c = gamma_cumulants(1.0 / 16.0).unwrap();
        assert!((c.skewness - 8.0).abs() < 1e-12);
        assert!((c.excess_kurtosis - 96.0).abs() < 1e-12);
        let c = gamma_cumulants(4.0).unwrap();
        assert!((c.skewness - 1.0).abs() < 1e-15);
        assert!((c.excess_kurtosis - 1.5).abs() < 1e-15);
        let c = gamma_cumulants(1e12).unwrap();
        assert!(c.skewness.abs() < 1e-5 && c.excess_kurtosis.abs() < 1e-5);
        assert!(gamma_cumulants(0.0).is_err());
        assert!(gamma_cumulants(-2.0).is_err());
    }

    #[test]
    fn lognormal_cumulant_examples() {
        let c = lognormal_cumulants(0.0, 1.0).unwrap();
        let e = 1f64.exp();
        assert!((c.skewness - (e + 2.0) * (e - 1.0).sqrt()).abs() < 1e-12);
        assert!((c.skewness - 6.184_877_138).abs() < 1e-6);
        let want_k = (4f64).exp() + 2.0 * (3f64).exp() + 3.0 * (2f64).exp() - 6.0;
        assert!((c.excess_kurtosis - want_k).abs() < 1e-10);
        assert_eq!(lognormal_cumulants(-3.0, 0.7).unwrap(), lognormal_cumulants(5.0, 0.7).unwrap());
        let c = lognormal_cumulants(0.0, 0.001).unwrap();
        assert!(c.skewness.abs() < 1e-2 && c.excess_kurtosis.abs() < 1e-4);
        assert!(lognormal_cumulants(0.0, 0.0).is_err());
    }

    #[test]
    fn lognormal_small_sigma_is_nearly_normal() {
        // λ ≈ 3σ, κ ≈ 16σ² for small σ
        let c = lognormal_cumulants(0.0, 0.001).unwrap();
        assert!((c.skewness - 0.003).abs() < 1e-6);
        assert!(c.excess_kurtosis < 1e-4);
    }

    #[test]
    fn cumulant_feasibility_bound() {
        assert!(Cumulants::new(1.0, -1.0).is_ok());
        assert!(Cumulants::new(2.0, 1.0).is_err());
        assert!(Cumulants::new(f64::NAN, 0.0).is_err());
        for shape in [0.01, 1.0 / 16.0, 1.0, 50.0] {
            let c = gamma_cumulants(shape).unwrap();
            assert!(Cumulants::new(c.skewness, c.excess_kurtosis).is_ok());
        }
    }

    #[test]
    fn true_cdf_exponential_case() {
        // n·k = 1: the sum is Exp(1) and x = 0 sits at its mean
        let m = gamma_model(1.0 / 16.0, 16.0, 16);
        let v = true_cdf(&m, 0.0).unwrap().value();
        assert!((v - (1.0 - (-1f64).exp())).abs() < 1e-9);
        assert!((v - 0.632_120_559).abs() < 1e-9);
    }

    #[test]
    fn true_cdf_below_support() {
        for &(k, n) in &[(1.0 / 16.0, 4), (0.25, 8), (1.0, 32)] {
            let m = gamma_model(k, 3.0, n);
            let x = -(n as f64 * k).sqrt() - 1.0;
            assert_eq!(true_cdf(&m, x).unwrap().value(), 0.0);
        }
    }

    #[test]
    fn true_cdf_is_scale_free() {
        let a = gamma_model(1.0 / 16.0, 16.0, 4);
        let b = gamma_model(1.0 / 16.0, 1.0, 4);
        assert_eq!(true_cdf(&a, 0.7).unwrap(), true_cdf(&b, 0.7).unwrap());
    }

    #[test]
    fn true_quantile_examples() {
        let m = gamma_model(1.0 / 16.0, 16.0, 16);
        let u = Probability::new(1.0 - (-1f64).exp()).unwrap();
        assert!(true_quantile(&m, u).unwrap().abs() < 1e-8);
        for &u in &[0.01, 0.5, 0.99] {
            let q = true_quantile(&m, Probability::new(u).unwrap()).unwrap();
            assert!((true_cdf(&m, q).unwrap().value() - u).abs() < 1e-8);
        }
        // median of a right-skewed standardized sum lies below zero
        let m4 = gamma_model(1.0 / 16.0, 16.0, 4);
        let med = true_quantile(&m4, Probability::new(0.5).unwrap()).unwrap();
        let a: f64 = 0.25;
        let oracle = (crate::special::inverse_regularized_gamma_p(a, Probability::new(0.5).unwrap()).unwrap() - a) / a.sqrt();
        assert!(med < 0.0);
        assert!((med - oracle).abs() < 1e-8);
        assert!(true_quantile(&m, Probability::new(0.0).unwrap()).is_err());
        assert!(true_quantile(&m, Probability::new(1.0).unwrap()).is_err());
    }

    #[test]
    fn lognormal_has_no_closed_form() {
        let m = SampleMeanModel::new(Population::lognormal(0.0, 1.0).unwrap(), 5).unwrap();
        assert!(matches!(true_cdf(&m, 0.0), Err(Error::UnsupportedClosedForm { .. })));
        assert!(matches!(
            true_quantile(&m, Probability::new(0.5).unwrap()),
            Err(Error::UnsupportedClosedForm { .. })
        ));
    }

    #[test]
    fn monotone_truth_oracles() {
        for &k in &[1.0 / 16.0, 0.25, 1.0] {
            for &n in &[4usize, 8, 16, 32] {
                let m = gamma_model(k, 16.0, n);
                let mut prev = 0.0;
                for i in 0..2001 {
                    let x = -4.0 + 8.0 * i as f64 / 2000.0;
                    let v = true_cdf(&m, x).unwrap().value();
                    assert!(v >= prev, "k={k} n={n} x={x}");
                    prev = v;
                }
                let mut prev = f64::NEG_INFINITY;
                for i in 1..1000 {
                    let u = Probability::new(i as f64 / 1000.0).unwrap();
                    let q = true_quantile(&m, u).unwrap();
                    assert!(q > prev, "k={k} n={n} u={}", u.value());
                    prev = q;
                }
            }
        }
    }

    #[test]
    fn mc_cdf_contracts() {
        let m = gamma_model(1.0 / 16.0, 16.0, 4);
        let grid = [-50.0, -1.0, 0.0, 1.0];
        let a = mc_cdf(&m, &grid, 2000, 11).unwrap();
        let b = mc_cdf(&m, &grid, 2000, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].value(), 0.0);
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
        assert!(mc_cdf(&m, &[], 10, 1).is_err());
        assert!(mc_cdf(&m, &[1.0, 0.0], 10, 1).is_err());
        assert!(mc_cdf(&m, &grid, 0, 1).is_err());
    }

    #[test]
    fn population_parse_and_display() {
        let p: Population = "gamma:1/16:16".parse().unwrap();
        assert_eq!(p, Population::gamma(0.0625, 16.0).unwrap());
        assert_eq!(p.to_string().parse::<Population>().unwrap(), p);
        let q: Population = "lognormal:0:1".parse().unwrap();
        assert_eq!(q, Population::lognormal(0.0, 1.0).unwrap());
        assert!("gamma:0:1".parse::<Population>().is_err());
        assert!("weibull:1:1".parse::<Population>().is_err());
        assert!("gamma:1".parse::<Population>().is_err());
    }
}
