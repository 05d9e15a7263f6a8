//! Edgeworth approximation of the distribution function and Cornish-Fisher
//! approximation of the quantile function of a standardized sample mean,
//! truncated after the first, second or third term.
//!
//! Neither approximation is clipped or repaired here: values outside [0, 1]
//! and non-monotone stretches are part of the raw output.

use crate::distributions::Cumulants;
use crate::error::{Error, Result};
use crate::special::{self, Probability};

/// Number of terms kept in an expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Order(u8);

impl Order {
    pub const FIRST: Order = Order(1);
    pub const SECOND: Order = Order(2);
    pub const THIRD: Order = Order(3);

    pub fn new(j: usize) -> Result<Self> {
        match j {
            1..=3 => Ok(Order(j as u8)),
            _ => Err(Error::domain(format!(
                "expansion order must be 1, 2 or 3, got {j}"
            ))),
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// "first", "second" or "third".
    pub fn ordinal(self) -> &'static str {
        match self.0 {
            1 => "first",
            2 => "second",
            _ => "third",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionSpec {
    pub cumulants: Cumulants,
    pub sample_size: usize,
    pub order: Order,
}

impl ExpansionSpec {
    pub fn new(cumulants: Cumulants, sample_size: usize, order: Order) -> Result<Self> {
        if sample_size == 0 {
            return Err(Error::domain("sample size must be at least 1"));
        }
        Ok(ExpansionSpec {
            cumulants,
            sample_size,
            order,
        })
    }
}

fn check_term(j: usize) -> Result<()> {
    if (1..=3).contains(&j) {
        Ok(())
    } else {
        Err(Error::domain(format!("polynomial index must be 1, 2 or 3, got {j}")))
    }
}

#[inline]
pub(crate) fn cf_term(j: usize, z: f64, c: &Cumulants) -> f64 {
    let (l, k) = (c.skewness, c.excess_kurtosis);
    match j {
        1 => z,
        2 => l * (z * z - 1.0) / 6.0,
        _ => {
            let z3 = z * z * z;
            (3.0 * k * (z3 - 3.0 * z) - 2.0 * l * l * (2.0 * z3 - 5.0 * z)) / 72.0
        }
    }
}

#[inline]
pub(crate) fn edgeworth_term(j: usize, x: f64, c: &Cumulants) -> f64 {
    let (l, k) = (c.skewness, c.excess_kurtosis);
    match j {
        1 => special::norm_cdf(x),
        2 => -l * (x * x - 1.0) * special::norm_pdf(x) / 6.0,
        _ => {
            let x2 = x * x;
            let x3 = x2 * x;
            let x5 = x3 * x2;
            -(3.0 * k * (x3 - 3.0 * x) + l * l * (x5 - 10.0 * x3 + 15.0 * x))
                * special::norm_pdf(x)
                / 72.0
        }
    }
}

/// Cornish-Fisher polynomial Rⱼ(z), j ∈ {1, 2, 3}.
pub fn cf_polynomial(j: usize, z: f64, c: &Cumulants) -> Result<f64> {
    check_term(j)?;
    Ok(cf_term(j, z, c))
}

/// Edgeworth term Pⱼ(x), j ∈ {1, 2, 3}. P₁ is Φ itself.
pub fn edgeworth_polynomial(j: usize, x: f64, c: &Cumulants) -> Result<f64> {
    check_term(j)?;
    if !x.is_finite() {
        return Err(Error::domain("edgeworth polynomial needs finite x"));
    }
    Ok(edgeworth_term(j, x, c))
}

/// Σⱼ termⱼ / n^{(j−1)/2}, summed in increasing j.
#[inline]
fn truncated_sum(spec: &ExpansionSpec, term: impl Fn(usize) -> f64) -> f64 {
    let n = spec.sample_size as f64;
    let mut acc = term(1);
    if spec.order.get() >= 2 {
        acc += term(2) / n.sqrt();
    }
    if spec.order.get() >= 3 {
        acc += term(3) / n;
    }
    acc
}

/// Edgeworth approximation F̂ₙ(x).
pub fn edgeworth_cdf(spec: &ExpansionSpec, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("edgeworth_cdf needs finite x"));
    }
    Ok(edgeworth_unchecked(spec, x))
}

#[inline]
pub(crate) fn edgeworth_unchecked(spec: &ExpansionSpec, x: f64) -> f64 {
    truncated_sum(spec, |j| edgeworth_term(j, x, &spec.cumulants))
}

/// Cornish-Fisher approximation Q̂ₙ(u) for u strictly inside (0, 1).
pub fn cornish_fisher_quantile(spec: &ExpansionSpec, u: Probability) -> Result<f64> {
    let z = special::std_normal_quantile(u)?;
    Ok(cornish_fisher_at_z(spec, z))
}

/// Q̂ₙ evaluated at z = Φ⁻¹(u).
#[inline]
pub(crate) fn cornish_fisher_at_z(spec: &ExpansionSpec, z: f64) -> f64 {
    truncated_sum(spec, |j| cf_term(j, z, &spec.cumulants))
}
