//! Effective experiment configuration: defaults, then a `key = value` file,
//! then command-line flags. Keys are the long flag names.

use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::distributions::{Cumulants, Population};
use crate::error::{Error, Result};
use crate::expansions::Order;
use crate::metrics::EvalInterval;
use crate::rearrangement::WeightChoice;

pub const DEFAULT_SEED: u64 = 12345;
/// Draws behind a simulated truth curve when `draws = auto`.
pub const DEFAULT_CURVE_DRAWS: usize = 10_000_000;
/// Draws per coupling simulation when `draws = auto`.
pub const DEFAULT_COUPLING_DRAWS: usize = 1_000_000;
pub const DEFAULT_MESH: usize = 1001;

/// Every key accepted in a config file, in serialization order.
pub const KEYS: [&str; 11] = [
    "population",
    "n",
    "order",
    "cdf-interval",
    "q-interval",
    "mesh",
    "weight",
    "cumulants",
    "draws",
    "seed",
    "out",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub population: Population,
    /// `None` means the population's default list, see [`ExperimentConfig::sample_sizes`].
    pub sample_sizes: Option<Vec<usize>>,
    pub orders: Vec<Order>,
    pub cdf_interval: EvalInterval,
    pub q_interval: EvalInterval,
    pub mesh: usize,
    pub weight: Option<WeightChoice>,
    /// Skewness and excess kurtosis used by the expansions instead of the population's.
    pub cumulants: Option<Cumulants>,
    /// `None` means a per-command default.
    pub draws: Option<usize>,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            population: Population::gamma(1.0 / 16.0, 16.0).expect("valid default"),
            sample_sizes: None,
            orders: vec![Order::FIRST, Order::THIRD],
            cdf_interval: EvalInterval::distribution(-3.0, 3.0).expect("valid default"),
            q_interval: EvalInterval::quantile(0.01, 0.99).expect("valid default"),
            mesh: DEFAULT_MESH,
            weight: None,
            cumulants: None,
            draws: None,
            seed: DEFAULT_SEED,
            out: PathBuf::from("out"),
        }
    }
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> Error {
    Error::config(format!("{key} = {value:?}: {why}"))
}

fn parse_list<T>(key: &str, value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(bad(key, value, "empty list"));
    }
    Ok(items)
}

fn parse_pair(key: &str, value: &str) -> Result<(f64, f64)> {
    let (a, b) = value
        .split_once(':')
        .ok_or_else(|| bad(key, value, "expected LO:HI"))?;
    let a = a.trim().parse::<f64>().map_err(|e| bad(key, value, e))?;
    let b = b.trim().parse::<f64>().map_err(|e| bad(key, value, e))?;
    Ok((a, b))
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "population" => self.population = value.parse()?,
            "n" if value == "auto" => self.sample_sizes = None,
            "n" => {
                self.sample_sizes = Some(parse_list(key, value, |s| match s.parse::<usize>() {
                    Ok(n) if n >= 1 => Ok(n),
                    _ => Err(bad(key, s, "sample sizes are positive integers")),
                })?)
            }
            "order" => {
                let mut orders = parse_list(key, value, |s| {
                    s.parse::<usize>()
                        .map_err(|e| bad(key, s, e))
                        .and_then(|j| Order::new(j).map_err(|e| bad(key, s, e)))
                })?;
                orders.sort();
                orders.dedup();
                self.orders = orders;
            }
            "cdf-interval" => {
                let (a, b) = parse_pair(key, value)?;
                self.cdf_interval = EvalInterval::distribution(a, b).map_err(|e| bad(key, value, e))?;
            }
            "q-interval" => {
                let (a, b) = parse_pair(key, value)?;
                self.q_interval = EvalInterval::quantile(a, b).map_err(|e| bad(key, value, e))?;
            }
            "mesh" => {
                self.mesh = match value.parse::<usize>() {
                    Ok(m) if m >= 2 => m,
                    _ => return Err(bad(key, value, "mesh is an integer >= 2")),
                }
            }
            "weight" => {
                self.weight = match value {
                    "none" => None,
                    other => Some(other.parse()?),
                }
            }
            "cumulants" => {
                self.cumulants = match value {
                    "population" => None,
                    other => {
                        let (l, k) = parse_pair(key, other)?;
                        Some(Cumulants::new(l, k).map_err(|e| bad(key, value, e))?)
                    }
                }
            }
            "draws" if value == "auto" => self.draws = None,
            "draws" => {
                self.draws = match value.parse::<usize>() {
                    Ok(d) if d >= 2 => Some(d),
                    _ => return Err(bad(key, value, "draws is an integer >= 2")),
                }
            }
            "seed" => self.seed = value.parse().map_err(|e| bad(key, value, e))?,
            "out" => {
                if value.is_empty() {
                    return Err(bad(key, value, "empty output path"));
                }
                self.out = PathBuf::from(value)
            }
            other => return Err(Error::config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("{origin}:{}: expected key = value", i + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| Error::config(format!("{origin}:{}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text, "<config>")?;
        Ok(cfg)
    }

    /// Configured sample sizes, or 4, 8, 16, 32 for Gamma populations and 5
    /// for lognormal ones.
    pub fn sample_sizes(&self) -> Vec<usize> {
        match (&self.sample_sizes, self.population) {
            (Some(sizes), _) => sizes.clone(),
            (None, Population::Gamma { .. }) => vec![4, 8, 16, 32],
            (None, Population::LogNormal { .. }) => vec![5],
        }
    }

    pub fn curve_draws(&self) -> usize {
        self.draws.unwrap_or(DEFAULT_CURVE_DRAWS)
    }

    pub fn coupling_draws(&self) -> usize {
        self.draws.unwrap_or(DEFAULT_COUPLING_DRAWS)
    }

    fn value_of(&self, key: &str) -> String {
        let join = |v: Vec<String>| v.join(",");
        match key {
            "population" => self.population.to_string(),
            "n" => match &self.sample_sizes {
                Some(sizes) => join(sizes.iter().map(|n| n.to_string()).collect()),
                None => "auto".to_string(),
            },
            "order" => join(self.orders.iter().map(|o| o.get().to_string()).collect()),
            "cdf-interval" => self.cdf_interval.to_string(),
            "q-interval" => self.q_interval.to_string(),
            "mesh" => self.mesh.to_string(),
            "weight" => self
                .weight
                .as_ref()
                .map_or_else(|| "none".to_string(), |w| w.to_string()),
            "cumulants" => self.cumulants.map_or_else(
                || "population".to_string(),
                |c| format!("{}:{}", c.skewness, c.excess_kurtosis),
            ),
            "draws" => self.draws.map_or_else(|| "auto".to_string(), |d| d.to_string()),
            "seed" => self.seed.to_string(),
            "out" => self.out.display().to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Full effective configuration as config-file text.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.value_of(key));
        }
        s
    }

    /// SHA-256 of the effective configuration, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for key in KEYS.iter().filter(|&&k| k != "out") {
            h.update(format!("{key} = {}\n", self.value_of(key)).as_bytes());
        }
        let digest = h.finalize();
        let mut hex = String::with_capacity(64);
        for b in digest.iter() {
            let _ = write!(hex, "{b:02x}");
        }
        hex
    }
}
