//! Approximation errors of the expansions on an evaluation interval, before
//! and after rearrangement, and the Monte Carlo coupling comparison.
//!
//! All Lₚ errors use equal weights on the cell midpoints and are normalized
//! by the interval length, so a constant discrepancy `c` has error `c` for
//! every `p`, and the sup-norm is the largest discrepancy at a node.

use std::fmt;

use crate::distributions::{self, Cumulants, Population, SampleMeanModel};
use crate::error::{Error, Result};
use crate::expansions::{self, ExpansionSpec, Order};
use crate::rearrangement::{self, mesh_node, GridFunction, WeightCdf, WeightChoice};
use crate::rng::Xoshiro256;
use crate::special;

/// Norms reported in every error table.
pub const TABLE_NORMS: [f64; 5] = [1.0, 2.0, 3.0, 4.0, f64::INFINITY];

/// Smallest mesh accepted by [`improvement_report`].
pub const MIN_REPORT_MESH: usize = 101;

fn check_norm(p: f64) -> Result<()> {
    if p >= 1.0 && !p.is_nan() {
        Ok(())
    } else {
        Err(Error::domain(format!("norm index must be >= 1 or inf, got {p}")))
    }
}

/// (mean of |dᵢ|ᵖ)^{1/p}, or max |dᵢ| for p = ∞. Scaled by the largest
/// discrepancy so large p neither overflows nor underflows.
fn mean_power_norm(diffs: impl Iterator<Item = f64> + Clone, p: f64) -> f64 {
    let (mut count, mut top) = (0usize, 0.0f64);
    for d in diffs.clone() {
        count += 1;
        top = top.max(d.abs());
    }
    if top == 0.0 || count == 0 {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    let sum: f64 = diffs.map(|d| (d.abs() / top).powf(p)).sum();
    top * (sum / count as f64).powf(1.0 / p)
}

fn check_same_mesh(a: &GridFunction, b: &GridFunction) -> Result<()> {
    if a.same_mesh(b) {
        Ok(())
    } else {
        Err(Error::contract(format!(
            "mesh mismatch: [{}, {}] x {} vs [{}, {}] x {}",
            a.lower(),
            a.upper(),
            a.len(),
            b.lower(),
            b.upper(),
            b.len()
        )))
    }
}

/// Lₚ distance between two curves on the same mesh.
pub fn lp_error(fhat: &GridFunction, f0: &GridFunction, p: f64) -> Result<f64> {
    check_norm(p)?;
    check_same_mesh(fhat, f0)?;
    let diffs = fhat.values().iter().zip(f0.values()).map(|(a, b)| a - b);
    Ok(mean_power_norm(diffs, p))
}

/// Lₚ(dΛ) distance, computed as the plain error of both curves pulled back
/// to the u-mesh of [0, 1] through Λ⁻¹.
pub fn weighted_lp_error(
    fhat: &GridFunction,
    f0: &GridFunction,
    w: &WeightCdf,
    p: f64,
) -> Result<f64> {
    check_norm(p)?;
    check_same_mesh(fhat, f0)?;
    lp_error(
        &rearrangement::pullback(fhat, w)?,
        &rearrangement::pullback(f0, w)?,
        p,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalKind {
    /// Probabilities [ε, 1 − ε] on which quantile curves are compared.
    Quantile,
    /// Points [−b, b] on which distribution functions are compared.
    Distribution,
}

impl IntervalKind {
    pub fn name(self) -> &'static str {
        match self {
            IntervalKind::Quantile => "quantile",
            IntervalKind::Distribution => "cdf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalInterval {
    kind: IntervalKind,
    lower: f64,
    upper: f64,
}

impl EvalInterval {
    pub fn new(kind: IntervalKind, lower: f64, upper: f64) -> Result<Self> {
        let ok = match kind {
            IntervalKind::Quantile => 0.0 < lower && lower < upper && upper < 1.0,
            IntervalKind::Distribution => lower.is_finite() && upper.is_finite() && lower < upper,
        };
        if !ok {
            return Err(Error::domain(format!(
                "[{lower}, {upper}] is not a valid {} interval",
                kind.name()
            )));
        }
        Ok(EvalInterval { kind, lower, upper })
    }

    pub fn quantile(lower: f64, upper: f64) -> Result<Self> {
        EvalInterval::new(IntervalKind::Quantile, lower, upper)
    }

    pub fn distribution(lower: f64, upper: f64) -> Result<Self> {
        EvalInterval::new(IntervalKind::Distribution, lower, upper)
    }

    pub fn kind(&self) -> IntervalKind {
        self.kind
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

impl fmt::Display for EvalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lower, self.upper)
    }
}

/// Exact Fₙ or Qₙ as a point evaluator; Gamma populations only.
fn truth_evaluator(model: &SampleMeanModel, kind: IntervalKind) -> Result<impl Fn(f64) -> f64> {
    let a = match model.population {
        Population::Gamma { shape, .. } => model.sample_size as f64 * shape,
        other => {
            return Err(Error::UnsupportedClosedForm {
                what: match kind {
                    IntervalKind::Quantile => "quantile function",
                    IntervalKind::Distribution => "distribution function",
                },
                population: other.to_string(),
            })
        }
    };
    Ok(move |x: f64| match kind {
        IntervalKind::Distribution => distributions::gamma_mean_cdf(a, x),
        IntervalKind::Quantile => distributions::gamma_mean_quantile(a, x),
    })
}

fn expansion_evaluator(spec: ExpansionSpec, kind: IntervalKind) -> impl Fn(f64) -> f64 {
    move |x: f64| match kind {
        IntervalKind::Distribution => expansions::edgeworth_unchecked(&spec, x),
        IntervalKind::Quantile => expansions::cornish_fisher_at_z(&spec, special::norm_quantile(x)),
    }
}

fn check_mesh(mesh: usize) -> Result<()> {
    if mesh < 2 {
        return Err(Error::domain(format!("mesh must have at least 2 nodes, got {mesh}")));
    }
    Ok(())
}

/// Exact Fₙ (distribution kind) or Qₙ (quantile kind) on the interval mesh.
pub fn truth_curve(model: &SampleMeanModel, interval: &EvalInterval, mesh: usize) -> Result<GridFunction> {
    check_mesh(mesh)?;
    let f = truth_evaluator(model, interval.kind)?;
    GridFunction::from_fn(interval.lower, interval.upper, mesh, f)
}

/// Edgeworth (distribution kind) or Cornish-Fisher (quantile kind) curve.
pub fn expansion_curve(spec: &ExpansionSpec, interval: &EvalInterval, mesh: usize) -> Result<GridFunction> {
    check_mesh(mesh)?;
    GridFunction::from_fn(
        interval.lower,
        interval.upper,
        mesh,
        expansion_evaluator(*spec, interval.kind),
    )
}

/// Where the truth column of a curve set comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruthSource {
    ClosedForm,
    /// Empirical CDF of simulated means; distribution kind only.
    MonteCarlo { draws: usize, seed: u64 },
}

/// Truth, raw expansions and rearranged expansions for one sample size.
#[derive(Debug, Clone)]
pub struct CurveSet {
    pub interval: EvalInterval,
    pub sample_size: usize,
    pub truth: GridFunction,
    pub raw: Vec<(Order, GridFunction)>,
    /// Rearranged curves for every order above the first.
    pub rearranged: Vec<(Order, GridFunction)>,
}

pub fn curve_set(
    model: &SampleMeanModel,
    cumulants: &Cumulants,
    orders: &[Order],
    interval: &EvalInterval,
    mesh: usize,
    truth: TruthSource,
) -> Result<CurveSet> {
    check_mesh(mesh)?;
    let truth = match truth {
        TruthSource::ClosedForm => truth_curve(model, interval, mesh)?,
        TruthSource::MonteCarlo { draws, seed } => {
            if interval.kind != IntervalKind::Distribution {
                return Err(Error::UnsupportedClosedForm {
                    what: "quantile function",
                    population: model.population.to_string(),
                });
            }
            let nodes: Vec<f64> = (0..mesh)
                .map(|i| mesh_node(interval.lower, interval.upper, mesh, i))
                .collect();
            let probs = distributions::mc_cdf(model, &nodes, draws, seed)?;
            GridFunction::new(
                interval.lower,
                interval.upper,
                probs.into_iter().map(|p| p.value()).collect(),
            )?
        }
    };
    let mut raw = Vec::with_capacity(orders.len());
    let mut rearranged = Vec::new();
    for &order in orders {
        let spec = ExpansionSpec::new(*cumulants, model.sample_size, order)?;
        let curve = expansion_curve(&spec, interval, mesh)?;
        if order > Order::FIRST {
            rearranged.push((order, rearrangement::rearrange(&curve)));
        }
        raw.push((order, curve));
    }
    Ok(CurveSet {
        interval: *interval,
        sample_size: model.sample_size,
        truth,
        raw,
        rearranged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedErrors {
    pub original: f64,
    pub rearranged: f64,
}

/// One (n, p) cell: first- and third-order errors and the effect of rearranging the latter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub sample_size: usize,
    pub p: f64,
    pub first_order: f64,
    pub third_order: f64,
    pub rearranged: f64,
    /// rearranged / third_order; 1 when both vanish.
    pub ratio: f64,
    pub weighted: Option<WeightedErrors>,
}

pub fn error_ratio(rearranged: f64, original: f64) -> f64 {
    if original == 0.0 {
        1.0
    } else {
        rearranged / original
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub interval: EvalInterval,
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    pub fn row(&self, sample_size: usize, p: f64) -> Option<&ErrorRow> {
        self.rows
            .iter()
            .find(|r| r.sample_size == sample_size && r.p == p)
    }
}

#[derive(Debug, Clone)]
pub struct ReportConfig {
    pub population: Population,
    pub sample_sizes: Vec<usize>,
    pub cdf_interval: EvalInterval,
    pub quantile_interval: EvalInterval,
    pub mesh: usize,
    /// Also report Λ-weighted errors.
    pub weight: Option<WeightChoice>,
    /// Replaces the population cumulants in the expansions (the truth is unchanged).
    pub cumulants: Option<Cumulants>,
}

/// Distribution-domain and quantile-domain error reports, rows ordered by n then p.
pub fn improvement_report(cfg: &ReportConfig) -> Result<(ErrorReport, ErrorReport)> {
    if cfg.mesh < MIN_REPORT_MESH {
        return Err(Error::domain(format!(
            "report mesh must be at least {MIN_REPORT_MESH}, got {}",
            cfg.mesh
        )));
    }
    if cfg.cdf_interval.kind != IntervalKind::Distribution
        || cfg.quantile_interval.kind != IntervalKind::Quantile
    {
        return Err(Error::contract("report intervals are of the wrong kind"));
    }
    let cdf = domain_report(cfg, &cfg.cdf_interval)?;
    let quantile = domain_report(cfg, &cfg.quantile_interval)?;
    Ok((cdf, quantile))
}

fn domain_report(cfg: &ReportConfig, interval: &EvalInterval) -> Result<ErrorReport> {
    let weight = match &cfg.weight {
        Some(choice) => Some(choice.on(interval.lower, interval.upper)?),
        None => None,
    };
    let mut rows = Vec::with_capacity(cfg.sample_sizes.len() * TABLE_NORMS.len());
    for &n in &cfg.sample_sizes {
        let model = SampleMeanModel::new(cfg.population, n)?;
        let cumulants = cfg.cumulants.unwrap_or_else(|| model.cumulants());
        let set = curve_set(
            &model,
            &cumulants,
            &[Order::FIRST, Order::THIRD],
            interval,
            cfg.mesh,
            TruthSource::ClosedForm,
        )?;
        let first = &set.raw[0].1;
        let third = &set.raw[1].1;
        let sorted = &set.rearranged[0].1;

        // weighted errors: every curve evaluated at the knots Λ⁻¹(uⱼ)
        let weighted_curves = match &weight {
            Some(w) => {
                let knots = w.pullback_nodes(cfg.mesh);
                let truth_at = truth_evaluator(&model, interval.kind)?;
                let spec = ExpansionSpec::new(cumulants, n, Order::THIRD)?;
                let third_at = expansion_evaluator(spec, interval.kind);
                let truth_u: Vec<f64> = knots.iter().map(|&x| truth_at(x)).collect();
                let third_u: Vec<f64> = knots.iter().map(|&x| third_at(x)).collect();
                let truth_u = GridFunction::new(0.0, 1.0, truth_u)?;
                let third_u = GridFunction::new(0.0, 1.0, third_u)?;
                let sorted_u = rearrangement::rearrange(&third_u);
                Some((truth_u, third_u, sorted_u))
            }
            None => None,
        };

        for &p in &TABLE_NORMS {
            let third_order = lp_error(third, &set.truth, p)?;
            let rearranged = lp_error(sorted, &set.truth, p)?;
            let weighted = match &weighted_curves {
                Some((truth_u, third_u, sorted_u)) => Some(WeightedErrors {
                    original: lp_error(third_u, truth_u, p)?,
                    rearranged: lp_error(sorted_u, truth_u, p)?,
                }),
                None => None,
            };
            rows.push(ErrorRow {
                sample_size: n,
                p,
                first_order: lp_error(first, &set.truth, p)?,
                third_order,
                rearranged,
                ratio: error_ratio(rearranged, third_order),
                weighted,
            });
        }
    }
    Ok(ErrorReport {
        interval: *interval,
        rows,
    })
}

/// Restricted coupling moments [E 1ₙ |Xₙ − Q̂(U)|ᵖ]^{1/p} with U = Fₙ(Xₙ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingResult {
    pub p: f64,
    pub raw_moment: f64,
    pub rearranged_moment: f64,
    /// Delta-method standard error of the raw moment estimate.
    pub std_error: f64,
}

/// Single-norm form of [`coupling_mc_norms`].
pub fn coupling_mc(
    model: &SampleMeanModel,
    spec: &ExpansionSpec,
    interval: &EvalInterval,
    mesh: usize,
    p: f64,
    draws: usize,
    seed: u64,
) -> Result<CouplingResult> {
    Ok(coupling_mc_norms(model, spec, interval, mesh, &[p], draws, seed)?[0])
}

/// Simulates Xₙ once and scores both the raw and the rearranged
/// Cornish-Fisher curve (linear interpolation between mesh nodes) for every
/// requested finite `p`. Draws with U outside the interval contribute zero.
pub fn coupling_mc_norms(
    model: &SampleMeanModel,
    spec: &ExpansionSpec,
    interval: &EvalInterval,
    mesh: usize,
    ps: &[f64],
    draws: usize,
    seed: u64,
) -> Result<Vec<CouplingResult>> {
    let mut all = coupling_mc_specs(model, std::slice::from_ref(spec), interval, mesh, ps, draws, seed)?;
    Ok(all.remove(0))
}

/// [`coupling_mc_norms`] for several expansions scored against the same draws.
///
/// The sum of `n` Gamma(k, θ) draws is drawn directly as one Gamma(nk, θ)
/// variate by inversion, so each draw costs one uniform whatever `n` is.
pub fn coupling_mc_specs(
    model: &SampleMeanModel,
    specs: &[ExpansionSpec],
    interval: &EvalInterval,
    mesh: usize,
    ps: &[f64],
    draws: usize,
    seed: u64,
) -> Result<Vec<Vec<CouplingResult>>> {
    if interval.kind != IntervalKind::Quantile {
        return Err(Error::contract("coupling needs a quantile-domain interval"));
    }
    if ps.is_empty() || specs.is_empty() {
        return Err(Error::domain("coupling needs at least one norm and one expansion"));
    }
    for &p in ps {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::domain(format!("coupling moments need finite p >= 1, got {p}")));
        }
    }
    if draws < 2 {
        return Err(Error::domain("coupling needs at least two draws"));
    }
    for spec in specs {
        if spec.sample_size != model.sample_size {
            return Err(Error::contract(format!(
                "expansion is for n = {} but the model has n = {}",
                spec.sample_size, model.sample_size
            )));
        }
    }
    let a = match model.population {
        Population::Gamma { shape, .. } => model.sample_size as f64 * shape,
        other => {
            return Err(Error::UnsupportedClosedForm {
                what: "distribution function",
                population: other.to_string(),
            })
        }
    };
    let curves = specs
        .iter()
        .map(|spec| {
            let raw = expansion_curve(spec, interval, mesh)?;
            let sorted = rearrangement::rearrange(&raw);
            Ok((raw, sorted))
        })
        .collect::<Result<Vec<_>>>()?;

    // running sums of y and y² for the raw curve and of y for the rearranged one
    let (ns, k) = (specs.len(), ps.len());
    let mut s_raw = vec![0.0; ns * k];
    let mut s_raw2 = vec![0.0; ns * k];
    let mut s_sorted = vec![0.0; ns * k];
    let mut rng = Xoshiro256::seed_from_u64(seed);
    for _ in 0..draws {
        let x = distributions::gamma_mean_quantile(a, rng.next_open01());
        let u = distributions::gamma_mean_cdf(a, x);
        if !(u >= interval.lower && u <= interval.upper) {
            continue;
        }
        for (s, (raw, sorted)) in curves.iter().enumerate() {
            let d_raw = (x - raw.interpolate(u)).abs();
            let d_sorted = (x - sorted.interpolate(u)).abs();
            for (j, &p) in ps.iter().enumerate() {
                let y = d_raw.powf(p);
                s_raw[s * k + j] += y;
                s_raw2[s * k + j] += y * y;
                s_sorted[s * k + j] += d_sorted.powf(p);
            }
        }
    }

    let nd = draws as f64;
    Ok((0..ns)
        .map(|s| {
            ps.iter()
                .enumerate()
                .map(|(j, &p)| {
                    let i = s * k + j;
                    let mean = s_raw[i] / nd;
                    let var = ((s_raw2[i] / nd - mean * mean) * nd / (nd - 1.0)).max(0.0);
                    let se_mean = (var / nd).sqrt();
                    let std_error = if mean > 0.0 {
                        se_mean * mean.powf(1.0 / p - 1.0) / p
                    } else {
                        0.0
                    };
                    CouplingResult {
                        p,
                        raw_moment: mean.powf(1.0 / p),
                        rearranged_moment: (s_sorted[i] / nd).powf(1.0 / p),
                        std_error,
                    }
                })
                .collect()
        })
        .collect())
}
