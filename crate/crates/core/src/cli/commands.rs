use std::fs;
use std::path::PathBuf;

use crate::distributions::{Population, SampleMeanModel};
use crate::error::{Error, Result};
use crate::expansions::{ExpansionSpec, Order};
use crate::metrics::{self, ErrorReport, IntervalKind, ReportConfig, TruthSource};
use crate::rearrangement;

use super::config::ExperimentConfig;
use super::csv::{ColumnKind, Table};

/// Norms used for the coupling moments.
pub const COUPLING_NORMS: [f64; 2] = [1.0, 2.0];

fn prepare_out(cfg: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))
}

fn base_table(cfg: &ExperimentConfig, columns: &[(&str, ColumnKind)]) -> Table {
    let mut t = Table::new(columns);
    t.meta("config_sha256", cfg.hash());
    t.meta("population", cfg.population);
    t.meta("mesh", cfg.mesh);
    t.meta("seed", cfg.seed);
    if let Some(c) = cfg.cumulants {
        t.meta("cumulants", format!("{}:{}", c.skewness, c.excess_kurtosis));
    }
    t
}

fn require_gamma(cfg: &ExperimentConfig, what: &'static str) -> Result<()> {
    match cfg.population {
        Population::Gamma { .. } => Ok(()),
        other => Err(Error::UnsupportedClosedForm {
            what,
            population: other.to_string(),
        }),
    }
}

/// One CSV per sample size and domain: grid point, truth, each expansion
/// order, and the rearranged (and optionally weighted-rearranged) curves.
/// Lognormal populations get distribution-domain files only, with a
/// simulated truth column.
pub fn cmd_curves(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    prepare_out(cfg)?;
    let closed = cfg.population.has_closed_form();
    let mut domains = vec![cfg.cdf_interval];
    if closed {
        domains.push(cfg.q_interval);
    }
    let mut written = Vec::new();
    for n in cfg.sample_sizes() {
        let model = SampleMeanModel::new(cfg.population, n)?;
        let cumulants = cfg.cumulants.unwrap_or_else(|| model.cumulants());
        for interval in &domains {
            let truth = if closed {
                TruthSource::ClosedForm
            } else {
                TruthSource::MonteCarlo {
                    draws: cfg.curve_draws(),
                    seed: cfg.seed,
                }
            };
            let set = metrics::curve_set(&model, &cumulants, &cfg.orders, interval, cfg.mesh, truth)?;
            let weight = match &cfg.weight {
                Some(choice) => Some(choice.on(interval.lower(), interval.upper())?),
                None => None,
            };

            let mut names = vec![
                match interval.kind() {
                    IntervalKind::Distribution => "x".to_string(),
                    IntervalKind::Quantile => "u".to_string(),
                },
                "truth".to_string(),
            ];
            let mut curves = vec![&set.truth];
            for (order, curve) in &set.raw {
                names.push(format!("{}_order", order.ordinal()));
                curves.push(curve);
            }
            for (order, curve) in &set.rearranged {
                names.push(format!("rearranged_{}_order", order.ordinal()));
                curves.push(curve);
            }
            let weighted: Vec<_> = match &weight {
                Some(w) => set
                    .raw
                    .iter()
                    .filter(|(o, _)| *o > Order::FIRST)
                    .map(|(o, c)| Ok((*o, rearrangement::weighted_rearrange(c, w)?)))
                    .collect::<Result<_>>()?,
                None => Vec::new(),
            };
            for (order, curve) in &weighted {
                names.push(format!("weighted_rearranged_{}_order", order.ordinal()));
                curves.push(curve);
            }

            let columns: Vec<(&str, ColumnKind)> =
                names.iter().map(|s| (s.as_str(), ColumnKind::Value)).collect();
            let mut table = base_table(cfg, &columns);
            table.meta("n", n);
            table.meta("domain", interval.kind().name());
            table.meta("interval", interval);
            match truth {
                TruthSource::ClosedForm => table.meta("truth", "closed form"),
                TruthSource::MonteCarlo { draws, seed } => {
                    table.meta("truth", "monte carlo");
                    table.meta("draws", draws);
                    table.meta("truth_seed", seed);
                }
            }
            if let Some(w) = &cfg.weight {
                table.meta("weight", w);
            }
            for (i, x) in set.truth.nodes().enumerate() {
                let mut row = vec![x];
                row.extend(curves.iter().map(|c| c.values()[i]));
                table.push(&row);
            }
            let path = cfg
                .out
                .join(format!("curves_{}_n{n}.csv", interval.kind().name()));
            table.write(&path)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn report_table(cfg: &ExperimentConfig, report: &ErrorReport) -> Table {
    let weighted = report.rows.iter().any(|r| r.weighted.is_some());
    let mut columns = vec![
        ("n", ColumnKind::Key),
        ("p", ColumnKind::Key),
        ("first_order", ColumnKind::Value),
        ("third_order", ColumnKind::Value),
        ("rearranged", ColumnKind::Value),
        ("ratio", ColumnKind::Value),
    ];
    if weighted {
        columns.extend([
            ("weighted_third_order", ColumnKind::Value),
            ("weighted_rearranged", ColumnKind::Value),
            ("weighted_ratio", ColumnKind::Value),
        ]);
    }
    let mut t = base_table(cfg, &columns);
    t.meta("domain", report.interval.kind().name());
    t.meta("interval", report.interval);
    if let Some(w) = &cfg.weight {
        t.meta("weight", w);
    }
    for r in &report.rows {
        let mut row = vec![
            r.sample_size as f64,
            r.p,
            r.first_order,
            r.third_order,
            r.rearranged,
            r.ratio,
        ];
        if let Some(w) = r.weighted {
            row.extend([w.original, w.rearranged, metrics::error_ratio(w.rearranged, w.original)]);
        }
        t.push(&row);
    }
    t
}

/// `cdf_errors.csv` and `quantile_errors.csv`: one row per (n, p).
pub fn cmd_table(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    require_gamma(cfg, "distribution function")?;
    prepare_out(cfg)?;
    let (cdf, quantile) = metrics::improvement_report(&ReportConfig {
        population: cfg.population,
        sample_sizes: cfg.sample_sizes(),
        cdf_interval: cfg.cdf_interval,
        quantile_interval: cfg.q_interval,
        mesh: cfg.mesh,
        weight: cfg.weight.clone(),
        cumulants: cfg.cumulants,
    })?;
    let mut written = Vec::new();
    for (name, report) in [("cdf_errors.csv", &cdf), ("quantile_errors.csv", &quantile)] {
        let path = cfg.out.join(name);
        report_table(cfg, report).write(&path)?;
        written.push(path);
    }
    Ok(written)
}

/// `coupling.csv`: restricted coupling moments for every (n, J, p).
pub fn cmd_coupling(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    require_gamma(cfg, "distribution function")?;
    prepare_out(cfg)?;
    let mut t = base_table(
        cfg,
        &[
            ("n", ColumnKind::Key),
            ("J", ColumnKind::Key),
            ("p", ColumnKind::Key),
            ("raw_moment", ColumnKind::Value),
            ("rearranged_moment", ColumnKind::Value),
            ("std_error", ColumnKind::Value),
        ],
    );
    t.meta("draws", cfg.coupling_draws());
    t.meta("interval", cfg.q_interval);
    for n in cfg.sample_sizes() {
        let model = SampleMeanModel::new(cfg.population, n)?;
        let cumulants = cfg.cumulants.unwrap_or_else(|| model.cumulants());
        let specs = cfg
            .orders
            .iter()
            .map(|&order| ExpansionSpec::new(cumulants, n, order))
            .collect::<Result<Vec<_>>>()?;
        let results = metrics::coupling_mc_specs(
            &model,
            &specs,
            &cfg.q_interval,
            cfg.mesh,
            &COUPLING_NORMS,
            cfg.coupling_draws(),
            cfg.seed,
        )?;
        for (order, per_norm) in cfg.orders.iter().zip(results) {
            for r in per_norm {
                t.push(&[
                    n as f64,
                    order.get() as f64,
                    r.p,
                    r.raw_moment,
                    r.rearranged_moment,
                    r.std_error,
                ]);
            }
        }
    }
    let path = cfg.out.join("coupling.csv");
    t.write(&path)?;
    Ok(vec![path])
}
