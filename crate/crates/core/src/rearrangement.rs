//! Increasing rearrangement of functions sampled on an equispaced mesh.
//!
//! A [`GridFunction`] stores one value per cell of an `m`-cell partition of
//! `[a, b]`, sampled at the cell midpoints `a + (i + ½)(b − a)/m`. Read as a
//! step function, its increasing rearrangement is exactly the sorted list of
//! values, which is what [`rearrange`] returns. [`rearrange_by_definition`]
//! evaluates the quantile-function definition by counting and is kept as an
//! independent reference.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::special;

/// Midpoint of cell `i` of an `m`-cell partition of `[lower, upper]`.
///
/// Every mesh in the crate is built through this function so that two
/// meshes over the same interval agree bit for bit.
#[inline]
pub fn mesh_node(lower: f64, upper: f64, m: usize, i: usize) -> f64 {
    lower + (upper - lower) * ((i as f64 + 0.5) / m as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    lower: f64,
    upper: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(lower: f64, upper: f64, values: Vec<f64>) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::domain(format!(
                "grid domain [{lower}, {upper}] is not a proper interval"
            )));
        }
        if values.len() < 2 {
            return Err(Error::domain("a grid function needs at least two nodes"));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "grid value at node {bad} is not finite ({})",
                values[bad]
            )));
        }
        Ok(GridFunction {
            lower,
            upper,
            values,
        })
    }

    /// Samples `f` at the `m` cell midpoints of `[lower, upper]`.
    pub fn from_fn(lower: f64, upper: f64, m: usize, f: impl FnMut(f64) -> f64) -> Result<Self> {
        let nodes: Vec<f64> = (0..m).map(|i| mesh_node(lower, upper, m, i)).collect();
        GridFunction::new(lower, upper, nodes.into_iter().map(f).collect())
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn node(&self, i: usize) -> f64 {
        mesh_node(self.lower, self.upper, self.values.len(), i)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.node(i))
    }

    pub fn same_mesh(&self, other: &GridFunction) -> bool {
        self.lower == other.lower && self.upper == other.upper && self.len() == other.len()
    }

    /// Same mesh, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::contract(format!(
                "expected {} values, got {}",
                self.len(),
                values.len()
            )));
        }
        GridFunction::new(self.lower, self.upper, values)
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// Piecewise-linear interpolation through the nodes, extended linearly
    /// past the first and last midpoints.
    pub fn interpolate(&self, x: f64) -> f64 {
        let m = self.values.len();
        let h = (self.upper - self.lower) / m as f64;
        let pos = (x - self.lower) / h - 0.5;
        let k = (pos.floor().max(0.0) as usize).min(m - 2);
        let x0 = self.node(k);
        let x1 = self.node(k + 1);
        let t = (x - x0) / (x1 - x0);
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        if t == 0.0 {
            v0
        } else {
            v0 + t * (v1 - v0)
        }
    }
}

/// Increasing rearrangement: the same mesh carrying the sorted values.
pub fn rearrange(f: &GridFunction) -> GridFunction {
    let mut values = f.values.clone();
    values.sort_by(f64::total_cmp);
    GridFunction {
        lower: f.lower,
        upper: f.upper,
        values,
    }
}

/// f*(x) = inf{ y : |{i : fᵢ ≤ y}| / m ≥ (x − a)/(b − a) }, by direct counting.
///
/// At `x = a` the infimum is taken over the attained values, i.e. the minimum.
pub fn rearrange_by_definition(f: &GridFunction, x: f64) -> Result<f64> {
    if !(x >= f.lower && x <= f.upper) {
        return Err(Error::domain(format!(
            "x = {x} lies outside [{}, {}]",
            f.lower, f.upper
        )));
    }
    let m = f.values.len();
    let level = (x - f.lower) / (f.upper - f.lower) * m as f64;
    let mut best = f64::INFINITY;
    for &y in &f.values {
        if y >= best {
            continue;
        }
        let count = f.values.iter().filter(|&&v| v <= y).count();
        if count as f64 >= level {
            best = y;
        }
    }
    Ok(best)
}

/// Exchanges positions `l < m` of an out-of-order pair (`values[l] > values[m]`).
pub fn sorting_step(values: &[f64], l: usize, m: usize) -> Result<Vec<f64>> {
    if !(l < m && m < values.len()) {
        return Err(Error::contract(format!(
            "sorting step needs l < m < {}, got l = {l}, m = {m}",
            values.len()
        )));
    }
    if !(values[l] > values[m]) {
        return Err(Error::contract(format!(
            "positions {l} and {m} are not out of order ({} <= {})",
            values[l], values[m]
        )));
    }
    let mut out = values.to_vec();
    out.swap(l, m);
    Ok(out)
}

/// First out-of-order pair `(l, m)`, `l < m`, `values[l] > values[m]`.
pub fn first_inversion(values: &[f64]) -> Option<(usize, usize)> {
    (0..values.len()).find_map(|l| {
        (l + 1..values.len())
            .find(|&m| values[l] > values[m])
            .map(|m| (l, m))
    })
}

/// Applies [`sorting_step`] until no out-of-order pair remains.
pub fn sort_by_exchanges(values: &[f64]) -> Vec<f64> {
    let mut cur = values.to_vec();
    while let Some((l, m)) = first_inversion(&cur) {
        cur.swap(l, m);
    }
    cur
}

/// ηₚ = inf { |v − t'|ᵖ + |v' − t|ᵖ − |v − t|ᵖ − |v' − t'|ᵖ } over
/// `v, v', t, t'` in `[k_lo, k_hi]` with `v' ≥ v + ε`, `t' ≥ t + ε`.
///
/// Coarse grid search over the feasible set followed by pattern-search
/// refinement. `p = 1` is accepted for diagnostics; there the infimum is 0.
pub fn eta_p(p: f64, epsilon: f64, k_lo: f64, k_hi: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::domain(format!("eta_p needs finite p >= 1, got {p}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!("eta_p needs epsilon > 0, got {epsilon}")));
    }
    if !(k_lo.is_finite() && k_hi.is_finite() && k_hi - k_lo >= epsilon) {
        return Err(Error::domain(format!(
            "box [{k_lo}, {k_hi}] cannot hold two points {epsilon} apart"
        )));
    }
    let width = k_hi - k_lo;
    // unit-cube coordinates → (v, v', t, t'), feasible by construction
    let decode = |c: &[f64; 4]| {
        let v = k_lo + c[0] * (width - epsilon);
        let vp = v + epsilon + c[1] * (k_hi - v - epsilon);
        let t = k_lo + c[2] * (width - epsilon);
        let tp = t + epsilon + c[3] * (k_hi - t - epsilon);
        (v, vp, t, tp)
    };
    let objective = |c: &[f64; 4]| {
        let (v, vp, t, tp) = decode(c);
        (v - tp).abs().powf(p) + (vp - t).abs().powf(p) - (v - t).abs().powf(p) - (vp - tp).abs().powf(p)
    };

    const GRID: usize = 24;
    let mut best = [0.0; 4];
    let mut best_val = f64::INFINITY;
    let step = 1.0 / GRID as f64;
    let mut c = [0.0; 4];
    for i0 in 0..=GRID {
        c[0] = i0 as f64 * step;
        for i1 in 0..=GRID {
            c[1] = i1 as f64 * step;
            for i2 in 0..=GRID {
                c[2] = i2 as f64 * step;
                for i3 in 0..=GRID {
                    c[3] = i3 as f64 * step;
                    let val = objective(&c);
                    if val < best_val {
                        best_val = val;
                        best = c;
                    }
                }
            }
        }
    }

    // compass search, clamped to the unit cube
    let mut h = step;
    while h > 1e-13 {
        let mut improved = false;
        for d in 0..4 {
            for sign in [-1.0, 1.0] {
                let mut trial = best;
                trial[d] = (trial[d] + sign * h).clamp(0.0, 1.0);
                let val = objective(&trial);
                if val < best_val {
                    best_val = val;
                    best = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    Ok(best_val.max(0.0))
}

/// A strictly increasing, continuous distribution function restricted and
/// renormalized to `[lower, upper]`, so that Λ(lower) = 0 and Λ(upper) = 1.
#[derive(Clone)]
pub struct WeightCdf {
    kind: WeightKind,
    lower: f64,
    upper: f64,
    base_lo: f64,
    base_hi: f64,
}

/// The unrestricted distribution behind a [`WeightCdf`].
#[derive(Clone)]
pub enum WeightKind {
    Uniform,
    Normal { mean: f64, sd: f64 },
    /// Piecewise-linear CDF through strictly increasing knots.
    Tabulated(Arc<Tabulated>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    xs: Vec<f64>,
    ps: Vec<f64>,
}

impl Tabulated {
    pub fn new(xs: Vec<f64>, ps: Vec<f64>) -> Result<Self> {
        if xs.len() != ps.len() || xs.len() < 2 {
            return Err(Error::domain("tabulated weight needs at least two (x, cdf) knots"));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|x| x.is_finite());
        if !increasing(&xs) || !increasing(&ps) {
            return Err(Error::domain(
                "tabulated weight must have strictly increasing knots and CDF values",
            ));
        }
        Ok(Tabulated { xs, ps })
    }

    fn eval(&self, x: f64) -> f64 {
        piecewise_linear(&self.xs, &self.ps, x)
    }

    fn inverse(&self, p: f64) -> f64 {
        piecewise_linear(&self.ps, &self.xs, p)
    }
}

fn piecewise_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&v| v <= x) - 1;
    let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + t * (ys[k + 1] - ys[k])
}

impl fmt::Debug for WeightCdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            WeightKind::Uniform => "uniform".to_string(),
            WeightKind::Normal { mean, sd } => format!("normal({mean}, {sd})"),
            WeightKind::Tabulated(t) => format!("tabulated({} knots)", t.xs.len()),
        };
        write!(f, "WeightCdf({kind} on [{}, {}])", self.lower, self.upper)
    }
}

impl WeightCdf {
    pub fn new(kind: WeightKind, lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::domain(format!(
                "weight domain [{lower}, {upper}] is not a proper interval"
            )));
        }
        if let WeightKind::Normal { mean, sd } = kind {
            if !(mean.is_finite() && sd > 0.0 && sd.is_finite()) {
                return Err(Error::domain(format!("normal weight needs sd > 0, got {sd}")));
            }
        }
        let base = |x: f64| base_cdf(&kind, x);
        let (base_lo, base_hi) = (base(lower), base(upper));
        if !(base_hi > base_lo) {
            return Err(Error::domain(format!(
                "weight puts no mass on [{lower}, {upper}]; it is not invertible there"
            )));
        }
        let w = WeightCdf {
            kind,
            lower,
            upper,
            base_lo,
            base_hi,
        };
        for i in 0..=10 {
            let x = lower + (upper - lower) * i as f64 / 10.0;
            let back = w.inverse(w.cdf(x));
            if (back - x).abs() > 1e-9 * x.abs().max(1.0) {
                return Err(Error::domain(format!(
                    "weight is not invertible near x = {x} (round trip gave {back})"
                )));
            }
        }
        Ok(w)
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        WeightCdf::new(WeightKind::Uniform, lower, upper)
    }

    pub fn normal(mean: f64, sd: f64, lower: f64, upper: f64) -> Result<Self> {
        WeightCdf::new(WeightKind::Normal { mean, sd }, lower, upper)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// Λ(x), clamped to [0, 1] outside the domain.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            WeightKind::Uniform => ((x - self.lower) / (self.upper - self.lower)).clamp(0.0, 1.0),
            _ => ((base_cdf(&self.kind, x) - self.base_lo) / (self.base_hi - self.base_lo))
                .clamp(0.0, 1.0),
        }
    }

    /// Λ⁻¹(u) for u in [0, 1].
    pub fn inverse(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let x = match &self.kind {
            WeightKind::Uniform => self.lower + (self.upper - self.lower) * u,
            WeightKind::Normal { mean, sd } => {
                let q = self.base_lo + u * (self.base_hi - self.base_lo);
                if q <= 0.0 {
                    self.lower
                } else if q >= 1.0 {
                    self.upper
                } else {
                    mean + sd * special::norm_quantile(q)
                }
            }
            WeightKind::Tabulated(t) => t.inverse(self.base_lo + u * (self.base_hi - self.base_lo)),
        };
        x.clamp(self.lower, self.upper)
    }

    /// Λ⁻¹ at the cell midpoints of an `m`-cell partition of [0, 1]. For the
    /// uniform weight these coincide bit for bit with the mesh of [lower, upper].
    pub fn pullback_nodes(&self, m: usize) -> Vec<f64> {
        match self.kind {
            WeightKind::Uniform => (0..m).map(|i| mesh_node(self.lower, self.upper, m, i)).collect(),
            _ => (0..m).map(|i| self.inverse(mesh_node(0.0, 1.0, m, i))).collect(),
        }
    }
}

fn base_cdf(kind: &WeightKind, x: f64) -> f64 {
    match kind {
        WeightKind::Uniform => x,
        WeightKind::Normal { mean, sd } => special::norm_cdf((x - mean) / sd),
        WeightKind::Tabulated(t) => t.eval(x),
    }
}

/// How a weight is chosen for an evaluation interval.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightChoice {
    Uniform,
    /// Normal law centred on the interval with six standard deviations
    /// spanning it; on [−3, 3] this is Φ.
    Normal,
    /// Knots read from a two-column `x,cdf` file.
    Tabulated { source: String, table: Tabulated },
}

impl WeightChoice {
    pub fn on(&self, lower: f64, upper: f64) -> Result<WeightCdf> {
        match self {
            WeightChoice::Uniform => WeightCdf::uniform(lower, upper),
            WeightChoice::Normal => {
                WeightCdf::normal(0.5 * (lower + upper), (upper - lower) / 6.0, lower, upper)
            }
            WeightChoice::Tabulated { table, .. } => {
                WeightCdf::new(WeightKind::Tabulated(Arc::new(table.clone())), lower, upper)
            }
        }
    }

    /// Reads `x,cdf` pairs, one per line; `#` lines and a non-numeric header are skipped.
    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut xs = Vec::new();
        let mut ps = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split(',').map(str::trim);
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::config(format!("{path}:{}: expected x,cdf", lineno + 1)));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(p)) => {
                    xs.push(x);
                    ps.push(p);
                }
                _ if xs.is_empty() => continue,
                _ => return Err(Error::config(format!("{path}:{}: bad number", lineno + 1))),
            }
        }
        let table = Tabulated::new(xs, ps).map_err(|e| Error::config(format!("{path}: {e}")))?;
        Ok(WeightChoice::Tabulated {
            source: path.to_string(),
            table,
        })
    }
}

impl fmt::Display for WeightChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightChoice::Uniform => f.write_str("uniform"),
            WeightChoice::Normal => f.write_str("normal"),
            WeightChoice::Tabulated { source, .. } => write!(f, "file:{source}"),
        }
    }
}

impl FromStr for WeightChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(WeightChoice::Uniform),
            "normal" => Ok(WeightChoice::Normal),
            other => match other.strip_prefix("file:") {
                Some(path) => WeightChoice::from_file(path),
                None => Err(Error::config(format!(
                    "weight {other:?} is not uniform, normal or file:PATH"
                ))),
            },
        }
    }
}

fn check_weight_domain(f: &GridFunction, w: &WeightCdf) -> Result<()> {
    if f.lower != w.lower || f.upper != w.upper {
        return Err(Error::contract(format!(
            "weight lives on [{}, {}] but the function on [{}, {}]",
            w.lower, w.upper, f.lower, f.upper
        )));
    }
    Ok(())
}

/// u ↦ f(Λ⁻¹(u)) on the `m`-cell mesh of [0, 1], interpolating f between nodes.
pub fn pullback(f: &GridFunction, w: &WeightCdf) -> Result<GridFunction> {
    check_weight_domain(f, w)?;
    let values = w
        .pullback_nodes(f.len())
        .into_iter()
        .map(|x| f.interpolate(x))
        .collect();
    GridFunction::new(0.0, 1.0, values)
}

/// Weighted rearrangement f*_Λ(x) = (f ∘ Λ⁻¹)*(Λ(x)), reported on f's mesh.
///
/// The sorted u-mesh values sit at the knots Λ⁻¹(uⱼ) and are interpolated
/// linearly in x, so a nondecreasing linear f comes back unchanged.
pub fn weighted_rearrange(f: &GridFunction, w: &WeightCdf) -> Result<GridFunction> {
    check_weight_domain(f, w)?;
    let knots = w.pullback_nodes(f.len());
    let mut sorted: Vec<f64> = knots.iter().map(|&x| f.interpolate(x)).collect();
    sorted.sort_by(f64::total_cmp);
    let values = f.nodes().map(|x| interpolate_knots(&knots, &sorted, x)).collect();
    f.with_values(values)
}

/// Linear interpolation through increasing knots, extended linearly past both ends.
fn interpolate_knots(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let k = xs.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
    let (x0, x1) = (xs[k], xs[k + 1]);
    if x == x0 || x1 <= x0 {
        return ys[k];
    }
    ys[k] + (x - x0) / (x1 - x0) * (ys[k + 1] - ys[k])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(values: &[f64]) -> GridFunction {
        GridFunction::new(0.0, 1.0, values.to_vec()).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridFunction::new(1.0, 1.0, vec![0.0, 1.0]).is_err());
        assert!(GridFunction::new(0.0, 1.0, vec![0.0]).is_err());
        assert!(GridFunction::new(0.0, 1.0, vec![0.0, f64::NAN]).is_err());
        assert!(GridFunction::new(0.0, f64::INFINITY, vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn nodes_are_cell_midpoints() {
        let f = GridFunction::from_fn(-1.0, 1.0, 4, |x| x).unwrap();
        assert_eq!(f.values(), &[-0.75, -0.25, 0.25, 0.75]);
    }

    #[test]
    fn interpolation_reproduces_lines() {
        let f = GridFunction::from_fn(-3.0, 3.0, 11, |x| 2.0 * x - 1.0).unwrap();
        for &x in &[-3.0, -2.9, -0.1, 0.0, 1.234, 3.0] {
            assert!((f.interpolate(x) - (2.0 * x - 1.0)).abs() < 1e-12, "x={x}");
        }
        for (i, x) in f.nodes().enumerate() {
            assert_eq!(f.interpolate(x), f.values()[i]);
        }
    }

    #[test]
    fn rearrange_examples() {
        assert_eq!(rearrange(&grid(&[1.0, 2.0, 3.0])).values(), &[1.0, 2.0, 3.0]);
        assert_eq!(rearrange(&grid(&[3.0, 1.0, 2.0])).values(), &[1.0, 2.0, 3.0]);
        // decreasing f: f*(x) = f(1 − x) on a symmetric mesh
        let f = GridFunction::from_fn(0.0, 1.0, 9, |x| (1.0 - x).powi(3)).unwrap();
        let mut rev = f.values().to_vec();
        rev.reverse();
        assert_eq!(rearrange(&f).values(), rev.as_slice());
    }

    #[test]
    fn definition_examples() {
        let c = grid(&[2.5; 7]);
        for &x in &[0.0, 0.3, 1.0] {
            assert_eq!(rearrange_by_definition(&c, x).unwrap(), 2.5);
        }
        let id = GridFunction::from_fn(0.0, 1.0, 11, |x| x).unwrap();
        for (i, x) in id.nodes().enumerate() {
            assert_eq!(rearrange_by_definition(&id, x).unwrap(), id.values()[i]);
        }
        assert!(rearrange_by_definition(&id, 1.5).is_err());
        assert!(rearrange_by_definition(&id, -0.01).is_err());
    }

    #[test]
    fn sorting_step_examples() {
        assert_eq!(sorting_step(&[3.0, 1.0], 0, 1).unwrap(), vec![1.0, 3.0]);
        assert_eq!(sorting_step(&[2.0, 5.0, 1.0], 0, 2).unwrap(), vec![1.0, 5.0, 2.0]);
        assert!(matches!(sorting_step(&[1.0, 3.0], 0, 1), Err(Error::Contract(_))));
        assert!(matches!(sorting_step(&[3.0, 1.0], 1, 0), Err(Error::Contract(_))));
        assert!(matches!(sorting_step(&[3.0, 1.0], 0, 2), Err(Error::Contract(_))));
        assert_eq!(sort_by_exchanges(&[4.0, -1.0, 2.0, 2.0, 0.0]), vec![-1.0, 0.0, 2.0, 2.0, 4.0]);
        assert_eq!(first_inversion(&[1.0, 2.0, 2.0]), None);
    }

    #[test]
    fn eta_two_closed_form() {
        for &eps in &[0.1, 0.5, 1.0] {
            for &(lo, hi) in &[(0.0, 2.0), (-3.0, 1.5)] {
                let v = eta_p(2.0, eps, lo, hi).unwrap();
                assert!((v - 2.0 * eps * eps).abs() < 1e-6, "eps={eps} box=({lo},{hi}) v={v}");
            }
        }
    }

    #[test]
    fn eta_one_vanishes() {
        assert!(eta_p(1.0, 0.5, 0.0, 4.0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn eta_positive_for_interior_p() {
        for &p in &[1.2, 1.5, 3.0, 6.0] {
            assert!(eta_p(p, 0.25, -1.0, 1.0).unwrap() > 0.0, "p={p}");
        }
    }

    #[test]
    fn eta_domain_errors() {
        assert!(eta_p(0.5, 0.1, 0.0, 1.0).is_err());
        assert!(eta_p(f64::INFINITY, 0.1, 0.0, 1.0).is_err());
        assert!(eta_p(2.0, 0.0, 0.0, 1.0).is_err());
        assert!(eta_p(2.0, 2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn weight_validation() {
        assert!(WeightCdf::normal(0.0, 0.0, -1.0, 1.0).is_err());
        assert!(WeightCdf::uniform(1.0, 0.0).is_err());
        // all mass far to the right: Λ is flat on the interval
        assert!(WeightCdf::normal(100.0, 0.1, -1.0, 1.0).is_err());
        let t = Tabulated::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.2, 1.0]).unwrap();
        let w = WeightCdf::new(WeightKind::Tabulated(Arc::new(t)), 0.0, 2.0).unwrap();
        assert!((w.cdf(1.0) - 0.2).abs() < 1e-15);
        assert!((w.inverse(0.6) - 1.5).abs() < 1e-15);
        assert!(Tabulated::new(vec![0.0, 1.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn weight_roundtrip_and_endpoints() {
        let w = WeightCdf::normal(0.0, 1.0, -3.0, 3.0).unwrap();
        assert_eq!(w.cdf(-3.0), 0.0);
        assert!((w.cdf(3.0) - 1.0).abs() < 1e-15);
        for i in 0..=60 {
            let x = -3.0 + 0.1 * i as f64;
            assert!((w.inverse(w.cdf(x)) - x).abs() < 1e-9);
        }
    }

    #[test]
    fn uniform_weighted_rearrangement_is_plain_rearrangement() {
        let f = GridFunction::from_fn(-3.0, 3.0, 201, |x| (3.0 * x).sin() + 0.1 * x).unwrap();
        let w = WeightCdf::uniform(-3.0, 3.0).unwrap();
        let a = weighted_rearrange(&f, &w).unwrap();
        let b = rearrange(&f);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_rearrangement_fixes_monotone_functions() {
        let w = WeightCdf::normal(0.0, 1.0, -3.0, 3.0).unwrap();
        let f = GridFunction::from_fn(-3.0, 3.0, 301, |x| 0.5 * x + 2.0).unwrap();
        let g = weighted_rearrange(&f, &w).unwrap();
        for (x, y) in f.values().iter().zip(g.values()) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!(weighted_rearrange(&f, &WeightCdf::uniform(-2.0, 3.0).unwrap()).is_err());
    }

    #[test]
    fn weighted_rearrangement_of_a_decreasing_line() {
        let m = 1001;
        let f = GridFunction::from_fn(0.0, 1.0, m, |x| -x).unwrap();
        let sq = Tabulated::new(
            (0..=200).map(|i| i as f64 / 200.0).collect(),
            (0..=200).map(|i| (i as f64 / 200.0).powi(2)).collect(),
        )
        .unwrap();
        let w = WeightCdf::new(WeightKind::Tabulated(Arc::new(sq)), 0.0, 1.0).unwrap();
        let out = weighted_rearrange(&f, &w).unwrap();
        assert!(out.is_nondecreasing());
        // brute force: resample, sort, and compare multisets under the same resampling
        let mut resampled: Vec<f64> = (0..m)
            .map(|j| f.interpolate(w.inverse(mesh_node(0.0, 1.0, m, j))))
            .collect();
        resampled.sort_by(f64::total_cmp);
        let back = pullback(&out, &w).unwrap();
        let mut got = back.into_values();
        got.sort_by(f64::total_cmp);
        let worst = resampled
            .iter()
            .zip(&got)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 5e-3, "worst = {worst}");
    }

    #[test]
    fn weight_choice_parsing() {
        assert_eq!("uniform".parse::<WeightChoice>().unwrap(), WeightChoice::Uniform);
        assert_eq!("normal".parse::<WeightChoice>().unwrap(), WeightChoice::Normal);
        assert!("cauchy".parse::<WeightChoice>().is_err());
        let w = WeightChoice::Normal.on(-3.0, 3.0).unwrap();
        assert!((w.cdf(0.0) - 0.5).abs() < 1e-15);
    }
}
