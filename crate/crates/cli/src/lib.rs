//! Reports and sweeps behind the `tailrisk` command line.
//!
//! Every numeric CSV field is written with 10 significant digits
//! (`{:.9e}`). Cells where a kurtosis variant has a vanishing denominator
//! read `SINGULAR`; cells outside a method's domain (ES of a kurtosis
//! variant below its validity threshold) read `NA`. Sweep footers are
//! `#range` lines with the min/max relative error over rows with `α > C₁`.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use tailrisk::approx::{self, c1, c2, es_approx, newton_raphson_delta, var_approx, ApproxMethod};
use tailrisk::distributions::{exact_es, exact_var, moment_summary, parse_config, LossSpec, MomentSummary, Severity};
use tailrisk::montecarlo::{McConfig, SampleSet};
use tailrisk::stdnormal;
use tailrisk::Error;

pub const SINGULAR: &str = "SINGULAR";
pub const NOT_APPLICABLE: &str = "NA";

/// Default upper end of the α window.
pub const DEFAULT_ALPHA_MAX: f64 = 0.9999;
pub const DEFAULT_GRID: usize = 200;

/// Ten significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.9e}")
}

/// Loss spec from an optional config file followed by command-line pairs;
/// later pairs win.
pub fn load_spec(config: Option<&Path>, pairs: &[String]) -> Result<LossSpec> {
    let mut all = Vec::new();
    if let Some(path) = config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        all.extend(parse_config(&text)?);
    }
    all.extend(parse_config(&pairs.join(" "))?);
    if all.is_empty() {
        bail!("no loss specification given (e.g. `family=exponential lambda=1`)");
    }
    Ok(LossSpec::from_pairs(all)?)
}

/// `n` levels in `(alpha_min, alpha_max]`, uniform in `-ln(1-α)`.
pub fn alpha_grid(alpha_min: f64, alpha_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(alpha_min > 0.0 && alpha_min < alpha_max && alpha_max < 1.0) {
        bail!("need 0 < alpha-min < alpha-max < 1, got ({alpha_min}, {alpha_max})");
    }
    if n < 2 {
        bail!("grid needs at least 2 points, got {n}");
    }
    let lo = -(-alpha_min).ln_1p();
    let hi = -(-alpha_max).ln_1p();
    let mut grid: Vec<f64> = (1..=n)
        .map(|i| -(-(lo + (hi - lo) * i as f64 / n as f64)).exp_m1())
        .collect();
    grid[n - 1] = alpha_max;
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Var,
    Es,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Var => "VaR",
            Measure::Es => "ES",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    Exact,
    MonteCarlo(McConfig),
}

impl Reference {
    /// Closed form where one exists, otherwise Monte Carlo with `mc`.
    pub fn default_for(spec: &LossSpec, mc: McConfig) -> Reference {
        if spec.has_closed_form() {
            Reference::Exact
        } else {
            Reference::MonteCarlo(mc)
        }
    }
}

/// Reference values at a list of levels. A Monte-Carlo reference draws one
/// sample and reuses it for every level.
pub fn reference_values(spec: &LossSpec, measure: Measure, reference: &Reference, alphas: &[f64]) -> Result<Vec<f64>> {
    match reference {
        Reference::Exact => alphas
            .iter()
            .map(|&a| {
                let v = match measure {
                    Measure::Var => exact_var(spec, a),
                    Measure::Es => exact_es(spec, a),
                };
                v.map_err(|e| match e {
                    Error::NoClosedForm(_) => anyhow::anyhow!("{e}; use --reference mc"),
                    other => other.into(),
                })
            })
            .collect(),
        Reference::MonteCarlo(cfg) => {
            let sample = SampleSet::generate(spec, cfg)?;
            alphas
                .iter()
                .map(|&a| {
                    let e = sample.estimate(a)?;
                    Ok(match measure {
                        Measure::Var => e.var_estimate,
                        Measure::Es => e.es_estimate,
                    })
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Value { value: f64, rel_err_pct: Option<f64> },
    Singular,
    NotApplicable,
}

impl Cell {
    fn from_result(result: tailrisk::Result<f64>, reference: f64) -> Result<Cell> {
        match result {
            Ok(value) => Ok(Cell::Value {
                value,
                rel_err_pct: relative_error_pct(reference, value),
            }),
            Err(Error::Singularity { .. } | Error::SingularIntegrand { .. } | Error::Iteration { .. }) => {
                Ok(Cell::Singular)
            }
            Err(Error::Domain(_)) => Ok(Cell::NotApplicable),
            Err(e) => Err(e.into()),
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn rel_err_pct(&self) -> Option<f64> {
        match self {
            Cell::Value { rel_err_pct, .. } => *rel_err_pct,
            _ => None,
        }
    }

    fn csv_fields(&self) -> (String, String) {
        match self {
            Cell::Value { value, rel_err_pct } => {
                (fmt_num(*value), rel_err_pct.map(fmt_num).unwrap_or_default())
            }
            Cell::Singular => (SINGULAR.into(), String::new()),
            Cell::NotApplicable => (NOT_APPLICABLE.into(), String::new()),
        }
    }
}

/// `100 (reference - approx) / reference`; `None` for a zero reference.
pub fn relative_error_pct(reference: f64, approx: f64) -> Option<f64> {
    (reference != 0.0).then(|| 100.0 * (reference - approx) / reference)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub reference: f64,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeSummary {
    pub label: String,
    pub min: f64,
    pub max: f64,
    pub rows: usize,
}

impl RangeSummary {
    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub labels: Vec<String>,
    pub rows: Vec<SweepRow>,
    /// Per column, over rows with `α > C₁` and a relative error; `None` when
    /// no such row exists.
    pub footer: Vec<Option<RangeSummary>>,
}

impl Sweep {
    fn new(labels: Vec<String>, rows: Vec<SweepRow>) -> Sweep {
        let threshold = c1();
        let footer = labels
            .iter()
            .enumerate()
            .map(|(j, label)| {
                let errs: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.alpha > threshold)
                    .filter_map(|r| r.cells[j].rel_err_pct())
                    .collect();
                (!errs.is_empty()).then(|| RangeSummary {
                    label: label.clone(),
                    min: errs.iter().copied().fold(f64::INFINITY, f64::min),
                    max: errs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    rows: errs.len(),
                })
            })
            .collect();
        Sweep { labels, rows, footer }
    }

    pub fn column(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn range(&self, label: &str) -> Option<&RangeSummary> {
        self.footer[self.column(label)?].as_ref()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,reference");
        for label in &self.labels {
            let _ = write!(out, ",{label},{label}_rel_err_pct");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{},{}", fmt_num(row.alpha), fmt_num(row.reference));
            for cell in &row.cells {
                let (v, e) = cell.csv_fields();
                let _ = write!(out, ",{v},{e}");
            }
            out.push('\n');
        }
        for (label, range) in self.labels.iter().zip(&self.footer) {
            match range {
                Some(r) => {
                    let _ = writeln!(
                        out,
                        "#range,{label},{},{},{},{}",
                        fmt_num(r.min),
                        fmt_num(r.max),
                        fmt_num(r.width()),
                        r.rows
                    );
                }
                None => {
                    let _ = writeln!(out, "#range,{label},,,,0");
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub grid: usize,
    pub methods: Vec<ApproxMethod>,
    pub measure: Measure,
    pub reference: Reference,
}

impl SweepConfig {
    /// The default window `(C₁, 0.9999]` with 200 points.
    pub fn new(methods: Vec<ApproxMethod>, reference: Reference) -> SweepConfig {
        SweepConfig {
            alpha_min: c1(),
            alpha_max: DEFAULT_ALPHA_MAX,
            grid: DEFAULT_GRID,
            methods,
            measure: Measure::Var,
            reference,
        }
    }

    fn check_window(&self) -> Result<()> {
        if !(self.alpha_min >= 0.95) {
            bail!("alpha-min must be at least 0.95, got {}", self.alpha_min);
        }
        Ok(())
    }
}

fn approximate(method: ApproxMethod, m: &MomentSummary, alpha: f64, measure: Measure) -> tailrisk::Result<f64> {
    match measure {
        Measure::Var => var_approx(method, m, alpha).map(|e| e.value),
        Measure::Es => es_approx(method, m, alpha).map(|e| e.value),
    }
}

/// Approximations and relative errors over an α grid.
pub fn sweep(spec: &LossSpec, cfg: &SweepConfig) -> Result<Sweep> {
    cfg.check_window()?;
    if cfg.methods.is_empty() {
        bail!("no methods selected");
    }
    let m = moment_summary(spec)?;
    let alphas = alpha_grid(cfg.alpha_min, cfg.alpha_max, cfg.grid)?;
    let refs = reference_values(spec, cfg.measure, &cfg.reference, &alphas)?;
    let rows = alphas
        .iter()
        .zip(&refs)
        .map(|(&alpha, &reference)| {
            let cells = cfg
                .methods
                .iter()
                .map(|&method| Cell::from_result(approximate(method, &m, alpha, cfg.measure), reference))
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepRow { alpha, reference, cells })
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = cfg.methods.iter().map(|m| m.name().to_string()).collect();
    Ok(Sweep::new(labels, rows))
}

/// VaR from `k` Newton-Raphson steps: `E S + sd (z_α + δ^(k)(z_α))`.
pub fn nr_var(m: &MomentSummary, alpha: f64, k: usize) -> tailrisk::Result<f64> {
    let z = stdnormal::quantile(alpha)?;
    let delta = newton_raphson_delta(z, m.skewness, m.excess_kurtosis, k)?;
    Ok(m.mean + m.sd * (z + delta))
}

/// One relative-error column per Newton-Raphson depth `k`.
pub fn nr_sweep(spec: &LossSpec, ks: &[usize], cfg: &SweepConfig) -> Result<Sweep> {
    cfg.check_window()?;
    if ks.is_empty() || ks.contains(&0) {
        bail!("iteration counts must be at least 1");
    }
    let m = moment_summary(spec)?;
    let alphas = alpha_grid(cfg.alpha_min, cfg.alpha_max, cfg.grid)?;
    let refs = reference_values(spec, Measure::Var, &cfg.reference, &alphas)?;
    let rows = alphas
        .iter()
        .zip(&refs)
        .map(|(&alpha, &reference)| {
            let cells = ks
                .iter()
                .map(|&k| Cell::from_result(nr_var(&m, alpha, k), reference))
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepRow { alpha, reference, cells })
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = ks.iter().map(|k| format!("NR{k}")).collect();
    Ok(Sweep::new(labels, rows))
}

/// The heavy-tailed compound Poisson case: λ = 4, Lognormal(3, 25) claims.
pub fn table2_spec() -> LossSpec {
    LossSpec::CompoundPoisson {
        lambda: 4.0,
        severity: Severity::Lognormal { mu: 3.0, sigma_sq: 25.0 },
    }
}

pub const TABLE2_ALPHAS: [f64; 2] = [0.995, 0.999];
pub const TABLE2_METHODS: [ApproxMethod; 4] = [
    ApproxMethod::Npa,
    ApproxMethod::CornishFisher,
    ApproxMethod::KurtI,
    ApproxMethod::KurtIV,
];

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Entry {
    pub alpha: f64,
    pub method: ApproxMethod,
    pub mc_var: f64,
    pub approx_var: f64,
    pub rel_err_pct: f64,
}

impl Table2Entry {
    /// `floor(log10 |rel_err_pct|)`.
    pub fn order(&self) -> i32 {
        self.rel_err_pct.abs().log10().floor() as i32
    }

    /// `-10^k` or `10^k`.
    pub fn signed_order(&self) -> String {
        let sign = if self.rel_err_pct < 0.0 { "-" } else { "" };
        format!("{sign}10^{}", self.order())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Report {
    pub moments: MomentSummary,
    pub entries: Vec<Table2Entry>,
}

pub fn table2(mc: &McConfig) -> Result<Table2Report> {
    let spec = table2_spec();
    let m = moment_summary(&spec)?;
    let sample = SampleSet::generate(&spec, mc)?;
    let mut entries = Vec::new();
    for alpha in TABLE2_ALPHAS {
        let mc_var = sample.estimate(alpha)?.var_estimate;
        for method in TABLE2_METHODS {
            let approx_var = var_approx(method, &m, alpha)?.value;
            entries.push(Table2Entry {
                alpha,
                method,
                mc_var,
                approx_var,
                rel_err_pct: 100.0 * (mc_var - approx_var) / mc_var,
            });
        }
    }
    Ok(Table2Report { moments: m, entries })
}

impl Table2Report {
    pub fn to_text(&self) -> String {
        let m = &self.moments;
        let mut out = format!("# {}\n", table2_spec());
        let _ = writeln!(
            out,
            "# mean={} variance={} skewness={} excess_kurtosis={} sd_over_mean={}",
            fmt_num(m.mean),
            fmt_num(m.variance()),
            fmt_num(m.skewness),
            fmt_num(m.excess_kurtosis),
            fmt_num(m.sd / m.mean)
        );
        out.push_str("alpha,method,mc_var,approx_var,rel_err_pct,order\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_num(e.alpha),
                e.method,
                fmt_num(e.mc_var),
                fmt_num(e.approx_var),
                fmt_num(e.rel_err_pct),
                e.signed_order()
            );
        }
        out
    }
}

/// Moment summary plus validity information as `quantity,value` lines.
pub fn moments_report(spec: &LossSpec) -> Result<String> {
    let m = moment_summary(spec)?;
    let mut out = String::from("quantity,value\n");
    let _ = writeln!(out, "spec,{spec}");
    let rows = [
        ("mean", m.mean),
        ("sd", m.sd),
        ("variance", m.variance()),
        ("skewness", m.skewness),
        ("excess_kurtosis", m.excess_kurtosis),
        ("sd_over_mean", m.sd / m.mean),
        ("C1", c1()),
        ("C2", c2()),
    ];
    for (name, v) in rows {
        let _ = writeln!(out, "{name},{}", fmt_num(v));
    }
    if m.skewness > 0.0 && m.excess_kurtosis >= 0.0 {
        match approx::denominator_root_alpha(m.skewness, m.excess_kurtosis) {
            Some(a) if a > 0.95 && a < 1.0 => {
                let _ = writeln!(out, "kurt1_denominator_root_alpha,{}", fmt_num(a));
            }
            _ => {
                let _ = writeln!(out, "kurt1_denominator_root_alpha,");
            }
        }
        let threshold = approx::validity_threshold(ApproxMethod::KurtI, m.excess_kurtosis).unwrap();
        let which = if threshold == c2() { "C2" } else { "C1" };
        let _ = writeln!(out, "note,KurtI valid for alpha > {which}");
    }
    Ok(out)
}

/// Approximations of one measure at a single level, with the closed form
/// when it exists.
pub fn point_report(spec: &LossSpec, alpha: f64, methods: &[ApproxMethod], measure: Measure) -> Result<String> {
    let m = moment_summary(spec)?;
    let exact = match measure {
        Measure::Var => exact_var(spec, alpha),
        Measure::Es => exact_es(spec, alpha),
    };
    let exact = match exact {
        Ok(v) => Some(v),
        Err(Error::NoClosedForm(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut out = String::from("alpha,measure,method,value,rel_err_pct,denominator,in_validity_region\n");
    let alpha_s = fmt_num(alpha);
    let name = measure.name();
    if let Some(v) = exact {
        let _ = writeln!(out, "{alpha_s},{name},exact,{},,,", fmt_num(v));
    }
    for &method in methods {
        let est = match measure {
            Measure::Var => var_approx(method, &m, alpha),
            Measure::Es => es_approx(method, &m, alpha),
        };
        match est {
            Ok(e) => {
                let rel = exact
                    .and_then(|x| relative_error_pct(x, e.value))
                    .map(fmt_num)
                    .unwrap_or_default();
                let den = e.denominator_value.map(fmt_num).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{alpha_s},{name},{method},{},{rel},{den},{}",
                    fmt_num(e.value),
                    e.in_validity_region
                );
            }
            Err(Error::Singularity { denominator, .. }) => {
                let _ = writeln!(out, "{alpha_s},{name},{method},{SINGULAR},,{},false", fmt_num(denominator));
            }
            Err(Error::SingularIntegrand { .. }) => {
                let _ = writeln!(out, "{alpha_s},{name},{method},{SINGULAR},,,false");
            }
            Err(Error::Domain(_)) => {
                let _ = writeln!(out, "{alpha_s},{name},{method},{NOT_APPLICABLE},,,false");
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

/// Monte-Carlo VaR/ES with 99% order-statistic bounds.
pub fn mc_report(spec: &LossSpec, alpha: f64, cfg: &McConfig) -> Result<(String, bool)> {
    let e = SampleSet::generate(spec, cfg)?.estimate(alpha)?;
    let mut out = String::from("alpha,n,seed,streams,var_estimate,var_ci_low,var_ci_high,es_estimate,tail_count,sparse_tail\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{}",
        fmt_num(alpha),
        e.n,
        cfg.seed,
        cfg.stream_count,
        fmt_num(e.var_estimate),
        fmt_num(e.var_ci_low),
        fmt_num(e.var_ci_high),
        fmt_num(e.es_estimate),
        e.tail_count,
        e.sparse_tail
    );
    Ok((out, e.sparse_tail))
}
