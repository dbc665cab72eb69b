//! Experiment orchestration: convergence sweeps, order fits, flat configs
//! and CSV output.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filters::FilterSpec;
use crate::integrator::{evolve_quiet, steps_for, IntegratorConfig, StatePair, DEFAULT_MAX_NORM};
use crate::problem::{paper_initial_data, problem_by_name, ProblemSpec};
use crate::reference::{error_h2h1_padded, reference_solution, Reference, ReferenceConfig};

/// Environment variable bounding the worker count of sweeps.
pub const THREADS_ENV: &str = "QLWAVE_THREADS";

/// Parameters of a convergence sweep.
#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub problem: ProblemSpec,
    pub k_list: Vec<usize>,
    pub tau_list: Vec<f64>,
    pub t_final: f64,
    pub filters: Vec<FilterSpec>,
    pub reference: ReferenceConfig,
    /// Degree of the spatial reference; `None` means `4 · max K`.
    pub k_ref: Option<usize>,
    pub max_norm: f64,
    /// Output subdirectory, taken relative to the `--out` directory.
    pub output: Option<PathBuf>,
}

impl ExperimentPlan {
    pub fn new(
        problem: ProblemSpec,
        k_list: Vec<usize>,
        tau_list: Vec<f64>,
        t_final: f64,
        filters: Vec<FilterSpec>,
    ) -> Result<Self> {
        let plan = ExperimentPlan {
            problem,
            k_list,
            tau_list,
            t_final,
            filters,
            reference: ReferenceConfig::default(),
            k_ref: None,
            max_norm: DEFAULT_MAX_NORM,
            output: None,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_list.is_empty() || self.tau_list.is_empty() || self.filters.is_empty() {
            return Err(Error::Config("K, tau and filter lists must be nonempty".into()));
        }
        if self.k_list.contains(&0) {
            return Err(Error::Config("every K must be at least 1".into()));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::Config(format!("T must be positive, got {}", self.t_final)));
        }
        for &tau in &self.tau_list {
            if !(tau > 0.0) {
                return Err(Error::Config(format!("tau must be positive, got {tau}")));
            }
            steps_for(self.t_final, tau)?;
        }
        self.reference.validate()?;
        if let Some(k_ref) = self.k_ref {
            let kmax = *self.k_list.iter().max().expect("nonempty");
            if k_ref < 4 * kmax {
                return Err(Error::Config(format!(
                    "spatial reference degree {k_ref} is below 4 * max K = {}",
                    4 * kmax
                )));
            }
        }
        Ok(())
    }

    fn tau_min(&self) -> f64 {
        self.tau_list.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// `T / 2^m` for `m = m_lo..=m_hi`.
pub fn dyadic_taus(t_final: f64, m_lo: u32, m_hi: u32) -> Vec<f64> {
    (m_lo..=m_hi).map(|m| t_final / 2f64.powi(m as i32)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowStatus {
    Ok,
    Diverged,
    Guard,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowStatus::Ok => "ok",
            RowStatus::Diverged => "diverged",
            RowStatus::Guard => "guard",
        })
    }
}

impl FromStr for RowStatus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(RowStatus::Ok),
            "diverged" => Ok(RowStatus::Diverged),
            "guard" => Ok(RowStatus::Guard),
            _ => Err(Error::Config(format!("unknown status '{s}'"))),
        }
    }
}

/// One cell of a sweep. `err` is NaN unless the status is `Ok`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub filter: String,
    pub k: usize,
    pub tau: f64,
    pub err: f64,
    pub status: RowStatus,
}

/// Worker pool bounded by `QLWAVE_THREADS`.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(Error::Config(format!("{THREADS_ENV} must be at least 1")));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

fn run_cell(plan: &ExperimentPlan, filter: FilterSpec, k: usize, tau: f64, reference: &StatePair) -> Result<ConvergenceRow> {
    let mut cfg = IntegratorConfig::new(tau, k, filter)?;
    cfg.max_norm = plan.max_norm;
    let state0 = paper_initial_data(k);
    let n = steps_for(plan.t_final, tau)?;
    let (err, status) = match evolve_quiet(&state0, &plan.problem, &cfg, n) {
        Ok(s) => (error_h2h1_padded(&s, reference)?, RowStatus::Ok),
        Err(Error::Divergence { .. }) => (f64::NAN, RowStatus::Diverged),
        Err(Error::Guard { .. }) => (f64::NAN, RowStatus::Guard),
        Err(e) => return Err(e),
    };
    Ok(ConvergenceRow {
        filter: filter.id(),
        k,
        tau,
        err,
        status,
    })
}

/// Temporal sweep: every `(filter, K, τ)` cell is compared with a
/// reference at the same `K`. Rows follow the plan's list order.
pub fn run_convergence_time(plan: &ExperimentPlan) -> Result<Vec<ConvergenceRow>> {
    plan.validate()?;
    let pool = worker_pool()?;
    pool.install(|| {
        let refs: Vec<Reference> = plan
            .k_list
            .par_iter()
            .map(|&k| {
                reference_solution(&plan.problem, &paper_initial_data(k), plan.t_final, plan.tau_min(), &plan.reference)
            })
            .collect::<Result<_>>()?;
        let cells: Vec<(FilterSpec, usize, f64)> = plan
            .filters
            .iter()
            .flat_map(|&f| {
                plan.k_list
                    .iter()
                    .enumerate()
                    .flat_map(move |(ik, _)| plan.tau_list.iter().map(move |&tau| (f, ik, tau)))
            })
            .collect();
        cells
            .par_iter()
            .map(|&(f, ik, tau)| run_cell(plan, f, plan.k_list[ik], tau, &refs[ik].state))
            .collect()
    })
}

/// Spatial sweep at the single step size `tau_list[0]`: each `K` is compared
/// with the same method at `K_ref`, tail included.
pub fn run_convergence_space(plan: &ExperimentPlan) -> Result<Vec<ConvergenceRow>> {
    plan.validate()?;
    if plan.tau_list.len() != 1 {
        return Err(Error::Config("a spatial sweep takes exactly one tau".into()));
    }
    let tau = plan.tau_list[0];
    let kmax = *plan.k_list.iter().max().expect("nonempty");
    let k_ref = plan.k_ref.unwrap_or(4 * kmax);
    let pool = worker_pool()?;
    pool.install(|| {
        let refs: Vec<StatePair> = plan
            .filters
            .par_iter()
            .map(|&f| {
                let mut cfg = IntegratorConfig::new(tau, k_ref, f)?;
                cfg.max_norm = plan.max_norm;
                evolve_quiet(&paper_initial_data(k_ref), &plan.problem, &cfg, steps_for(plan.t_final, tau)?)
                    .map_err(|e| Error::Reference(format!("spatial reference at K = {k_ref} failed: {e}")))
            })
            .collect::<Result<_>>()?;
        let cells: Vec<(usize, usize)> = (0..plan.filters.len())
            .flat_map(|i| plan.k_list.iter().map(move |&k| (i, k)))
            .collect();
        cells
            .par_iter()
            .map(|&(i, k)| run_cell(plan, plan.filters[i], k, tau, &refs[i]))
            .collect()
    })
}

/// Least-squares fit of `log err` against `log x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_used: usize,
    pub n_excluded: usize,
}

/// Fits `err ≈ C x^slope` to points with positive finite `err`; needs at
/// least 3 of them spanning a factor 4 in `x`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<OrderEstimate> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, e)| *x > 0.0 && e.is_finite() && *e > 0.0)
        .map(|&(x, e)| (x.ln(), e.ln()))
        .collect();
    let n_excluded = points.len() - used.len();
    if used.len() < 3 {
        return Err(Error::Estimation(format!(
            "need at least 3 usable points, have {}",
            used.len()
        )));
    }
    let (lo, hi) = used
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    if hi - lo < 4f64.ln() * (1.0 - 1e-12) {
        return Err(Error::Estimation(format!(
            "points span a factor {:.3}, need at least 4",
            (hi - lo).exp()
        )));
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = used.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(OrderEstimate {
        slope,
        intercept,
        r_squared,
        n_used: used.len(),
        n_excluded,
    })
}

/// Temporal order from rows of one filter and one `K`; non-ok rows are excluded.
pub fn estimate_order(rows: &[ConvergenceRow]) -> Result<OrderEstimate> {
    check_single_series(rows, true)?;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.tau, if r.status == RowStatus::Ok { r.err } else { f64::NAN }))
        .collect();
    fit_power_law(&pts)
}

/// Spatial order (the negated slope in `K`) from rows of one filter.
pub fn estimate_spatial_order(rows: &[ConvergenceRow]) -> Result<OrderEstimate> {
    check_single_series(rows, false)?;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.k as f64, if r.status == RowStatus::Ok { r.err } else { f64::NAN }))
        .collect();
    let mut fit = fit_power_law(&pts)?;
    fit.slope = -fit.slope;
    Ok(fit)
}

fn check_single_series(rows: &[ConvergenceRow], same_k: bool) -> Result<()> {
    if let Some(first) = rows.first() {
        if rows.iter().any(|r| r.filter != first.filter || (same_k && r.k != first.k)) {
            return Err(Error::Estimation("rows mix filters or K values".into()));
        }
    }
    Ok(())
}

/// Rows of one `(filter, K)` series, in table order.
pub fn series(rows: &[ConvergenceRow], filter: &str, k: usize) -> Vec<ConvergenceRow> {
    rows.iter().filter(|r| r.filter == filter && r.k == k).cloned().collect()
}

pub const CSV_HEADER: &str = "filter,K,tau,err_h2h1,status";

/// Floats with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(rows: &[ConvergenceRow], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER.split(',')).map_err(csv_error)?;
    for r in rows {
        out.write_record([
            r.filter.clone(),
            r.k.to_string(),
            format_float(r.tau),
            format_float(r.err),
            r.status.to_string(),
        ])
        .map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("CSV: {other:?}")),
    }
}

pub fn read_csv(text: &str) -> Result<Vec<ConvergenceRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_error)?;
    if header.iter().ne(CSV_HEADER.split(',')) {
        return Err(Error::Config(format!("CSV must start with '{CSV_HEADER}'")));
    }
    reader
        .records()
        .map(|rec| {
            let f = rec.map_err(csv_error)?;
            let field = |i: usize| f.get(i).unwrap_or_default();
            let num = |i: usize| {
                field(i)
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number '{}'", field(i))))
            };
            Ok(ConvergenceRow {
                filter: field(0).to_string(),
                k: field(1).parse().map_err(|_| Error::Config(format!("bad K '{}'", field(1))))?,
                tau: num(2)?,
                err: num(3)?,
                status: field(4).parse()?,
            })
        })
        .collect()
}

/// Gnuplot blocks: one `# filter K` block of `tau err` lines per series,
/// separated by two blank lines. Non-ok cells are skipped.
pub fn write_dat(rows: &[ConvergenceRow], mut w: impl Write) -> Result<()> {
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in rows {
        let key = (r.filter.clone(), r.k);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    for (i, (filter, k)) in keys.iter().enumerate() {
        if i > 0 {
            writeln!(w, "\n")?;
        }
        writeln!(w, "# filter={filter} K={k}")?;
        for r in rows.iter().filter(|r| &r.filter == filter && r.k == *k && r.status == RowStatus::Ok) {
            writeln!(w, "{} {}", format_float(r.tau), format_float(r.err))?;
        }
    }
    Ok(())
}

/// Writes `<stem>.csv` (and `<stem>.dat` if asked) under `dir`.
pub fn write_outputs(rows: &[ConvergenceRow], dir: &Path, stem: &str, dat: bool) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    write_csv(rows, fs::File::create(&csv)?)?;
    if dat {
        write_dat(rows, fs::File::create(dir.join(format!("{stem}.dat")))?)?;
    }
    Ok(csv)
}

/// Flat `key = value` configuration; `#` starts a comment.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.set_assignment(line)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Config::parse(&text)
    }

    /// Applies one `key=value` override.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key = value, got '{assignment}'")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Config(format!("empty key in '{assignment}'")));
        }
        self.entries.insert(k.to_string(), v.to_string());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("cannot parse {key} = '{v}'")))
            })
            .transpose()
    }

    pub fn value_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parse_value(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parse_value(key)?
            .ok_or_else(|| Error::Config(format!("missing key {key}")))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<T>()
                            .map_err(|_| Error::Config(format!("cannot parse '{s}' in {key}")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(Error::Config(format!("{key} must be true or false, got '{v}'"))),
        }
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let kappa = self.require::<f64>("problem.kappa")?;
        problem_by_name(self.get("problem.name").unwrap_or("model"), kappa)
    }

    /// `filter.kind` (with `filter.c` for `sinc`), or the list `sweep.filters`.
    pub fn filters(&self) -> Result<Vec<FilterSpec>> {
        if let Some(list) = self.list::<FilterSpec>("sweep.filters")? {
            return Ok(list);
        }
        Ok(vec![self.filter()?])
    }

    pub fn filter(&self) -> Result<FilterSpec> {
        let kind = self.get("filter.kind").unwrap_or("sinc:2");
        if kind == "sinc" {
            let c = self.require::<f64>("filter.c")?;
            return FilterSpec::sinc_c(c);
        }
        kind.parse()
    }

    pub fn reference(&self) -> Result<ReferenceConfig> {
        let d = ReferenceConfig::default();
        let rc = ReferenceConfig {
            refine_factor: self.value_or("reference.refine_factor", d.refine_factor)?,
            cross_check: self.bool_or("reference.cross_check", d.cross_check)?,
            tolerance: self.value_or("reference.tolerance", d.tolerance)?,
            max_norm: self.value_or("guard.max_norm", d.max_norm)?,
            ..d
        };
        rc.validate()?;
        Ok(rc)
    }

    /// Final time from `time.T`, or `time.n_steps · time.tau`.
    pub fn final_time(&self) -> Result<f64> {
        if let Some(t) = self.parse_value::<f64>("time.T")? {
            return Ok(t);
        }
        let n: usize = self.require("time.n_steps")?;
        let tau: f64 = self.require("time.tau")?;
        Ok(n as f64 * tau)
    }

    /// τ list from `sweep.tau`, or dyadic `T/2^m` for `sweep.m_min..=sweep.m_max`.
    pub fn tau_list(&self, t_final: f64) -> Result<Vec<f64>> {
        if let Some(list) = self.list::<f64>("sweep.tau")? {
            return Ok(list);
        }
        if let Some(tau) = self.parse_value::<f64>("time.tau")? {
            return Ok(vec![tau]);
        }
        let lo: u32 = self.require("sweep.m_min")?;
        let hi: u32 = self.require("sweep.m_max")?;
        if lo > hi {
            return Err(Error::Config(format!("sweep.m_min = {lo} exceeds sweep.m_max = {hi}")));
        }
        Ok(dyadic_taus(t_final, lo, hi))
    }

    pub fn k_list(&self) -> Result<Vec<usize>> {
        if let Some(list) = self.list::<usize>("sweep.K")? {
            return Ok(list);
        }
        Ok(vec![self.require("grid.K")?])
    }

    /// Builds a sweep plan from `problem.*`, `sweep.*`, `time.*`,
    /// `reference.*`, `space.K_ref` and `guard.max_norm`.
    pub fn plan(&self) -> Result<ExperimentPlan> {
        let t_final = self.final_time()?;
        let mut plan = ExperimentPlan {
            problem: self.problem()?,
            k_list: self.k_list()?,
            tau_list: self.tau_list(t_final)?,
            t_final,
            filters: self.filters()?,
            reference: self.reference()?,
            k_ref: self.parse_value("space.K_ref")?,
            max_norm: self.value_or("guard.max_norm", DEFAULT_MAX_NORM)?,
            output: None,
        };
        if let Some(out) = self.get("output.dir") {
            plan.output = Some(PathBuf::from(out));
        }
        plan.validate()?;
        Ok(plan)
    }

    /// Integrator settings from `time.tau`, `grid.K`, the filter keys,
    /// `guard.*`, `integrator.fsal` and `energy.every`.
    pub fn integrator(&self) -> Result<IntegratorConfig> {
        let mut cfg = IntegratorConfig::new(self.require("time.tau")?, self.require("grid.K")?, self.filter()?)?;
        cfg.max_norm = self.value_or("guard.max_norm", DEFAULT_MAX_NORM)?;
        cfg.tau_max = self.parse_value("guard.tau_max")?;
        cfg.fsal = self.bool_or("integrator.fsal", true)?;
        cfg.energy_every = self.parse_value("energy.every")?;
        if let Some(n) = self.parse_value::<usize>("grid.dealias_nodes")? {
            cfg.dealias_nodes = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(tau: f64, err: f64) -> ConvergenceRow {
        ConvergenceRow {
            filter: "hl".into(),
            k: 8,
            tau,
            err,
            status: RowStatus::Ok,
        }
    }

    #[test]
    fn exact_power_laws() {
        for p in [2.0, 3.0] {
            let rows: Vec<_> = [0.5, 0.25, 0.125, 0.0625].iter().map(|&t| row(t, 7.0 * f64::powf(t, p))).collect();
            let fit = estimate_order(&rows).unwrap();
            assert!((fit.slope - p).abs() < 1e-12, "{}", fit.slope);
            assert!((fit.r_squared - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn estimation_needs_enough_data() {
        let rows = vec![row(0.5, 1.0), row(0.25, 0.25)];
        assert!(matches!(estimate_order(&rows), Err(Error::Estimation(_))));
        let narrow = vec![row(0.5, 1.0), row(0.4, 0.6), row(0.3, 0.4)];
        assert!(matches!(estimate_order(&narrow), Err(Error::Estimation(_))));
        let mut with_bad = vec![row(0.5, 0.25), row(0.25, 0.0625), row(0.125, 0.015625)];
        with_bad.push(ConvergenceRow {
            status: RowStatus::Guard,
            err: f64::NAN,
            ..row(1.0, 0.0)
        });
        let fit = estimate_order(&with_bad).unwrap();
        assert_eq!((fit.n_used, fit.n_excluded), (3, 1));
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            row(0.5, 1.0 / 3.0),
            ConvergenceRow {
                status: RowStatus::Diverged,
                err: f64::NAN,
                ..row(0.25, 0.0)
            },
        ];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("filter,K,tau,err_h2h1,status\nhl,8,5.0000000000000000e-1,3.3333333333333331e-1,ok\n"));
        let back = read_csv(&text).unwrap();
        assert_eq!(back[0], rows[0]);
        assert_eq!(back[1].status, RowStatus::Diverged);
        assert!(back[1].err.is_nan());
    }

    #[test]
    fn config_parsing() {
        let cfg = Config::parse(
            "# comment\nproblem.kappa = 0.01\n\ntime.T = 1  # trailing\nsweep.K = 8, 16\nsweep.m_min = 2\nsweep.m_max = 4\nsweep.filters = hl, sinc:2\n",
        )
        .unwrap();
        let plan = cfg.plan().unwrap();
        assert_eq!(plan.k_list, vec![8, 16]);
        assert_eq!(plan.tau_list, vec![0.25, 0.125, 0.0625]);
        assert_eq!(plan.filters.len(), 2);
        assert_eq!(plan.problem.kappa, 0.01);
        assert!(Config::parse("no equals sign").is_err());
        assert!(Config::parse("problem.kappa = x").unwrap().plan().is_err());
    }

    #[test]
    fn plan_rejects_non_integral_step_counts() {
        let p = crate::problem::model_problem(0.0);
        assert!(ExperimentPlan::new(p.clone(), vec![8], vec![0.3], 1.0, vec![FilterSpec::hairer_lubich()]).is_err());
        assert!(ExperimentPlan::new(p.clone(), vec![], vec![0.5], 1.0, vec![FilterSpec::hairer_lubich()]).is_err());
        assert!(ExperimentPlan::new(p, vec![8], vec![0.25], 1.0, vec![FilterSpec::hairer_lubich()]).is_ok());
    }

    #[test]
    fn dat_blocks() {
        let rows = vec![row(0.5, 1.0), row(0.25, 0.5)];
        let mut buf = Vec::new();
        write_dat(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# filter=hl K=8\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
