//! Run configuration, dispatch and table writers behind the `cvtele` binary.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::capacity::{report, Bound, CapacityReport};
use crate::error::{Error, Result};
use crate::multiplex::{
    effective_mode_number, flat_distribution, pdc_distribution, pdc_truncated, squeezing_db,
    SqueezingDistribution,
};
use crate::optimizer::{
    default_mu_grid, find_threshold, optimize_flat, optimize_pdc, sweep_energy, sweep_loss,
    Coding, GridSpec, OptResult, SweepResult, THRESHOLD_BRACKET,
};
use crate::verify::{self, CheckOutcome};

/// Significant digits of every number written to CSV or JSON.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Bounds,
    SweepEnergy,
    SweepLoss,
    Optimize,
    Thresholds,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::SweepEnergy => "sweep-energy",
            Command::SweepLoss => "sweep-loss",
            Command::Optimize => "optimize",
            Command::Thresholds => "thresholds",
            Command::Verify => "verify",
        }
    }
}

/// Distribution literal as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DistributionSpec {
    Pdc {
        #[serde(rename = "B")]
        gain: f64,
        mu: f64,
        /// Truncated at the usual cutoff when absent.
        #[serde(default)]
        modes: Option<usize>,
    },
    Flat {
        #[serde(rename = "K")]
        modes: usize,
        r: f64,
    },
    Custom {
        r: Vec<f64>,
    },
}

impl DistributionSpec {
    pub fn build(&self) -> Result<SqueezingDistribution> {
        match self {
            DistributionSpec::Pdc { gain, mu, modes: Some(m) } => pdc_distribution(*gain, *mu, *m),
            DistributionSpec::Pdc { gain, mu, modes: None } => pdc_truncated(*gain, *mu),
            DistributionSpec::Flat { modes, r } => flat_distribution(*modes, *r),
            DistributionSpec::Custom { r } => SqueezingDistribution::custom(r.clone()),
        }
    }
}

/// A single value or a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueOrGrid {
    Value(f64),
    Grid(GridSpec),
}

impl ValueOrGrid {
    fn scalar(&self, name: &str) -> Result<f64> {
        match self {
            ValueOrGrid::Value(x) => Ok(*x),
            ValueOrGrid::Grid(_) => Err(Error::validation(format!("{name} must be a single value here"))),
        }
    }

    fn grid(&self, name: &str) -> Result<Vec<f64>> {
        match self {
            ValueOrGrid::Grid(g) => g.points(),
            ValueOrGrid::Value(_) => Err(Error::validation(format!("{name} must be a grid here"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BoundSelect {
    #[serde(rename = "QG", alias = "qg")]
    QG,
    #[serde(rename = "QA", alias = "qa")]
    QA,
    #[serde(rename = "QE", alias = "qe")]
    QE,
    #[default]
    #[serde(rename = "all")]
    All,
}

impl BoundSelect {
    pub fn bounds(self) -> Vec<Bound> {
        match self {
            BoundSelect::QG => vec![Bound::QG],
            BoundSelect::QA => vec![Bound::QA],
            BoundSelect::QE => vec![Bound::QE],
            BoundSelect::All => Bound::ALL.to_vec(),
        }
    }

    /// Bound whose optimum the `k_opt` and `r_opt` columns describe.
    pub fn focus(self) -> Bound {
        self.bounds()[0]
    }
}

impl std::str::FromStr for BoundSelect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(BoundSelect::All);
        }
        Ok(match s.parse::<Bound>()? {
            Bound::QG => BoundSelect::QG,
            Bound::QA => BoundSelect::QA,
            Bound::QE => BoundSelect::QE,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct OutputSpec {
    /// Standard output when absent.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Everything a run needs; the config file is this struct in TOML or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub distribution: Option<DistributionSpec>,
    #[serde(default = "default_eta")]
    pub eta: ValueOrGrid,
    #[serde(default)]
    pub n_ph: Option<ValueOrGrid>,
    #[serde(default)]
    pub bound: BoundSelect,
    /// Coding swept by `sweep-energy` / `sweep-loss`.
    #[serde(default = "default_coding")]
    pub coding: Coding,
    /// Family searched by `optimize`: `flat` or `pdc`.
    #[serde(default = "default_opt_family")]
    pub optimize_family: OptimizeFamily,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizeFamily {
    Flat,
    Pdc,
}

fn default_eta() -> ValueOrGrid {
    ValueOrGrid::Value(1.0)
}

fn default_coding() -> Coding {
    Coding::PdcOptimal
}

fn default_opt_family() -> OptimizeFamily {
    OptimizeFamily::Flat
}

fn default_trials() -> usize {
    verify::DEFAULT_TRIALS
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            distribution: None,
            eta: default_eta(),
            n_ph: None,
            bound: BoundSelect::All,
            coding: default_coding(),
            optimize_family: default_opt_family(),
            output: OutputSpec::default(),
            seed: 0,
            trials: default_trials(),
        }
    }

    /// Reads a TOML config, or JSON when the extension is `.json`.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text).map_err(|e| Error::validation(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| Error::validation(format!("{}: {e}", path.display())))
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_eta = |eta: f64| {
            if (0.0..=1.0).contains(&eta) {
                Ok(())
            } else {
                Err(Error::validation(format!("eta must lie in [0, 1], got {eta}")))
            }
        };
        match self.eta {
            ValueOrGrid::Value(eta) => check_eta(eta)?,
            ValueOrGrid::Grid(g) => {
                g.validate()?;
                check_eta(g.start)?;
                check_eta(g.stop)?;
            }
        }
        if let Some(ValueOrGrid::Grid(g)) = self.n_ph {
            g.validate()?;
        }
        if self.trials == 0 && self.command == Command::Verify {
            return Err(Error::validation("verify needs at least one trial"));
        }
        Ok(())
    }

    fn energy(&self) -> Result<&ValueOrGrid> {
        self.n_ph
            .as_ref()
            .ok_or_else(|| Error::validation(format!("{} needs n_ph", self.command.name())))
    }
}

/// Result of a successful run: the table to write and a one-line summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub table: Table,
    /// False when `verify` found a failing check.
    pub all_passed: bool,
}

/// Rows as already-formatted strings plus the JSON form of the same data.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
}

/// `x` with 12 significant digits, shortest form, no locale.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" { "0".into() } else { t.to_string() }
}

/// Rounds every float in `v` to [`SIGNIFICANT_DIGITS`].
fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let rounded: f64 = format_number(x).parse().unwrap_or(x);
            serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn to_json<T: Serialize>(x: &T) -> Value {
    round_json(serde_json::to_value(x).expect("plain data serialises"))
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn bounds_table(rep: &CapacityReport) -> Result<Table> {
    let mut rows = Vec::with_capacity(rep.per_mode.len());
    for m in &rep.per_mode {
        rows.push(vec![
            m.k.to_string(),
            format_number(m.r_k),
            format_number(m.n_k),
            format_number(m.qg),
            format_number(m.qa),
            format_number(m.qe),
            format_number(squeezing_db(m.r_k)?),
        ]);
    }
    Ok(Table {
        header: strings(&["k", "r_k", "n_k", "qg", "qa", "qe", "squeezing_db"]),
        rows,
        json: to_json(rep),
    })
}

fn sweep_table(res: &SweepResult) -> Table {
    let rows = res
        .rows
        .iter()
        .map(|r| [r.x, r.qg, r.qa, r.qe, r.k_opt, r.r_opt].iter().map(|&x| format_number(x)).collect())
        .collect();
    Table {
        header: strings(&["x", "qg_qnats", "qa_qnats", "qe_qnats", "k_opt", "r_opt"]),
        rows,
        json: to_json(res),
    }
}

fn optimize_table(results: &[OptResult]) -> Table {
    let rows = results
        .iter()
        .map(|r| {
            vec![
                r.bound.to_string(),
                format_number(r.best_k),
                format_number(r.best_value),
                format_number(r.r_opt()),
                format_number(r.n_ph),
                format_number(r.eta),
                r.lagrange_multiplier.map_or(String::new(), format_number),
            ]
        })
        .collect();
    Table {
        header: strings(&["bound", "best_k", "best_value", "r_opt", "n_ph", "eta", "lagrange_multiplier"]),
        rows,
        json: to_json(&results),
    }
}

#[derive(Serialize)]
struct ThresholdRow {
    bound: Bound,
    eta: f64,
    n_ph: f64,
    squeezing_db: f64,
}

fn thresholds_table(rows: &[ThresholdRow]) -> Table {
    Table {
        header: strings(&["bound", "eta", "n_ph", "squeezing_db"]),
        rows: rows
            .iter()
            .map(|t| {
                vec![t.bound.to_string(), format_number(t.eta), format_number(t.n_ph), format_number(t.squeezing_db)]
            })
            .collect(),
        json: to_json(&rows),
    }
}

fn verify_table(checks: &[CheckOutcome]) -> Table {
    Table {
        header: strings(&["check", "passed", "detail"]),
        rows: checks
            .iter()
            .map(|c| vec![c.name.clone(), c.passed.to_string(), c.detail.clone()])
            .collect(),
        json: to_json(&checks),
    }
}

/// Computes the table for `config` without writing anything.
pub fn execute(config: &RunConfig) -> Result<Outcome> {
    config.validate()?;
    let mu_grid = default_mu_grid();
    match config.command {
        Command::Bounds => {
            let spec = config
                .distribution
                .as_ref()
                .ok_or_else(|| Error::validation("bounds needs a distribution"))?;
            let dist = spec.build()?;
            let eta = config.eta.scalar("eta")?;
            let rep = report(&dist, eta)?;
            let k_eff = effective_mode_number(&dist).map_or_else(|_| "undefined".into(), format_number);
            let summary = format!(
                "bounds: QG = {} QA = {} QE = {} q-nats over {} modes (K = {k_eff}, eta = {})",
                format_number(rep.totals.qg),
                format_number(rep.totals.qa),
                format_number(rep.totals.qe),
                dist.len(),
                format_number(eta),
            );
            Ok(Outcome { summary, table: bounds_table(&rep)?, all_passed: true })
        }
        Command::SweepEnergy | Command::SweepLoss => {
            let focus = config.bound.focus();
            let codings = [config.coding];
            let results = if config.command == Command::SweepEnergy {
                let grid = config.energy()?.grid("n_ph")?;
                sweep_energy(&grid, config.eta.scalar("eta")?, &codings, focus, &mu_grid)?
            } else {
                let grid = config.eta.grid("eta")?;
                let n_ph = config.energy()?.scalar("n_ph")?;
                sweep_loss(&grid, n_ph, &codings, focus, &mu_grid)?
            };
            let res = &results[0];
            let last = res.rows.last().expect("grids have at least two points");
            let summary = format!(
                "{}: {} points of {}; at x = {}: QG = {} QA = {} QE = {}, K_opt({focus}) = {}",
                config.command.name(),
                res.rows.len(),
                res.label,
                format_number(last.x),
                format_number(last.qg),
                format_number(last.qa),
                format_number(last.qe),
                format_number(last.k_opt),
            );
            Ok(Outcome { summary, table: sweep_table(res), all_passed: true })
        }
        Command::Optimize => {
            let n_ph = config.energy()?.scalar("n_ph")?;
            let eta = config.eta.scalar("eta")?;
            let results = config
                .bound
                .bounds()
                .into_iter()
                .map(|b| match config.optimize_family {
                    OptimizeFamily::Flat => optimize_flat(n_ph, eta, b),
                    OptimizeFamily::Pdc => optimize_pdc(n_ph, eta, b, &mu_grid),
                })
                .collect::<Result<Vec<_>>>()?;
            let parts: Vec<String> = results
                .iter()
                .map(|r| format!("{} = {} (K = {})", r.bound, format_number(r.best_value), format_number(r.best_k)))
                .collect();
            let summary = format!("optimize: {}", parts.join(", "));
            Ok(Outcome { summary, table: optimize_table(&results), all_passed: true })
        }
        Command::Thresholds => {
            let eta = config.eta.scalar("eta")?;
            let mut rows = Vec::new();
            for b in config.bound.bounds() {
                let n = find_threshold(b, eta, THRESHOLD_BRACKET)?;
                rows.push(ThresholdRow {
                    bound: b,
                    eta,
                    n_ph: n,
                    squeezing_db: squeezing_db(n.sqrt().asinh())?,
                });
            }
            let parts: Vec<String> = rows
                .iter()
                .map(|t| format!("{} at n_ph = {} ({} dB)", t.bound, format_number(t.n_ph), format_number(t.squeezing_db)))
                .collect();
            let summary = format!("thresholds: {}", parts.join(", "));
            Ok(Outcome { summary, table: thresholds_table(&rows), all_passed: true })
        }
        Command::Verify => {
            let checks = verify::run_all(config.seed, config.trials)?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            let summary = if failed.is_empty() {
                format!("verify: all {} checks passed", checks.len())
            } else {
                format!("verify: {} of {} checks failed: {}", failed.len(), checks.len(), failed.join(", "))
            };
            Ok(Outcome { summary, table: verify_table(&checks), all_passed: failed.is_empty() })
        }
    }
}

/// Serialises `table` in `format`.
pub fn render(table: &Table, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io_err = |e: csv::Error| Error::Io(io::Error::other(e));
            w.write_record(&table.header).map_err(io_err)?;
            for row in &table.rows {
                w.write_record(row).map_err(io_err)?;
            }
            w.into_inner().map_err(|e| Error::Io(io::Error::other(e.to_string())))
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(&table.json).map_err(|e| Error::Io(io::Error::other(e)))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Runs `config`, writes its table and prints the summary. Returns the
/// process exit status.
pub fn run(config: &RunConfig) -> i32 {
    match run_inner(config) {
        Ok(true) => 0,
        Ok(false) => Error::Numeric(String::new()).exit_code(),
        Err(e) => {
            eprintln!("cvtele: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(config: &RunConfig) -> Result<bool> {
    let outcome = execute(config)?;
    let bytes = render(&outcome.table, config.output.format)?;
    match &config.output.path {
        Some(path) => {
            let mut f = File::create(path)?;
            f.write_all(&bytes)?;
            f.flush()?;
            println!("{}", outcome.summary);
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            writeln!(lock, "{}", outcome.summary)?;
            lock.write_all(&bytes)?;
        }
    }
    Ok(outcome.all_passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(0.125), "0.125");
        assert_eq!(format_number(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_number(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(format_number(1.0e-7), "1e-7");
        assert_eq!(format_number(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_number(22.97330000000001), "22.9733");
        assert_eq!(format_number(-1e-20), "-1e-20");
    }

    #[test]
    fn config_literals_parse() {
        let cfg: RunConfig = toml::from_str(
            r#"
            command = "bounds"
            eta = 0.9
            distribution = { family = "pdc", B = 2.0, mu = 0.5, modes = 10 }
            "#,
        )
        .unwrap();
        assert_eq!(cfg.distribution, Some(DistributionSpec::Pdc { gain: 2.0, mu: 0.5, modes: Some(10) }));
        let cfg: RunConfig = serde_json::from_str(
            r#"{"command": "sweep-energy", "n_ph": {"start": 0, "stop": 30, "steps": 31},
                "distribution": {"family": "flat", "K": 3, "r": 1.0}, "bound": "QA",
                "coding": {"coding": "flat", "K": 4}}"#,
        )
        .unwrap();
        assert_eq!(cfg.bound, BoundSelect::QA);
        assert_eq!(cfg.coding, Coding::Flat { modes: 4 });
        assert!(matches!(cfg.n_ph, Some(ValueOrGrid::Grid(_))));
        let cfg: RunConfig =
            serde_json::from_str(r#"{"command": "bounds", "distribution": {"family": "custom", "r": [1, 0.5]}}"#).unwrap();
        assert_eq!(cfg.distribution.unwrap().build().unwrap().len(), 2);
    }

    #[test]
    fn validation_errors_map_to_exit_two() {
        let mut cfg = RunConfig::new(Command::Thresholds);
        cfg.eta = ValueOrGrid::Value(1.5);
        assert_eq!(execute(&cfg).unwrap_err().exit_code(), 2);
        let cfg = RunConfig::new(Command::Bounds);
        assert_eq!(execute(&cfg).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn thresholds_table_values() {
        let mut cfg = RunConfig::new(Command::Thresholds);
        cfg.bound = BoundSelect::QA;
        let out = execute(&cfg).unwrap();
        assert_eq!(out.table.rows[0][2], "0.125");
        assert!(out.summary.contains("3.0102999"), "{}", out.summary);
    }
}
