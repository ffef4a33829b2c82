//! The `opquad` command line: rule export, error sweeps, the Table 1
//! experiment and property checks, all driven by a JSON run configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigsym::symmetric_eigen;
use crate::error::{Error, Result};
use crate::exprc::{compile, parse, Expr, Output, Registry};
use crate::matfun::ScalarFunction;
use crate::opmatrix::Orthonormalizer;
use crate::quadrule::{check_interlacing, check_range, extract_rule, rule_from_operator, QuadratureRule};
use crate::scalars::{bf_to_f64, check_precision, DEFAULT_PRECISION};
use crate::symfunc::{BasisKind, SymFunc, UnitBox};

/// Σw tolerance used by `check`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-13;

/// Built-in configuration for `table1` when `--config` is omitted.
pub const TABLE1_CONFIG: &str = include_str!("../configs/table1.json");
pub const FRACTIONAL_CONFIG: &str = include_str!("../configs/fractional.json");
pub const LEGENDRE_CONFIG: &str = include_str!("../configs/legendre.json");

/// Node transform: one function for every inner function, or one per name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeTransformSpec {
    All(String),
    PerFunction(BTreeMap<String, String>),
}

/// JSON run configuration as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub basis_kind: String,
    /// Number of basis functions, `n + 1`.
    pub basis_size: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub inner_functions: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
    #[serde(default = "default_precision")]
    pub precision_bits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_transform: Option<NodeTransformSpec>,
    #[serde(default)]
    pub symmetrize: bool,
    /// Exact value of the integral, for error columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
}

fn default_dim() -> usize {
    1
}

fn default_precision() -> usize {
    DEFAULT_PRECISION
}

#[derive(Debug, Clone)]
pub struct InnerFunction {
    pub index: u8,
    pub name: String,
    pub source: String,
    pub g: SymFunc,
    pub transform: Option<ScalarFunction>,
}

/// A configuration after validation.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub kind: BasisKind,
    pub size: usize,
    pub dim: usize,
    pub inner: Vec<InnerFunction>,
    pub expression: Option<Expr>,
    pub precision: usize,
    pub symmetrize: bool,
    pub reference: Option<f64>,
}

fn inner_index(name: &str) -> Option<u8> {
    match name.as_bytes() {
        [b'g', d @ b'1'..=b'9'] => Some(d - b'0'),
        _ => None,
    }
}

fn transform_from_name(name: &str) -> Result<ScalarFunction> {
    ScalarFunction::from_name(name).ok_or_else(|| Error::Config(format!("unknown node transform `{name}`")))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<Experiment> {
        let kind: BasisKind = self.basis_kind.parse()?;
        if self.basis_size == 0 {
            return Err(Error::Config("basis_size must be at least 1".into()));
        }
        if self.dim == 0 {
            return Err(Error::Config("dim must be at least 1".into()));
        }
        check_precision(self.precision_bits)?;
        kind.functions(1, self.dim)?;

        let mut transforms: BTreeMap<String, ScalarFunction> = BTreeMap::new();
        match &self.node_transform {
            None => {}
            Some(NodeTransformSpec::All(name)) => {
                let t = transform_from_name(name)?;
                for key in self.inner_functions.keys() {
                    transforms.insert(key.clone(), t.clone());
                }
            }
            Some(NodeTransformSpec::PerFunction(map)) => {
                for (key, name) in map {
                    if !self.inner_functions.contains_key(key) {
                        return Err(Error::Config(format!("node_transform names unknown inner function `{key}`")));
                    }
                    transforms.insert(key.clone(), transform_from_name(name)?);
                }
            }
        }

        let mut inner = Vec::with_capacity(self.inner_functions.len());
        for (name, source) in &self.inner_functions {
            let index = inner_index(name)
                .ok_or_else(|| Error::Config(format!("inner function names are g1..g9, found `{name}`")))?;
            let g = SymFunc::parse(source, self.dim)?;
            inner.push(InnerFunction {
                index,
                name: name.clone(),
                source: source.clone(),
                g,
                transform: transforms.remove(name),
            });
        }

        let expression = match &self.expression {
            Some(src) => {
                let e = parse(src)?;
                for i in e.symbols() {
                    if !inner.iter().any(|f| f.index == i) {
                        return Err(Error::UnresolvedSymbol(format!("g{i}")));
                    }
                }
                Some(e)
            }
            None => None,
        };

        Ok(Experiment {
            kind,
            size: self.basis_size,
            dim: self.dim,
            inner,
            expression,
            precision: self.precision_bits,
            symmetrize: self.symmetrize,
            reference: self.reference,
        })
    }
}

impl Experiment {
    pub fn from_json(text: &str) -> Result<Self> {
        RunConfig::from_json(text)?.validate()
    }

    /// Orthonormalizer for the first `size` basis functions on the unit box.
    pub fn orthonormalizer(&self, size: usize) -> Result<Arc<Orthonormalizer>> {
        let basis = self.kind.functions(size, self.dim)?;
        Ok(Arc::new(Orthonormalizer::new(
            basis,
            self.kind.name(),
            Arc::new(UnitBox::new(self.dim)),
            self.precision,
        )?))
    }

    pub fn registry(&self, size: usize) -> Result<Registry> {
        let mut reg = Registry::new(self.orthonormalizer(size)?);
        for f in &self.inner {
            reg.bind(f.index, f.g.clone())?;
        }
        Ok(reg)
    }

    /// Look up an inner function by name; `None` picks the first.
    pub fn inner_function(&self, name: Option<&str>) -> Result<&InnerFunction> {
        match name {
            Some(n) => self
                .inner
                .iter()
                .find(|f| f.name == n)
                .ok_or_else(|| Error::UnresolvedSymbol(n.to_string())),
            None => self
                .inner
                .first()
                .ok_or_else(|| Error::Config("no inner functions configured".into())),
        }
    }

    pub fn with_size(mut self, size: usize) -> Self {
        self.size = size;
        self
    }

    pub fn with_precision(mut self, precision: usize) -> Result<Self> {
        check_precision(precision)?;
        self.precision = precision;
        Ok(self)
    }
}

/// Rule for one inner function at the experiment's size.
pub fn build_rule(exp: &Experiment, f: &InnerFunction) -> Result<QuadratureRule> {
    let ortho = exp.orthonormalizer(exp.size)?;
    rule_from_operator(&ortho.project(&f.g)?, f.transform.clone())
}

/// `y = 0, 0.05, …, 6.5`.
pub fn sweep_grid() -> Vec<f64> {
    (0..=130).map(|k| k as f64 / 20.0).collect()
}

/// CSV `y,<g…>` of the relative errors `Σ wᵢ xᵢ^y (y+1) − 1`.
pub fn sweep_csv(exp: &Experiment, grid: &[f64]) -> Result<String> {
    if exp.dim != 1 {
        return Err(Error::Config("sweep integrates x^y on [0,1] and needs dim = 1".into()));
    }
    let rules: Vec<QuadratureRule> = exp.inner.iter().map(|f| build_rule(exp, f)).collect::<Result<_>>()?;
    let mut out = String::from("y");
    for f in &exp.inner {
        out.push(',');
        out.push_str(&f.name);
    }
    out.push('\n');
    let rows: Vec<String> = grid
        .par_iter()
        .map(|&y| {
            let mut row = format!("{y:?}");
            for r in &rules {
                write!(row, ",{:?}", r.power_error(y)).expect("write to string");
            }
            row
        })
        .collect();
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub n: usize,
    pub approximation: f64,
    /// `reference − approximation`.
    pub error: Option<f64>,
}

/// Corner of the configured expression for `n = 0..=n_max`.
pub fn table(exp: &Experiment, n_max: usize) -> Result<Vec<TableRow>> {
    let expr = exp
        .expression
        .as_ref()
        .ok_or_else(|| Error::Config("no expression configured".into()))?;
    let reg = exp.registry(n_max + 1)?;
    let plan = compile(expr, &reg, exp.symmetrize)?;
    let sizes: Vec<usize> = (1..=n_max + 1).collect();
    let outputs = plan.evaluate_sizes(&sizes)?;
    Ok(outputs
        .into_iter()
        .enumerate()
        .map(|(n, out)| {
            let approximation = match out {
                Output::Scalar(x) => bf_to_f64(&x),
                Output::Matrix(_) => unreachable!("corner output"),
            };
            TableRow {
                n,
                approximation,
                error: exp.reference.map(|r| r - approximation),
            }
        })
        .collect())
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let with_error = rows.iter().any(|r| r.error.is_some());
    let mut out = String::from(if with_error { "n,approximation,error\n" } else { "n,approximation\n" });
    for r in rows {
        match r.error {
            Some(e) if with_error => writeln!(out, "{},{:?},{:?}", r.n, r.approximation, e),
            _ => writeln!(out, "{},{:?}", r.n, r.approximation),
        }
        .expect("write to string");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residuals {
    pub cholesky: f64,
    pub operator_reconstruction: f64,
    pub eigen_reconstruction: f64,
    pub eigen_orthogonality: f64,
    pub cholesky_bound: f64,
    pub eigen_bound: f64,
}

impl Residuals {
    fn worst(self, other: &Residuals) -> Residuals {
        Residuals {
            cholesky: self.cholesky.max(other.cholesky),
            operator_reconstruction: self.operator_reconstruction.max(other.operator_reconstruction),
            eigen_reconstruction: self.eigen_reconstruction.max(other.eigen_reconstruction),
            eigen_orthogonality: self.eigen_orthogonality.max(other.eigen_orthogonality),
            cholesky_bound: self.cholesky_bound,
            eigen_bound: self.eigen_bound,
        }
    }

    pub fn ok(&self) -> bool {
        self.cholesky <= self.cholesky_bound
            && self.operator_reconstruction <= self.cholesky_bound
            && self.eigen_reconstruction <= self.eigen_bound
            && self.eigen_orthogonality <= self.eigen_bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionCheck {
    pub name: String,
    pub g: String,
    pub inf: f64,
    pub sup: f64,
    pub bounds_exact: bool,
    pub sizes: usize,
    pub range_ok: bool,
    pub max_range_excess: f64,
    pub interlacing_ok: bool,
    pub max_interlacing_violation: f64,
    pub weights_positive: bool,
    pub min_weight: f64,
    pub max_weight_sum_deviation: f64,
    pub residuals: Residuals,
}

/// Outcome of `check`: every rule of size `1..=basis_size` for every inner function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub range_ok: bool,
    pub interlacing_ok: bool,
    pub weights_positive: bool,
    /// Largest `|Σw − 1|` over all rules.
    pub weights_sum_deviation: f64,
    pub weights_sum_ok: bool,
    pub residuals: Residuals,
    pub residuals_ok: bool,
    pub functions: Vec<FunctionCheck>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.range_ok && self.interlacing_ok && self.weights_positive && self.weights_sum_ok && self.residuals_ok
    }
}

fn check_function(exp: &Experiment, ortho: &Orthonormalizer, f: &InnerFunction) -> Result<FunctionCheck> {
    let full = ortho.project(&f.g)?;
    let n = exp.size;
    let rules: Vec<QuadratureRule> = (1..=n)
        .into_par_iter()
        .map(|k| {
            let m = full.leading(k);
            Ok(extract_rule(&symmetric_eigen(&m)?, f.transform.clone()))
        })
        .collect::<Result<_>>()?;

    let bounds = f.g.bounds_on_unit_box();
    let mut range_ok = true;
    let mut max_range_excess = 0.0f64;
    let mut min_weight = f64::INFINITY;
    let mut max_dev = 0.0f64;
    for r in &rules {
        let report = check_range(r, bounds.inf, bounds.sup);
        range_ok &= report.ok;
        max_range_excess = max_range_excess.max(report.max_excess);
        min_weight = r.weights().iter().copied().fold(min_weight, f64::min);
        max_dev = max_dev.max((r.weight_sum() - 1.0).abs());
    }
    let mut interlacing_ok = true;
    let mut max_violation = 0.0f64;
    for pair in rules.windows(2) {
        let report = check_interlacing(&pair[0], &pair[1])?;
        interlacing_ok &= report.ok;
        max_violation = max_violation.max(report.max_violation);
    }

    let p = exp.precision as i32;
    let eig = symmetric_eigen(&full)?;
    let residuals = Residuals {
        cholesky: ortho.cholesky_residual()?,
        operator_reconstruction: full.reconstruction_residual(ortho)?,
        eigen_reconstruction: eig.reconstruction_residual(&full),
        eigen_orthogonality: eig.orthogonality_residual(),
        cholesky_bound: 2f64.powi(-p / 2),
        eigen_bound: n as f64 * 2f64.powi(-p / 2),
    };
    Ok(FunctionCheck {
        name: f.name.clone(),
        g: f.source.clone(),
        inf: bounds.inf,
        sup: bounds.sup,
        bounds_exact: bounds.exact,
        sizes: n,
        range_ok,
        max_range_excess,
        interlacing_ok,
        max_interlacing_violation: max_violation,
        weights_positive: min_weight > 0.0,
        min_weight,
        max_weight_sum_deviation: max_dev,
        residuals,
    })
}

pub fn check(exp: &Experiment) -> Result<CheckReport> {
    if exp.inner.is_empty() {
        return Err(Error::Config("no inner functions configured".into()));
    }
    let ortho = exp.orthonormalizer(exp.size)?;
    let functions: Vec<FunctionCheck> = exp
        .inner
        .iter()
        .map(|f| check_function(exp, &ortho, f))
        .collect::<Result<_>>()?;
    let weights_sum_deviation = functions.iter().map(|f| f.max_weight_sum_deviation).fold(0.0, f64::max);
    let residuals = functions[1..]
        .iter()
        .fold(functions[0].residuals.clone(), |acc, f| acc.worst(&f.residuals));
    Ok(CheckReport {
        range_ok: functions.iter().all(|f| f.range_ok),
        interlacing_ok: functions.iter().all(|f| f.interlacing_ok),
        weights_positive: functions.iter().all(|f| f.weights_positive),
        weights_sum_deviation,
        weights_sum_ok: weights_sum_deviation <= WEIGHT_SUM_TOLERANCE,
        residuals_ok: residuals.ok(),
        residuals,
        functions,
    })
}

#[derive(Debug, Parser)]
#[command(name = "opquad", version, about = "Quadrature rules and integrals from matrix functions of multiplication operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the nodes and weights of one inner function's rule as CSV
    Rule(CommonArgs),
    /// Relative error of each rule on x^y for y = 0, 0.05, …, 6.5
    Sweep(CommonArgs),
    /// Corner of the configured expression for n = 0..=N (defaults to the Table 1 experiment)
    Table1(CommonArgs),
    /// Range, interlacing, weight and residual checks as a JSON report
    Check(CommonArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// JSON run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Expression overriding the configured one
    #[arg(long)]
    pub expr: Option<String>,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Matrix index n: rules use n + 1 basis functions, table1 runs 0..=n
    #[arg(long)]
    pub n: Option<usize>,
    /// Working precision in bits
    #[arg(long)]
    pub precision: Option<usize>,
    /// Inner function used by `rule` (first configured one by default)
    #[arg(long)]
    pub inner: Option<String>,
    /// Average products over both factor orders
    #[arg(long)]
    pub symmetrize: bool,
}

impl CommonArgs {
    fn experiment(&self, fallback: Option<&str>) -> Result<Experiment> {
        let mut config = match (&self.config, fallback) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(text)) => RunConfig::from_json(text)?,
            (None, None) => return Err(Error::Config("--config <path> is required".into())),
        };
        if let Some(e) = &self.expr {
            if config.expression.as_deref() != Some(e.as_str()) {
                // the reference belongs to the configured integrand
                config.reference = None;
            }
            config.expression = Some(e.clone());
        }
        if let Some(p) = self.precision {
            config.precision_bits = p;
        }
        if self.symmetrize {
            config.symmetrize = true;
        }
        config.validate()
    }

    fn emit(&self, text: &str, stdout: &mut dyn Write) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => stdout.write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

/// Run one command. Returns `false` when `check` found a violated property.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool> {
    match &cli.command {
        Command::Rule(args) => {
            let mut exp = args.experiment(None)?;
            if let Some(n) = args.n {
                exp = exp.with_size(n + 1);
            }
            let f = exp.inner_function(args.inner.as_deref())?;
            let rule = build_rule(&exp, f)?;
            args.emit(&rule.to_csv(), stdout)?;
            writeln!(
                stderr,
                "{}: {} nodes in [{:?}, {:?}], weight sum {:?}",
                rule.provenance(),
                rule.len(),
                rule.nodes().first().copied().unwrap_or(f64::NAN),
                rule.nodes().last().copied().unwrap_or(f64::NAN),
                rule.weight_sum()
            )?;
            Ok(true)
        }
        Command::Sweep(args) => {
            let mut exp = args.experiment(None)?;
            if let Some(n) = args.n {
                exp = exp.with_size(n + 1);
            }
            args.emit(&sweep_csv(&exp, &sweep_grid())?, stdout)?;
            Ok(true)
        }
        Command::Table1(args) => {
            let exp = args.experiment(Some(TABLE1_CONFIG))?;
            let n_max = args.n.unwrap_or(exp.size - 1);
            let rows = table(&exp, n_max)?;
            args.emit(&table_csv(&rows), stdout)?;
            Ok(true)
        }
        Command::Check(args) => {
            let mut exp = args.experiment(None)?;
            if let Some(n) = args.n {
                exp = exp.with_size(n + 1);
            }
            let report = check(&exp)?;
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            args.emit(&text, stdout)?;
            if !report.ok() {
                writeln!(stderr, "check failed")?;
            }
            Ok(report.ok())
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli, stdout, stderr) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}
