//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, CommandFactory, Parser, ValueEnum};
use serde_json::json;

use crate::convention::ExponentConvention;
use crate::error::{Error, Result};
use crate::fields::{fmt12, ScalarField, WeightFunction};
use crate::metric::{ball_volume, beta_distance, BetaParams};
use crate::operators::{build_growth_function, frac_integral, gen_frac_integral};
use crate::quadrature::{MethodChoice, QuadratureConfig};
use crate::spaces::{morrey_norm, stummel_modulus, CenterGrid, Ladder};
use crate::verify::{run_suite, SuiteConfig, VerificationReport, DEFAULT_SEED};

pub const SEED_ENV: &str = "BETAPOT_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// β-distance between --x and --y.
    Dist,
    /// Lebesgue volume of B_β(0, --r).
    BallVolume,
    /// Morrey norm of --field for --lambda on a ladder below --rmax.
    MorreyNorm,
    /// Stummel modulus of --field of order --p (CSV curve).
    Stummel,
    /// Fractional integral of --field of order --p at --x (weighted by --weight if given).
    FracIntegral,
    /// ψ and G for --phi, --sigma, --p at the points --t.
    GrowthFn,
    /// Runs the verification suite --suite and prints a JSON report.
    Verify,
    /// Runs the worked-example suite.
    Example1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
}

/// Every flag of every subcommand. Flags that a subcommand does not use are ignored.
#[derive(Debug, Clone, Parser)]
#[command(name = "betapot", version, about = "Non-isotropic potential theory: metric, function classes, operators, verification")]
#[command(args_override_self = true)]
pub struct RunConfig {
    /// Subcommand.
    #[arg(value_enum)]
    pub command: Command,
    /// Comma-separated β vector (default 0.5,0.5).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, action = ArgAction::Set)]
    pub beta: Option<Vec<f64>>,
    /// First point (comma-separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, action = ArgAction::Set)]
    pub x: Option<Vec<f64>>,
    /// Second point (comma-separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, action = ArgAction::Set)]
    pub y: Option<Vec<f64>>,
    /// Ball radius.
    #[arg(long)]
    pub r: Option<f64>,
    /// Field spec `name[:key=value,…]` (const, zero, gaussian, power, bump, linear, quadratic, example1, grid:path=FILE).
    #[arg(long)]
    pub field: Option<String>,
    /// Weight spec (const:c=…, power:alpha=…, logpower:b=…, curve:path=FILE[,gamma=…]).
    #[arg(long)]
    pub weight: Option<String>,
    /// φ for the growth functions (same syntax as --weight).
    #[arg(long)]
    pub phi: Option<String>,
    /// Order p.
    #[arg(long)]
    pub p: Option<f64>,
    /// Morrey index λ.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// σ ∈ ]0,1[ for the growth functions.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Morrey excess ε of the worked example.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Points t (comma-separated) at which growth-fn evaluates ψ(t) and G(t).
    #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
    pub t: Option<Vec<f64>>,
    /// Largest ladder radius.
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Number of ladder rungs below --rmax.
    #[arg(short = 'J', long)]
    pub rungs: Option<usize>,
    /// Points per axis of an extra center lattice over [-rmax, rmax]^n.
    #[arg(long)]
    pub lattice: Option<usize>,
    /// Exponent convention: paper-literal or generalized.
    #[arg(long)]
    pub convention: Option<String>,
    /// Verification suite id, or `all`.
    #[arg(long)]
    pub suite: Option<String>,
    /// Seed (default from BETAPOT_SEED, else 24301).
    #[arg(long, env = SEED_ENV)]
    pub seed: Option<u64>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Dyadic shells per ball.
    #[arg(long)]
    pub ladder_depth: Option<usize>,
    /// Initial nodes per angle axis.
    #[arg(long)]
    pub angular_order: Option<usize>,
    /// Radial nodes per shell.
    #[arg(long)]
    pub radial_order: Option<usize>,
    /// Monte Carlo samples.
    #[arg(long)]
    pub mc_budget: Option<usize>,
    /// Region budget of the adaptive cubature.
    #[arg(long)]
    pub max_regions: Option<usize>,
    /// Integration method: auto, tensor-chart or monte-carlo.
    #[arg(long)]
    pub method: Option<String>,
    /// Output format (json, text or csv).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the main output to this file instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Directory for curve CSV side files of a verification report.
    #[arg(long)]
    pub curves_dir: Option<PathBuf>,
    /// Sectioned key=value file pre-populating any flag; flags on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Formats a float with 12 significant digits, always showing a decimal point.
pub fn fmt_out(x: f64) -> String {
    let s = fmt12(x);
    if x.is_finite() && !s.contains(['.', 'e', 'E']) {
        format!("{s}.0")
    } else {
        s
    }
}

/// Flags from a `key = value` file with optional `[section]` headers.
pub fn config_file_args(text: &str) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if key == "config" || key == "command" {
            return Err(Error::Usage(format!("config line {}: '{key}' cannot be set from a file", i + 1)));
        }
        out.push(OsString::from(format!("--{key}={}", v.trim())));
    }
    Ok(out)
}

fn split_config(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
    }
    None
}

/// Parses argv, merging a `--config` file ahead of the command-line flags.
pub fn parse_args(args: Vec<OsString>) -> Result<std::result::Result<RunConfig, clap::Error>> {
    let mut full = Vec::with_capacity(args.len() + 8);
    full.push(args.first().cloned().unwrap_or_else(|| "betapot".into()));
    if let Some(path) = split_config(&args[1.min(args.len())..]) {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        full.extend(config_file_args(&text)?);
    }
    full.extend(args.into_iter().skip(1));
    Ok(RunConfig::try_parse_from(full))
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Usage(format!("missing required flag --{name}")))
}

impl RunConfig {
    fn beta(&self) -> Result<BetaParams> {
        BetaParams::new(self.beta.clone().unwrap_or_else(|| vec![0.5, 0.5]))
            .map_err(|e| Error::Usage(format!("--beta: {e}")))
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    fn convention(&self, default: ExponentConvention) -> Result<ExponentConvention> {
        self.convention
            .as_deref()
            .map_or(Ok(default), ExponentConvention::parse)
            .map_err(|e| Error::Usage(format!("--convention: {e}")))
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig> {
        let d = QuadratureConfig::default();
        let method = match self.method.as_deref() {
            None | Some("auto") => MethodChoice::Auto,
            Some("tensor-chart") => MethodChoice::TensorChart,
            Some("monte-carlo") => MethodChoice::MonteCarlo,
            Some(other) => return Err(Error::Usage(format!("--method: unknown method '{other}'"))),
        };
        let q = QuadratureConfig {
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            ladder_depth: self.ladder_depth.unwrap_or(d.ladder_depth),
            angular_order: self.angular_order.unwrap_or(d.angular_order),
            radial_order: self.radial_order.unwrap_or(d.radial_order),
            mc_budget: self.mc_budget.unwrap_or(d.mc_budget),
            seed: self.seed(),
            max_regions: self.max_regions.unwrap_or(d.max_regions),
            method,
        };
        q.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(q)
    }

    fn field(&self, bp: &BetaParams) -> Result<ScalarField> {
        ScalarField::from_spec(&need(&self.field, "field")?, bp).map_err(|e| Error::Usage(format!("--field: {e}")))
    }

    fn weight_opt(spec: &Option<String>, name: &str) -> Result<Option<WeightFunction>> {
        spec.as_deref()
            .map(|s| WeightFunction::from_spec(s).map_err(|e| Error::Usage(format!("--{name}: {e}"))))
            .transpose()
    }

    fn ladder(&self) -> Result<Ladder> {
        Ladder::new(self.rmax.unwrap_or(1.0), self.rungs.unwrap_or(10)).map_err(|e| Error::Usage(e.to_string()))
    }

    fn grid(&self, f: &ScalarField, bp: &BetaParams) -> Result<CenterGrid> {
        let g = CenterGrid::for_field(f);
        match self.lattice {
            None => Ok(g),
            Some(k) => {
                let r = self.rmax.unwrap_or(1.0);
                g.with_lattice(&vec![-r; bp.n()], &vec![r; bp.n()], k)
            }
        }
    }

    pub fn suite_config(&self) -> Result<SuiteConfig> {
        let d = SuiteConfig::default();
        Ok(SuiteConfig {
            quadrature: self.quadrature()?,
            seed: self.seed(),
            rungs: self.rungs.unwrap_or(d.rungs),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            example1_rungs: d.example1_rungs,
            example1_convention: self.convention(d.example1_convention)?,
            example1_beta: self.beta.clone(),
            ..d
        })
    }
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Divergent(_) | Error::NonConverged { .. } | Error::Range(_) => 3,
        _ => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::DimensionMismatch { .. } => "dimension-mismatch",
        Error::Domain(_) => "domain",
        Error::Contract(_) => "contract",
        Error::Divergent(_) => "divergent",
        Error::NonConverged { .. } => "non-converged",
        Error::Range(_) => "range",
        Error::Parse(_) => "parse",
        Error::Usage(_) => "usage",
        Error::Io(_) => "io",
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.output {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn write_curves(report: &VerificationReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for e in &report.entries {
        if e.axis.is_empty() {
            continue;
        }
        let mut csv = String::from("radius,lhs,rhs,slack\n");
        for i in 0..e.axis.len() {
            let g = |v: &Vec<f64>| v.get(i).map_or(String::new(), |x| fmt_out(*x));
            csv.push_str(&format!("{},{},{},{}\n", fmt_out(e.axis[i]), g(&e.lhs), g(&e.rhs), g(&e.slack)));
        }
        let name: String = e.claim_id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect();
        std::fs::write(dir.join(format!("{name}.csv")), csv)?;
    }
    Ok(())
}

/// Runs a parsed command; `Ok(false)` means a verification failure.
pub fn run(cfg: &RunConfig) -> Result<bool> {
    let bp = cfg.beta()?;
    match cfg.command {
        Command::Dist => {
            let d = beta_distance(&need(&cfg.x, "x")?, &need(&cfg.y, "y")?, &bp)
                .map_err(|e| Error::Usage(e.to_string()))?;
            emit(cfg, &format!("{}\n", fmt_out(d)))?;
        }
        Command::BallVolume => {
            let r = need(&cfg.r, "r")?;
            if !(r > 0.0) {
                return Err(Error::Usage(format!("--r must be > 0, got {r}")));
            }
            emit(cfg, &format!("{}\n", fmt_out(ball_volume(&bp, r))))?;
        }
        Command::MorreyNorm => {
            let f = cfg.field(&bp)?;
            let lambda = need(&cfg.lambda, "lambda")?;
            let conv = cfg.convention(ExponentConvention::Generalized)?;
            let est = morrey_norm(&f, lambda, &bp, &cfg.grid(&f, &bp)?, &cfg.ladder()?, &cfg.quadrature()?, conv)?;
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => emit(cfg, &est.quotients.to_csv())?,
                _ => {
                    let v = json!({
                        "norm": fmt_out(est.norm),
                        "error": fmt_out(est.error),
                        "argmax_radius": fmt_out(est.argmax_radius),
                        "argmax_center_index": est.argmax_center,
                        "membership": est.membership,
                    });
                    emit(cfg, &format!("{}\n", serde_json::to_string_pretty(&v).expect("json")))?;
                }
            }
        }
        Command::Stummel => {
            let f = cfg.field(&bp)?;
            let p = need(&cfg.p, "p")?;
            let w = RunConfig::weight_opt(&cfg.weight, "weight")?;
            let conv = cfg.convention(ExponentConvention::Generalized)?;
            let curve = stummel_modulus(&f, p, &bp, &cfg.grid(&f, &bp)?, &cfg.ladder()?, &cfg.quadrature()?, w.as_ref(), conv)
                .map_err(usage_if_domain)?;
            emit(cfg, &curve.to_csv())?;
        }
        Command::FracIntegral => {
            let f = cfg.field(&bp)?;
            let p = need(&cfg.p, "p")?;
            let x = need(&cfg.x, "x")?;
            let q = cfg.quadrature()?;
            let res = match RunConfig::weight_opt(&cfg.weight, "weight")? {
                Some(h) => gen_frac_integral(&f, p, &h, &x, &bp, &q),
                None => frac_integral(&f, p, &x, &bp, &q),
            }
            .map_err(usage_if_domain)?;
            emit(cfg, &format!("value,error\n{},{}\n", fmt_out(res.value), fmt_out(res.error_estimate)))?;
        }
        Command::GrowthFn => {
            let phi = RunConfig::weight_opt(&cfg.phi, "phi")?.ok_or_else(|| Error::Usage("missing required flag --phi".into()))?;
            let gf = build_growth_function(&phi, need(&cfg.sigma, "sigma")?, need(&cfg.p, "p")?, &bp).map_err(usage_if_domain)?;
            let ts = cfg.t.clone().unwrap_or_else(|| (-2..=8).map(|k| 10f64.powi(k)).collect());
            let mut out = String::from("t,psi,G\n");
            for t in ts {
                out.push_str(&format!("{},{},{}\n", fmt_out(t), fmt_out(gf.psi(t)?), fmt_out(gf.g(t)?)));
            }
            emit(cfg, &out)?;
        }
        Command::Verify | Command::Example1 => {
            let suite = match cfg.command {
                Command::Example1 => "example1".to_string(),
                _ => need(&cfg.suite, "suite")?,
            };
            let report = run_suite(&suite, &cfg.suite_config()?)?;
            if let Some(dir) = &cfg.curves_dir {
                write_curves(&report, dir)?;
            }
            let text = match cfg.format.unwrap_or(Format::Json) {
                Format::Text => report.to_text(),
                _ => format!("{}\n", report.to_json()?),
            };
            emit(cfg, &text)?;
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn usage_if_domain(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Usage(m),
        other => other,
    }
}

/// Entry point: returns the process exit code.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let parsed = match parse_args(args) {
        Ok(p) => p,
        Err(e) => return report_error(&e),
    };
    let cfg = match parsed {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            return report_error(&Error::Usage(e.to_string().trim().to_string()));
        }
    };
    match run(&cfg) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => report_error(&e),
    }
}

fn report_error(e: &Error) -> i32 {
    let code = exit_code(e);
    let v = json!({ "error": error_kind(e), "message": e.to_string(), "exit_code": code });
    eprintln!("{v}");
    code
}

/// Long names of every flag, for documentation and tests.
pub fn flag_names() -> Vec<String> {
    RunConfig::command()
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .filter(|l| l != "help" && l != "version")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<OsString> {
        std::iter::once("betapot").chain(s.split_whitespace()).map(OsString::from).collect()
    }

    #[test]
    fn fmt_out_keeps_decimal_point() {
        assert_eq!(fmt_out(5.0), "5.0");
        assert_eq!(fmt_out(0.1 + 0.2), "0.3");
        assert_eq!(fmt_out(1e-20), "1e-20");
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "[metric]\nbeta = 1,1\n[quadrature]\nrel_tol = 1e-3\n").unwrap();
        let cfg = parse_args(args(&format!("dist --config {} --rel-tol 1e-5", path.display()))).unwrap().unwrap();
        assert_eq!(cfg.beta, Some(vec![1.0, 1.0]));
        assert_eq!(cfg.rel_tol, Some(1e-5));
        assert!(config_file_args("nonsense").is_err());
        let cfg = parse_args(args("dist --y 3,4 --y 0,2")).unwrap().unwrap();
        assert_eq!(cfg.y, Some(vec![0.0, 2.0]));
    }

    #[test]
    fn unknown_flags_are_usage_errors() {
        assert_eq!(main_with_args(args("dist --bogus 1")), 2);
        assert_eq!(main_with_args(args("stummel --p 1.5")), 2);
    }
}
