//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::buchstab::{omega_lower, omega_simple_upper, omega_upper, BuchstabTable};
use crate::error::{Error, Result};
use crate::losses::{self, Budgets, RunSettings, SCHEMA_VERSION};
use crate::params::{default_params, Real, SieveParams};
use crate::quadrature::{Mode, Sampler};
use crate::regions::{classify_pair, domain_with, DomainName, PartitionRule};
use crate::witness::{find_witnesses, DEFAULT_THETA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VERDICT_FALSE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Caps the number of worker threads.
pub const THREADS_ENV: &str = "SIEVEBOUND_THREADS";

#[derive(Debug, Parser)]
#[command(name = "sievebound", version, about = "Sieve loss-integral verifier")]
struct Cli {
    #[command(flatten)]
    run: RunFlags,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Default, Args)]
struct RunFlags {
    /// Flat key = value file with an optional [budgets] section
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    sigma: Option<Real>,
    #[arg(long, global = true)]
    varpi: Option<Real>,
    #[arg(long, global = true)]
    epsilon: Option<Real>,
    /// Per-domain budget as NAME=N; repeatable
    #[arg(long = "budget", global = true, value_name = "NAME=N")]
    budgets: Vec<String>,
    /// Multiplies every default budget
    #[arg(long, global = true)]
    budget_scale: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// plain | stratified
    #[arg(long, global = true)]
    mode: Option<Mode>,
    /// box | nested | nested-log
    #[arg(long, global = true)]
    sampler: Option<Sampler>,
    /// subset | exhaustive
    #[arg(long, global = true)]
    partition: Option<PartitionRule>,
    #[arg(long, global = true)]
    sa54_strict_descent: bool,
    #[arg(long, global = true)]
    csv: bool,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// ω(u) and its envelopes
    Omega {
        #[arg(allow_negative_numbers = true)]
        u: Real,
    },
    /// Class of the pair (t1, t2)
    Classify {
        #[arg(allow_negative_numbers = true)]
        t1: Real,
        #[arg(allow_negative_numbers = true)]
        t2: Real,
    },
    /// Membership of a tuple in one of the integration domains
    Member {
        domain: DomainName,
        #[arg(required = true, allow_negative_numbers = true)]
        t: Vec<Real>,
    },
    /// Integrate every domain and report the losses
    Verify,
    /// Loss reports over a parameter grid
    Scan {
        /// a:b:n
        #[arg(long)]
        sigma_range: Grid,
        /// a:b:n
        #[arg(long)]
        varpi_range: Option<Grid>,
    },
    /// Primes p with d² | p − a and d² ≥ p^θ
    Witness {
        #[arg(long, allow_negative_numbers = true)]
        a: i64,
        /// dmin:dmax
        #[arg(long)]
        d: DRange,
        #[arg(long)]
        theta: Option<Real>,
        #[arg(long)]
        squarefree_only: bool,
    },
}

/// Inclusive linear grid `a:b:n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self.count {
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.end - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected a:b:n, got {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(bad());
        };
        let count: usize = n.trim().parse().map_err(|_| bad())?;
        if count == 0 {
            return Err(bad());
        }
        Ok(Grid {
            start: a.parse::<Real>()?.0,
            end: b.parse::<Real>()?.0,
            count,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DRange(pub u64, pub u64);

impl std::str::FromStr for DRange {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected dmin:dmax, got {s:?}"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        Ok(DRange(
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ))
    }
}

/// Resolved configuration of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: SieveParams,
    pub settings: RunSettings,
    pub csv: bool,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: default_params(),
            settings: RunSettings::default(),
            csv: false,
            output: None,
        }
    }
}

impl RunConfig {
    /// Applies a config file of `key = value` lines. Keys before any section
    /// header are run options; keys under `[budgets]` are domain names.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        let mut in_budgets = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse(format!("config line {}: {msg}", lineno + 1));
            if let Some(section) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                match section.trim() {
                    "budgets" => in_budgets = true,
                    other => return Err(err(format!("unknown section [{other}]"))),
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if in_budgets {
                self.set_budget(key, value)?;
                continue;
            }
            match key {
                "sigma" => self.params.sigma = value.parse::<Real>()?.0,
                "varpi" => self.params.varpi = value.parse::<Real>()?.0,
                "epsilon" => self.params.epsilon = value.parse::<Real>()?.0,
                "seed" => {
                    self.settings.seed = value
                        .parse()
                        .map_err(|_| err(format!("bad seed {value:?}")))?
                }
                "mode" => self.settings.integration.mode = value.parse()?,
                "sampler" => self.settings.integration.sampler = value.parse()?,
                "partition" => self.settings.regions.partition = value.parse()?,
                "sa54_strict_descent" => {
                    self.settings.regions.sa54_strict_descent = value
                        .parse()
                        .map_err(|_| err(format!("expected true or false, got {value:?}")))?
                }
                "budget_scale" => self.scale_budgets(
                    value
                        .parse()
                        .map_err(|_| err(format!("bad scale {value:?}")))?,
                )?,
                "csv" => {
                    self.csv = value
                        .parse()
                        .map_err(|_| err(format!("expected true or false, got {value:?}")))?
                }
                "output" => self.output = Some(PathBuf::from(value)),
                _ => return Err(err(format!("unknown key {key:?}"))),
            }
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        self.apply_file_text(&fs::read_to_string(path)?)
    }

    fn set_budget(&mut self, name: &str, value: &str) -> Result<()> {
        let name: DomainName = name.parse()?;
        let n: u64 = value.trim().parse().map_err(|_| {
            Error::Parse(format!(
                "budget for {name} must be a positive integer, got {value:?}"
            ))
        })?;
        if n == 0 {
            return Err(Error::Parse(format!("budget for {name} must be positive")));
        }
        self.settings.budgets.0.insert(name, n);
        Ok(())
    }

    fn scale_budgets(&mut self, factor: f64) -> Result<()> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Parse(format!(
                "budget scale must be positive, got {factor}"
            )));
        }
        self.settings.budgets = Budgets::scaled(factor);
        Ok(())
    }

    fn apply_flags(&mut self, f: &RunFlags) -> Result<()> {
        if let Some(path) = &f.config {
            self.apply_file(path)?;
        }
        if let Some(v) = f.sigma {
            self.params.sigma = v.0;
        }
        if let Some(v) = f.varpi {
            self.params.varpi = v.0;
        }
        if let Some(v) = f.epsilon {
            self.params.epsilon = v.0;
        }
        if let Some(s) = f.budget_scale {
            self.scale_budgets(s)?;
        }
        for b in &f.budgets {
            let (name, n) = b
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected NAME=N, got {b:?}")))?;
            self.set_budget(name.trim(), n)?;
        }
        if let Some(s) = f.seed {
            self.settings.seed = s;
        }
        if let Some(m) = f.mode {
            self.settings.integration.mode = m;
        }
        if let Some(s) = f.sampler {
            self.settings.integration.sampler = s;
        }
        if let Some(r) = f.partition {
            self.settings.regions.partition = r;
        }
        if f.sa54_strict_descent {
            self.settings.regions.sa54_strict_descent = true;
        }
        if f.csv {
            self.csv = true;
        }
        if let Some(o) = &f.output {
            self.output = Some(o.clone());
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct OmegaLine {
    u: f64,
    omega: f64,
    omega_lower: f64,
    omega_upper: f64,
    simple: f64,
    schema_version: u32,
}

#[derive(Serialize)]
struct ClassifyLine {
    t1: f64,
    t2: f64,
    class: String,
    schema_version: u32,
}

#[derive(Serialize)]
struct MemberLine {
    domain: DomainName,
    t: Vec<f64>,
    member: bool,
    failed_clause: Option<&'static str>,
    schema_version: u32,
}

#[derive(Serialize)]
struct ScanError {
    schema_version: u32,
    params: SieveParams,
    error: String,
}

fn json_line<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value)
        .map(|s| s + "\n")
        .map_err(|e| Error::Parse(e.to_string()))
}

fn verify_report(cfg: &RunConfig, table: &BuchstabTable) -> Result<(String, bool)> {
    let report = losses::verify(&cfg.params, table, &cfg.settings)?;
    let text = if cfg.csv {
        report.to_csv()
    } else {
        json_line(&report)?
    };
    Ok((text, report.verdict))
}

fn scan(cfg: &RunConfig, sigmas: &Grid, varpis: Option<&Grid>) -> Result<String> {
    let table = BuchstabTable::default();
    let varpis = varpis.map_or_else(|| vec![cfg.params.varpi], Grid::points);
    let mut out = String::new();
    for &varpi in &varpis {
        for sigma in sigmas.points() {
            let params = SieveParams {
                sigma,
                varpi,
                ..cfg.params
            };
            match losses::verify(&params, &table, &cfg.settings) {
                Ok(report) => out += &json_line(&report)?,
                Err(e) => {
                    out += &json_line(&ScanError {
                        schema_version: SCHEMA_VERSION,
                        params,
                        error: e.to_string(),
                    })?
                }
            }
        }
    }
    Ok(out)
}

fn execute(cli: &Cli) -> Result<(String, i32, Option<PathBuf>)> {
    let mut cfg = RunConfig::default();
    cfg.apply_flags(&cli.run)?;
    let p = cfg.params;
    let text = match &cli.command {
        Command::Omega { u } => {
            let u = u.0;
            let table = BuchstabTable::default();
            json_line(&OmegaLine {
                u,
                omega: table.omega(u)?,
                omega_lower: omega_lower(u)?,
                omega_upper: omega_upper(u)?,
                simple: omega_simple_upper(u)?,
                schema_version: SCHEMA_VERSION,
            })?
        }
        Command::Classify { t1, t2 } => {
            p.validate()?;
            json_line(&ClassifyLine {
                t1: t1.0,
                t2: t2.0,
                class: classify_pair(&p, t1.0, t2.0).to_string(),
                schema_version: SCHEMA_VERSION,
            })?
        }
        Command::Member { domain, t } => {
            p.validate()?;
            let spec = domain_with(&p, *domain, cfg.settings.regions);
            let t: Vec<f64> = t.iter().map(|r| r.0).collect();
            let check = spec.check(&t);
            json_line(&MemberLine {
                domain: *domain,
                t,
                member: check.is_ok(),
                failed_clause: check.err(),
                schema_version: SCHEMA_VERSION,
            })?
        }
        Command::Verify => {
            let (text, verdict) = verify_report(&cfg, &BuchstabTable::default())?;
            let code = if verdict { EXIT_OK } else { EXIT_VERDICT_FALSE };
            return Ok((text, code, cfg.output));
        }
        Command::Scan {
            sigma_range,
            varpi_range,
        } => scan(&cfg, sigma_range, varpi_range.as_ref())?,
        Command::Witness {
            a,
            d,
            theta,
            squarefree_only,
        } => {
            let theta = theta.map_or(DEFAULT_THETA, |t| t.0);
            let records = find_witnesses(*a, d.0, d.1, theta, *squarefree_only)?;
            let mut s = String::new();
            for r in &records {
                s += &json_line(r)?;
            }
            s
        }
    };
    Ok((text, EXIT_OK, cfg.output))
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Parse(format!(
            "{THREADS_ENV} must be a positive integer, got {v:?}"
        ))
    })?;
    // a second call in the same process fails harmlessly
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Parses `args` (program name first), runs the command, and returns the
/// exit code. Results go to `out` (or the `--output` file), diagnostics to
/// `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let result = configure_threads().and_then(|_| {
        let (text, code, path) = execute(&cli)?;
        match path {
            Some(path) => fs::write(path, text)?,
            None => out.write_all(text.as_bytes())?,
        }
        Ok(code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
