//! Command-line front end: `test`, `rolling` and `simulate`.

pub mod ingest;
pub mod report;

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ellipsym::estimators::Location;
use ellipsym::probdist::{sample_mvn, sample_mvt, sample_skewed, RadialDensity};
use ellipsym::resample::Workers;
use ellipsym::{
    huffer_park_test, ks_test, mpq_test, pseudo_gaussian_test, schott_test, skew_optimal_test,
    HufferParkOptions, KsOptions, PseudoGaussianOptions, Sample, Scatter, SectorScheme,
    SkewOptimalOptions, TestResult,
};

use ingest::{read_table, ColumnRef};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Compute(ellipsym::Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(e) if e.is_usage() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ellipsym::Error> for CliError {
    fn from(e: ellipsym::Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "ellipsym", version, about = "Tests for elliptical symmetry of multivariate data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one test on a CSV file.
    Test(TestArgs),
    /// Run one test on rolling row windows of a CSV file.
    Rolling(RollingArgs),
    /// Write a simulated sample as CSV.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Ks,
    Mpq,
    Schott,
    Hp,
    Pg,
    So,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SectorName {
    Orthants,
    Permutations,
    #[value(name = "bivariateangles")]
    BivariateAngles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityName {
    T,
    Logistic,
    #[value(name = "powerExp")]
    PowerExp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// The first row holds column names.
    #[arg(long)]
    pub header: bool,
    /// Columns to analyse, by 1-based position or header name.
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<ColumnRef>>,
}

#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum)]
    pub method: MethodName,
    /// Bootstrap replicates (ks: default 1000; hp: asymptotic law if absent).
    #[arg(long = "R")]
    pub replicates: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Number of radial shells (hp).
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long, value_enum, default_value = "orthants")]
    pub sector: SectorName,
    /// Number of angular sectors (hp with bivariateangles).
    #[arg(long)]
    pub g: Option<usize>,
    #[arg(long, value_enum, default_value = "t")]
    pub f: DensityName,
    /// Radial density parameter: t degrees of freedom (default 4) or
    /// power-exponential beta (default 0.5).
    #[arg(long)]
    pub param: Option<f64>,
    /// Known location, comma-separated (pg, so).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub location: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; -1 uses all cores but one.
    #[arg(long, env = "ELLIPSYM_JOBS", default_value_t = -1, allow_negative_numbers = true)]
    pub jobs: i64,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long, value_enum, default_value = "text")]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct RollingArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Rows per window.
    #[arg(long)]
    pub window: usize,
    /// Rows between window starts.
    #[arg(long, default_value_t = 1)]
    pub step: usize,
    /// Column whose value at each window start labels the output row.
    #[arg(long)]
    pub date_column: Option<ColumnRef>,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistName {
    Normal,
    T,
    Skewnormal,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub dist: DistName,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Degrees of freedom for t.
    #[arg(long, default_value_t = 4.0)]
    pub nu: f64,
    /// Skewness parameter for skewnormal.
    #[arg(long, default_value_t = 5.0)]
    pub slant: f64,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl MethodArgs {
    fn workers(&self) -> Result<Workers, CliError> {
        Ok(Workers::from_jobs(self.jobs)?)
    }

    fn location(&self) -> Result<Option<Location>, CliError> {
        self.location
            .as_deref()
            .map(|v| Location::from_slice(v).map_err(CliError::from))
            .transpose()
    }

    fn density(&self) -> Result<RadialDensity, CliError> {
        Ok(match self.f {
            DensityName::T => RadialDensity::student_t(self.param.unwrap_or(4.0))?,
            DensityName::Logistic => RadialDensity::Logistic,
            DensityName::PowerExp => RadialDensity::power_exp(self.param.unwrap_or(0.5))?,
        })
    }

    fn sector(&self) -> Result<SectorScheme, CliError> {
        match (self.sector, self.g) {
            (SectorName::BivariateAngles, Some(g)) => Ok(SectorScheme::BivariateAngles { g }),
            (SectorName::BivariateAngles, None) => {
                Err(CliError::Usage("--sector bivariateangles needs --g".into()))
            }
            (SectorName::Orthants, _) => Ok(SectorScheme::Orthants),
            (SectorName::Permutations, _) => Ok(SectorScheme::Permutations),
        }
    }

    /// Checks flags that do not depend on the data.
    pub fn validate(&self) -> Result<(), CliError> {
        self.workers()?;
        match self.method {
            MethodName::Hp => {
                if self.c.is_none() {
                    return Err(CliError::Usage("--method hp needs --c".into()));
                }
                self.sector()?;
            }
            MethodName::So => {
                self.density()?;
            }
            _ => {}
        }
        Ok(())
    }

    pub fn run(&self, x: &Sample) -> Result<TestResult, CliError> {
        let workers = self.workers()?;
        let location = self.location()?;
        let result = match self.method {
            MethodName::Ks => ks_test(
                x,
                &KsOptions {
                    replicates: self.replicates.unwrap_or(1000),
                    seed: self.seed,
                    workers,
                    ..KsOptions::default()
                },
            )?,
            MethodName::Mpq => mpq_test(x, self.epsilon)?,
            MethodName::Schott => schott_test(x)?,
            MethodName::Hp => {
                let c = self
                    .c
                    .ok_or_else(|| CliError::Usage("--method hp needs --c".into()))?;
                huffer_park_test(
                    x,
                    &HufferParkOptions {
                        scheme: self.sector()?,
                        replicates: self.replicates,
                        seed: self.seed,
                        workers,
                        ..HufferParkOptions::new(c)
                    },
                )?
            }
            MethodName::Pg => pseudo_gaussian_test(
                x,
                &PseudoGaussianOptions {
                    location: location.as_ref(),
                    ..Default::default()
                },
            )?,
            MethodName::So => skew_optimal_test(
                x,
                &SkewOptimalOptions {
                    location: location.as_ref(),
                    f: self.density()?,
                    ..Default::default()
                },
            )?,
        };
        Ok(result)
    }
}

fn data_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn cmd_test(args: &TestArgs, out: &mut dyn Write) -> Result<(), CliError> {
    args.method.validate()?;
    let x = ingest::ingest_csv(&args.input.input, args.input.header, args.input.columns.as_deref())?;
    let result = args.method.run(&x)?;
    match args.format {
        OutputFormat::Text => {
            out.write_all(report::text_block(&result, &data_name(&args.input.input)).as_bytes())?;
            if let Some(ellipsym::ParamValue::Text(w)) = result.param("warning") {
                eprintln!("warning: {w}");
            }
        }
        OutputFormat::Json => {
            let json = serde_json::to_string_pretty(&result)
                .map_err(|e| CliError::Io(io::Error::other(e)))?;
            writeln!(out, "{json}")?;
        }
    }
    Ok(())
}

/// Zero-based window starts on the step grid.
pub fn window_starts(n: usize, window: usize, step: usize) -> Vec<usize> {
    if window == 0 || window > n || step == 0 {
        return Vec::new();
    }
    (0..=n - window).step_by(step).collect()
}

pub fn cmd_rolling(args: &RollingArgs, out: &mut dyn Write) -> Result<(), CliError> {
    args.method.validate()?;
    if args.step == 0 {
        return Err(CliError::Usage("--step must be at least 1".into()));
    }
    let table = read_table(&args.input.input, args.input.header)?;
    let date_col = args.date_column.as_ref().map(|c| table.resolve(c)).transpose()?;
    let cols = table.data_columns(args.input.columns.as_deref(), date_col)?;
    let x = table.numeric(&cols)?;
    let (n, d) = (x.n(), x.dim());
    if args.window < d + 2 {
        return Err(CliError::Usage(format!(
            "--window must be at least d + 2 = {}, got {}",
            d + 2,
            args.window
        )));
    }
    if args.window > n {
        return Err(CliError::Compute(ellipsym::Error::Domain(format!(
            "window of {} rows exceeds the {n} rows of data",
            args.window
        ))));
    }
    let labels = date_col.map(|c| table.text_column(c));

    writeln!(out, "start,end,label,statistic,p_value")?;
    for s in window_starts(n, args.window, args.step) {
        let e = s + args.window;
        let result = x
            .slice_rows(s, e)
            .map_err(CliError::from)
            .and_then(|w| args.method.run(&w))
            .map_err(|err| match err {
                CliError::Compute(inner) if !inner.is_usage() => CliError::Compute(
                    ellipsym::Error::Numeric(format!("window rows {}-{e}: {inner}", s + 1)),
                ),
                other => other,
            })?;
        let label = labels.as_ref().map(|l| csv_field(&l[s])).unwrap_or_default();
        writeln!(out, "{},{e},{label},{},{}", s + 1, result.statistic, result.p_value)?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.d < 2 {
        return Err(CliError::Usage(format!("--d must be at least 2, got {}", args.d)));
    }
    if args.n <= args.d {
        return Err(CliError::Usage(format!("--n must exceed --d ({} <= {})", args.n, args.d)));
    }
    let origin = Location::from_slice(&vec![0.0; args.d])?;
    let identity = Scatter::identity(args.d);
    let x = match args.dist {
        DistName::Normal => sample_mvn(&origin, &identity, args.n, args.seed)?,
        DistName::T => sample_mvt(&origin, &identity, args.nu, args.n, args.seed)?,
        DistName::Skewnormal => sample_skewed(args.d, args.n, args.slant, args.seed)?,
    };
    let names: Vec<String> = (1..=args.d).map(|j| format!("x{j}")).collect();
    writeln!(out, "{}", names.join(","))?;
    for row in x.values().row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Runs a parsed command, writing to standard output or the `--out` file.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Test(a) => {
            let mut out = output(None)?;
            cmd_test(a, &mut out)?;
            out.flush()?;
        }
        Command::Rolling(a) => {
            let mut out = output(a.out.as_deref())?;
            cmd_rolling(a, &mut out)?;
            out.flush()?;
        }
        Command::Simulate(a) => {
            let mut out = output(a.out.as_deref())?;
            cmd_simulate(a, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}
