use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use modineq::batch::{default_patterns, InstanceKind};
use modineq::TolerancePolicy;

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "modineq", version, about = "Overlap inequalities, modular operators and Chernoff bounds on finite-dimensional algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate seeded instances and write them as an instance file.
    Gen(GenArgs),
    /// Check every applicable claim on instance files or a generated batch.
    Verify(VerifyArgs),
    /// Overlap and inequality gaps over a grid of s for one instance.
    Sweep(SweepArgs),
    /// Chernoff exponent and Bayes error against n copies.
    Chernoff(ChernoffArgs),
    /// Compare the resolvent-integral fractional power with the spectral one.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Random,
    Equality,
    OrderedQuadruple,
    RankDeficient,
}

impl From<KindArg> for InstanceKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Random => InstanceKind::Random,
            KindArg::Equality => InstanceKind::Equality,
            KindArg::OrderedQuadruple => InstanceKind::OrderedQuadruple,
            KindArg::RankDeficient => InstanceKind::RankDeficient,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TolArgs {
    /// Relative slack for inequality verdicts.
    #[arg(long)]
    pub tol_ineq: Option<f64>,
    /// Relative eigenvalue cut below which a direction is outside the support.
    #[arg(long)]
    pub tol_support: Option<f64>,
    /// Allowed negative eigenvalues, relative to the norm.
    #[arg(long)]
    pub tol_psd: Option<f64>,
    /// Bound on the product of projections counted as orthogonal.
    #[arg(long)]
    pub tol_orth: Option<f64>,
}

impl TolArgs {
    pub fn policy(&self) -> Result<TolerancePolicy> {
        let d = TolerancePolicy::default();
        let tol = TolerancePolicy {
            support_cut: self.tol_support.unwrap_or(d.support_cut),
            psd_slack: self.tol_psd.unwrap_or(d.psd_slack),
            ineq_slack: self.tol_ineq.unwrap_or(d.ineq_slack),
            orth_slack: self.tol_orth.unwrap_or(d.orth_slack),
        };
        tol.validate()?;
        Ok(tol)
    }
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Block pattern such as `2,3`; repeat the flag or separate patterns
    /// with `;`. Instance i uses pattern i mod (number of patterns).
    #[arg(long)]
    pub dims: Vec<String>,
    #[arg(long, value_enum, default_value = "random")]
    pub kind: KindArg,
    /// `r_plus,r_minus,r_common` for equality instances.
    #[arg(long)]
    pub ranks: Option<String>,
}

impl BatchArgs {
    pub fn patterns(&self) -> Result<Vec<Vec<usize>>> {
        if self.dims.is_empty() {
            return Ok(default_patterns());
        }
        parse_patterns(&self.dims)
    }

    pub fn ranks(&self) -> Result<Option<(usize, usize, usize)>> {
        let Some(text) = &self.ranks else { return Ok(None) };
        let v = parse_list::<usize>(text, "--ranks")?;
        match v[..] {
            [a, b, c] => Ok(Some((a, b, c))),
            _ => Err(CliError::usage(format!("--ranks needs three values, got {text:?}"))),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub batch: BatchArgs,
    /// Prior probability stored with every instance.
    #[arg(long)]
    pub prior: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Instance files; a seeded batch is generated when none are given.
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub batch: BatchArgs,
    /// Comma list (`0.1,0.5`) or range `start:stop:step`.
    #[arg(long, default_value = "0.05:0.95:0.05")]
    pub s_grid: String,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Largest n of the continuity sequence.
    #[arg(long, default_value_t = 64)]
    pub n_max: usize,
    /// s at which continuity is checked.
    #[arg(long, default_value_t = 0.5)]
    pub continuity_s: f64,
    /// Skip the continuity claim.
    #[arg(long)]
    pub no_continuity: bool,
    #[command(flatten)]
    pub out: OutArgs,
    /// Also write the JSON summary here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    pub input: PathBuf,
    /// Instance id inside the file; the first instance when absent.
    #[arg(long)]
    pub id: Option<String>,
    /// Number of equally spaced s in [0, 1]; ignored when --s-grid is given.
    #[arg(long, default_value_t = 101)]
    pub resolution: usize,
    #[arg(long)]
    pub s_grid: Option<String>,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ChernoffArgs {
    /// Instance file with functionals `rho`, `sigma` and a prior; a random
    /// pair of states is drawn from --seed and --dims when absent.
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Block pattern of the random pair.
    #[arg(long, default_value = "2")]
    pub dims: String,
    /// Prior of `rho`; overrides the file.
    #[arg(long)]
    pub prior: Option<f64>,
    #[arg(long, default_value_t = 6)]
    pub n_max: usize,
    /// Largest Hilbert-space dimension of the n-copy algebra.
    #[arg(long, default_value_t = modineq::chernoff::DEFAULT_DIM_CAP)]
    pub dim_cap: usize,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Write the minimizer as JSON here (CSV output only).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Instance files; a seeded batch is generated when none are given.
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub batch: BatchArgs,
    #[arg(long, default_value = "0.1,0.3,0.5,0.7,0.9")]
    pub s_grid: String,
    /// Largest accepted relative Frobenius difference.
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

fn parse_list<T: std::str::FromStr>(text: &str, flag: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| CliError::usage(format!("{flag}: cannot parse {t:?}"))))
        .collect()
}

pub fn parse_patterns(items: &[String]) -> Result<Vec<Vec<usize>>> {
    items
        .iter()
        .flat_map(|s| s.split(';'))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_list::<usize>(s, "--dims"))
        .collect()
}

/// `a,b,c` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_s_grid(text: &str) -> Result<Vec<f64>> {
    let grid = if text.contains(':') {
        let v: Vec<f64> = text
            .split(':')
            .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::usage(format!("--s-grid: cannot parse {t:?}"))))
            .collect::<Result<_>>()?;
        let [start, stop, step] = v[..] else {
            return Err(CliError::usage("--s-grid range needs start:stop:step"));
        };
        if !(step > 0.0) || stop < start {
            return Err(CliError::usage("--s-grid range needs step > 0 and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // computed from the index to keep values free of accumulated drift
        (0..=n).map(|i| start + i as f64 * step).map(|s| (s * 1e12).round() / 1e12).collect()
    } else {
        parse_list::<f64>(text, "--s-grid")?
    };
    if grid.is_empty() {
        return Err(CliError::usage("--s-grid is empty"));
    }
    if let Some(s) = grid.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(CliError::usage(format!("--s-grid value {s} outside [0, 1]")));
    }
    Ok(grid)
}

pub fn linspace_unit(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(CliError::usage("--resolution must be at least 2"));
    }
    Ok((0..points).map(|i| i as f64 / (points - 1) as f64).collect())
}
