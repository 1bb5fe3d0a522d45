//! One function per subcommand. Each returns whether every check passed.

use serde::Serialize;

use modineq::batch::{generate, map_instances, run_batch, summarize, ClaimRow, GenConfig, Instance, InstanceKind, RunConfig, Summary};
use modineq::chernoff::{exponent_convergence, ChernoffResult, ConvergenceRow, Exponent, TestingInstance};
use modineq::inequalities::PairAnalysis;
use modineq::numerics::pseudo_power;
use modineq::oracle::{frac_powers_integral, QuadratureConfig};
use modineq::rng::{random_functional, CounterRng, RankMode};
use modineq::{Algebra, TolerancePolicy};

use crate::args::{
    linspace_unit, parse_patterns, parse_s_grid, BatchArgs, ChernoffArgs, Format, GenArgs, OracleArgs, SweepArgs, VerifyArgs,
};
use crate::error::{CliError, Result};
use crate::instance_file::{self, InstanceSet};
use crate::report::{emit, json, num, opt_num, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn generate_batch(batch: &BatchArgs) -> Result<Vec<Instance>> {
    let cfg = GenConfig {
        seed: batch.seed,
        count: batch.count,
        patterns: batch.patterns()?,
        kind: batch.kind.into(),
        ranks: batch.ranks()?,
    };
    Ok(generate(&cfg)?)
}

fn instances(inputs: &[std::path::PathBuf], batch: &BatchArgs, tol: &TolerancePolicy) -> Result<(Vec<Instance>, Option<u64>)> {
    if inputs.is_empty() {
        Ok((generate_batch(batch)?, Some(batch.seed)))
    } else {
        Ok((instance_file::load_all(inputs, tol)?, None))
    }
}

fn select<'a>(insts: &'a [Instance], id: Option<&str>) -> Result<&'a Instance> {
    match id {
        None => Ok(&insts[0]),
        Some(id) => insts.iter().find(|i| i.id == id).ok_or_else(|| CliError::usage(format!("no instance with id {id:?}"))),
    }
}

pub fn gen(args: &GenArgs) -> Result<bool> {
    let mut insts = generate_batch(&args.batch)?;
    if let Some(p) = args.prior {
        if !(p > 0.0 && p < 1.0) {
            return Err(CliError::usage(format!("--prior {p} outside (0, 1)")));
        }
        for inst in &mut insts {
            inst.prior = Some(p);
        }
    }
    emit(args.out.as_deref(), &InstanceSet::new(&insts).to_json()?)?;
    Ok(true)
}

#[derive(Serialize)]
struct VerifyConfig {
    source: Source,
    s_grid: Vec<f64>,
    tol: TolerancePolicy,
    continuity_s: Option<f64>,
    n_max: usize,
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum Source {
    Files { paths: Vec<String> },
    Generated { count: usize, dims: Vec<Vec<usize>>, kind: InstanceKind, ranks: Option<(usize, usize, usize)> },
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    version: &'static str,
    seed: Option<u64>,
    config: VerifyConfig,
    results: &'a [ClaimRow],
    summary: &'a Summary,
}

pub fn claim_table(rows: &[ClaimRow]) -> Result<String> {
    let mut t = Table::new(&["id", "claim", "s", "lhs", "rhs", "gap", "scale", "pass"])?;
    for r in rows {
        t.row([
            r.id.clone(),
            r.claim.clone(),
            opt_num(r.s),
            num(r.lhs),
            num(r.rhs),
            num(r.gap),
            num(r.scale),
            r.pass.to_string(),
        ])?;
    }
    t.finish()
}

pub fn verify(args: &VerifyArgs) -> Result<bool> {
    let tol = args.tol.policy()?;
    let s_grid = parse_s_grid(&args.s_grid)?;
    let (insts, seed) = instances(&args.inputs, &args.batch, &tol)?;
    let cfg = RunConfig {
        s_grid: s_grid.clone(),
        tol,
        continuity_s: (!args.no_continuity).then_some(args.continuity_s),
        continuity_n_max: args.n_max,
        ..RunConfig::default()
    };
    cfg.validate()?;
    let rows = run_batch(&insts, &cfg)?;
    let summary = summarize(&rows);

    let source = if args.inputs.is_empty() {
        Source::Generated {
            count: args.batch.count,
            dims: args.batch.patterns()?,
            kind: args.batch.kind.into(),
            ranks: args.batch.ranks()?,
        }
    } else {
        Source::Files { paths: args.inputs.iter().map(|p| p.display().to_string()).collect() }
    };
    let doc = VerifyDocument {
        version: VERSION,
        seed,
        config: VerifyConfig { source, s_grid, tol, continuity_s: cfg.continuity_s, n_max: cfg.continuity_n_max },
        results: &rows,
        summary: &summary,
    };
    let text = match args.out.format {
        Format::Csv => claim_table(&rows)?,
        Format::Json => json(&doc)?,
    };
    emit(args.out.out.as_deref(), &text)?;
    if let Some(path) = &args.summary {
        emit(Some(path), &json(&doc)?)?;
    }
    eprintln!(
        "verify: {} instances, {} rows, {} failures, min gap/scale {:.3e} ({})",
        insts.len(),
        summary.rows,
        summary.failures,
        summary.min_gap,
        summary.argmin_id.as_deref().unwrap_or("-")
    );
    Ok(summary.failures == 0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub s: f64,
    pub overlap: f64,
    pub main_lhs: f64,
    pub main_gap: f64,
    pub corollary_gap: f64,
    pub pass: bool,
}

pub fn sweep_rows(inst: &Instance, grid: &[f64], tol: &TolerancePolicy) -> Result<Vec<SweepRow>> {
    let pair = PairAnalysis::new(inst.get("eta")?, inst.get("phi")?, tol)?;
    grid.iter()
        .map(|&s| {
            let main = pair.main(s)?;
            let cor = pair.corollary(s)?;
            Ok(SweepRow {
                s,
                overlap: pair.overlap(s)?,
                main_lhs: main.lhs,
                main_gap: main.gap,
                corollary_gap: cor.gap,
                pass: main.pass && cor.pass,
            })
        })
        .collect()
}

pub fn sweep(args: &SweepArgs) -> Result<bool> {
    let tol = args.tol.policy()?;
    let grid = match &args.s_grid {
        Some(g) => parse_s_grid(g)?,
        None => linspace_unit(args.resolution)?,
    };
    let insts = instance_file::load(&args.input, &tol)?;
    let inst = select(&insts, args.id.as_deref())?;
    let rows = sweep_rows(inst, &grid, &tol)?;
    let text = match args.out.format {
        Format::Csv => {
            let mut t = Table::new(&["s", "overlap", "main_lhs", "main_gap", "corollary_gap"])?;
            for r in &rows {
                t.row([num(r.s), num(r.overlap), num(r.main_lhs), num(r.main_gap), num(r.corollary_gap)])?;
            }
            t.finish()?
        }
        Format::Json => json(&rows)?,
    };
    emit(args.out.out.as_deref(), &text)?;
    Ok(rows.iter().all(|r| r.pass))
}

#[derive(Serialize)]
struct ChernoffDocument<'a> {
    version: &'static str,
    id: &'a str,
    prior: f64,
    result: &'a ChernoffResult,
    rows: &'a [ConvergenceRow],
}

fn exponent_field(e: Exponent) -> String {
    match e {
        Exponent::Finite(v) => num(v),
        Exponent::Infinite => "inf".into(),
    }
}

/// Random pair of faithful states on the given block pattern.
pub fn random_states(seed: u64, blocks: Vec<usize>) -> Result<Instance> {
    let algebra = Algebra::new(blocks)?;
    let mut rng = CounterRng::new(seed);
    let mut functionals = std::collections::BTreeMap::new();
    for name in ["rho", "sigma"] {
        let f = random_functional(&mut rng, &algebra, RankMode::Faithful);
        functionals.insert(name.to_string(), f.scale(1.0 / f.mass())?);
    }
    Ok(Instance {
        id: format!("states-{seed}"),
        kind: None,
        seed: Some(seed),
        algebra,
        functionals,
        prior: None,
        description: Some("random faithful states".into()),
    })
}

pub fn chernoff(args: &ChernoffArgs) -> Result<bool> {
    let tol = args.tol.policy()?;
    if args.n_max == 0 {
        return Err(CliError::usage("--n-max must be at least 1"));
    }
    let inst = match &args.input {
        Some(path) => {
            let insts = instance_file::load(path, &tol)?;
            select(&insts, args.id.as_deref())?.clone()
        }
        None => {
            let mut patterns = parse_patterns(std::slice::from_ref(&args.dims))?;
            if patterns.len() != 1 {
                return Err(CliError::usage("--dims takes exactly one block pattern here"));
            }
            random_states(args.seed, patterns.remove(0))?
        }
    };
    let prior = args.prior.or(inst.prior).unwrap_or(0.5);
    let testing = TestingInstance::new(inst.get("rho")?.clone(), inst.get("sigma")?.clone(), prior)?;
    let (result, rows) = exponent_convergence(&testing, args.n_max, args.dim_cap, &tol)?;
    let doc = ChernoffDocument { version: VERSION, id: &inst.id, prior, result: &result, rows: &rows };
    let text = match args.out.format {
        Format::Csv => {
            let mut t = Table::new(&["n", "p_e", "empirical_exponent", "bound_exponent", "bound_value", "holds"])?;
            for r in &rows {
                t.row([
                    r.n.to_string(),
                    num(r.p_e),
                    exponent_field(r.empirical),
                    exponent_field(r.bound),
                    num(r.bound_value),
                    r.holds.to_string(),
                ])?;
            }
            t.finish()?
        }
        Format::Json => json(&doc)?,
    };
    emit(args.out.out.as_deref(), &text)?;
    if let Some(path) = &args.summary {
        emit(Some(path), &json(&result)?)?;
    }
    eprintln!(
        "chernoff: s* = {:.8}, Q(s*) = {:.10e}, exponent {}",
        result.s_star,
        result.q_star,
        exponent_field(result.exponent)
    );
    Ok(rows.iter().all(|r| r.holds))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub id: String,
    pub functional: String,
    pub block: usize,
    pub dim: usize,
    pub rank: usize,
    pub s: f64,
    /// `None` for blocks that are not full rank.
    pub rel_diff: Option<f64>,
    pub panels: usize,
    pub status: OracleStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleStatus {
    Pass,
    Fail,
    /// Rank-deficient block: the integral reproduces `t^s` for rounding-level
    /// kernel eigenvalues, so it is not comparable with the pseudo-power.
    Skipped,
}

impl OracleStatus {
    fn name(self) -> &'static str {
        match self {
            OracleStatus::Pass => "pass",
            OracleStatus::Fail => "fail",
            OracleStatus::Skipped => "skipped",
        }
    }
}

pub fn oracle_rows(inst: &Instance, grid: &[f64], threshold: f64, tol: &TolerancePolicy) -> Result<Vec<OracleRow>> {
    let cfg = QuadratureConfig::default();
    let mut rows = Vec::new();
    for (name, f) in &inst.functionals {
        let spectra = f.spectra(tol)?;
        for (k, (d, spec)) in f.densities().iter().zip(&spectra.blocks).enumerate() {
            let rank = spec.rank();
            let row = |s: f64, rel_diff: Option<f64>, panels: usize, status: OracleStatus| OracleRow {
                id: inst.id.clone(),
                functional: name.clone(),
                block: k,
                dim: d.dim(),
                rank,
                s,
                rel_diff,
                panels,
                status,
            };
            if rank < d.dim() {
                rows.extend(grid.iter().map(|&s| row(s, None, 0, OracleStatus::Skipped)));
                continue;
            }
            let quad = frac_powers_integral(d, grid, &cfg)?;
            for (q, &s) in quad.iter().zip(grid) {
                let exact = pseudo_power(d, s.into(), tol)?;
                let rel = (q.value.as_matrix() - &exact).norm() / exact.norm();
                let status = if rel <= threshold { OracleStatus::Pass } else { OracleStatus::Fail };
                rows.push(row(s, Some(rel), q.panels, status));
            }
        }
    }
    Ok(rows)
}

pub fn oracle_check(args: &OracleArgs) -> Result<bool> {
    let tol = args.tol.policy()?;
    let grid = parse_s_grid(&args.s_grid)?;
    if !(args.threshold > 0.0) {
        return Err(CliError::usage("--threshold must be positive"));
    }
    let (insts, _) = instances(&args.inputs, &args.batch, &tol)?;
    let rows: Vec<OracleRow> = map_instances(&insts, |inst| oracle_rows(inst, &grid, args.threshold, &tol))
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let text = match args.out.format {
        Format::Csv => {
            let mut t = Table::new(&["id", "functional", "block", "dim", "rank", "s", "rel_diff", "panels", "status"])?;
            for r in &rows {
                t.row([
                    r.id.clone(),
                    r.functional.clone(),
                    r.block.to_string(),
                    r.dim.to_string(),
                    r.rank.to_string(),
                    num(r.s),
                    opt_num(r.rel_diff),
                    r.panels.to_string(),
                    r.status.name().to_string(),
                ])?;
            }
            t.finish()?
        }
        Format::Json => json(&rows)?,
    };
    emit(args.out.out.as_deref(), &text)?;
    let failed: Vec<_> = rows.iter().filter(|r| r.status == OracleStatus::Fail).collect();
    for r in &failed {
        eprintln!("oracle-check FAIL {} {} block {} s={} rel diff {:.3e}", r.id, r.functional, r.block, r.s, r.rel_diff.unwrap_or(f64::NAN));
    }
    let checked = rows.iter().filter(|r| r.status != OracleStatus::Skipped).count();
    let worst = rows.iter().filter_map(|r| r.rel_diff).fold(0.0f64, f64::max);
    eprintln!(
        "oracle-check: {checked} comparisons, {} failures, {} skipped (rank-deficient), max rel diff {worst:.3e}",
        failed.len(),
        rows.len() - checked
    );
    Ok(failed.is_empty())
}
