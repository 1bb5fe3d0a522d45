//! Seeded instance batches and the claim runner behind `verify`.
//!
//! Instance `i` of a batch draws from the stream `derive_seed(seed, i)` and
//! uses block pattern `patterns[i % patterns.len()]`, so any single instance
//! can be regenerated without the others. Rows come back in instance order
//! whether or not the `parallel` feature fans the work out.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::algebra::{Algebra, NormalFunctional};
use crate::error::{Error, Result};
use crate::inequalities::{
    certify_equality, construct_equality_instance, verify_continuity, verify_diff_monotonicity, verify_lemma_ec,
    PairAnalysis,
};
use crate::numerics::{HermitianMatrix, TolerancePolicy};
use crate::rng::{derive_seed, random_functional, random_psd, CounterRng, RankMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    Random,
    Equality,
    OrderedQuadruple,
    RankDeficient,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 4] =
        [InstanceKind::Random, InstanceKind::Equality, InstanceKind::OrderedQuadruple, InstanceKind::RankDeficient];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::Random => "random",
            InstanceKind::Equality => "equality",
            InstanceKind::OrderedQuadruple => "ordered-quadruple",
            InstanceKind::RankDeficient => "rank-deficient",
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::input(format!("unknown instance kind {s:?}")))
    }
}

/// A named set of functionals on one algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub kind: Option<InstanceKind>,
    pub seed: Option<u64>,
    pub algebra: Algebra,
    pub functionals: BTreeMap<String, NormalFunctional>,
    pub prior: Option<f64>,
    pub description: Option<String>,
}

impl Instance {
    pub fn get(&self, name: &str) -> Result<&NormalFunctional> {
        self.functionals
            .get(name)
            .ok_or_else(|| Error::input(format!("instance {} has no functional named {name:?}", self.id)))
    }

    pub fn has(&self, name: &str) -> bool {
        self.functionals.contains_key(name)
    }
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub seed: u64,
    pub count: usize,
    pub patterns: Vec<Vec<usize>>,
    pub kind: InstanceKind,
    /// `(r_plus, r_minus, r_common)` for equality instances; random when absent.
    pub ranks: Option<(usize, usize, usize)>,
}

/// Block patterns of the default batch.
pub fn default_patterns() -> Vec<Vec<usize>> {
    vec![vec![2], vec![4], vec![2, 3], vec![8], vec![16]]
}

pub fn generate(cfg: &GenConfig) -> Result<Vec<Instance>> {
    if cfg.count == 0 {
        return Err(Error::input("count must be at least 1"));
    }
    if cfg.patterns.is_empty() {
        return Err(Error::input("at least one block pattern is required"));
    }
    let algebras = cfg.patterns.iter().map(|p| Algebra::new(p.clone())).collect::<Result<Vec<_>>>()?;
    (0..cfg.count)
        .map(|i| generate_one(cfg.kind, &algebras[i % algebras.len()], derive_seed(cfg.seed, i as u64), cfg.ranks, i))
        .collect()
}

/// Domination constant of the continuity direction: `χ <= CHI_RELATIVE_MASS · φ`.
pub const CHI_RELATIVE_MASS: f64 = 1e-4;

fn generate_one(
    kind: InstanceKind,
    algebra: &Algebra,
    seed: u64,
    ranks: Option<(usize, usize, usize)>,
    index: usize,
) -> Result<Instance> {
    let mut rng = CounterRng::new(seed);
    let mut functionals = BTreeMap::new();
    match kind {
        InstanceKind::Random | InstanceKind::RankDeficient => {
            let mode = if kind == InstanceKind::Random { RankMode::Faithful } else { RankMode::Deficient };
            let eta = random_functional(&mut rng, algebra, mode);
            let phi = random_functional(&mut rng, algebra, mode);
            let chi = continuity_direction(&mut rng, &phi)?;
            functionals.insert("eta".into(), eta);
            functionals.insert("phi".into(), phi);
            functionals.insert("chi".into(), chi);
        }
        InstanceKind::Equality => {
            let ranks = match ranks {
                Some(r) => r,
                None => random_ranks(&mut rng, algebra.total_dim()),
            };
            let (eta, phi) = construct_equality_instance(algebra, ranks, rng.next_u64())?;
            functionals.insert("eta".into(), eta);
            functionals.insert("phi".into(), phi);
        }
        InstanceKind::OrderedQuadruple => {
            let phi1 = random_functional(&mut rng, algebra, RankMode::Deficient);
            let phi2 = phi1.add(&random_functional(&mut rng, algebra, RankMode::Deficient))?;
            let eta = random_functional(&mut rng, algebra, RankMode::Deficient);
            let psi = eta.add(&random_functional(&mut rng, algebra, RankMode::Deficient))?;
            functionals.insert("phi1".into(), phi1);
            functionals.insert("phi2".into(), phi2);
            functionals.insert("eta".into(), eta);
            functionals.insert("psi".into(), psi);
        }
    }
    Ok(Instance {
        id: format!("{}-{index:05}", kind.name()),
        kind: Some(kind),
        seed: Some(seed),
        algebra: algebra.clone(),
        functionals,
        prior: None,
        description: None,
    })
}

/// `χ = c φ^{1/2} R φ^{1/2}` with `0 <= R <= 1` random and `c = 1e-4`, so
/// `0 <= χ <= c φ`. Operator monotonicity of `t^s` then gives
/// `d_n <= ((1 + c/n)^s - 1) F_s(φ, η)`. Additive directions that are not
/// dominated by `φ` converge at a rate set by the smallest eigenvalue of `φ`
/// (or like `n^{-s}` when they leave `s(φ)`).
fn continuity_direction(rng: &mut CounterRng, phi: &NormalFunctional) -> Result<NormalFunctional> {
    let root = phi.spectra(&TolerancePolicy::default())?.real_power(0.5);
    let densities = phi
        .algebra()
        .blocks()
        .iter()
        .zip(&root.blocks)
        .map(|(&n, half)| {
            let r = random_psd(rng, n, n);
            let top = crate::numerics::op_norm(&r)?;
            let r = r.scale(CHI_RELATIVE_MASS / top);
            HermitianMatrix::new(half * r.as_matrix() * half)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormalFunctional::from_parts_unchecked(phi.algebra().clone(), densities))
}

/// Non-negative ranks with `r_plus + r_minus + r_common <= total`, `r_common >= 1`.
fn random_ranks(rng: &mut CounterRng, total: usize) -> (usize, usize, usize) {
    let used = 1 + rng.below(total);
    let rc = 1 + rng.below(used);
    let rest = used - rc;
    let rp = rng.below(rest + 1);
    (rp, rest - rp, rc)
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub s_grid: Vec<f64>,
    pub tol: TolerancePolicy,
    /// `s` at which the continuity claim is run; `None` skips it.
    pub continuity_s: Option<f64>,
    pub continuity_n_max: usize,
    /// `|gap| <= equality_slack * scale` for equality instances.
    pub equality_slack: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            s_grid: crate::inequalities::default_s_grid(),
            tol: TolerancePolicy::default(),
            continuity_s: Some(0.5),
            continuity_n_max: 64,
            equality_slack: 1e-9,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.tol.validate()?;
        if self.s_grid.is_empty() {
            return Err(Error::input("s grid is empty"));
        }
        if let Some(s) = self.s_grid.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::input(format!("s = {s} outside [0, 1]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimRow {
    pub id: String,
    pub claim: String,
    pub s: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub scale: f64,
    pub pass: bool,
}

impl ClaimRow {
    fn from_report(id: &str, r: &crate::inequalities::VerificationReport, s: Option<f64>) -> Self {
        Self {
            id: id.to_string(),
            claim: r.name.clone(),
            s,
            lhs: r.lhs,
            rhs: r.rhs,
            gap: r.gap,
            scale: r.scale,
            pass: r.pass,
        }
    }
}

/// Every claim that applies to the functionals present in the instance:
///
/// * `eta`, `phi`: main and corollary over the grid;
/// * `eta`, `phi`, `chi`: continuity at `continuity_s`;
/// * equality instances: certificate plus `|gap| <= equality_slack * scale`;
/// * `phi1 <= phi2`, `eta <= psi`: difference monotonicity, and the
///   orthogonality lemma for the pair `phi1 <= phi2`.
pub fn run_instance(instance: &Instance, cfg: &RunConfig) -> Result<Vec<ClaimRow>> {
    let id = instance.id.as_str();
    let tol = &cfg.tol;
    let mut rows = Vec::new();
    if instance.has("eta") && instance.has("phi") {
        let eta = instance.get("eta")?;
        let phi = instance.get("phi")?;
        let pair = PairAnalysis::new(eta, phi, tol)?;
        let equality = instance.kind == Some(InstanceKind::Equality);
        for &s in &cfg.s_grid {
            let main = pair.main(s)?;
            rows.push(ClaimRow::from_report(id, &main, Some(s)));
            rows.push(ClaimRow::from_report(id, &pair.corollary(s)?, Some(s)));
            if equality {
                let scale = main.scale;
                let bound = cfg.equality_slack * scale;
                rows.push(ClaimRow {
                    id: id.to_string(),
                    claim: "equality_gap".into(),
                    s: Some(s),
                    lhs: main.gap.abs(),
                    rhs: bound,
                    gap: bound - main.gap.abs(),
                    scale,
                    pass: main.gap.abs() <= bound,
                });
            }
        }
        if equality {
            let cert = certify_equality(eta, phi, tol)?;
            let residual = cert.plus_orth_phi.max(cert.minus_orth_eta);
            let bound = tol.orth_slack * cert.scale;
            rows.push(ClaimRow {
                id: id.to_string(),
                claim: "certificate".into(),
                s: None,
                lhs: residual,
                rhs: bound,
                gap: bound - residual,
                scale: cert.scale,
                pass: cert.verdict,
            });
        }
        if let (Some(s), true) = (cfg.continuity_s, instance.has("chi")) {
            let r = verify_continuity(phi, instance.get("chi")?, eta, s, cfg.continuity_n_max, tol)?;
            rows.push(ClaimRow::from_report(id, &r, Some(s)));
        }
    }
    if ["phi1", "phi2", "eta", "psi"].iter().all(|n| instance.has(n)) {
        let (phi1, phi2) = (instance.get("phi1")?, instance.get("phi2")?);
        let (eta, psi) = (instance.get("eta")?, instance.get("psi")?);
        for &s in &cfg.s_grid {
            let r = verify_diff_monotonicity(phi1, phi2, eta, psi, s, tol)?;
            rows.push(ClaimRow::from_report(id, &r, Some(s)));
            if s > 0.0 && s < 1.0 {
                let (r, _) = verify_lemma_ec(phi2, phi1, s, tol)?;
                rows.push(ClaimRow::from_report(id, &r, Some(s)));
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::input(format!(
            "instance {id} has no recognised functional set (need eta+phi or phi1+phi2+eta+psi)"
        )));
    }
    Ok(rows)
}

/// Rows for every instance, concatenated in instance order.
pub fn run_batch(instances: &[Instance], cfg: &RunConfig) -> Result<Vec<ClaimRow>> {
    cfg.validate()?;
    let per_instance: Vec<Result<Vec<ClaimRow>>> = map_instances(instances, |inst| run_instance(inst, cfg));
    let mut rows = Vec::new();
    for r in per_instance {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Order-preserving map over instances, parallel when the feature is on.
pub fn map_instances<T: Send>(instances: &[Instance], f: impl Fn(&Instance) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        instances.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        instances.iter().map(f).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    /// Smallest `gap / scale` over all rows.
    pub min_gap: f64,
    pub argmin_id: Option<String>,
    pub failures: usize,
    pub rows: usize,
}

pub fn summarize(rows: &[ClaimRow]) -> Summary {
    let mut min_gap = f64::INFINITY;
    let mut argmin_id = None;
    for r in rows {
        let g = r.gap / r.scale;
        if g < min_gap {
            min_gap = g;
            argmin_id = Some(r.id.clone());
        }
    }
    Summary { min_gap, argmin_id, failures: rows.iter().filter(|r| !r.pass).count(), rows: rows.len() }
}
