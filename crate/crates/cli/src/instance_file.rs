//! JSON instance files.
//!
//! ```json
//! {
//!   "format": "modineq-instances",
//!   "version": 1,
//!   "instances": [
//!     {
//!       "id": "random-00000",
//!       "blocks": [2, 3],
//!       "functionals": {
//!         "eta": [ { "re": [[..], ..], "im": [[..], ..] }, ... one entry per block ],
//!         "phi": [ ... ]
//!       },
//!       "prior": 0.5,
//!       "metadata": { "kind": "random", "seed": 42, "description": "..." }
//!     }
//!   ]
//! }
//! ```
//!
//! `im` may be omitted for real matrices. Matrices must be Hermitian to
//! within [`HERMITIAN_SLACK`] relative to their largest entry.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use modineq::batch::{Instance, InstanceKind};
use modineq::{Algebra, CMatrix, HermitianMatrix, NormalFunctional, TolerancePolicy};

use crate::error::{CliError, Result};

pub const FORMAT: &str = "modineq-instances";
pub const VERSION: u32 = 1;

/// Largest accepted `|m_ij - conj(m_ji)|`, relative to `max(1, max |m_ij|)`.
pub const HERMITIAN_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSet {
    pub format: String,
    pub version: u32,
    pub instances: Vec<InstanceDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub blocks: Vec<usize>,
    pub functionals: BTreeMap<String, Vec<BlockDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<f64>,
    #[serde(default, skip_serializing_if = "Metadata::is_empty")]
    pub metadata: Metadata,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl Metadata {
    fn is_empty(&self) -> bool {
        self.kind.is_none() && self.seed.is_none() && self.description.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDoc {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl BlockDoc {
    fn from_matrix(m: &CMatrix) -> Self {
        let n = m.nrows();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let real = m.iter().all(|z| z.im == 0.0);
        let im = (!real).then(|| (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect());
        Self { re, im }
    }

    fn to_matrix(&self) -> std::result::Result<CMatrix, String> {
        let n = self.re.len();
        if self.re.iter().any(|r| r.len() != n) {
            return Err("real part is not square".into());
        }
        if let Some(im) = &self.im {
            if im.len() != n || im.iter().any(|r| r.len() != n) {
                return Err("imaginary part does not match the real part".into());
            }
        }
        Ok(CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
        }))
    }
}

fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let top = m.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / top
}

impl InstanceDoc {
    pub fn from_instance(inst: &Instance) -> Self {
        let functionals = inst
            .functionals
            .iter()
            .map(|(name, f)| (name.clone(), f.densities().iter().map(|d| BlockDoc::from_matrix(d.as_matrix())).collect()))
            .collect();
        Self {
            id: Some(inst.id.clone()),
            blocks: inst.algebra.blocks().to_vec(),
            functionals,
            prior: inst.prior,
            metadata: Metadata {
                kind: inst.kind.map(|k| k.name().to_string()),
                seed: inst.seed,
                description: inst.description.clone(),
            },
        }
    }

    /// `default_id` is used when the document carries none.
    pub fn to_instance(&self, default_id: &str, tol: &TolerancePolicy) -> std::result::Result<Instance, String> {
        let id = self.id.clone().unwrap_or_else(|| default_id.to_string());
        let algebra = Algebra::new(self.blocks.clone()).map_err(|e| format!("instance {id}: {e}"))?;
        let kind = match &self.metadata.kind {
            Some(k) => Some(k.parse::<InstanceKind>().map_err(|e| format!("instance {id}: {e}"))?),
            None => None,
        };
        if let Some(p) = self.prior {
            if !(p > 0.0 && p < 1.0) {
                return Err(format!("instance {id}: prior {p} outside (0, 1)"));
            }
        }
        let mut functionals = BTreeMap::new();
        for (name, blocks) in &self.functionals {
            let at = |msg: String| format!("instance {id}, functional {name}: {msg}");
            if blocks.len() != algebra.num_blocks() {
                return Err(at(format!("{} blocks given, algebra has {}", blocks.len(), algebra.num_blocks())));
            }
            let mut densities = Vec::with_capacity(blocks.len());
            for (k, (b, &n)) in blocks.iter().zip(algebra.blocks()).enumerate() {
                let m = b.to_matrix().map_err(|e| at(format!("block {k}: {e}")))?;
                if m.nrows() != n {
                    return Err(at(format!("block {k} is {0}x{0}, expected {n}x{n}", m.nrows())));
                }
                let defect = hermitian_defect(&m);
                if defect > HERMITIAN_SLACK {
                    return Err(at(format!("block {k} is not Hermitian (asymmetry {defect:.2e})")));
                }
                densities.push(HermitianMatrix::new(m).map_err(|e| at(format!("block {k}: {e}")))?);
            }
            let f = NormalFunctional::new(algebra.clone(), densities, tol).map_err(|e| at(e.to_string()))?;
            functionals.insert(name.clone(), f);
        }
        Ok(Instance {
            id,
            kind,
            seed: self.metadata.seed,
            algebra,
            functionals,
            prior: self.prior,
            description: self.metadata.description.clone(),
        })
    }
}

impl InstanceSet {
    pub fn new(instances: &[Instance]) -> Self {
        Self {
            format: FORMAT.to_string(),
            version: VERSION,
            instances: instances.iter().map(InstanceDoc::from_instance).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn parse(text: &str, path: &Path, tol: &TolerancePolicy) -> Result<Vec<Instance>> {
    let set: InstanceSet = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if set.format != FORMAT {
        return Err(CliError::invalid(path, format!("format is {:?}, expected {FORMAT:?}", set.format)));
    }
    if set.version != VERSION {
        return Err(CliError::invalid(path, format!("unsupported version {}", set.version)));
    }
    if set.instances.is_empty() {
        return Err(CliError::invalid(path, "file contains no instances"));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    set.instances
        .iter()
        .enumerate()
        .map(|(i, doc)| doc.to_instance(&format!("{stem}-{i:05}"), tol).map_err(|m| CliError::invalid(path, m)))
        .collect()
}

pub fn load(path: &Path, tol: &TolerancePolicy) -> Result<Vec<Instance>> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse(&text, path, tol)
}

pub fn load_all(paths: &[impl AsRef<Path>], tol: &TolerancePolicy) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(load(p.as_ref(), tol)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use modineq::batch::{default_patterns, generate, GenConfig};

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn round_trip_is_exact() {
        let cfg = GenConfig { seed: 5, count: 5, patterns: default_patterns(), kind: InstanceKind::Random, ranks: None };
        let insts = generate(&cfg).unwrap();
        let text = InstanceSet::new(&insts).to_json().unwrap();
        let back = parse(&text, Path::new("x.json"), &tol()).unwrap();
        assert_eq!(back, insts);
    }

    #[test]
    fn real_matrices_omit_imaginary_part() {
        let doc = BlockDoc::from_matrix(HermitianMatrix::diagonal(&[1.0, 2.0]).unwrap().as_matrix());
        assert!(doc.im.is_none());
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = "{\n  \"format\": \"modineq-instances\",\n  \"version\": 1,\n  \"instances\": [ oops ]\n}";
        match parse(text, Path::new("bad.json"), &tol()) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_asymmetric_and_wrong_shapes() {
        let mk = |re: Vec<Vec<f64>>| {
            format!(
                r#"{{"format":"modineq-instances","version":1,"instances":[{{"blocks":[2],"functionals":{{"phi":[{{"re":{re:?}}}]}}}}]}}"#
            )
        };
        let err = parse(&mk(vec![vec![1.0, 0.1], vec![0.0, 1.0]]), Path::new("a.json"), &tol()).unwrap_err();
        assert!(err.to_string().contains("not Hermitian"), "{err}");
        // asymmetry below the slack is symmetrized away
        assert!(parse(&mk(vec![vec![1.0, 1e-10], vec![0.0, 1.0]]), Path::new("a.json"), &tol()).is_ok());
        let err = parse(&mk(vec![vec![1.0]]), Path::new("a.json"), &tol()).unwrap_err();
        assert!(err.to_string().contains("expected 2x2"), "{err}");
        let err = parse(&mk(vec![vec![1.0, 0.0], vec![0.0, -1.0]]), Path::new("a.json"), &tol()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_ids_fall_back_to_file_stem() {
        let text = r#"{"format":"modineq-instances","version":1,"instances":[{"blocks":[1],"functionals":{"phi":[{"re":[[1.0]]}]}}]}"#;
        let insts = parse(text, Path::new("dir/pair.json"), &tol()).unwrap();
        assert_eq!(insts[0].id, "pair-00000");
    }
}
