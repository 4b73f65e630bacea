//! JSON configuration: parsing, schema validation, and conversion into the
//! validated group structure plus atlas inputs.
//!
//! Matrices are row-major nested arrays of `[re, im]` pairs, so configs and
//! reports are bit-exact and language-neutral.

use crate::linalg::{C64, CMat, RVec, Tol};
use crate::setup::{GroupSpec, InvolutionSpec, MembershipTag, SetupError, Structure};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub type MatJson = Vec<Vec<[f64; 2]>>;

pub fn mat_to_json(m: &CMat) -> MatJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn mat_from_json(j: &MatJson) -> Result<CMat, ConfigError> {
    let rows = j.len();
    if rows == 0 || j.iter().any(|r| r.len() != rows) {
        return Err(ConfigError::Validation("matrix must be square and nonempty".into()));
    }
    let mut m = CMat::zeros(rows, rows);
    for (i, row) in j.iter().enumerate() {
        for (k, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(ConfigError::Validation(format!("non-finite entry at ({i},{k})")));
            }
            m[(i, k)] = C64::new(re, im);
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvolutionJson {
    pub conj: MatJson,
    #[serde(default)]
    pub inverse_transpose: bool,
    #[serde(default)]
    pub entrywise_conjugate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupBlock {
    pub n: usize,
    pub algebra_basis: Vec<MatJson>,
    pub sigma: InvolutionJson,
    pub theta: InvolutionJson,
    pub delta: InvolutionJson,
    pub phi: InvolutionJson,
    #[serde(default)]
    pub membership: Vec<MembershipTag>,
    #[serde(default)]
    pub component_reps: Vec<MatJson>,
    #[serde(default)]
    pub assume_h_g0_k: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusBlock {
    /// generators of the Lie algebra of the reference maximal compact
    /// (sigma,theta)-split torus; validated, then used as the chart for A0
    pub a0_generators: Vec<MatJson>,
    /// candidate generators for maximal abelian subspaces of the
    /// noncompact transversal parts, tried in order at each base point
    #[serde(default)]
    pub fiber_t_hints: Vec<MatJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidatesBlock {
    /// candidates generating the twisted Weyl group of A0 (real subgroup)
    #[serde(default)]
    pub weyl: Vec<MatJson>,
    /// candidates for the complexified refinement (may be complex matrices)
    #[serde(default)]
    pub weyl_complex: Vec<MatJson>,
    /// pooled candidates for per-point little Weyl groups, filtered at each
    /// base point by fixing the point and normalizing the fiber torus
    #[serde(default)]
    pub fiber: Vec<MatJson>,
    /// finite component witnesses used by principality checks
    #[serde(default)]
    pub component_witnesses: Vec<MatJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsBlock {
    #[serde(default = "d_tol_eq")]
    pub tol_eq: f64,
    #[serde(default = "d_tol_rank")]
    pub tol_rank: f64,
    #[serde(default = "d_tol_mu")]
    pub tol_mu: f64,
    #[serde(default = "d_grid_n")]
    pub grid_n: usize,
    #[serde(default = "d_max_iters")]
    pub max_iters: usize,
    #[serde(default = "d_fd_step")]
    pub fd_step: f64,
    #[serde(default = "d_seed")]
    pub seed: u64,
    #[serde(default = "d_max_group_order")]
    pub max_group_order: usize,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn d_tol_eq() -> f64 { 1e-9 }
fn d_tol_rank() -> f64 { 1e-7 }
fn d_tol_mu() -> f64 { 1e-7 }
fn d_grid_n() -> usize { 64 }
fn d_max_iters() -> usize { 10_000 }
fn d_fd_step() -> f64 { 1e-6 }
fn d_seed() -> u64 { 1 }
fn d_max_group_order() -> usize { 1024 }

impl Default for NumericsBlock {
    fn default() -> Self {
        NumericsBlock {
            tol_eq: d_tol_eq(),
            tol_rank: d_tol_rank(),
            tol_mu: d_tol_mu(),
            grid_n: d_grid_n(),
            max_iters: d_max_iters(),
            fd_step: d_fd_step(),
            seed: d_seed(),
            max_group_order: d_max_group_order(),
            threads: None,
        }
    }
}

pub const CONFIG_SCHEMA: &str = "hgk-config/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema: String,
    pub group: GroupBlock,
    pub torus: TorusBlock,
    #[serde(default)]
    pub candidates: CandidatesBlock,
    #[serde(default)]
    pub numerics: NumericsBlock,
}

impl Default for CandidatesBlock {
    fn default() -> Self {
        CandidatesBlock { weyl: vec![], weyl_complex: vec![], fiber: vec![], component_witnesses: vec![] }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Setup(#[from] SetupError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A parsed and structurally validated configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub file: ConfigFile,
    pub canonical_json: String,
}

impl Config {
    pub fn from_str(text: &str) -> Result<Config, ConfigError> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| {
            if e.classify() == serde_json::error::Category::Syntax {
                ConfigError::Parse(e.to_string())
            } else {
                ConfigError::Schema(e.to_string())
            }
        })?;
        if file.schema != CONFIG_SCHEMA {
            return Err(ConfigError::Schema(format!(
                "unsupported schema {:?}, expected {CONFIG_SCHEMA:?}",
                file.schema
            )));
        }
        let n = file.group.n;
        if n == 0 || n > 16 {
            return Err(ConfigError::Validation(format!("n = {n} out of range 1..=16")));
        }
        for (idx, m) in file.group.algebra_basis.iter().enumerate() {
            let mm = mat_from_json(m)?;
            if mm.nrows() != n {
                return Err(ConfigError::Validation(format!("basis matrix {idx} is not {n}x{n}")));
            }
        }
        let canonical_json = crate::report::to_canonical_json(&file)
            .map_err(|e| ConfigError::Validation(format!("reserialize: {e}")))?;
        Ok(Config { file, canonical_json })
    }

    pub fn from_path(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Config::from_str(&text)
    }

    pub fn tol(&self) -> Tol {
        Tol {
            eq: self.file.numerics.tol_eq,
            rank: self.file.numerics.tol_rank,
            mu: self.file.numerics.tol_mu,
        }
    }

    pub fn group_spec(&self) -> Result<GroupSpec, ConfigError> {
        let g = &self.file.group;
        let inv = |j: &InvolutionJson| -> Result<InvolutionSpec, ConfigError> {
            Ok(InvolutionSpec {
                conj_matrix: mat_from_json(&j.conj)?,
                use_inverse_transpose: j.inverse_transpose,
                use_entrywise_conjugate: j.entrywise_conjugate,
            })
        };
        Ok(GroupSpec {
            n: g.n,
            algebra_basis: g
                .algebra_basis
                .iter()
                .map(mat_from_json)
                .collect::<Result<_, _>>()?,
            sigma: inv(&g.sigma)?,
            theta: inv(&g.theta)?,
            delta: inv(&g.delta)?,
            phi: inv(&g.phi)?,
            membership: g.membership.clone(),
            component_reps: g
                .component_reps
                .iter()
                .map(mat_from_json)
                .collect::<Result<_, _>>()?,
            assume_h_g0_k: g.assume_h_g0_k,
        })
    }

    pub fn structure(&self) -> Result<Structure, ConfigError> {
        Ok(Structure::new(self.group_spec()?, self.tol())?)
    }

    pub fn mats(&self, block: &[MatJson]) -> Result<Vec<CMat>, ConfigError> {
        block.iter().map(mat_from_json).collect()
    }

    /// A0 generator coordinates over the structure basis, validated to be
    /// commuting, compact, and (sigma,theta)-split.
    pub fn a0_generator_coords(&self, st: &Structure) -> Result<Vec<RVec>, ConfigError> {
        let mats = self.mats(&self.file.torus.a0_generators)?;
        let mut out = Vec::new();
        for (i, m) in mats.iter().enumerate() {
            let c = st
                .basis
                .coords_checked(m, &st.tol)
                .map_err(|e| ConfigError::Validation(format!("a0 generator {i}: {e}")))?;
            out.push(c);
        }
        Ok(out)
    }

    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.canonical_json.as_bytes());
        let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn bundled_sl2_parses() {
        let cfg = Config::from_str(&fixtures::bundled_json("sl2").unwrap()).unwrap();
        assert_eq!(cfg.file.group.n, 2);
        assert_eq!(cfg.file.group.algebra_basis.len(), 3);
    }

    #[test]
    fn bundled_sl8_parses() {
        let cfg = Config::from_str(&fixtures::bundled_json("sl8").unwrap()).unwrap();
        assert_eq!(cfg.file.group.n, 8);
        assert_eq!(cfg.file.group.algebra_basis.len(), 63);
    }

    #[test]
    fn missing_delta_block_is_schema_error() {
        let mut v: serde_json::Value =
            serde_json::from_str(&fixtures::bundled_json("sl2").unwrap()).unwrap();
        v["group"].as_object_mut().unwrap().remove("delta");
        let err = Config::from_str(&v.to_string()).unwrap_err();
        match err {
            ConfigError::Schema(msg) => assert!(msg.contains("delta"), "message: {msg}"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v: serde_json::Value =
            serde_json::from_str(&fixtures::bundled_json("sl2").unwrap()).unwrap();
        v.as_object_mut().unwrap().insert("extra".into(), serde_json::json!(1));
        assert!(matches!(Config::from_str(&v.to_string()), Err(ConfigError::Schema(_))));
    }

    #[test]
    fn syntax_error_is_parse_error_with_location()  {
        let err = Config::from_str("{ not json").unwrap_err();
        match err {
            ConfigError::Parse(msg) => assert!(msg.contains("line"), "message: {msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn digest_is_stable() {
        let a = Config::from_str(&fixtures::bundled_json("sl2").unwrap()).unwrap();
        let b = Config::from_str(&fixtures::bundled_json("sl2").unwrap()).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert!(a.digest().starts_with("sha256:"));
    }
}
