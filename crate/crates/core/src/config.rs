//! Experiment configuration files.
//!
//! ```toml
//! seed = 7
//!
//! [geometry]
//! kind = "disk"          # disk | annulus | cap | file
//! refinement = 3
//!
//! [coefficients]
//! a = "1 + 0.5*x, 0, 0, 1"
//! d = "0"
//! beta = "1"
//!
//! [experiments]
//! list = ["dtn-spectrum", "sector"]
//!
//! [output]
//! dir = "results"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coefficients::{parse_complex, CoefficientSet, Cutoff};
use crate::error::{Error, Result};
use crate::mesh::{builtin_mesh, BuiltinKind, Mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    DtnSpectrum,
    Sector,
    CompareSqrt,
    RobinSweep,
    WentzellEvolve,
    FullAcceptance,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::DtnSpectrum => "dtn-spectrum",
            Experiment::Sector => "sector",
            Experiment::CompareSqrt => "compare-sqrt",
            Experiment::RobinSweep => "robin-sweep",
            Experiment::WentzellEvolve => "wentzell-evolve",
            Experiment::FullAcceptance => "full-acceptance",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default = "default_refinement")]
    pub refinement: u32,
    /// Annulus inner radius.
    #[serde(default)]
    pub inner: Option<f64>,
    /// Cap opening angle in radians.
    #[serde(default)]
    pub angle: Option<f64>,
    /// Mesh document for `kind = "file"`, relative to the config file.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

fn default_kind() -> String {
    "disk".into()
}

fn default_refinement() -> u32 {
    2
}

impl Default for GeometrySpec {
    fn default() -> Self {
        GeometrySpec { kind: default_kind(), refinement: default_refinement(), inner: None, angle: None, path: None }
    }
}

impl GeometrySpec {
    pub fn builtin(kind: BuiltinKind, refinement: u32) -> Self {
        let (name, inner, angle) = match kind {
            BuiltinKind::Disk => ("disk", None, None),
            BuiltinKind::Annulus { inner } => ("annulus", Some(inner), None),
            BuiltinKind::SphericalCap { angle } => ("cap", None, Some(angle)),
        };
        GeometrySpec { kind: name.into(), refinement, inner, angle, path: None }
    }

    pub fn builtin_kind(&self) -> Result<Option<BuiltinKind>> {
        Ok(Some(match self.kind.as_str() {
            "disk" => BuiltinKind::Disk,
            "annulus" => BuiltinKind::Annulus { inner: self.inner.unwrap_or(0.5) },
            "cap" => BuiltinKind::SphericalCap { angle: self.angle.unwrap_or(1.0) },
            "file" => return Ok(None),
            other => return Err(Error::Config(format!("geometry.kind: unknown kind `{other}` (disk, annulus, cap, file)"))),
        }))
    }

    /// Builds or loads the mesh; relative paths resolve against `base`.
    pub fn mesh(&self, base: Option<&Path>) -> Result<Mesh> {
        match self.builtin_kind()? {
            Some(kind) => builtin_mesh(kind, self.refinement),
            None => {
                let path = self.path.as_ref().ok_or_else(|| Error::Config("geometry.path is required for kind = \"file\"".into()))?;
                let full = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                Mesh::load(full)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    #[serde(default = "one")]
    pub a: String,
    #[serde(default = "zero_pair")]
    pub b: String,
    /// `[center_x, center_y, r0, r1]` of the smooth cutoff multiplying `b`.
    #[serde(default = "default_support")]
    pub b_support: [f64; 4],
    #[serde(default = "zero")]
    pub c: String,
    #[serde(default = "zero")]
    pub d: String,
    #[serde(default = "one")]
    pub beta: String,
    #[serde(default = "one")]
    pub lambda: String,
}

fn one() -> String {
    "1".into()
}

fn zero() -> String {
    "0".into()
}

fn zero_pair() -> String {
    "0, 0".into()
}

fn default_support() -> [f64; 4] {
    let c = Cutoff::default();
    [c.center[0], c.center[1], c.inner, c.outer]
}

impl Default for CoefficientSpec {
    fn default() -> Self {
        CoefficientSpec { a: one(), b: zero_pair(), b_support: default_support(), c: zero(), d: zero(), beta: one(), lambda: one() }
    }
}

impl CoefficientSpec {
    pub fn build(&self) -> Result<CoefficientSet> {
        let s = self.b_support;
        let support = Cutoff::new([s[0], s[1]], s[2], s[3])?;
        Ok(CoefficientSet::laplace()
            .with_a(&self.a)?
            .with_b(&self.b, support)?
            .with_c(&self.c)?
            .with_d(&self.d)?
            .with_beta(&self.beta)?
            .with_lambda(parse_complex(&self.lambda)?))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentList {
    #[serde(default)]
    pub list: Vec<Experiment>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("results")
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_dir() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub coefficients: CoefficientSpec,
    #[serde(default)]
    pub experiments: ExperimentList,
    /// Overrides keyed by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory of the config file, for resolving relative paths.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_seed() -> u64 {
    crate::acceptance::DEFAULT_SEED
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: default_seed(),
            geometry: GeometrySpec::default(),
            coefficients: CoefficientSpec::default(),
            experiments: ExperimentList::default(),
            tolerances: BTreeMap::new(),
            output: OutputSpec::default(),
            base_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates: every expression must parse and every
    /// tolerance must be positive.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.coefficients.build()?;
        self.geometry.builtin_kind()?;
        for (k, &v) in &self.tolerances {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerances.{k}: must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    pub fn mesh(&self) -> Result<Mesh> {
        self.geometry.mesh(self.base_dir.as_deref())
    }

    pub fn output_dir(&self) -> PathBuf {
        match &self.base_dir {
            Some(b) if self.output.dir.is_relative() => b.join(&self.output.dir),
            _ => self.output.dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg.geometry.kind, "disk");
        assert!(cfg.experiments.list.is_empty());
        assert!(cfg.coefficients.build().unwrap().is_pure_principal());
    }

    #[test]
    fn full_config() {
        let text = r#"
seed = 5
[geometry]
kind = "annulus"
refinement = 1
inner = 0.4
[coefficients]
a = "1 + 0.5*x, 0, 0, 1"
d = "0.3"
lambda = "1+2i"
[experiments]
list = ["dtn-spectrum", "sector", "wentzell-evolve"]
[tolerances]
resolvent-identity = 1e-8
[output]
dir = "out"
"#;
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.geometry.builtin_kind().unwrap(), Some(BuiltinKind::Annulus { inner: 0.4 }));
        assert_eq!(cfg.experiments.list, vec![Experiment::DtnSpectrum, Experiment::Sector, Experiment::WentzellEvolve]);
        assert_eq!(cfg.tolerance("resolvent-identity", 1.0), 1e-8);
        let round = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(round, cfg);
        assert_eq!(round.content_hash(), cfg.content_hash());
    }

    #[test]
    fn invalid_expression_names_the_field() {
        let err = ExperimentConfig::parse("[coefficients]\nd = \"1 +* x\"\n").unwrap_err();
        assert!(err.to_string().contains("`d`"), "{err}");
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::parse("[tolerances]\nx = -1.0\n").is_err());
        assert!(ExperimentConfig::parse("[geometry]\nkind = \"torus\"\n").is_err());
        assert!(ExperimentConfig::parse("[experiments]\nlist = [\"nope\"]\n").is_err());
        assert!(ExperimentConfig::parse("bogus = 1\n").is_err());
    }
}
