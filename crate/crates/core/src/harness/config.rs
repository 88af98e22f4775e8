//! Experiment configuration: a sectioned `key = value` (TOML) file whose
//! parsed form is echoed verbatim into every report.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Region, ShishkinMesh};
use crate::solver::DEFAULT_TOL;
use crate::weights::DEFAULT_WEIGHT_ORDER;

/// How the Green-function anchor is chosen on each mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnchorRule {
    /// Node `(N/4, N/4)`.
    CenterOfSmooth,
    /// Node `(3N/4, N/4)`.
    LayerXNode,
    /// Node `(N/4, 3N/4)`.
    LayerYNode,
    Node(usize, usize),
}

impl AnchorRule {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "center-of-Ωs" | "center-of-s" | "center" => Ok(AnchorRule::CenterOfSmooth),
            "Ωx-node" | "x-node" => Ok(AnchorRule::LayerXNode),
            "Ωy-node" | "y-node" => Ok(AnchorRule::LayerYNode),
            other => {
                let parts: Vec<&str> = other.split(',').map(str::trim).collect();
                match parts.as_slice() {
                    [i, j] => {
                        let parse = |v: &str| {
                            v.parse::<usize>()
                                .map_err(|_| Error::Config(format!("bad anchor index '{v}'")))
                        };
                        Ok(AnchorRule::Node(parse(i)?, parse(j)?))
                    }
                    _ => Err(Error::Config(format!("unknown anchor rule '{other}'"))),
                }
            }
        }
    }

    pub fn resolve(&self, n: usize) -> (usize, usize) {
        match *self {
            AnchorRule::CenterOfSmooth => (n / 4, n / 4),
            AnchorRule::LayerXNode => (3 * n / 4, n / 4),
            AnchorRule::LayerYNode => (n / 4, 3 * n / 4),
            AnchorRule::Node(i, j) => (i, j),
        }
    }

    /// Resolves and checks that the node is interior and outside the corner layer.
    pub fn resolve_outside_corner(&self, mesh: &ShishkinMesh) -> Result<(usize, usize)> {
        let (i, j) = self.resolve(mesh.n);
        if !mesh.is_interior(i, j) {
            return Err(Error::NotInterior(i, j));
        }
        if mesh.node_region(i, j) == Region::Corner {
            return Err(Error::Config(format!("anchor ({i}, {j}) lies in the corner layer")));
        }
        Ok((i, j))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub eps: Vec<f64>,
    pub b: [f64; 2],
    /// Built-in right-hand sides by name: `zero`, `one`, `poly`.
    pub sources: Vec<String>,
    /// Augmented crosswind diffusion on the coarse region.
    pub crosswind: bool,
}

impl Default for ProblemSection {
    fn default() -> Self {
        ProblemSection {
            eps: vec![1e-4],
            b: [1.0, 1.0],
            sources: vec!["one".into(), "poly".into()],
            crosswind: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSection {
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    pub allow_non_assumption1: bool,
}

impl Default for MeshSection {
    fn default() -> Self {
        MeshSection {
            n: vec![16, 32, 64],
            allow_non_assumption1: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreenSection {
    /// Weight scale factors; empty means "use the calibrated k*".
    pub k: Vec<f64>,
    pub xstar: String,
    pub quad_order: usize,
    /// Exclusion exponents: `Ω'_0(K) = {ω >= N^{-K}}`.
    #[serde(rename = "exclusion_K")]
    pub exclusion_k: Vec<f64>,
    /// Decay order in the `N^{-v}` templates.
    pub v: u32,
    /// Random discrete test functions used to check `B(v, G) = v(x*)`.
    pub random_checks: usize,
}

impl Default for GreenSection {
    fn default() -> Self {
        GreenSection {
            k: Vec::new(),
            xstar: "center-of-s".into(),
            quad_order: DEFAULT_WEIGHT_ORDER,
            exclusion_k: vec![2.0],
            v: 2,
            random_checks: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub tol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Run sweep rows on the rayon pool. Row order in reports is unaffected.
    pub parallel: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            tol: DEFAULT_TOL,
            seed: 0,
            out: None,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub problem: ProblemSection,
    pub mesh: MeshSection,
    pub green: GreenSection,
    pub run: RunSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable as TOML")
    }

    pub fn anchor_rule(&self) -> Result<AnchorRule> {
        AnchorRule::parse(&self.green.xstar)
    }

    pub fn validate(&self) -> Result<()> {
        let nonempty = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} must not be empty")))
            }
        };
        nonempty(!self.mesh.n.is_empty(), "mesh.N")?;
        nonempty(!self.problem.eps.is_empty(), "problem.eps")?;
        nonempty(!self.problem.sources.is_empty(), "problem.sources")?;
        nonempty(!self.green.exclusion_k.is_empty(), "green.exclusion_K")?;
        if self.green.quad_order < 3 {
            return Err(Error::Config("green.quad_order must be at least 3".into()));
        }
        if !(self.run.tol > 0.0 && self.run.tol <= 1e-4) {
            return Err(Error::Config("run.tol must lie in (0, 1e-4]".into()));
        }
        self.anchor_rule()?;
        for s in &self.problem.sources {
            crate::mesh::Source::from_name(s)?;
        }
        Ok(())
    }
}
