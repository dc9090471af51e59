use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use varilab::Integrand;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    /// normalize → transform → project → sign-free check → mass ratio
    MsRatio,
    /// crossing tubes against the sharp determinant bound
    DetSharpness,
    /// scalar lemma constant on a sphere grid
    Gamma,
    /// planar checkers on a transverse flow pair
    Kakeya,
    /// flow-decomposition checks on one seeded case
    FlowSuite,
    /// integrand normalization and the geometric condition
    Normalize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeshSource {
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        multiplicity: Option<PathBuf>,
    },
    Generator {
        generator: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative slack of `divTV(S) ≤ |δV|`.
    #[serde(default = "Tolerances::default_div_link")]
    pub div_link: f64,
    /// Largest accepted equality gap of the crossing tubes.
    #[serde(default = "Tolerances::default_sharpness_gap")]
    pub sharpness_gap: f64,
    /// Cap on the sign-free constant.
    #[serde(default = "Tolerances::default_kak_bis_cap")]
    pub kak_bis_cap: f64,
}

impl Tolerances {
    fn default_div_link() -> f64 {
        0.2
    }
    fn default_sharpness_gap() -> f64 {
        0.03
    }
    fn default_kak_bis_cap() -> f64 {
        1.0
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { div_link: 0.2, sharpness_gap: 0.03, kak_bis_cap: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub pipeline: Pipeline,
    #[serde(default = "Integrand::area")]
    pub integrand: Integrand,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    /// Checker names for the kakeya pipeline; empty selects all.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<String>,
    /// Use sign-violating cones for generated flow pairs.
    #[serde(default)]
    pub sign_violating: bool,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(pipeline: Pipeline) -> Self {
        ExperimentConfig {
            schema: SCHEMA,
            pipeline,
            integrand: Integrand::area(),
            mesh: None,
            grid: None,
            eps: None,
            angle: None,
            checks: Vec::new(),
            sign_violating: false,
            tolerances: Tolerances::default(),
            seed: 0,
            out: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).context("parsing config")?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            bail!("unsupported config schema {} (expected {SCHEMA})", self.schema);
        }
        self.integrand.validate()?;
        if let Some(n) = self.grid {
            if n < 4 {
                bail!("grid {n} below 4");
            }
        }
        for c in &self.checks {
            if !["det-simple", "kak-tris", "kak-bis"].contains(&c.as_str()) {
                bail!("unknown check {c:?}");
            }
        }
        Ok(())
    }

    pub fn check_selected(&self, name: &str) -> bool {
        self.checks.is_empty() || self.checks.iter().any(|c| c == name)
    }
}

/// `area`, `lp:P`, `perturbed:EPS` (of the area) or inline JSON.
pub fn parse_integrand(text: &str) -> Result<Integrand> {
    let t = text.trim();
    if t.starts_with('{') {
        return Ok(Integrand::from_json(t)?);
    }
    let (name, arg) = t.split_once(':').unwrap_or((t, ""));
    let num = || arg.parse::<f64>().with_context(|| format!("integrand parameter {arg:?}"));
    Ok(match name {
        "area" => Integrand::area(),
        "lp" => Integrand::lp(num()?)?,
        "perturbed" => Integrand::perturbed(Integrand::area(), num()?)?,
        _ => bail!("unknown integrand {text:?}"),
    })
}
