use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::manifold::{BuildOptions, ManifoldModel, ModelKind, Potential, DEFAULT_MEMORY_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Bergman,
    Rates,
    Lemmas,
    Geodesic,
    Titerate,
    Kenergy,
    Theorem1,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Bergman,
        Experiment::Rates,
        Experiment::Lemmas,
        Experiment::Geodesic,
        Experiment::Titerate,
        Experiment::Kenergy,
        Experiment::Theorem1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Bergman => "bergman",
            Experiment::Rates => "rates",
            Experiment::Lemmas => "lemmas",
            Experiment::Geodesic => "geodesic",
            Experiment::Titerate => "titerate",
            Experiment::Kenergy => "kenergy",
            Experiment::Theorem1 => "theorem1",
        }
    }

    /// Whether the experiment draws random generators or pairs.
    pub fn uses_randomness(self) -> bool {
        matches!(self, Experiment::Lemmas | Experiment::Geodesic | Experiment::Titerate)
    }

    /// Scalar curvature and the K-energy are only available on CP1.
    pub fn available_on(self, kind: ModelKind) -> bool {
        kind == ModelKind::Cp1 || !matches!(self, Experiment::Rates | Experiment::Kenergy | Experiment::Theorem1)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub resolution: usize,
    #[serde(default = "default_budget")]
    pub memory_budget_bytes: usize,
}

fn default_budget() -> usize {
    DEFAULT_MEMORY_BUDGET
}

/// Inclusive k range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KRange {
    pub min: usize,
    pub max: usize,
    #[serde(default = "one")]
    pub step: usize,
}

fn one() -> usize {
    1
}

impl KRange {
    pub fn to_list(&self) -> Vec<usize> {
        (self.min..=self.max).step_by(self.step.max(1)).collect()
    }
}

impl FromStr for KRange {
    type Err = Error;

    /// `MIN..MAX` (inclusive).
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| Error::Config(format!("k range `{s}` is not of the form MIN..MAX")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("k range `{s}`: `{x}` is not a level")))
        };
        Ok(KRange {
            min: parse(a)?,
            max: parse(b)?,
            step: 1,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CachePolicy {
    /// Serve hits, store misses.
    #[default]
    ReadWrite,
    /// Recompute everything and overwrite stored entries.
    Refresh,
    Off,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheConfig {
    #[serde(default)]
    pub policy: CachePolicy,
    /// Cache root; the `KQUANT_CACHE_DIR` variable takes precedence.
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

/// Pass/fail thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// algebraic identities
    pub identity: f64,
    /// quadrature-limited inequalities
    pub quadrature: f64,
    /// signs of asymptotic quantities
    pub asymptotic: f64,
    pub rho_exponent: f64,
    pub rho_first_order_exponent: f64,
    pub metric_exponent: f64,
    pub rates_r2: f64,
    pub step3_exponent: f64,
    pub step3_r2: f64,
    pub approx_exponent_min: f64,
    pub approx_exponent_max: f64,
    pub approx_r2: f64,
    pub surrogate_relative: f64,
    pub titerate_reduction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-10,
            quadrature: 1e-8,
            asymptotic: 1e-6,
            rho_exponent: -0.8,
            rho_first_order_exponent: -1.7,
            metric_exponent: -1.7,
            rates_r2: 0.98,
            step3_exponent: -1.0,
            step3_r2: 0.95,
            approx_exponent_min: -1.4,
            approx_exponent_max: -0.6,
            approx_r2: 0.95,
            surrogate_relative: 1e-6,
            titerate_reduction: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeodesicOptions {
    /// Random generators per (potential, k).
    pub samples: usize,
    pub s_points: usize,
    pub s_max: f64,
    /// Largest |λ̂| entry of a random generator.
    pub amplitude: f64,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions {
            samples: 10,
            s_points: 21,
            s_max: 1.0,
            amplitude: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TIterateOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Scale of the traceless perturbation of the balanced start.
    pub perturbation: f64,
}

impl Default for TIterateOptions {
    fn default() -> Self {
        TIterateOptions {
            max_iter: 50,
            tol: 0.0,
            perturbation: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaOptions {
    /// Random suite pairs for the I_k sandwich.
    pub pairs: usize,
}

impl Default for LemmaOptions {
    fn default() -> Self {
        LemmaOptions { pairs: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub suite: Vec<Potential>,
    #[serde(default)]
    pub k_list: Option<Vec<usize>>,
    #[serde(default)]
    pub k_range: Option<KRange>,
    /// Per-experiment level lists replacing `k_list`/`k_range`.
    #[serde(default)]
    pub k_overrides: BTreeMap<Experiment, Vec<usize>>,
    /// Empty means every experiment available on the model.
    #[serde(default)]
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub cache: CacheConfig,
    #[serde(default)]
    pub geodesic: GeodesicOptions,
    #[serde(default)]
    pub titerate: TIterateOptions,
    #[serde(default)]
    pub lemmas: LemmaOptions,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The common levels, in increasing order.
    pub fn levels(&self) -> Result<Vec<usize>> {
        let ks = match (&self.k_list, &self.k_range) {
            (Some(_), Some(_)) => return Err(Error::Config("give either `k_list` or `k_range`, not both".into())),
            (Some(list), None) => list.clone(),
            (None, Some(range)) => range.to_list(),
            (None, None) => return Err(Error::Config("missing `k_list` or `k_range`".into())),
        };
        check_levels("k_list", &ks)?;
        Ok(ks)
    }

    /// Levels used by `e`.
    pub fn levels_for(&self, e: Experiment) -> Result<Vec<usize>> {
        match self.k_overrides.get(&e) {
            Some(ks) => {
                check_levels(&format!("k_overrides.{e}"), ks)?;
                Ok(ks.clone())
            }
            None => self.levels(),
        }
    }

    /// Requested experiments in canonical order. An empty request selects
    /// every experiment available on the configured model.
    pub fn selected(&self) -> Vec<Experiment> {
        if self.experiments.is_empty() {
            return match self.kind() {
                Ok(kind) => Experiment::ALL.into_iter().filter(|e| e.available_on(kind)).collect(),
                Err(_) => Experiment::ALL.to_vec(),
            };
        }
        let set: BTreeSet<Experiment> = self.experiments.iter().copied().collect();
        set.into_iter().collect()
    }

    pub fn kind(&self) -> Result<ModelKind> {
        self.model.name.parse()
    }

    /// Checks everything that can be checked without numerical work and
    /// builds the model.
    pub fn validate(&self) -> Result<ManifoldModel> {
        let kind = self.kind()?;
        for e in self.selected() {
            if !e.available_on(kind) {
                return Err(Error::Config(format!("experiment `{e}` is not available on {kind}")));
            }
            let ks = self.levels_for(e)?;
            let k_max = *ks.last().expect("non-empty");
            if k_max > self.model.resolution {
                return Err(Error::Capability {
                    k: k_max,
                    capability: self.model.resolution,
                });
            }
        }
        if self.suite.is_empty() {
            return Err(Error::Config("the potential suite is empty".into()));
        }
        for (i, phi) in self.suite.iter().enumerate() {
            phi.validate()
                .map_err(|e| Error::Config(format!("suite[{i}] ({}): {e}", phi.label())))?;
            if !phi.supports(kind) {
                return Err(Error::Config(format!("suite[{i}] ({}) is not defined on {kind}", phi.label())));
            }
        }
        if self.seed.is_none() && self.selected().iter().any(|e| e.uses_randomness()) {
            return Err(Error::Config("`seed` is required by the selected experiments".into()));
        }
        if self.lemmas.pairs > 0 && self.selected().contains(&Experiment::Lemmas) && self.suite.len() < 2 {
            return Err(Error::Config("lemmas.pairs needs at least two suite potentials".into()));
        }
        if self.geodesic.s_points < 3 {
            return Err(Error::Config("geodesic.s_points must be at least 3".into()));
        }
        let model = ManifoldModel::build(
            kind,
            self.model.resolution,
            BuildOptions {
                memory_budget_bytes: self.model.memory_budget_bytes,
            },
        )?;
        for phi in &self.suite {
            phi.sample(&model)
                .map_err(|e| Error::Config(format!("{} is not a valid potential on this grid: {e}", phi.label())))?;
        }
        Ok(model)
    }

    /// sha256 of the canonical JSON encoding, ignoring the output and cache
    /// locations, which do not affect results.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.cache = CacheConfig::default();
        let canonical = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

fn check_levels(what: &str, ks: &[usize]) -> Result<()> {
    if ks.is_empty() {
        return Err(Error::Config(format!("{what}: the level list is empty")));
    }
    if ks[0] == 0 || ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("{what}: levels must be positive and strictly increasing")));
    }
    Ok(())
}
