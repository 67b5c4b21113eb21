//! Config-driven experiment runner: validates an [`ExperimentConfig`], runs
//! the requested experiments over the potential suite and writes one CSV per
//! table plus a `summary.json` with every check and fit.
//!
//! Outputs depend only on the config (minus output and cache locations) and
//! the tool version, so repeated runs are byte-identical.

mod cache;
mod config;
mod experiments;
mod table;

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::FitOutcome;
use crate::error::Result;

pub use cache::{GramCache, CACHE_DIR_ENV, CACHE_FORMAT_VERSION};
pub use config::{
    CacheConfig, CachePolicy, Experiment, ExperimentConfig, GeodesicOptions, KRange, LemmaOptions, ModelConfig,
    TIterateOptions, Tolerances,
};
pub use table::{format_f64, Cell, Table};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = "|x|<=")]
    AbsAtMost,
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Below => "<",
            Relation::AbsAtMost => "|x|<=",
        })
    }
}

impl Relation {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Relation::AtMost => value <= threshold,
            Relation::AtLeast => value >= threshold,
            Relation::Below => value < threshold,
            Relation::AbsAtMost => value.abs() <= threshold,
        }
    }
}

/// One pass/fail comparison. Non-finite values are serialized as null.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub experiment: Experiment,
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(experiment: Experiment, name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        Check {
            experiment,
            name: name.into(),
            passed: !value.is_nan() && relation.holds(value, threshold),
            value,
            relation,
            threshold,
            detail: None,
        }
    }

    pub fn failed(experiment: Experiment, name: impl Into<String>, relation: Relation, threshold: f64, detail: String) -> Self {
        Check {
            experiment,
            name: name.into(),
            passed: false,
            value: f64::NAN,
            relation,
            threshold,
            detail: Some(detail),
        }
    }

    fn with_detail(mut self, detail: Option<String>) -> Self {
        self.detail = detail;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryFit {
    pub experiment: Experiment,
    pub potential: String,
    pub name: String,
    pub outcome: Option<FitOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub experiment: Experiment,
    pub levels: Vec<usize>,
    /// File names relative to the output directory.
    pub tables: Vec<String>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub model: String,
    pub resolution: usize,
    pub seed: Option<u64>,
    pub experiments: Vec<ExperimentSummary>,
    pub checks: Vec<Check>,
    pub fits: Vec<SummaryFit>,
    pub passed: bool,
}

impl Summary {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub tables: Vec<PathBuf>,
    pub summary_path: PathBuf,
    pub summary: Summary,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }
}

/// Seeds an RNG for one job from the run seed and a job label, so draws do
/// not depend on scheduling.
pub(crate) fn job_rng(seed: u64, label: &str) -> ChaCha8Rng {
    let digest = Sha256::digest(format!("{seed}/{label}").as_bytes());
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(bytes)
}

/// Validates `config`, runs its experiments and writes the report.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let model = config.validate()?;
    let cache = GramCache::from_env(config.cache.dir.as_deref(), config.cache.policy);
    let out_dir = config.output_dir.clone();
    fs::create_dir_all(&out_dir)?;

    let mut summaries = Vec::new();
    let mut checks = Vec::new();
    let mut fits = Vec::new();
    let mut tables = Vec::new();
    for e in config.selected() {
        let levels = config.levels_for(e)?;
        info!("running {e} on {} for k = {levels:?}", model.kind());
        let ctx = experiments::Context {
            model: &model,
            config,
            cache: &cache,
            levels: &levels,
            seed: config.seed.unwrap_or(0),
        };
        let out = experiments::run_one(e, &ctx)?;
        let mut names = Vec::new();
        for (name, table) in &out.tables {
            let path = out_dir.join(name);
            table.write(&path)?;
            names.push(name.clone());
            tables.push(path);
        }
        summaries.push(ExperimentSummary {
            experiment: e,
            levels,
            tables: names,
            passed: out.checks.iter().all(|c| c.passed),
        });
        checks.extend(out.checks);
        fits.extend(out.fits);
    }
    let summary = Summary {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: TOOL_VERSION.to_string(),
        config_hash: config.hash(),
        model: config.model.name.clone(),
        resolution: config.model.resolution,
        seed: config.seed,
        passed: checks.iter().all(|c| c.passed),
        experiments: summaries,
        checks,
        fits,
    };
    let summary_path = out_dir.join(SUMMARY_FILE);
    write_summary(&summary_path, &summary)?;
    Ok(RunReport {
        out_dir,
        tables,
        summary_path,
        summary,
    })
}

fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
