use serde::{Deserialize, Serialize};

use crate::asymptotics::FitOutcome;
use crate::error::Result;
use crate::manifold::GridSignature;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub potential: String,
    pub k: Option<usize>,
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub potential: String,
    pub name: String,
    pub outcome: Option<FitOutcome>,
    /// Why no fit was produced.
    pub note: Option<String>,
}

impl NamedFit {
    pub fn from_result(potential: &str, name: &str, fit: Result<FitOutcome>) -> Self {
        let (outcome, note) = match fit {
            Ok(o) => (Some(o), None),
            Err(e) => (None, Some(e.to_string())),
        };
        NamedFit {
            potential: potential.to_string(),
            name: name.to_string(),
            outcome,
            note,
        }
    }
}

/// Named scalar results of a functional evaluation, with the fits and any
/// violated inequalities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub entries: Vec<ReportEntry>,
    pub fits: Vec<NamedFit>,
    pub violations: Vec<String>,
    pub t_order: usize,
    pub grid: GridSignature,
}

impl FunctionalReport {
    pub fn new(t_order: usize, grid: GridSignature) -> Self {
        FunctionalReport {
            entries: Vec::new(),
            fits: Vec::new(),
            violations: Vec::new(),
            t_order,
            grid,
        }
    }

    pub fn push(&mut self, potential: &str, k: Option<usize>, name: &str, value: f64) {
        self.entries.push(ReportEntry {
            potential: potential.to_string(),
            k,
            name: name.to_string(),
            value,
        });
    }

    pub fn violation(&mut self, msg: String) {
        self.violations.push(msg);
    }

    pub fn get(&self, potential: &str, k: Option<usize>, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.potential == potential && e.k == k && e.name == name)
            .map(|e| e.value)
    }

    pub fn fit(&self, potential: &str, name: &str) -> Option<&NamedFit> {
        self.fits.iter().find(|f| f.potential == potential && f.name == name)
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}
