use serde::{Deserialize, Serialize};

use crate::manifold::Potential;
use crate::numeric::composite_gauss;

/// Default Gauss–Legendre order in t.
pub const DEFAULT_T_ORDER: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PathKind {
    /// t ↦ tφ
    Linear,
    /// 0 → via → φ, linear on each leg.
    TwoLeg { via: Potential },
    /// The Möbius family φ_{λ^t}; the endpoint must be Möbius with parameter λ.
    Mobius,
}

/// A path from the reference to an endpoint, plus its t-quadrature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub kind: PathKind,
    pub t_order: usize,
    pub panels: usize,
}

impl Default for PathSpec {
    fn default() -> Self {
        PathSpec::linear()
    }
}

impl PathSpec {
    pub fn linear() -> Self {
        PathSpec {
            kind: PathKind::Linear,
            t_order: DEFAULT_T_ORDER,
            panels: 1,
        }
    }

    pub fn two_leg(via: Potential) -> Self {
        PathSpec {
            kind: PathKind::TwoLeg { via },
            ..PathSpec::linear()
        }
    }

    pub fn mobius() -> Self {
        PathSpec {
            kind: PathKind::Mobius,
            ..PathSpec::linear()
        }
    }

    pub fn with_order(mut self, t_order: usize) -> Self {
        self.t_order = t_order;
        self
    }

    /// Same path with twice the t-order.
    pub fn refined(&self) -> Self {
        PathSpec {
            t_order: 2 * self.t_order,
            ..self.clone()
        }
    }

    /// Quadrature nodes and weights on [0, 1].
    pub fn t_nodes(&self) -> Vec<(f64, f64)> {
        composite_gauss(0.0, 1.0, self.t_order.max(1), self.panels.max(1))
    }
}
