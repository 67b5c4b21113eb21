use super::basis::section_basis;
use super::gram::GramMatrix;
use super::maps::{balance_defect, fs_with, hilb_with};
use crate::error::{Error, Result};
use crate::manifold::ManifoldModel;

#[derive(Clone, Debug)]
pub struct TIteration {
    pub gram: GramMatrix,
    /// defect_history[j] is the Bergman defect of the j-th iterate.
    pub defect_history: Vec<f64>,
    /// log det of the j-th iterate in the monomial basis.
    pub log_det_history: Vec<f64>,
    pub converged: bool,
}

/// Iterates G ↦ Hilb(FS(G)), normalizing det G = 1 after every step.
///
/// The defect of G is sup |Σ|τ_α|²_{FS(G)} - 1| with {τ_α} orthonormal for
/// Hilb(FS(G)); iteration stops once it drops below `tol`.
pub fn t_iterate(model: &ManifoldModel, g0: &GramMatrix, k: usize, max_iter: usize, tol: f64) -> Result<TIteration> {
    if g0.k() != k {
        return Err(Error::LevelMismatch {
            expected: k,
            got: g0.k(),
        });
    }
    let basis = section_basis(model, k)?;
    let wrap = |iteration: usize| move |e: Error| Error::IterationFailure {
        iteration,
        source: Box::new(e),
    };
    let mut g = g0.det_normalized().map_err(wrap(0))?;
    let mut history = Vec::with_capacity(max_iter + 1);
    let mut log_dets = Vec::with_capacity(max_iter + 1);
    for j in 0..=max_iter {
        let step = || -> Result<(f64, GramMatrix)> {
            let m = fs_with(model, &basis, &g)?;
            let h = hilb_with(model, &basis, &m)?;
            Ok((balance_defect(model, &basis, &m, &h)?, h))
        };
        let (defect, next) = step().map_err(wrap(j))?;
        history.push(defect);
        log_dets.push(g.log_det());
        if defect < tol {
            return Ok(TIteration {
                gram: g,
                defect_history: history,
                log_det_history: log_dets,
                converged: true,
            });
        }
        if j == max_iter {
            break;
        }
        g = next.det_normalized().map_err(wrap(j + 1))?;
    }
    Ok(TIteration {
        gram: g,
        defect_history: history,
        log_det_history: log_dets,
        converged: false,
    })
}
