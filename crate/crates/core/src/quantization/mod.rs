//! Section bases of H⁰(X, L^k), the Hilb and FS maps between metrics and
//! Gram matrices, normalized Bergman kernels, the Bergman sequence of a fixed
//! metric and the T-iteration.

mod basis;
mod gram;
mod maps;
mod metric;
mod titerate;

pub use basis::{section_basis, SectionBasis};
pub use gram::{GramMatrix, PD_RATIO_TOL};
pub use maps::{
    almost_balanced_defect, balance_defect, bergman_density, bergman_kernel, bergman_sequence, fs, fs_with, hilb, hilb_with,
    orthonormal_density, BergmanSequence,
};
pub use metric::MetricLevelK;
pub use titerate::{t_iterate, TIteration};
