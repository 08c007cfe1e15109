//! Loop hafnians.
//!
//! The loop hafnian of a symmetric `N×N` matrix `M` sums, over every
//! partition of `{0..N}` into blocks of size one or two, the product of
//! `M_ii` over singletons and `M_ij` over pairs. It is what the Fock matrix
//! elements of a Gaussian state reduce to.
//!
//! Two evaluators are provided. [`lhaf_spm`] enumerates the matchings and is
//! the reference for small matrices. [`lhaf_repeated`] works directly on the
//! compressed [`LoopMatrixSpec`] form in which every row/column `s` is
//! repeated `r_s` times, which is the shape the heralding problem produces;
//! its cost is `Π(1 + r_s)·(1 + D/2)` instead of exponential in `D = Σ r_s`.

pub mod cost;
mod ddouble;
mod repeated;
mod spm;

use crate::{CMatrix, CVector, Error, Result};

pub use ddouble::{CDd, Dd};
pub use repeated::{hafnian_repeated, lhaf_repeated, lhaf_repeated_with, KanOutput};
pub use spm::{involution_count, lhaf_spm, lhaf_spm_counted};

/// Symmetry tolerance for matrices handed to the hafnian routines.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Above this effective dimension `D` the automatic mode switches to
/// double-double accumulation.
pub const EXTENDED_PRECISION_THRESHOLD: usize = 30;

/// Largest `D` the repeated-index engine accepts; beyond it the factorial
/// tables leave the `f64` exponent range.
pub const MAX_DIMENSION: usize = 170;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    /// `f64` with compensated summation for `D ≤ 30`, double-double above.
    #[default]
    Auto,
    Double,
    Extended,
}

/// Compressed loop matrix: row/column `s` of `base` appears `reps[s]` times,
/// copies of the same index couple through `base[s][s]` and the diagonal of
/// the expanded matrix is `loops`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopMatrixSpec {
    base: CMatrix,
    loops: CVector,
    reps: Vec<usize>,
}

pub(crate) fn asymmetry(m: &CMatrix) -> f64 {
    let mut dev = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..i {
            dev = dev.max((m[(i, j)] - m[(j, i)]).norm());
        }
    }
    dev
}

impl LoopMatrixSpec {
    pub fn new(base: CMatrix, loops: CVector, reps: Vec<usize>) -> Result<Self> {
        let n = base.nrows();
        if base.ncols() != n || loops.len() != n || reps.len() != n {
            return Err(Error::InvalidArgument(format!(
                "base {}x{}, loops {} and reps {} must share one dimension",
                base.nrows(),
                base.ncols(),
                loops.len(),
                reps.len()
            )));
        }
        let dev = asymmetry(&base);
        if dev > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(dev));
        }
        Ok(LoopMatrixSpec { base, loops, reps })
    }

    /// Spec with every repetition equal to one.
    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        let n = m.nrows();
        LoopMatrixSpec::new(m.clone(), m.diagonal(), vec![1; n])
    }

    pub fn base(&self) -> &CMatrix {
        &self.base
    }

    pub fn loops(&self) -> &CVector {
        &self.loops
    }

    pub fn reps(&self) -> &[usize] {
        &self.reps
    }

    /// Effective dimension `D = Σ r_s`.
    pub fn dimension(&self) -> usize {
        self.reps.iter().sum()
    }

    /// Drops indices with zero repetitions.
    pub fn compressed(&self) -> LoopMatrixSpec {
        let keep: Vec<usize> = (0..self.reps.len()).filter(|&s| self.reps[s] > 0).collect();
        LoopMatrixSpec {
            base: CMatrix::from_fn(keep.len(), keep.len(), |a, b| self.base[(keep[a], keep[b])]),
            loops: CVector::from_iterator(keep.len(), keep.iter().map(|&s| self.loops[s])),
            reps: keep.iter().map(|&s| self.reps[s]).collect(),
        }
    }

    /// The explicit `D×D` matrix `Ã` the spec stands for.
    pub fn expand(&self) -> CMatrix {
        let idx: Vec<usize> = self.reps.iter().enumerate().flat_map(|(s, &r)| std::iter::repeat_n(s, r)).collect();
        let d = idx.len();
        CMatrix::from_fn(d, d, |a, b| if a == b { self.loops[idx[a]] } else { self.base[(idx[a], idx[b])] })
    }

    /// Applies one permutation to base rows/columns, loops and reps.
    pub fn permuted(&self, order: &[usize]) -> LoopMatrixSpec {
        let n = order.len();
        LoopMatrixSpec {
            base: CMatrix::from_fn(n, n, |a, b| self.base[(order[a], order[b])]),
            loops: CVector::from_iterator(n, order.iter().map(|&s| self.loops[s])),
            reps: order.iter().map(|&s| self.reps[s]).collect(),
        }
    }
}
