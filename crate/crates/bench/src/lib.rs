//! Shared fixtures for the criterion benches.

use heraldsim::{CMatrix, CVector, Complex64, LoopMatrixSpec};

/// A deterministic dense symmetric spec with entries of modulus below one.
pub fn spec(reps: &[usize]) -> LoopMatrixSpec {
    let n = reps.len();
    let entry = |i: usize, j: usize| {
        let (a, b) = (i.min(j) as f64, i.max(j) as f64);
        Complex64::from_polar(0.3 + 0.4 / (1.0 + a + b), 0.7 * a - 1.3 * b + 0.2)
    };
    let base = CMatrix::from_fn(n, n, entry);
    let loops = CVector::from_fn(n, |i, _| Complex64::from_polar(0.5, 0.9 * i as f64));
    LoopMatrixSpec::new(base, loops, reps.to_vec()).expect("fixture is symmetric")
}
