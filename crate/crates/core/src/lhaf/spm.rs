//! Brute-force loop hafnian over single-pair matchings.

use num_complex::Complex64;

use super::{asymmetry, SYMMETRY_TOL};
use crate::{CMatrix, Error, Result};

/// Loop hafnian by explicit enumeration of every matching with loops.
///
/// Meant for `N ≲ 16`; the number of terms is the number of involutions of `N`.
pub fn lhaf_spm(m: &CMatrix) -> Result<Complex64> {
    lhaf_spm_counted(m).map(|(v, _)| v)
}

/// Like [`lhaf_spm`], also returning how many matchings were summed.
pub fn lhaf_spm_counted(m: &CMatrix) -> Result<(Complex64, u64)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::InvalidArgument(format!("matrix is {}x{}", n, m.ncols())));
    }
    let dev = asymmetry(m);
    if dev > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(dev));
    }
    let mut used = vec![false; n];
    let mut count = 0;
    let value = recurse(m, &mut used, 0, Complex64::new(1.0, 0.0), &mut count);
    Ok((value, count))
}

fn recurse(m: &CMatrix, used: &mut [bool], start: usize, acc: Complex64, count: &mut u64) -> Complex64 {
    let Some(i) = (start..used.len()).find(|&i| !used[i]) else {
        *count += 1;
        return acc;
    };
    used[i] = true;
    // i as a loop
    let mut total = recurse(m, used, i + 1, acc * m[(i, i)], count);
    // i paired with a later free index
    for j in i + 1..used.len() {
        if !used[j] {
            used[j] = true;
            total += recurse(m, used, i + 1, acc * m[(i, j)], count);
            used[j] = false;
        }
    }
    used[i] = false;
    total
}

/// Number of involutions of `n` elements, `I(n) = I(n−1) + (n−1)·I(n−2)`.
pub fn involution_count(n: usize) -> u64 {
    let (mut prev, mut cur) = (1_u64, 1_u64);
    for k in 1..n as u64 {
        let next = cur + k * prev;
        prev = cur;
        cur = next;
    }
    cur
}
