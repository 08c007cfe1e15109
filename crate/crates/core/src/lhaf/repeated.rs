//! Loop hafnian of a matrix with repeated rows and columns.
//!
//! With `λ = r/2 − ν`, the loop hafnian of the expanded matrix is
//!
//! ```text
//! Σ_{0 ≤ ν ≤ r} (−1)^{|ν|} Π_s C(r_s, ν_s) Σ_{j=0}^{⌊D/2⌋} (λᵀBλ/2)^j (γᵀλ)^{D−2j} / (j! (D−2j)!)
//! ```
//!
//! i.e. a finite-difference extraction of the `Π ∂^{r_s}` derivative of the
//! degree-`D` part of `exp(½xᵀBx + γᵀx)`. Terms for `ν` and `r − ν` are equal,
//! so the sum runs over half of the lattice along the most repeated index.
//!
//! The signs alternate, so the sum cancels heavily for large `D`. Double mode
//! uses compensated summation; extended mode carries every intermediate in
//! double-double.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::ddouble::{CDd, Dd};
use super::{LoopMatrixSpec, Precision, EXTENDED_PRECISION_THRESHOLD};
use crate::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KanOutput {
    pub value: Complex64,
    /// Inner-loop iterations executed (one per `j` per lattice point).
    pub steps: u64,
    pub extended: bool,
}

/// Loop hafnian of the expanded matrix, without expanding it.
pub fn lhaf_repeated(spec: &LoopMatrixSpec) -> Complex64 {
    lhaf_repeated_with(spec, Precision::Auto).value
}

/// Hafnian (no loops) of `base` with repetitions `reps`; zero for odd `D`.
pub fn hafnian_repeated(base: &CMatrix, reps: &[usize]) -> crate::Result<Complex64> {
    let n = base.nrows();
    let spec = LoopMatrixSpec::new(base.clone(), crate::CVector::zeros(n), reps.to_vec())?;
    Ok(lhaf_repeated(&spec))
}

pub fn lhaf_repeated_with(spec: &LoopMatrixSpec, precision: Precision) -> KanOutput {
    let c = spec.compressed();
    let d = c.dimension();
    if d == 0 {
        return KanOutput { value: Complex64::new(1.0, 0.0), steps: 0, extended: false };
    }
    let extended = match precision {
        Precision::Auto => d > EXTENDED_PRECISION_THRESHOLD,
        Precision::Double => false,
        Precision::Extended => true,
    };
    let (value, steps) = if extended { kan_sum::<CDd>(&c) } else { kan_sum::<Complex64>(&c) };
    KanOutput { value, steps, extended }
}

trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    type Acc: Default;
    fn from_c64(z: Complex64) -> Self;
    fn real(x: Dd) -> Self;
    fn scale(self, x: f64) -> Self;
    fn one() -> Self;
    fn accumulate(acc: &mut Self::Acc, x: Self);
    fn finish(acc: Self::Acc) -> Complex64;
}

#[derive(Default)]
struct Neumaier {
    sum: Complex64,
    comp: Complex64,
}

#[inline(always)]
fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl Scalar for Complex64 {
    type Acc = Neumaier;
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn real(x: Dd) -> Self {
        Complex64::new(x.to_f64(), 0.0)
    }
    #[inline(always)]
    fn scale(self, x: f64) -> Self {
        self * x
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    #[inline(always)]
    fn accumulate(acc: &mut Neumaier, x: Self) {
        neumaier(&mut acc.sum.re, &mut acc.comp.re, x.re);
        neumaier(&mut acc.sum.im, &mut acc.comp.im, x.im);
    }
    fn finish(acc: Neumaier) -> Complex64 {
        acc.sum + acc.comp
    }
}

impl Scalar for CDd {
    type Acc = CDd;
    fn from_c64(z: Complex64) -> Self {
        CDd::from_c64(z)
    }
    fn real(x: Dd) -> Self {
        CDd::from_real(x)
    }
    #[inline(always)]
    fn scale(self, x: f64) -> Self {
        self.scale_f64(x)
    }
    fn one() -> Self {
        CDd::from_real(Dd::ONE)
    }
    #[inline(always)]
    fn accumulate(acc: &mut CDd, x: Self) {
        *acc = *acc + x;
    }
    fn finish(acc: CDd) -> Complex64 {
        acc.to_c64()
    }
}

/// `C(n, k)` for every `k ≤ n`, exact while the values fit in `u128`.
fn binomial_row(n: usize) -> Vec<Dd> {
    let mut row = Vec::with_capacity(n + 1);
    let mut exact: Option<u128> = Some(1);
    let mut approx = Dd::ONE;
    for k in 0..=n {
        row.push(match exact {
            Some(v) => Dd::from_u128(v),
            None => approx,
        });
        if k == n {
            break;
        }
        let (num, den) = ((n - k) as u128, (k + 1) as u128);
        approx = match exact {
            Some(v) => Dd::from_u128(v),
            None => approx,
        }
        .mul_f64(num as f64)
            / Dd::from_f64(den as f64);
        // C(n, k+1) = C(n, k)·(n−k)/(k+1), exact as long as the product fits
        exact = exact.and_then(|v| v.checked_mul(num)).map(|v| v / den);
    }
    row
}

fn pow<S: Scalar>(mut base: S, mut e: usize) -> S {
    let mut acc = S::one();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

fn kan_sum<S: Scalar>(spec: &LoopMatrixSpec) -> (Complex64, u64) {
    let reps = spec.reps();
    let n = reps.len();
    let d: usize = reps.iter().sum();
    let half = d / 2;
    let has_loops = spec.loops().iter().any(|z| *z != Complex64::new(0.0, 0.0));
    if !has_loops && d % 2 == 1 {
        return (Complex64::new(0.0, 0.0), 0);
    }

    let pivot = (0..n).max_by_key(|&s| (reps[s], std::cmp::Reverse(s))).unwrap_or(0);
    let limits: Vec<usize> = (0..n).map(|s| if s == pivot { reps[s] / 2 } else { reps[s] }).collect();
    let coef: Vec<Vec<S>> = (0..n)
        .map(|s| {
            let row = binomial_row(reps[s]);
            (0..=limits[s])
                .map(|v| {
                    let mut w = row[v];
                    if v % 2 == 1 {
                        w = -w;
                    }
                    if s == pivot && 2 * v != reps[s] {
                        w = w.mul_f64(2.0);
                    }
                    S::real(w)
                })
                .collect()
        })
        .collect();

    let mut fact = vec![Dd::ONE; d + 1];
    for k in 1..=d {
        fact[k] = fact[k - 1].mul_f64(k as f64);
    }
    let inv_pair: Vec<S> = (0..=half).map(|j| S::real(Dd::ONE / (fact[j] * fact[d - 2 * j]))).collect();

    let base: Vec<Vec<S>> = (0..n).map(|i| (0..n).map(|j| S::from_c64(spec.base()[(i, j)])).collect()).collect();
    let gamma: Vec<S> = spec.loops().iter().map(|z| S::from_c64(*z)).collect();

    let mut lam: Vec<f64> = reps.iter().map(|&r| r as f64 / 2.0).collect();
    let zero = S::from_c64(Complex64::new(0.0, 0.0));
    let mut bl: Vec<S> = (0..n).map(|i| (0..n).fold(zero, |acc, j| acc + base[i][j].scale(lam[j]))).collect();
    let mut nu = vec![0_usize; n];
    let mut acc = S::Acc::default();
    let mut steps = 0_u64;

    loop {
        let mut c = coef[0][nu[0]];
        for s in 1..n {
            c = c * coef[s][nu[s]];
        }
        let mut q = zero;
        for s in 0..n {
            q = q + bl[s].scale(lam[s]);
        }
        let q = q.scale(0.5);
        let value = if has_loops {
            let mut g = zero;
            for s in 0..n {
                g = g + gamma[s].scale(lam[s]);
            }
            let g2 = g * g;
            let mut h = inv_pair[0];
            let mut qp = S::one();
            for cj in &inv_pair[1..] {
                qp = qp * q;
                h = h * g2 + qp * *cj;
            }
            steps += half as u64 + 1;
            if d % 2 == 1 {
                h * g
            } else {
                h
            }
        } else {
            steps += 1;
            pow(q, half) * inv_pair[half]
        };
        S::accumulate(&mut acc, c * value);

        // advance the mixed-radix counter, keeping λ and Bλ in step
        let mut k = 0;
        loop {
            if k == n {
                return (S::finish(acc), steps);
            }
            if nu[k] < limits[k] {
                nu[k] += 1;
                lam[k] -= 1.0;
                for (i, b) in bl.iter_mut().enumerate() {
                    *b = *b - base[i][k];
                }
                break;
            }
            let back = nu[k] as f64;
            nu[k] = 0;
            lam[k] += back;
            for (i, b) in bl.iter_mut().enumerate() {
                *b = *b + base[i][k].scale(back);
            }
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lhaf::lhaf_spm;
    use crate::CVector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_spec() -> LoopMatrixSpec {
        let b = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.2, 0.1),
                c(-0.4, 0.3),
                c(0.1, -0.2),
                c(-0.4, 0.3),
                c(0.5, 0.0),
                c(0.3, 0.3),
                c(0.1, -0.2),
                c(0.3, 0.3),
                c(-0.1, 0.6),
            ],
        );
        let g = CVector::from_row_slice(&[c(0.3, -0.5), c(-0.2, 0.1), c(0.7, 0.2)]);
        LoopMatrixSpec::new(b, g, vec![2, 1, 3]).unwrap()
    }

    #[test]
    fn matches_enumeration() {
        let spec = sample_spec();
        let oracle = lhaf_spm(&spec.expand()).unwrap();
        for p in [Precision::Double, Precision::Extended] {
            let v = lhaf_repeated_with(&spec, p).value;
            assert!((v - oracle).norm() <= 1e-12 * oracle.norm(), "{p:?}: {v} vs {oracle}");
        }
    }

    #[test]
    fn empty_is_one() {
        let spec = LoopMatrixSpec::new(CMatrix::zeros(0, 0), CVector::zeros(0), vec![]).unwrap();
        assert_eq!(lhaf_repeated(&spec), c(1.0, 0.0));
        let spec = LoopMatrixSpec::new(CMatrix::zeros(2, 2), CVector::zeros(2), vec![0, 0]).unwrap();
        assert_eq!(lhaf_repeated(&spec), c(1.0, 0.0));
    }

    #[test]
    fn loops_only() {
        let g = CVector::from_row_slice(&[c(0.5, 0.2), c(-1.1, 0.0), c(0.3, 0.9)]);
        let reps = vec![3, 2, 4];
        let spec = LoopMatrixSpec::new(CMatrix::zeros(3, 3), g.clone(), reps.clone()).unwrap();
        let expect = g[0].powu(3) * g[1].powu(2) * g[2].powu(4);
        assert!((lhaf_repeated(&spec) - expect).norm() < 1e-13 * expect.norm());
    }

    #[test]
    fn zero_reps_drop_out() {
        let spec = sample_spec();
        let mut reps = spec.reps().to_vec();
        reps[1] = 0;
        let with_zero = LoopMatrixSpec::new(spec.base().clone(), spec.loops().clone(), reps).unwrap();
        let keep = [0, 2];
        let deleted = LoopMatrixSpec::new(
            CMatrix::from_fn(2, 2, |a, b| spec.base()[(keep[a], keep[b])]),
            CVector::from_iterator(2, keep.iter().map(|&s| spec.loops()[s])),
            vec![2, 3],
        )
        .unwrap();
        assert!((lhaf_repeated(&with_zero) - lhaf_repeated(&deleted)).norm() < 1e-15);
    }

    #[test]
    fn hafnian_small_cases() {
        let a = c(0.7, -0.3);
        let b = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), a, a, c(0.0, 0.0)]);
        assert!((hafnian_repeated(&b, &[1, 1]).unwrap() - a).norm() < 1e-15);
        assert_eq!(hafnian_repeated(&b, &[2, 1]).unwrap(), c(0.0, 0.0));
        let oracle =
            lhaf_spm(&LoopMatrixSpec::new(b.clone(), CVector::zeros(2), vec![2, 2]).unwrap().expand()).unwrap();
        let v = hafnian_repeated(&b, &[2, 2]).unwrap();
        // perfect matchings of K_{2,2}: two, each a²
        assert!((oracle - 2.0 * a * a).norm() < 1e-15);
        assert!((v - oracle).norm() < 1e-14);
    }

    #[test]
    fn steps_follow_lattice_size() {
        let spec = sample_spec();
        let out = lhaf_repeated_with(&spec, Precision::Double);
        // pivot r=3 is halved to ν ∈ {0, 1}; lattice 3·2·2 points, 1 + ⌊6/2⌋ steps each
        assert_eq!(out.steps, 3 * 2 * 2 * 4);
    }

    #[test]
    fn binomials_exact() {
        let row = binomial_row(60);
        assert_eq!(row[30].hi + row[30].lo, 118_264_581_564_861_424.0);
        assert_eq!(Dd::from_u128(118_264_581_564_861_424), row[30]);
        let big = binomial_row(150);
        assert!((big[75].to_f64() / 9.282_606_973_670_878e43 - 1.0).abs() < 1e-14);
    }
}
