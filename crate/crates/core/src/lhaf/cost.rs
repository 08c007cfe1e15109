//! Operation-count models for computing one Fock matrix element.
//!
//! These compare the repeated-index loop hafnian with a generic loop hafnian
//! algorithm and with brute-force truncated-Fock simulation. The generic and
//! Fock-basis counts are big-O expressions evaluated literally, without
//! constants; they are order-of-magnitude comparators, not cycle counts.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    /// Operation count as a float (can be fractional for odd photon sums).
    pub steps: f64,
    /// The same count as an exact integer, when it is one and fits in `u128`.
    pub exact_steps: Option<u128>,
    /// Geometric mean `G` of the occupation numbers plus one.
    pub geometric_mean: f64,
    /// Arithmetic mean `A` of the occupation numbers plus one.
    pub arithmetic_mean: f64,
}

impl CostEstimate {
    /// Exponential base of the generic-algorithm count, `√2^{A−1}`.
    pub fn generic_base(&self) -> f64 {
        2f64.sqrt().powf(self.arithmetic_mean - 1.0)
    }
}

fn check_pair(n: &[u64], m: &[u64]) -> Result<()> {
    if n.len() != m.len() {
        return Err(Error::InvalidArgument(format!("photon vectors differ in length ({} vs {})", n.len(), m.len())));
    }
    if n.is_empty() {
        return Err(Error::InvalidArgument("photon vectors are empty".into()));
    }
    Ok(())
}

fn means(values: impl Iterator<Item = u64> + Clone) -> (f64, f64) {
    let k = values.clone().count() as f64;
    let log_sum: f64 = values.clone().map(|v| (v as f64).ln()).sum();
    let sum: f64 = values.map(|v| v as f64).sum();
    ((log_sum / k).exp(), sum / k)
}

fn product(mut values: impl Iterator<Item = u64>) -> Option<u128> {
    values.try_fold(1_u128, |acc, v| acc.checked_mul(v as u128))
}

/// Repeated-index loop hafnian for a mixed state:
/// `t = [Π (1+n_s)(1+m_s)]·[1 + ½ Σ (n_s + m_s)]`.
pub fn op_count_mixed(n: &[u64], m: &[u64]) -> Result<CostEstimate> {
    check_pair(n, m)?;
    let plus_one = n.iter().chain(m).map(|v| v + 1);
    let (g, a) = means(plus_one.clone());
    let total: u64 = n.iter().chain(m).sum();
    // 2t = Π·(2 + Σ) keeps the half-integer case exact
    let twice = product(plus_one.clone()).and_then(|p| p.checked_mul(2 + total as u128));
    let steps = plus_one.map(|v| v as f64).product::<f64>() * (1.0 + 0.5 * total as f64);
    Ok(CostEstimate {
        steps,
        exact_steps: twice.filter(|t| t % 2 == 0).map(|t| t / 2),
        geometric_mean: g,
        arithmetic_mean: a,
    })
}

/// Generic loop hafnian, `t′ = D³·2^{D/2}` with `D = Σ (n_s + m_s)`.
///
/// `D = 0` gives zero steps (the expression evaluated literally).
pub fn op_count_generic(n: &[u64], m: &[u64]) -> Result<CostEstimate> {
    check_pair(n, m)?;
    let (g, a) = means(n.iter().chain(m).map(|v| v + 1));
    let d: u64 = n.iter().chain(m).sum();
    let steps = (d as f64).powi(3) * 2f64.powf(d as f64 / 2.0);
    let exact = if d.is_multiple_of(2) {
        (d as u128).checked_pow(3).and_then(|c| 1_u128.checked_shl((d / 2) as u32).and_then(|p| c.checked_mul(p)))
    } else {
        None
    };
    Ok(CostEstimate { steps, exact_steps: exact, geometric_mean: g, arithmetic_mean: a })
}

/// The generic count in mean form, `(ℓA)³·(√2^{A−1})^{2ℓ}`.
pub fn generic_mean_form(n: &[u64], m: &[u64]) -> Result<f64> {
    let est = op_count_generic(n, m)?;
    let l = n.len() as f64;
    Ok((l * est.arithmetic_mean).powi(3) * est.generic_base().powf(2.0 * l))
}

/// Truncated-Fock simulation, `t″ = ℓ²·d⁴·d^{2ℓ}`.
pub fn op_count_fock(num_modes: u64, cutoff: u64) -> Result<CostEstimate> {
    if num_modes == 0 || cutoff == 0 {
        return Err(Error::InvalidArgument("modes and cutoff must be positive".into()));
    }
    let exp = 4 + 2 * num_modes;
    let steps = (num_modes as f64).powi(2) * (cutoff as f64).powf(exp as f64);
    let exact = u32::try_from(exp)
        .ok()
        .and_then(|e| (cutoff as u128).checked_pow(e))
        .and_then(|p| p.checked_mul((num_modes as u128).pow(2)));
    Ok(CostEstimate { steps, exact_steps: exact, geometric_mean: cutoff as f64, arithmetic_mean: cutoff as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PureVariant {
    Tailored,
    Generic,
    Fock,
}

/// Pure-state amplitude counts with `A_p = (1/ℓ)Σ(n_s+1)` and
/// `G_p = [Π(n_s+1)]^{1/ℓ}`:
///
/// - tailored `ℓ·A_p·G_p^ℓ`
/// - generic `(ℓA_p)³·(√2^{A_p−1})^ℓ`
/// - Fock `ℓ²·d²·d^ℓ` (needs `cutoff`)
pub fn op_count_pure(n: &[u64], variant: PureVariant, cutoff: Option<u64>) -> Result<CostEstimate> {
    if n.is_empty() {
        return Err(Error::InvalidArgument("photon vector is empty".into()));
    }
    let l = n.len() as u64;
    let plus_one = n.iter().map(|v| v + 1);
    let (g, a) = means(plus_one.clone());
    let sum_plus_one: u64 = plus_one.clone().sum();
    let total: u64 = n.iter().sum();
    let (steps, exact) = match variant {
        PureVariant::Tailored => {
            let prod = product(plus_one.clone());
            let steps = sum_plus_one as f64 * plus_one.map(|v| v as f64).product::<f64>();
            (steps, prod.and_then(|p| p.checked_mul(sum_plus_one as u128)))
        }
        PureVariant::Generic => {
            let steps = (sum_plus_one as f64).powi(3) * 2f64.powf(total as f64 / 2.0);
            let exact = if total.is_multiple_of(2) {
                (sum_plus_one as u128)
                    .checked_pow(3)
                    .and_then(|c| 1_u128.checked_shl((total / 2) as u32).and_then(|p| c.checked_mul(p)))
            } else {
                None
            };
            (steps, exact)
        }
        PureVariant::Fock => {
            let d = cutoff.ok_or_else(|| Error::InvalidArgument("the Fock count needs a cutoff".into()))?;
            if d == 0 {
                return Err(Error::InvalidArgument("cutoff must be positive".into()));
            }
            let exp = 2 + l;
            let steps = (l as f64).powi(2) * (d as f64).powf(exp as f64);
            let exact = u32::try_from(exp)
                .ok()
                .and_then(|e| (d as u128).checked_pow(e))
                .and_then(|p| p.checked_mul((l as u128).pow(2)));
            (steps, exact)
        }
    };
    Ok(CostEstimate { steps, exact_steps: exact, geometric_mean: g, arithmetic_mean: a })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_three_single_photons() {
        let e = op_count_mixed(&[1, 1, 1], &[1, 1, 1]).unwrap();
        assert_eq!(e.exact_steps, Some(256));
        assert_eq!(e.steps, 256.0);
        assert_eq!(e.geometric_mean, 2.0);
        assert_eq!(e.arithmetic_mean, 2.0);
    }

    #[test]
    fn mixed_vacuum_and_half_integer() {
        assert_eq!(op_count_mixed(&[0, 0], &[0, 0]).unwrap().exact_steps, Some(1));
        let e = op_count_mixed(&[1], &[0]).unwrap();
        assert_eq!(e.steps, 3.0);
        let e = op_count_mixed(&[1, 0], &[0, 0]).unwrap();
        assert_eq!(e.steps, 3.0);
        let e = op_count_mixed(&[2], &[1]).unwrap();
        // 3·2·2.5
        assert_eq!(e.steps, 15.0);
        assert_eq!(e.exact_steps, Some(15));
        let e = op_count_mixed(&[1], &[2, 3]);
        assert!(e.is_err());
    }

    #[test]
    fn mean_form_matches_closed_form() {
        // t = [ℓ(A − 1) + 1]·G^{2ℓ}
        let (n, m) = ([1, 3, 0], [2, 0, 4]);
        let e = op_count_mixed(&n, &m).unwrap();
        let l = 3.0;
        let alt = (l * (e.arithmetic_mean - 1.0) + 1.0) * e.geometric_mean.powf(2.0 * l);
        assert!((alt / e.steps - 1.0).abs() < 1e-12);
        assert!(e.geometric_mean <= e.arithmetic_mean);
    }

    #[test]
    fn generic_counts() {
        assert_eq!(op_count_generic(&[1, 1], &[1, 1]).unwrap().exact_steps, Some(256));
        assert_eq!(op_count_generic(&[0], &[0]).unwrap().steps, 0.0);
        let mut last = -1.0;
        for d in 0..30 {
            let s = op_count_generic(&[d], &[0]).unwrap().steps;
            assert!(s > last);
            last = s;
        }
        let mean_form = generic_mean_form(&[1, 2], &[1, 2]).unwrap();
        // ℓA = 2 + D/2 = 5, 2^{D/2} = 8
        assert!((mean_form - 125.0 * 8.0).abs() < 1e-9);
    }

    #[test]
    fn fock_counts() {
        assert_eq!(op_count_fock(1, 2).unwrap().exact_steps, Some(64));
        assert_eq!(op_count_fock(2, 1).unwrap().exact_steps, Some(4));
        assert_eq!(op_count_fock(3, 20).unwrap().exact_steps, Some(9 * 20_u128.pow(10)));
        assert!(op_count_fock(0, 3).is_err());
    }

    #[test]
    fn pure_means() {
        let e = op_count_pure(&[1, 1], PureVariant::Tailored, None).unwrap();
        assert_eq!((e.geometric_mean, e.arithmetic_mean), (2.0, 2.0));
        assert_eq!(e.exact_steps, Some(16));
        let e = op_count_pure(&[0, 0, 0], PureVariant::Tailored, None).unwrap();
        assert_eq!((e.geometric_mean, e.arithmetic_mean), (1.0, 1.0));
        let e = op_count_pure(&[3, 1, 2], PureVariant::Generic, None).unwrap();
        assert!((e.geometric_mean - 24f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(e.exact_steps, Some(729 * 8));
        let e = op_count_pure(&[1, 2], PureVariant::Fock, Some(10)).unwrap();
        assert_eq!(e.exact_steps, Some(4 * 10_000));
        assert!(op_count_pure(&[1], PureVariant::Fock, None).is_err());
    }
}
