//! Fock matrix elements of Gaussian states and heralded single-mode states.
//!
//! `⟨m|ρ|n⟩ = T·lhaf(Ã)` where `Ã` repeats index `s` of `A` `n_s` times and
//! index `s + ℓ` `m_s` times, with `γ` on the diagonal, and
//! `T = exp(−½β†σ_Q⁻¹β) / √(det σ_Q · Π n_s! m_s!)`. The prefactor is built in
//! log space.
//!
//! Heralding measures photon numbers on the first `ℓ − 1` modes and keeps the
//! last one. Use [`GaussianState::permute_modes`] or [`move_mode_last`] to
//! herald a different mode.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::lhaf::{lhaf_repeated_with, LoopMatrixSpec, Precision, MAX_DIMENSION};
use crate::{CMatrix, CVector, Error, GaussianState, HuskQuantities, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeraldPattern {
    pub counts: Vec<usize>,
}

impl HeraldPattern {
    pub fn new(counts: Vec<usize>) -> Self {
        HeraldPattern { counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Truncated single-mode density matrix `ρ_{nm} = ⟨n|ρ|m⟩`, `0 ≤ n, m < d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    entries: CMatrix,
    normalized: bool,
}

impl FockDensityMatrix {
    pub fn new(entries: CMatrix, normalized: bool) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "density matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(FockDensityMatrix { entries, normalized })
    }

    /// `|ψ⟩⟨ψ|` for the given amplitudes.
    pub fn from_pure(amplitudes: &[Complex64]) -> Result<Self> {
        let psi = CVector::from_row_slice(amplitudes);
        FockDensityMatrix::new(&psi * psi.adjoint(), true)
    }

    pub fn fock(n: usize, cutoff: usize) -> Result<Self> {
        if n >= cutoff {
            return Err(Error::InvalidArgument(format!("|{n}⟩ does not fit below cutoff {cutoff}")));
        }
        let mut m = CMatrix::zeros(cutoff, cutoff);
        m[(n, n)] = Complex64::new(1.0, 0.0);
        FockDensityMatrix::new(m, true)
    }

    pub fn cutoff(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    /// Largest entry of `|ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    pub fn mean_photon(&self) -> f64 {
        self.entries.diagonal().iter().enumerate().map(|(n, z)| n as f64 * z.re).sum()
    }

    /// `⟨a⟩ = Σ_n √(n+1) ρ_{n,n+1}`.
    pub fn mean_amplitude(&self) -> Complex64 {
        (0..self.cutoff().saturating_sub(1)).map(|n| self.entries[(n, n + 1)] * ((n + 1) as f64).sqrt()).sum()
    }

    /// Leading `d×d` block.
    pub fn truncated(&self, d: usize) -> FockDensityMatrix {
        let d = d.min(self.cutoff()).max(1);
        FockDensityMatrix { entries: self.entries.view((0, 0), (d, d)).into_owned(), normalized: false }
    }

    pub fn normalize(&self) -> Result<FockDensityMatrix> {
        let t = self.trace();
        if !(t > 0.0) {
            return Err(Error::ZeroProbability);
        }
        Ok(FockDensityMatrix { entries: &self.entries / Complex64::new(t, 0.0), normalized: true })
    }

    /// Checks Hermiticity, and for normalized matrices also unit trace and a
    /// nonnegative spectrum.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-9 {
            return Err(Error::Unphysical(format!("density matrix is not Hermitian ({herm:.3e})")));
        }
        if self.normalized {
            let t = self.trace();
            if (t - 1.0).abs() > 1e-9 {
                return Err(Error::Unphysical(format!("trace is {t}")));
            }
            let min = self.min_eigenvalue();
            if min < -1e-8 {
                return Err(Error::Unphysical(format!("negative eigenvalue {min:.3e}")));
            }
        }
        Ok(())
    }
}

/// Fock-element evaluator with the husk quantities of one state cached.
#[derive(Debug, Clone)]
pub struct FockEngine {
    num_modes: usize,
    husk: HuskQuantities,
    precision: Precision,
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

impl FockEngine {
    pub fn new(state: &GaussianState) -> Result<Self> {
        Ok(FockEngine { num_modes: state.num_modes(), husk: state.husk()?, precision: Precision::Auto })
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn husk(&self) -> &HuskQuantities {
        &self.husk
    }

    /// `⟨m|ρ|n⟩`.
    pub fn element(&self, m: &[usize], n: &[usize]) -> Result<Complex64> {
        let l = self.num_modes;
        if m.len() != l || n.len() != l {
            return Err(Error::InvalidArgument(format!(
                "Fock vectors of length {} and {} for {} modes",
                m.len(),
                n.len(),
                l
            )));
        }
        let reps: Vec<usize> = n.iter().chain(m).copied().collect();
        let d: usize = reps.iter().sum();
        if d > MAX_DIMENSION {
            return Err(Error::Overflow(format!("total photon number {d} exceeds {MAX_DIMENSION}")));
        }
        let spec = LoopMatrixSpec::new(self.husk.a_mat.clone(), self.husk.gamma.clone(), reps)?;
        let lhaf = lhaf_repeated_with(&spec, self.precision).value;
        let log_fact: f64 = n.iter().chain(m).map(|&k| ln_factorial(k)).sum();
        let t = (self.husk.log_prefactor_core - Complex64::new(0.5 * log_fact, 0.0)).exp();
        let value = t * lhaf;
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Overflow(format!("non-finite Fock element for m={m:?}, n={n:?}")));
        }
        Ok(value)
    }
}

/// `⟨m|ρ|n⟩` of a Gaussian state.
pub fn fock_element(state: &GaussianState, m: &[usize], n: &[usize]) -> Result<Complex64> {
    FockEngine::new(state)?.element(m, n)
}

/// Moves `mode` to the last position, keeping the others in order.
pub fn move_mode_last(state: &GaussianState, mode: usize) -> Result<GaussianState> {
    let l = state.num_modes();
    if mode >= l {
        return Err(Error::ModeOutOfRange { index: mode, num_modes: l });
    }
    let order: Vec<usize> = (0..l).filter(|&s| s != mode).chain(std::iter::once(mode)).collect();
    state.permute_modes(&order)
}

fn check_pattern(state: &GaussianState, pattern: &HeraldPattern) -> Result<()> {
    let l = state.num_modes();
    if l < 2 {
        return Err(Error::InvalidArgument("heralding needs at least two modes".into()));
    }
    if pattern.counts.len() != l - 1 {
        return Err(Error::InvalidArgument(format!(
            "pattern has {} counts for {} detected modes",
            pattern.counts.len(),
            l - 1
        )));
    }
    Ok(())
}

/// Heralded-matrix builder that keeps already computed entries when the
/// cutoff grows.
struct HeraldFill {
    engine: FockEngine,
    pattern: Vec<usize>,
    entries: CMatrix,
}

impl HeraldFill {
    fn new(state: &GaussianState, pattern: &HeraldPattern) -> Result<Self> {
        check_pattern(state, pattern)?;
        Ok(HeraldFill {
            engine: FockEngine::new(state)?,
            pattern: pattern.counts.clone(),
            entries: CMatrix::zeros(0, 0),
        })
    }

    fn entry(&self, row: usize, col: usize) -> Result<Complex64> {
        let mut bra = self.pattern.clone();
        bra.push(row);
        let mut ket = self.pattern.clone();
        ket.push(col);
        self.engine.element(&bra, &ket)
    }

    /// Grows to cutoff `d`, computing the upper triangle and mirroring it.
    fn grow(&mut self, d: usize) -> Result<()> {
        let old = self.entries.nrows();
        if d <= old {
            return Ok(());
        }
        let pairs: Vec<(usize, usize)> =
            (0..d).flat_map(|col| (0..=col).map(move |row| (row, col))).filter(|&(_, col)| col >= old).collect();
        let values: Vec<Complex64> = pairs.par_iter().map(|&(r, c)| self.entry(r, c)).collect::<Result<_>>()?;
        let mut next = CMatrix::zeros(d, d);
        next.view_mut((0, 0), (old, old)).copy_from(&self.entries);
        for (&(r, c), v) in pairs.iter().zip(values) {
            if r == c {
                next[(r, c)] = Complex64::new(v.re, 0.0);
            } else {
                next[(r, c)] = v;
                next[(c, r)] = v.conj();
            }
        }
        self.entries = next;
        Ok(())
    }
}

/// Unnormalized heralded state `ρ̃` at cutoff `d` together with `p̃ = Tr ρ̃`.
pub fn herald_raw(state: &GaussianState, pattern: &HeraldPattern, cutoff: usize) -> Result<(FockDensityMatrix, f64)> {
    if cutoff < 1 {
        return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
    }
    let mut fill = HeraldFill::new(state, pattern)?;
    fill.grow(cutoff)?;
    let rho = FockDensityMatrix::new(fill.entries, false)?;
    let p = rho.trace();
    Ok((rho, p))
}

/// Like [`herald_raw`] but computes every entry independently, without
/// imposing Hermitian symmetry. Diagnostic use.
pub fn herald_raw_unsymmetrized(
    state: &GaussianState,
    pattern: &HeraldPattern,
    cutoff: usize,
) -> Result<FockDensityMatrix> {
    if cutoff < 1 {
        return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
    }
    let fill = HeraldFill::new(state, pattern)?;
    let values: Vec<Complex64> =
        (0..cutoff * cutoff).into_par_iter().map(|k| fill.entry(k / cutoff, k % cutoff)).collect::<Result<_>>()?;
    FockDensityMatrix::new(CMatrix::from_row_slice(cutoff, cutoff, &values), false)
}

/// Exact probability `p = ⟨n_h|ρ_{[ℓ−1]}|n_h⟩` of the detection pattern.
pub fn herald_probability_exact(state: &GaussianState, pattern: &HeraldPattern) -> Result<f64> {
    check_pattern(state, pattern)?;
    let detected: Vec<usize> = (0..state.num_modes() - 1).collect();
    let marginal = state.reduce(&detected)?;
    let p = fock_element(&marginal, &pattern.counts, &pattern.counts)?;
    Ok(p.re)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub d_max: usize,
    /// Starting cutoff; `None` uses `max(4, 2⌈⟨n⟩⌉ + 4)` of the heralded mode.
    pub initial_cutoff: Option<usize>,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions { rel_tol: 1e-6, d_max: 512, initial_cutoff: None }
    }
}

#[derive(Debug, Clone)]
pub struct HeraldOutcome {
    /// Normalized heralded state at the trimmed cutoff.
    pub rho: FockDensityMatrix,
    /// Exact detection probability.
    pub probability: f64,
    /// Smallest cutoff whose trace meets the tolerance.
    pub cutoff: usize,
    /// Unnormalized state at the largest cutoff that was computed.
    pub raw: FockDensityMatrix,
    /// `(d, p̃(d))` at every cutoff of the doubling schedule.
    pub schedule: Vec<(usize, f64)>,
}

impl HeraldOutcome {
    /// `p̃(d)` for every `d = 1..=raw.cutoff()`.
    pub fn partial_traces(&self) -> Vec<f64> {
        let diag = self.raw.entries().diagonal();
        diag.iter()
            .scan(0.0, |acc, z| {
                *acc += z.re;
                Some(*acc)
            })
            .collect()
    }
}

/// Heralds with a cutoff that doubles until `|p − p̃(d)|/p ≤ rel_tol`.
pub fn herald_adaptive(
    state: &GaussianState,
    pattern: &HeraldPattern,
    opts: &AdaptiveOptions,
) -> Result<HeraldOutcome> {
    if !(opts.rel_tol > 0.0 && opts.rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!("rel_tol {} is outside (0, 1)", opts.rel_tol)));
    }
    if opts.d_max < 1 {
        return Err(Error::InvalidArgument("d_max must be at least 1".into()));
    }
    check_pattern(state, pattern)?;
    let p = herald_probability_exact(state, pattern)?;
    if !(p > 1e-300) {
        return Err(Error::ZeroProbability);
    }
    let out_mode = state.num_modes() - 1;
    let nbar = state.mean_photon(out_mode)?.max(0.0);
    // the largest element ⟨d−1|·|d−1⟩ has D = 2(H + d − 1)
    let d_cap = opts.d_max.min((MAX_DIMENSION / 2).saturating_sub(pattern.total()) + 1).max(1);
    let mut d = opts.initial_cutoff.unwrap_or_else(|| 4.max(2 * nbar.ceil() as usize + 4)).clamp(1, d_cap);

    let mut fill = HeraldFill::new(state, pattern)?;
    let mut schedule = Vec::new();
    loop {
        fill.grow(d)?;
        // diagonal entries are joint probabilities; zero out roundoff-level negatives
        let floor = 1e-12 * p;
        for k in 0..d {
            let z = &mut fill.entries[(k, k)];
            if z.re < 0.0 && z.re >= -floor {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        let p_tilde: f64 = fill.entries.diagonal().iter().map(|z| z.re).sum();
        schedule.push((d, p_tilde));
        let residual = (p - p_tilde).abs() / p;
        if residual <= opts.rel_tol {
            break;
        }
        if d >= d_cap {
            return Err(Error::CutoffNotConverged { cutoff: d, residual });
        }
        d = (2 * d).min(d_cap);
    }

    let raw = FockDensityMatrix::new(fill.entries, false)?;
    let mut acc = 0.0;
    let mut used = raw.cutoff();
    for (k, z) in raw.entries().diagonal().iter().enumerate() {
        acc += z.re;
        if (p - acc).abs() / p <= opts.rel_tol {
            used = k + 1;
            break;
        }
    }
    let rho = raw.truncated(used).normalize()?;
    Ok(HeraldOutcome { rho, probability: p, cutoff: used, raw, schedule })
}
