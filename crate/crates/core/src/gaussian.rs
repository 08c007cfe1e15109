//! Multimode Gaussian states in the complex amplitude convention.
//!
//! A state on `ℓ` modes is stored as the mean vector `β = ⟨ζ⟩` and the
//! covariance `σ_jk = ⟨{ζ_j, ζ_k†}⟩/2 − β_j β_k*` over the operator vector
//! `ζ = (a₁, …, a_ℓ, a₁†, …, a_ℓ†)`. Index `s` addresses `a_s` and `s + ℓ`
//! addresses `a_s†`. Vacuum has `σ = ½·I`.
//!
//! Mode indices in this module are zero-based.
//!
//! Gates act in the Heisenberg picture: a unitary `U` maps `ζ → Sζ` with
//! `S = [[M, N], [N*, M*]]`, so the moments transform as `β → Sβ` and
//! `σ → SσS†`.

use nalgebra::{Cholesky, SymmetricEigen};
use num_complex::Complex64;

use crate::{CMatrix, CVector, Error, Result};

const STRUCTURE_TOL: f64 = 1e-10;
/// Largest condition number of `σ_Q` accepted by [`GaussianState::husk`].
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    num_modes: usize,
    means: CVector,
    cov: CMatrix,
}

/// Quantities derived from `σ_Q = σ + ½I` that feed every Fock matrix element.
#[derive(Debug, Clone)]
pub struct HuskQuantities {
    pub sigma_q: CMatrix,
    /// `A = X(I − σ_Q⁻¹)`, symmetric.
    pub a_mat: CMatrix,
    /// `γᵀ = β†σ_Q⁻¹`; the second half is the conjugate of the first.
    pub gamma: CVector,
    /// `−½ β†σ_Q⁻¹β − ½ ln det σ_Q`.
    pub log_prefactor_core: Complex64,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl GaussianState {
    pub fn vacuum(num_modes: usize) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::InvalidArgument("a state needs at least one mode".into()));
        }
        let dim = 2 * num_modes;
        Ok(GaussianState { num_modes, means: CVector::zeros(dim), cov: CMatrix::identity(dim, dim) * c(0.5, 0.0) })
    }

    /// Builds a state from raw moments, checking every structural invariant.
    pub fn from_parts(means: CVector, cov: CMatrix) -> Result<Self> {
        let dim = means.len();
        if dim == 0 || !dim.is_multiple_of(2) || cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::InvalidArgument(format!(
                "means of length {} and covariance {}x{} do not describe a mode set",
                dim,
                cov.nrows(),
                cov.ncols()
            )));
        }
        let state = GaussianState { num_modes: dim / 2, means, cov };
        state.validate()?;
        Ok(state)
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn means(&self) -> &CVector {
        &self.means
    }

    pub fn cov(&self) -> &CMatrix {
        &self.cov
    }

    /// Checks conjugate pairing of the means, Hermiticity and block structure
    /// of `σ`, and positivity of `σ_Q`.
    pub fn validate(&self) -> Result<()> {
        let l = self.num_modes;
        let scale = max_abs(&self.cov).max(1.0);
        for s in 0..l {
            let dev = (self.means[s + l] - self.means[s].conj()).norm();
            if dev > STRUCTURE_TOL * self.means[s].norm().max(1.0) {
                return Err(Error::Unphysical(format!(
                    "means are not conjugate-paired on mode {s} (deviation {dev:.3e})"
                )));
            }
        }
        let herm = max_abs(&(&self.cov - self.cov.adjoint()));
        if herm > STRUCTURE_TOL * scale {
            return Err(Error::Unphysical(format!("covariance is not Hermitian ({herm:.3e})")));
        }
        // σ = [[W, Y*], [Y, W*]]
        let mut block = 0.0_f64;
        for i in 0..l {
            for j in 0..l {
                block = block
                    .max((self.cov[(i + l, j + l)] - self.cov[(i, j)].conj()).norm())
                    .max((self.cov[(i, j + l)] - self.cov[(i + l, j)].conj()).norm())
                    .max((self.cov[(i + l, j)] - self.cov[(j + l, i)]).norm());
            }
        }
        if block > STRUCTURE_TOL * scale {
            return Err(Error::Unphysical(format!(
                "covariance lacks the [[W, Y*], [Y, W*]] block structure ({block:.3e})"
            )));
        }
        let eig = SymmetricEigen::new(self.sigma_q()).eigenvalues;
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            return Err(Error::Unphysical(format!("σ + ½I is not positive definite (λ_min = {min:.3e})")));
        }
        Ok(())
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.num_modes {
            Err(Error::ModeOutOfRange { index: mode, num_modes: self.num_modes })
        } else {
            Ok(())
        }
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_mode(i)?;
        self.check_mode(j)?;
        if i == j {
            return Err(Error::SameMode(i));
        }
        Ok(())
    }

    /// Applies `ζ → Sζ` where `S` acts on `modes` through the local blocks
    /// `a → M a + N a†`.
    fn apply_local(&self, modes: &[usize], m: &[[Complex64; 2]; 2], n: &[[Complex64; 2]; 2]) -> Self {
        let l = self.num_modes;
        let dim = 2 * l;
        let mut s = CMatrix::identity(dim, dim);
        for (a, &ma) in modes.iter().enumerate() {
            for (b, &mb) in modes.iter().enumerate() {
                s[(ma, mb)] = m[a][b];
                s[(ma, mb + l)] = n[a][b];
                s[(ma + l, mb)] = n[a][b].conj();
                s[(ma + l, mb + l)] = m[a][b].conj();
            }
        }
        let means = &s * &self.means;
        let cov = &s * &self.cov * s.adjoint();
        GaussianState { num_modes: l, means, cov: hermitize(cov) }
    }

    /// Single-mode squeezer `exp[½(z* a² − z a†²)]`:
    /// `a → cosh r · a − e^{iθ} sinh r · a†` with `z = r e^{iθ}`.
    pub fn squeeze(&self, mode: usize, z: Complex64) -> Result<Self> {
        self.check_mode(mode)?;
        let (r, theta) = z.to_polar();
        let zero = Complex64::default();
        let m = [[c(r.cosh(), 0.0), zero], [zero, zero]];
        let n = [[-Complex64::from_polar(r.sinh(), theta), zero], [zero, zero]];
        Ok(self.apply_local(&[mode], &m, &n))
    }

    /// Two-mode squeezer `exp(ζ* a_i a_j − ζ a_i† a_j†)`.
    pub fn two_mode_squeeze(&self, i: usize, j: usize, zeta: Complex64) -> Result<Self> {
        self.check_pair(i, j)?;
        let (r, theta) = zeta.to_polar();
        let ch = c(r.cosh(), 0.0);
        let sh = -Complex64::from_polar(r.sinh(), theta);
        let zero = Complex64::default();
        let m = [[ch, zero], [zero, ch]];
        let n = [[zero, sh], [sh, zero]];
        Ok(self.apply_local(&[i, j], &m, &n))
    }

    /// Beamsplitter `exp[θ(e^{iφ} a_i a_j† − e^{−iφ} a_i† a_j)]`:
    /// `a_i → cos θ a_i − e^{−iφ} sin θ a_j`, `a_j → e^{iφ} sin θ a_i + cos θ a_j`.
    pub fn beamsplitter(&self, i: usize, j: usize, theta: f64, phi: f64) -> Result<Self> {
        self.check_pair(i, j)?;
        let (st, ct) = theta.sin_cos();
        let zero = Complex64::default();
        let m = [[c(ct, 0.0), -Complex64::from_polar(st, -phi)], [Complex64::from_polar(st, phi), c(ct, 0.0)]];
        Ok(self.apply_local(&[i, j], &m, &[[zero; 2]; 2]))
    }

    /// Displacement `exp(α a† − α* a)`.
    pub fn displace(&self, mode: usize, alpha: Complex64) -> Result<Self> {
        self.check_mode(mode)?;
        let mut out = self.clone();
        out.means[mode] += alpha;
        out.means[mode + self.num_modes] += alpha.conj();
        Ok(out)
    }

    /// Pure-loss channel with transmission `eta`: the mode is mixed with
    /// vacuum, `β → √η β` and `σ → KσK + (1 − η)·½` on the mode block, where
    /// `K` scales the mode's rows and columns by `√η`.
    pub fn loss(&self, mode: usize, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || eta.is_nan() {
            return Err(Error::InvalidTransmission(eta));
        }
        self.check_mode(mode)?;
        let l = self.num_modes;
        let t = eta.sqrt();
        let mut out = self.clone();
        for idx in [mode, mode + l] {
            out.means[idx] *= t;
            for k in 0..2 * l {
                out.cov[(idx, k)] *= t;
                out.cov[(k, idx)] *= t;
            }
        }
        for idx in [mode, mode + l] {
            out.cov[(idx, idx)] += c(0.5 * (1.0 - eta), 0.0);
        }
        Ok(out)
    }

    /// Marginal state on `keep` (in the given order).
    pub fn reduce(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidArgument("reduce needs at least one mode to keep".into()));
        }
        for (k, &m) in keep.iter().enumerate() {
            self.check_mode(m)?;
            if keep[..k].contains(&m) {
                return Err(Error::InvalidArgument(format!("mode {m} listed twice")));
            }
        }
        let l = self.num_modes;
        let idx: Vec<usize> = keep.iter().copied().chain(keep.iter().map(|&m| m + l)).collect();
        let means = CVector::from_iterator(idx.len(), idx.iter().map(|&i| self.means[i]));
        let cov = CMatrix::from_fn(idx.len(), idx.len(), |a, b| self.cov[(idx[a], idx[b])]);
        Ok(GaussianState { num_modes: keep.len(), means, cov })
    }

    /// Reorders modes so that new mode `k` is old mode `order[k]`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.num_modes {
            return Err(Error::InvalidArgument(format!(
                "permutation of length {} for {} modes",
                order.len(),
                self.num_modes
            )));
        }
        self.reduce(order)
    }

    pub fn sigma_q(&self) -> CMatrix {
        let dim = 2 * self.num_modes;
        &self.cov + CMatrix::identity(dim, dim) * c(0.5, 0.0)
    }

    /// `⟨a_s† a_s⟩ = σ_ss − ½ + |β_s|²`.
    pub fn mean_photon(&self, mode: usize) -> Result<f64> {
        self.check_mode(mode)?;
        Ok(self.cov[(mode, mode)].re - 0.5 + self.means[mode].norm_sqr())
    }

    pub fn total_mean_photon(&self) -> f64 {
        (0..self.num_modes).map(|s| self.cov[(s, s)].re - 0.5 + self.means[s].norm_sqr()).sum()
    }

    /// Symplectic eigenvalues `ν₁ ≤ … ≤ ν_ℓ` (each ≥ ½ for a physical state).
    ///
    /// Computed as the positive eigenvalues of the Hermitian matrix
    /// `σ^{1/2} Z σ^{1/2}`, `Z = diag(I, −I)`, which is similar to `Zσ`.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let l = self.num_modes;
        let eig = SymmetricEigen::new(self.cov.clone());
        let sqrt_vals = eig.eigenvalues.map(|v| Complex64::from(v.max(0.0).sqrt()));
        let root = &eig.eigenvectors * CMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.adjoint();
        let z = CMatrix::from_fn(2 * l, 2 * l, |i, j| {
            if i != j {
                Complex64::default()
            } else if i < l {
                c(1.0, 0.0)
            } else {
                c(-1.0, 0.0)
            }
        });
        let h = hermitize(&root * z * &root);
        let mut vals: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().filter(|v| **v > 0.0).cloned().collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        vals
    }

    /// Purity `Tr ρ² = Π (2ν_s)⁻¹`.
    pub fn purity(&self) -> f64 {
        self.symplectic_eigenvalues().iter().map(|v| 1.0 / (2.0 * v)).product()
    }

    pub fn husk(&self) -> Result<HuskQuantities> {
        let l = self.num_modes;
        let dim = 2 * l;
        let sigma_q = hermitize(self.sigma_q());
        let eig = SymmetricEigen::new(sigma_q.clone()).eigenvalues;
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(min > 0.0) {
            return Err(Error::Unphysical(format!("σ_Q is not positive definite (λ_min = {min:.3e})")));
        }
        if max / min > MAX_CONDITION {
            return Err(Error::Unphysical(format!("σ_Q is ill-conditioned (κ = {:.3e})", max / min)));
        }
        let chol = Cholesky::new(sigma_q.clone())
            .ok_or_else(|| Error::Unphysical("Cholesky factorisation of σ_Q failed".into()))?;
        let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.re.ln()).sum::<f64>();
        let inv = hermitize(chol.inverse());

        let mut a_mat = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            let src = if i < l { i + l } else { i - l };
            for j in 0..dim {
                let delta = if src == j { c(1.0, 0.0) } else { Complex64::default() };
                a_mat[(i, j)] = delta - inv[(src, j)];
            }
        }
        let a_mat = (&a_mat + a_mat.transpose()) * c(0.5, 0.0);

        // γᵀ = β†σ_Q⁻¹
        let gamma = (self.means.adjoint() * &inv).transpose();
        let quad = (self.means.adjoint() * &inv * &self.means)[(0, 0)];
        let log_prefactor_core = -0.5 * quad - c(0.5 * log_det, 0.0);
        Ok(HuskQuantities { sigma_q, a_mat, gamma, log_prefactor_core })
    }
}

fn hermitize(m: CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (m + adj) * c(0.5, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tmsv(r: f64) -> GaussianState {
        GaussianState::vacuum(2).unwrap().two_mode_squeeze(0, 1, c(r, 0.0)).unwrap()
    }

    fn max_diff(a: &GaussianState, b: &GaussianState) -> f64 {
        max_abs(&(&a.cov - &b.cov)).max((&a.means - &b.means).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    #[test]
    fn vacuum_moments() {
        let v = GaussianState::vacuum(3).unwrap();
        assert_eq!(v.means().len(), 6);
        assert!(v.means().iter().all(|z| *z == Complex64::default()));
        assert_eq!(v.cov(), &(CMatrix::identity(6, 6) * c(0.5, 0.0)));
        assert_eq!(v.sigma_q(), CMatrix::identity(6, 6));
        assert!(GaussianState::vacuum(0).is_err());
    }

    #[test]
    fn squeezed_vacuum_photon_number() {
        for r in [0.1, 0.5, 1.3] {
            for theta in [0.0, 0.7, -2.0] {
                let s = GaussianState::vacuum(1).unwrap().squeeze(0, Complex64::from_polar(r, theta)).unwrap();
                assert_abs_diff_eq!(s.mean_photon(0).unwrap(), r.sinh().powi(2), epsilon = 1e-12);
                s.validate().unwrap();
            }
        }
    }

    #[test]
    fn zero_parameters_are_identity() {
        let s = GaussianState::vacuum(2).unwrap().squeeze(0, c(0.4, 0.2)).unwrap().displace(1, c(0.3, -0.1)).unwrap();
        assert!(max_diff(&s, &s.squeeze(0, Complex64::default()).unwrap()) < 1e-15);
        assert!(max_diff(&s, &s.two_mode_squeeze(0, 1, Complex64::default()).unwrap()) < 1e-15);
        assert!(max_diff(&s, &s.beamsplitter(0, 1, 0.0, 1.1).unwrap()) < 1e-15);
        assert!(max_diff(&s, &s.displace(0, Complex64::default()).unwrap()) < 1e-15);
        assert!(max_diff(&s, &s.loss(1, 1.0).unwrap()) < 1e-15);
    }

    #[test]
    fn tmsv_marginal_is_thermal() {
        let t = tmsv(1.0);
        assert_abs_diff_eq!(t.mean_photon(0).unwrap(), 1.0_f64.sinh().powi(2), epsilon = 1e-12);
        let red = t.reduce(&[0]).unwrap();
        assert_abs_diff_eq!(red.mean_photon(0).unwrap(), 1.381_097_845_541_816, epsilon = 1e-12);
        // a thermal state has no anomalous correlation
        assert!(red.cov()[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn beamsplitter_transmission() {
        let s = GaussianState::vacuum(2).unwrap().displace(0, c(1.0, 0.0)).unwrap();
        let theta = 0.97_f64.sqrt().acos();
        let out = s.beamsplitter(0, 1, theta, 0.3).unwrap();
        assert_abs_diff_eq!(out.mean_photon(0).unwrap(), 0.97, epsilon = 1e-12);
        assert_abs_diff_eq!(out.mean_photon(1).unwrap(), 0.03, epsilon = 1e-12);
        let vac = GaussianState::vacuum(2).unwrap();
        assert!(max_diff(&vac, &vac.beamsplitter(0, 1, 0.4, 0.2).unwrap()) < 1e-15);
    }

    #[test]
    fn displacement_inverse() {
        let s = tmsv(0.4).squeeze(1, c(0.2, 0.3)).unwrap();
        let a = c(0.7, -0.4);
        let back = s.displace(1, a).unwrap().displace(1, -a).unwrap();
        assert!(max_diff(&s, &back) < 1e-12);
    }

    #[test]
    fn loss_limits_and_composition() {
        let s = GaussianState::vacuum(1).unwrap().squeeze(0, c(0.8, 0.3)).unwrap().displace(0, c(0.5, 0.5)).unwrap();
        let gone = s.loss(0, 0.0).unwrap();
        assert!(max_diff(&gone, &GaussianState::vacuum(1).unwrap()) < 1e-15);
        let two = s.loss(0, 0.7).unwrap().loss(0, 0.6).unwrap();
        let one = s.loss(0, 0.42).unwrap();
        assert!(max_diff(&one, &two) < 1e-12);
        assert!(matches!(s.loss(0, 1.2), Err(Error::InvalidTransmission(_))));
        assert!(s.loss(0, -0.1).is_err());
        let t = tmsv(1.0).loss(0, 0.6).unwrap();
        assert_abs_diff_eq!(t.mean_photon(0).unwrap(), 0.6 * 1.0_f64.sinh().powi(2), epsilon = 1e-12);
    }

    #[test]
    fn index_errors() {
        let s = GaussianState::vacuum(2).unwrap();
        assert!(matches!(s.squeeze(2, c(0.1, 0.0)), Err(Error::ModeOutOfRange { .. })));
        assert!(matches!(s.two_mode_squeeze(1, 1, c(0.1, 0.0)), Err(Error::SameMode(1))));
        assert!(matches!(s.beamsplitter(0, 0, 0.1, 0.0), Err(Error::SameMode(0))));
        assert!(s.displace(5, c(0.1, 0.0)).is_err());
        assert!(s.reduce(&[]).is_err());
        assert!(s.reduce(&[0, 0]).is_err());
    }

    #[test]
    fn reduce_keeps_vacuum() {
        let v = GaussianState::vacuum(3).unwrap().reduce(&[0, 1]).unwrap();
        assert_eq!(v, GaussianState::vacuum(2).unwrap());
    }

    #[test]
    fn husk_of_vacuum() {
        let h = GaussianState::vacuum(1).unwrap().husk().unwrap();
        assert_eq!(h.sigma_q, CMatrix::identity(2, 2));
        assert!(max_abs(&h.a_mat) < 1e-15);
        assert!(h.gamma.iter().all(|g| g.norm() < 1e-15));
        assert!(h.log_prefactor_core.norm() < 1e-15);
    }

    #[test]
    fn husk_of_coherent_state() {
        let a = c(0.7, 0.2);
        let h = GaussianState::vacuum(1).unwrap().displace(0, a).unwrap().husk().unwrap();
        assert_abs_diff_eq!(h.gamma[0].re, a.conj().re, epsilon = 1e-15);
        assert_abs_diff_eq!(h.gamma[0].im, a.conj().im, epsilon = 1e-15);
        assert_abs_diff_eq!(h.gamma[1].im, a.im, epsilon = 1e-15);
        assert_abs_diff_eq!(h.log_prefactor_core.re, -a.norm_sqr(), epsilon = 1e-15);
    }

    #[test]
    fn husk_of_tmsv_has_tanh_coupling() {
        let r = 0.6;
        let h = tmsv(r).husk().unwrap();
        // only the a₁a₂ and a₁†a₂† couplings survive
        for i in 0..4 {
            for j in 0..4 {
                let expect = match (i, j) {
                    (0, 1) | (1, 0) => -r.tanh(),
                    (2, 3) | (3, 2) => -r.tanh(),
                    _ => 0.0,
                };
                assert_abs_diff_eq!(h.a_mat[(i, j)].re, expect, epsilon = 1e-12);
                assert_abs_diff_eq!(h.a_mat[(i, j)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn husk_rejects_unphysical() {
        let mut cov = CMatrix::identity(2, 2) * c(0.5, 0.0);
        cov[(0, 0)] = c(-0.6, 0.0);
        cov[(1, 1)] = c(-0.6, 0.0);
        let s = GaussianState { num_modes: 1, means: CVector::zeros(2), cov };
        assert!(matches!(s.husk(), Err(Error::Unphysical(_))));
        assert!(GaussianState::from_parts(s.means.clone(), s.cov.clone()).is_err());
    }

    #[test]
    fn husk_reconstructs_a() {
        let s = tmsv(0.5)
            .squeeze(0, c(0.3, -0.2))
            .unwrap()
            .beamsplitter(0, 1, 0.4, 0.9)
            .unwrap()
            .loss(1, 0.7)
            .unwrap()
            .displace(0, c(0.2, 0.1))
            .unwrap();
        let h = s.husk().unwrap();
        let l = 2;
        let x =
            CMatrix::from_fn(4, 4, |i, j| if (i + l) % 4 == j || (j + l) % 4 == i { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let inv = h.sigma_q.clone().try_inverse().unwrap();
        let lhs = &x * &h.a_mat;
        let rhs = CMatrix::identity(4, 4) - inv;
        assert!(max_abs(&(lhs - rhs)) < 1e-10);
        assert!(max_abs(&(&h.a_mat - h.a_mat.transpose())) < 1e-12);
        for k in 0..l {
            assert!((h.gamma[k + l] - h.gamma[k].conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn symplectic_spectrum() {
        let s = tmsv(0.7);
        for v in s.symplectic_eigenvalues() {
            assert_abs_diff_eq!(v, 0.5, epsilon = 1e-10);
        }
        let red = s.reduce(&[0]).unwrap();
        let nbar = 0.7_f64.sinh().powi(2);
        assert_abs_diff_eq!(red.symplectic_eigenvalues()[0], nbar + 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(red.purity(), 1.0 / (2.0 * nbar + 1.0), epsilon = 1e-10);
    }
}
