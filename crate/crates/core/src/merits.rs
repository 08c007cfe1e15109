//! Figures of merit for heralded single-mode states: fidelity to a pure
//! target, the Wigner function and the Wigner logarithmic negativity.
//!
//! The Wigner function is evaluated directly from the Fock representation in
//! the convention `α = (x + ip)/√2`, so the vacuum peaks at `1/π` and
//! `∫ W dx dp = 1`. The same `dx dp` measure is used for the negativity.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::{Error, FockDensityMatrix, Result};

/// Truncation losses above this are reported by [`PureTarget::is_truncated`].
pub const TRUNCATION_FLAG: f64 = 1e-6;

/// Normalized pure state `|ψ⟩ = Σ_n ψ_n |n⟩` truncated at `d` levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PureTarget {
    amplitudes: Vec<Complex64>,
    truncation_loss: f64,
}

impl PureTarget {
    /// Normalizes `amplitudes`; the loss relative to the untruncated state
    /// must be supplied by the caller (zero if the state fits exactly).
    pub fn new(amplitudes: Vec<Complex64>, truncation_loss: f64) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() || !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("target amplitudes have no weight".into()));
        }
        let amplitudes = amplitudes.into_iter().map(|z| z / norm).collect();
        Ok(PureTarget { amplitudes, truncation_loss: truncation_loss.max(0.0) })
    }

    pub fn cutoff(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Weight of the exact state that falls at or above the cutoff.
    pub fn truncation_loss(&self) -> f64 {
        self.truncation_loss
    }

    pub fn is_truncated(&self) -> bool {
        self.truncation_loss > TRUNCATION_FLAG
    }

    pub fn density_matrix(&self) -> FockDensityMatrix {
        FockDensityMatrix::from_pure(&self.amplitudes).expect("non-empty amplitudes")
    }
}

pub fn target_fock(m: usize, d: usize) -> Result<PureTarget> {
    if m >= d {
        return Err(Error::InvalidArgument(format!("|{m}⟩ does not fit below cutoff {d}")));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); d];
    amps[m] = Complex64::new(1.0, 0.0);
    PureTarget::new(amps, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Parity {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// `∝ |α⟩ ± |−α⟩`. Amplitudes are built as `α^{n−p}/√n!` (p the parity) so
/// the `α → 0` limits are the vacuum and `|1⟩`.
pub fn target_cat(alpha: Complex64, parity: Parity, d: usize) -> Result<PureTarget> {
    if d == 0 {
        return Err(Error::InvalidArgument("cutoff must be positive".into()));
    }
    let p = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    if p >= d {
        return Err(Error::InvalidArgument("an odd cat needs at least two levels".into()));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); d];
    // u_p = 1/√p!, then u_{n+2} = u_n·α²/√((n+1)(n+2))
    let mut u = Complex64::new(1.0, 0.0);
    let a2 = alpha * alpha;
    let mut n = p;
    while n < d {
        amps[n] = u;
        u *= a2 / (((n + 1) * (n + 2)) as f64).sqrt();
        n += 2;
    }
    let x = alpha.norm_sqr();
    let full = match parity {
        Parity::Even => x.cosh(),
        Parity::Odd if x > 0.0 => x.sinh() / x,
        Parity::Odd => 1.0,
    };
    let kept: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    PureTarget::new(amps, 1.0 - kept / full)
}

/// `∝ |0⟩ + ia√(3/2)|1⟩ + ia|3⟩`.
pub fn target_psia(a: f64, d: usize) -> Result<PureTarget> {
    if d < 4 {
        return Err(Error::InvalidArgument(format!("the ψ_a target needs d ≥ 4, got {d}")));
    }
    let norm = 1.0 / (1.0 + 2.5 * a * a).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); d];
    amps[0] = Complex64::new(norm, 0.0);
    amps[1] = Complex64::new(0.0, a * 1.5_f64.sqrt() * norm);
    amps[3] = Complex64::new(0.0, a * norm);
    PureTarget::new(amps, 0.0)
}

/// `F = ⟨ψ|ρ|ψ⟩`; the smaller of the two cutoffs is padded with zeros.
pub fn fidelity(rho: &FockDensityMatrix, target: &PureTarget) -> f64 {
    let psi = target.amplitudes();
    let d = rho.cutoff().min(psi.len());
    let e = rho.entries();
    let mut f = Complex64::new(0.0, 0.0);
    for m in 0..d {
        let mut row = Complex64::new(0.0, 0.0);
        for n in 0..d {
            row += e[(m, n)] * psi[n];
        }
        f += psi[m].conj() * row;
    }
    f.re
}

/// `W` sampled at cell midpoints of a square grid centred on `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub half_extent: f64,
    pub n_pts: usize,
    pub center: (f64, f64),
    /// Row `i` is `x_i`, column `j` is `p_j`.
    pub values: Vec<Vec<f64>>,
}

impl WignerGrid {
    pub fn step(&self) -> f64 {
        2.0 * self.half_extent / self.n_pts as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        axis(self.center.0, self.half_extent, self.n_pts, i)
    }

    pub fn p(&self, j: usize) -> f64 {
        axis(self.center.1, self.half_extent, self.n_pts, j)
    }

    /// Riemann sum of `W`.
    pub fn integral(&self) -> f64 {
        self.sum_with(|w| w)
    }

    /// Riemann sum of `|W|`.
    pub fn abs_integral(&self) -> f64 {
        self.sum_with(f64::abs)
    }

    /// `2π ∫ W²`, which equals the purity for a converged grid.
    pub fn purity(&self) -> f64 {
        2.0 * PI * self.sum_with(|w| w * w)
    }

    fn sum_with(&self, f: impl Fn(f64) -> f64) -> f64 {
        let h = self.step();
        self.values.iter().flatten().map(|&w| f(w)).sum::<f64>() * h * h
    }

    /// `x,p,W` triples, one per line, after a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,p,W")?;
        for (i, row) in self.values.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                writeln!(out, "{:.12e},{:.12e},{:.12e}", self.x(i), self.p(j), w)?;
            }
        }
        Ok(())
    }
}

fn axis(center: f64, half: f64, n: usize, i: usize) -> f64 {
    center - half + (i as f64 + 0.5) * 2.0 * half / n as f64
}

/// Precomputed `ρ` data for repeated kernel evaluations.
struct Kernel {
    d: usize,
    diag: Vec<f64>,
    // upper[k][m] = 2ρ_{m,m+k}(−1)^m / π
    upper: Vec<Vec<Complex64>>,
    // last diagonal offset with a nonzero entry
    k_max: usize,
}

impl Kernel {
    fn new(rho: &FockDensityMatrix) -> Kernel {
        let d = rho.cutoff();
        let e = rho.entries();
        let sign = |m: usize| if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        let diag = (0..d).map(|m| sign(m) * e[(m, m)].re / PI).collect();
        let upper = (1..d).map(|k| (0..d - k).map(|m| e[(m, m + k)] * (2.0 * sign(m) / PI)).collect()).collect();
        let k_max = (1..d).rev().find(|&k| (0..d - k).any(|m| e[(m, m + k)].norm() > 0.0)).unwrap_or(0);
        Kernel { d, diag, upper, k_max }
    }

    /// `W(x, p) = Σ_m ρ_mm W_mm + 2 Re Σ_{k>0} Σ_m ρ_{m,m+k} W_{m,m+k}` with
    /// `W_{m,m+k} = (−1)^m e^{ikφ} ℓ_m^k(2|ξ|²)/π`, `ξ = x + ip`, and `ℓ` the
    /// normalized generalized Laguerre functions.
    fn eval(&self, x: f64, p: f64, scratch: &mut Vec<f64>) -> f64 {
        let r2 = x * x + p * p;
        let u = 2.0 * r2;
        let phase = Complex64::new(x, p) / r2.sqrt().max(f64::MIN_POSITIVE);
        let mut total = 0.0;
        let mut rot = Complex64::new(1.0, 0.0);
        // log ℓ_0^k = −u/2 + ½ Σ_{j≤k} ln(u/j)
        let mut log_start = -0.5 * u;
        for k in 0..=self.k_max {
            if k > 0 {
                rot *= phase;
                log_start += 0.5 * (u / k as f64).ln();
            }
            laguerre_column(u, k, self.d - k, log_start, scratch);
            if k == 0 {
                total += self.diag.iter().zip(scratch.iter()).map(|(a, b)| a * b).sum::<f64>();
            } else {
                let s: Complex64 = self.upper[k - 1].iter().zip(scratch.iter()).map(|(a, &b)| a * b).sum();
                total += (s * rot).re;
            }
        }
        total
    }
}

/// Fills `out[m] = ℓ_m^k(u)` for `m < count` by the normalized three-term
/// recurrence. Seeds that would underflow are run with a running scale.
fn laguerre_column(u: f64, k: usize, count: usize, log_start: f64, out: &mut Vec<f64>) {
    out.clear();
    if count == 0 {
        return;
    }
    if log_start == f64::NEG_INFINITY {
        // u = 0 and k > 0: every ℓ_m^k vanishes
        out.resize(count, 0.0);
        return;
    }
    const BIG: f64 = 1e150;
    let kf = k as f64;
    let scaled = log_start < -600.0;
    let mut log_scale = if scaled { log_start } else { 0.0 };
    let (mut prev, mut cur) = (0.0_f64, if scaled { 1.0 } else { log_start.exp() });
    for m in 0..count {
        out.push(if scaled {
            if cur == 0.0 || log_scale < -745.0 - cur.abs().ln() {
                0.0
            } else {
                cur.signum() * (cur.abs().ln() + log_scale).exp()
            }
        } else {
            cur
        });
        let mf = m as f64;
        let denom = ((mf + 1.0) * (mf + kf + 1.0)).sqrt();
        let next = (2.0 * mf + 1.0 + kf - u) * cur / denom - (mf * (mf + kf)).sqrt() / denom * prev;
        prev = cur;
        cur = next;
        if scaled && cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            log_scale += BIG.ln();
        }
    }
}

/// `W(x, p)` at a single point.
pub fn wigner_at(rho: &FockDensityMatrix, x: f64, p: f64) -> f64 {
    Kernel::new(rho).eval(x, p, &mut Vec::new())
}

/// `W` on an `n_pts × n_pts` midpoint grid over `[−L, L]²` around the origin.
pub fn wigner(rho: &FockDensityMatrix, half_extent: f64, n_pts: usize) -> Result<WignerGrid> {
    wigner_centered(rho, half_extent, n_pts, (0.0, 0.0))
}

pub fn wigner_centered(
    rho: &FockDensityMatrix,
    half_extent: f64,
    n_pts: usize,
    center: (f64, f64),
) -> Result<WignerGrid> {
    if !(half_extent > 0.0) || !half_extent.is_finite() {
        return Err(Error::InvalidArgument(format!("half extent must be positive, got {half_extent}")));
    }
    if n_pts < 16 {
        return Err(Error::InvalidArgument(format!("need at least 16 points per axis, got {n_pts}")));
    }
    let kernel = Kernel::new(rho);
    let values = (0..n_pts)
        .into_par_iter()
        .map_init(Vec::new, |scratch, i| {
            let x = axis(center.0, half_extent, n_pts, i);
            (0..n_pts).map(|j| kernel.eval(x, axis(center.1, half_extent, n_pts, j), scratch)).collect()
        })
        .collect();
    Ok(WignerGrid { half_extent, n_pts, center, values })
}

/// Quadrature settings for [`wln`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WlnConfig {
    /// Convergence threshold on successive estimates.
    pub abs_tol: f64,
    /// Points per axis on the first grid.
    pub n_pts: usize,
    /// `L = extent_factor·√(2⟨n⟩ + 1)` plus the mean offset.
    pub extent_factor: f64,
    /// Both `L` and `n_pts` grow by this factor per refinement.
    pub growth: f64,
    pub max_refinements: usize,
}

impl Default for WlnConfig {
    fn default() -> Self {
        WlnConfig { abs_tol: 2e-3, n_pts: 201, extent_factor: 3.5, growth: 1.5, max_refinements: 4 }
    }
}

/// `ln ∫ |W| dx dp`, refined until two successive grids agree to `abs_tol`.
pub fn wln(rho: &FockDensityMatrix, cfg: &WlnConfig) -> Result<f64> {
    if !(cfg.abs_tol > 0.0) || cfg.n_pts < 16 || !(cfg.growth > 1.0) || !(cfg.extent_factor > 0.0) {
        return Err(Error::InvalidArgument(format!("invalid quadrature config {cfg:?}")));
    }
    let nbar = rho.mean_photon().max(0.0) / rho.trace();
    let mean = rho.mean_amplitude() / rho.trace();
    let center = (2f64.sqrt() * mean.re, 2f64.sqrt() * mean.im);
    let mut half = cfg.extent_factor * (2.0 * nbar + 1.0).sqrt();
    let mut n_pts = cfg.n_pts;
    let estimate =
        |half: f64, n: usize| -> Result<f64> { Ok(wigner_centered(rho, half, n, center)?.abs_integral().ln()) };
    let mut last = estimate(half, n_pts)?;
    for _ in 0..=cfg.max_refinements {
        half *= cfg.growth;
        n_pts = (n_pts as f64 * cfg.growth).ceil() as usize;
        let next = estimate(half, n_pts)?;
        if (next - last).abs() < cfg.abs_tol {
            return Ok(next);
        }
        last = next;
        if n_pts > 5000 {
            break;
        }
    }
    let prev = last;
    Err(Error::QuadratureNotConverged { previous: prev, last: estimate(half, n_pts)? })
}
