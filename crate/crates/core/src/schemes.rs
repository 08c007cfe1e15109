//! Declarative heralding circuits and the herald-and-score pipeline.
//!
//! A [`CircuitSpec`] lists Gaussian operations applied to vacuum, the photon
//! counts measured on every mode except `output_mode`, and the target state
//! used for the fidelity. Loss transmissions may be the symbols `eta1` and
//! `eta2`, which are resolved from the spec's own `eta1`/`eta2` fields; a
//! [`sweep`] varies exactly those two.
//!
//! Mode indices are 0-based in Rust and 1-based in the serialized form.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fock::{herald_adaptive, move_mode_last, AdaptiveOptions};
use crate::merits::{fidelity, target_cat, target_fock, target_psia, wln, Parity, PureTarget, WlnConfig};
use crate::{Error, GaussianState, HeraldOutcome, HeraldPattern, Result};

/// Beamsplitter angle with `cos θ = √0.97` used by the cat preset.
pub fn cat_beamsplitter_angle() -> f64 {
    0.97_f64.sqrt().acos()
}

/// Cat amplitudes the cat preset is scored against, by detected photon number.
pub const CAT_ALPHA_ODD: f64 = 1.24;
pub const CAT_ALPHA_EVEN: f64 = 1.33;

/// Weak cubic-phase target parameter of the cubic preset.
pub const CUBIC_TARGET_A: f64 = 0.53;

mod one_based {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &usize, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(*v as u64 + 1)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        let v = u64::deserialize(d)?;
        if v == 0 {
            return Err(D::Error::custom("mode indices start at 1"));
        }
        Ok(v as usize - 1)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<usize>, D::Error> {
            match Option::<u64>::deserialize(d)? {
                None => Ok(None),
                Some(0) => Err(D::Error::custom("mode indices start at 1")),
                Some(v) => Ok(Some(v as usize - 1)),
            }
        }
    }
}

/// A loss transmission, either a number or one of the sweep symbols.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Eta {
    Value(f64),
    Symbol(EtaSymbol),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaSymbol {
    Eta1,
    Eta2,
}

impl Eta {
    fn resolve(self, eta1: f64, eta2: f64) -> f64 {
        match self {
            Eta::Value(v) => v,
            Eta::Symbol(EtaSymbol::Eta1) => eta1,
            Eta::Symbol(EtaSymbol::Eta2) => eta2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Op {
    Squeeze {
        #[serde(with = "one_based")]
        mode: usize,
        z: Complex64,
    },
    TwoModeSqueeze {
        #[serde(with = "one_based")]
        i: usize,
        #[serde(with = "one_based")]
        j: usize,
        zeta: Complex64,
    },
    Beamsplitter {
        #[serde(with = "one_based")]
        i: usize,
        #[serde(with = "one_based")]
        j: usize,
        theta: f64,
        phi: f64,
    },
    Displace {
        #[serde(with = "one_based")]
        mode: usize,
        alpha: Complex64,
    },
    Loss {
        #[serde(with = "one_based")]
        mode: usize,
        eta: Eta,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Fock { n: usize },
    Cat { alpha: Complex64, parity: Parity },
    Psia { a: f64 },
}

impl TargetSpec {
    /// Builds the target with at least `d` levels, more if the target needs
    /// them (a cat is extended until its truncation loss is below 1e-12).
    pub fn build(&self, d: usize) -> Result<PureTarget> {
        match *self {
            TargetSpec::Fock { n } => target_fock(n, d.max(n + 1)),
            TargetSpec::Psia { a } => target_psia(a, d.max(4)),
            TargetSpec::Cat { alpha, parity } => {
                let mut d = d.max(2);
                loop {
                    let t = target_cat(alpha, parity, d)?;
                    if t.truncation_loss() < 1e-12 || d >= 4096 {
                        return Ok(t);
                    }
                    d *= 2;
                }
            }
        }
    }
}

fn default_eta() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub modes: usize,
    pub ops: Vec<Op>,
    /// Photon counts on the detected modes, in increasing mode order.
    pub herald: Vec<usize>,
    /// Mode left unmeasured; defaults to the last one.
    #[serde(default, with = "one_based::option", skip_serializing_if = "Option::is_none")]
    pub output_mode: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    #[serde(default = "default_eta")]
    pub eta1: f64,
    #[serde(default = "default_eta")]
    pub eta2: f64,
}

impl CircuitSpec {
    pub fn output(&self) -> usize {
        self.output_mode.unwrap_or(self.modes.saturating_sub(1))
    }

    /// Same circuit with the loss symbols bound to new values.
    pub fn with_etas(&self, eta1: f64, eta2: f64) -> CircuitSpec {
        CircuitSpec { eta1, eta2, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes < 2 {
            return Err(Error::InvalidArgument("a heralding circuit needs at least two modes".into()));
        }
        let check = |idx: usize| {
            if idx >= self.modes {
                Err(Error::ModeOutOfRange { index: idx, num_modes: self.modes })
            } else {
                Ok(())
            }
        };
        let eta_ok = |eta: f64| {
            if (0.0..=1.0).contains(&eta) {
                Ok(())
            } else {
                Err(Error::InvalidTransmission(eta))
            }
        };
        eta_ok(self.eta1)?;
        eta_ok(self.eta2)?;
        check(self.output())?;
        for op in &self.ops {
            match *op {
                Op::Squeeze { mode, .. } | Op::Displace { mode, .. } => check(mode)?,
                Op::TwoModeSqueeze { i, j, .. } | Op::Beamsplitter { i, j, .. } => {
                    check(i)?;
                    check(j)?;
                    if i == j {
                        return Err(Error::SameMode(i));
                    }
                }
                Op::Loss { mode, eta } => {
                    check(mode)?;
                    eta_ok(eta.resolve(self.eta1, self.eta2))?;
                }
            }
        }
        if self.herald.len() != self.modes - 1 {
            return Err(Error::InvalidArgument(format!(
                "herald lists {} counts but {} modes are detected",
                self.herald.len(),
                self.modes - 1
            )));
        }
        Ok(())
    }

    /// Folds the operation list over vacuum and moves the output mode last.
    pub fn prepare(&self) -> Result<GaussianState> {
        self.validate()?;
        let mut state = GaussianState::vacuum(self.modes)?;
        for op in &self.ops {
            state = match *op {
                Op::Squeeze { mode, z } => state.squeeze(mode, z)?,
                Op::TwoModeSqueeze { i, j, zeta } => state.two_mode_squeeze(i, j, zeta)?,
                Op::Beamsplitter { i, j, theta, phi } => state.beamsplitter(i, j, theta, phi)?,
                Op::Displace { mode, alpha } => state.displace(mode, alpha)?,
                Op::Loss { mode, eta } => state.loss(mode, eta.resolve(self.eta1, self.eta2))?,
            };
        }
        move_mode_last(&state, self.output())
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn eta1() -> Eta {
    Eta::Symbol(EtaSymbol::Eta1)
}

fn eta2() -> Eta {
    Eta::Symbol(EtaSymbol::Eta2)
}

/// TMSV source, loss `eta1` on the detected mode 0 and `eta2` on the
/// heralded mode 1, `m` photons detected.
pub fn scheme_fock(r: f64, eta1: f64, eta2: f64, m: usize) -> CircuitSpec {
    CircuitSpec {
        modes: 2,
        ops: vec![
            Op::TwoModeSqueeze { i: 0, j: 1, zeta: c(r, 0.0) },
            Op::Loss { mode: 0, eta: self::eta1() },
            Op::Loss { mode: 1, eta: self::eta2() },
        ],
        herald: vec![m],
        output_mode: Some(1),
        target: Some(TargetSpec::Fock { n: m }),
        eta1,
        eta2,
    }
}

/// `p_m = ⟨n⟩^m/(1+⟨n⟩)^{m+1}` with `⟨n⟩ = sinh² r`.
pub fn lossless_fock_probability(r: f64, m: usize) -> f64 {
    let n = r.sinh().powi(2);
    let q = n / (1.0 + n);
    q.powi(m as i32) / (1.0 + n)
}

/// Photon subtraction from a squeezed mode 0 on a `cos θ = √0.97`
/// beamsplitter, detector on mode 1. `eta1` acts on mode 0 before the
/// beamsplitter, `eta2` on the output mode after it.
pub fn scheme_cat(z: f64, eta1: f64, eta2: f64, m: usize) -> CircuitSpec {
    scheme_cat_with_detector(z, eta1, eta2, 1.0, m)
}

/// [`scheme_cat`] with an additional fixed loss on the detected mode.
pub fn scheme_cat_with_detector(z: f64, eta1: f64, eta2: f64, eta_det: f64, m: usize) -> CircuitSpec {
    let parity = Parity::of(m);
    let amp = if parity == Parity::Odd { CAT_ALPHA_ODD } else { CAT_ALPHA_EVEN };
    let mut ops = vec![
        Op::Squeeze { mode: 0, z: c(z, 0.0) },
        Op::Loss { mode: 0, eta: self::eta1() },
        Op::Beamsplitter { i: 0, j: 1, theta: cat_beamsplitter_angle(), phi: 0.0 },
    ];
    if eta_det < 1.0 {
        ops.push(Op::Loss { mode: 1, eta: Eta::Value(eta_det) });
    }
    ops.push(Op::Loss { mode: 0, eta: self::eta2() });
    CircuitSpec {
        modes: 2,
        ops,
        herald: vec![m],
        output_mode: Some(0),
        target: Some(TargetSpec::Cat { alpha: cat_alpha(z, amp), parity }),
        eta1,
        eta2,
    }
}

/// Cat amplitude aligned with the anti-squeezed quadrature of `S(z)`.
fn cat_alpha(z: f64, amp: f64) -> Complex64 {
    let theta = if z >= 0.0 { 0.0 } else { std::f64::consts::PI };
    Complex64::from_polar(amp, 0.5 * (theta + std::f64::consts::PI))
}

/// Squeezed-displaced inputs on three modes, a three-beamsplitter mesh on
/// modes (0,1), (1,2), (0,1), detection of (1, 2) photons on modes 0 and 1.
/// `eta2` is one loss on the output mode's input, `eta1` acts on both
/// detected modes ahead of the detectors.
pub fn scheme_cubic(a_target: f64, eta1: f64, eta2: f64) -> CircuitSpec {
    let r = [0.71, 0.67, -0.42];
    let arg = [-2.07, 0.06, -3.79];
    let alpha = [-0.02, 0.34, 0.02];
    let theta = [-1.57, 0.68, 2.5];
    let phi = [0.53, -4.51, 0.72];
    let mut ops = Vec::new();
    for s in 0..3 {
        ops.push(Op::Squeeze { mode: s, z: c(r[s], 0.0) * Complex64::from_polar(1.0, arg[s]) });
        ops.push(Op::Displace { mode: s, alpha: c(alpha[s], 0.0) });
    }
    ops.push(Op::Loss { mode: 2, eta: self::eta2() });
    for (k, (i, j)) in [(0, 1), (1, 2), (0, 1)].into_iter().enumerate() {
        ops.push(Op::Beamsplitter { i, j, theta: theta[k], phi: phi[k] });
    }
    for s in 0..2 {
        ops.push(Op::Loss { mode: s, eta: self::eta1() });
    }
    CircuitSpec {
        modes: 3,
        ops,
        herald: vec![1, 2],
        output_mode: Some(2),
        target: Some(TargetSpec::Psia { a: a_target }),
        eta1,
        eta2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub rel_tol: f64,
    pub d_max: usize,
    pub wln: WlnConfig,
    /// Maximum worker threads for [`sweep`]; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { rel_tol: 1e-6, d_max: 512, wln: WlnConfig::default(), threads: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeritReport {
    pub eta1: f64,
    pub eta2: f64,
    pub probability: f64,
    /// `None` when the circuit has no target.
    pub fidelity: Option<f64>,
    pub wln: f64,
    pub cutoff_used: usize,
    pub wall_time: f64,
}

impl MeritReport {
    /// Equality ignoring the wall time.
    pub fn same_merits(&self, other: &MeritReport) -> bool {
        MeritReport { wall_time: 0.0, ..self.clone() } == MeritReport { wall_time: 0.0, ..other.clone() }
    }
}

/// Heralds, then scores the state.
pub fn run(spec: &CircuitSpec, opts: &RunOptions) -> Result<MeritReport> {
    run_detailed(spec, opts).map(|(r, _)| r)
}

/// [`run`], also returning the heralded state.
pub fn run_detailed(spec: &CircuitSpec, opts: &RunOptions) -> Result<(MeritReport, HeraldOutcome)> {
    let start = Instant::now();
    let state = spec.prepare()?;
    let adaptive = AdaptiveOptions { rel_tol: opts.rel_tol, d_max: opts.d_max, initial_cutoff: None };
    let outcome = herald_adaptive(&state, &HeraldPattern::new(spec.herald.clone()), &adaptive)?;
    outcome.rho.validate()?;
    let fid = match &spec.target {
        Some(t) => Some(fidelity(&outcome.rho, &t.build(outcome.rho.cutoff())?).clamp(0.0, 1.0)),
        None => None,
    };
    let w = wln(&outcome.rho, &opts.wln)?.max(0.0);
    let report = MeritReport {
        eta1: spec.eta1,
        eta2: spec.eta2,
        probability: outcome.probability.clamp(0.0, 1.0),
        fidelity: fid,
        wln: w,
        cutoff_used: outcome.cutoff,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((report, outcome))
}

/// Runs every `(eta1, eta2)` pair, row-major in `eta1` then `eta2`.
pub fn sweep(
    template: &CircuitSpec,
    eta1_grid: &[f64],
    eta2_grid: &[f64],
    opts: &RunOptions,
) -> Result<Vec<MeritReport>> {
    if eta1_grid.is_empty() || eta2_grid.is_empty() {
        return Err(Error::InvalidArgument("sweep grids must be non-empty".into()));
    }
    let points: Vec<(f64, f64)> = eta1_grid.iter().flat_map(|&a| eta2_grid.iter().map(move |&b| (a, b))).collect();
    for &(a, b) in &points {
        template.with_etas(a, b).validate()?;
    }
    let work = || -> Result<Vec<MeritReport>> {
        points.par_iter().map(|&(a, b)| run(&template.with_etas(a, b), opts)).collect()
    };
    match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?
            .install(work),
        None => work(),
    }
}
