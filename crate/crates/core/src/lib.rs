//! Heralded non-Gaussian state preparation from lossy multimode Gaussian states.
//!
//! The crate is organised bottom-up:
//!
//! - [`gaussian`]: Gaussian states in the complex `(a₁..a_ℓ, a₁†..a_ℓ†)` ordering,
//!   the Gaussian gates used by the preparation circuits, and the pure-loss channel.
//! - [`lhaf`]: exact loop hafnians. A brute-force matching enumerator serves as
//!   the reference, the repeated-index engine does the real work, and the
//!   [`lhaf::cost`] module evaluates operation-count models.
//! - [`fock`]: Fock matrix elements of Gaussian states and heralded single-mode
//!   density matrices with an adaptive cutoff.
//! - [`merits`]: fidelity, Wigner function and Wigner logarithmic negativity,
//!   plus the target states.
//! - [`schemes`]: declarative circuits, the three built-in presets, single runs
//!   and loss-grid sweeps.
//!
//! ```
//! use heraldsim::schemes::{self, RunOptions};
//!
//! let spec = schemes::scheme_fock(1.0, 1.0, 1.0, 1);
//! let report = schemes::run(&spec, &RunOptions::default()).unwrap();
//! assert!((report.probability - 0.2434).abs() < 1e-3);
//! ```

// `!(x > 0.0)` is used deliberately so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod gaussian;
pub mod lhaf;
pub mod merits;
pub mod schemes;

pub use error::{Error, Result};
pub use fock::{FockDensityMatrix, HeraldOutcome, HeraldPattern};
pub use gaussian::{GaussianState, HuskQuantities};
pub use lhaf::{cost::CostEstimate, LoopMatrixSpec, Precision};
pub use merits::{PureTarget, WignerGrid, WlnConfig};
pub use schemes::{CircuitSpec, MeritReport, Op, RunOptions, TargetSpec};

pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;
