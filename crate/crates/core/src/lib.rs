//! Numerical laboratory for solitary waves of the one-dimensional nonlinear
//! Schrödinger equation
//!
//! ```text
//! i φ_t + φ_xx − f(φ) = 0,        f(s) = G′(|s|) s/|s|
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`nonlinearity`]: the potential `G`, its derived scalar functions
//!   (`V`, `Q`, `L`, `H`, `F′`), the combined power family and the
//!   hypothesis checker.
//! * [`profile`]: soliton amplitude `R*(ω)`, profiles `R_ω`, the mass curve
//!   `λ(ω)` and its derivative through the first-integral quadrature.
//! * [`field`]: complex fields on periodic grids with spectral derivatives,
//!   energy/mass functionals, gradients, and orbit (modulation) distances.
//! * [`minimize`]: mass-constrained energy minimization.
//! * [`evolve`]: Strang split-step time integration and stability runs.
//! * [`spectral`]: the linearized operator `L₊` and the non-degeneracy
//!   certificate.

pub mod error;
pub mod evolve;
pub mod field;
pub mod io;
pub mod minimize;
pub mod nonlinearity;
pub mod profile;
pub mod quadrature;
pub mod spectral;

mod linalg;

pub use crate::error::{Error, Result};
pub use crate::field::{ComplexField, Grid};
pub use crate::nonlinearity::{CombinedPower, Nonlinearity, NonlinearitySpec};
pub use crate::profile::{MassCurve, ProfileSolution};

pub use rustfft::num_complex::Complex64;
