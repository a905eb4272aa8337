//! Classical and quantum machinery for studying scarring and superscarring
//! along periodic orbits of a two-mode (R, θ) isomerizing Hamiltonian
//!
//! ```text
//! H = P_R²/2μ₁ + ½(1/μ₁R² + 1/μ₂r_e²) P_θ² + V(R, θ)
//! ```
//!
//! The crate is split along the pipeline:
//!
//! * [`pes`]: potential surfaces (Legendre series or analytic surrogates),
//!   masses and the minimum-energy path.
//! * [`classical`]: symplectic flow, Poincaré sections, periodic orbits,
//!   monodromy, Maslov indices and saddle–node continuation.
//! * [`quantum`]: grid wave fields, the spectral Hamiltonian, Chebyshev
//!   propagation, autocorrelations, spectra and scar functions.
//! * [`scar`]: Bohr–Sommerfeld ħ ladders, transverse widths and power-law
//!   fits, plus the end-to-end sweep.
//!
//! Everything works in atomic units internally; see [`units`] for the
//! boundary conversions.

pub mod classical;
pub mod error;
pub mod par;
pub mod pes;
pub mod quantum;
pub mod scar;
pub mod units;

pub use error::{Error, Result};
