//! Wave fields on an (R, θ) grid, the discretized Hamiltonian, Chebyshev
//! propagation, autocorrelations, spectra and scar functions.
//!
//! Conventions: flat measure `dR dθ`; hard walls at both R ends (sine
//! basis) and even reflection at θ = 0, π (cosine basis). The propagator is
//! `e^{−iHt/ħ}`, the autocorrelation `C(t) = ⟨φ(0)|φ(t)⟩` and spectra are
//! `∫ e^{iEt/ħ} C(t) dt`, so a stationary state at `E₀` peaks at `E₀`.

pub mod chebyshev;
pub mod eigen;
pub mod field;
pub mod hamiltonian;
pub mod packet;
pub mod scar_function;
pub mod spectrum;

pub use chebyshev::{bessel_j, Chebyshev, MomentRun};
pub use eigen::{diagonalize_small, Eigenpairs};
pub use field::{GridSpec, WaveField};
pub use hamiltonian::Hamiltonian;
pub use packet::{build_packet, PacketSpec, WidthPolicy};
pub use scar_function::{ehrenfest_time, scar_coefficients, scar_function, EhrenfestRule, ScarFunction};
pub use spectrum::{Autocorrelation, Band, Spectrum, Stick};
