//! Macroscopic response assembled from the expansion coefficients.
//!
//! Natural units `c = ε₀ = μ₀ = ħ = 1`; every overall prefactor such as
//! `N/(ε₀ħ)` is 1, so the density enters linearly and the field amplitudes
//! are `E_p = B_p = 1`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::floquet::{Branch, ExpansionCoefficients};
use crate::model::{DriveConfig, MediumParams};

const I: C64 = C64::new(0.0, 1.0);

/// Electric probe amplitude.
pub const PROBE_E: f64 = 1.0;
/// Magnetic probe amplitude, `B_p = E_p / c`.
pub const PROBE_B: f64 = PROBE_E;

/// Square-root branch of the refractive index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexBranch {
    /// Root with non-negative imaginary part.
    #[default]
    Passive,
    /// Principal root (non-negative real part), for gain media.
    Principal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResponseSet {
    pub chi_e: C64,
    pub chi_m: C64,
    pub xi_he: C64,
    pub xi_eh: C64,
    pub n: C64,
    /// Magnetization driven by the electric probe component.
    pub m1: C64,
    /// Magnetization driven by the magnetic probe component.
    pub m2: C64,
    /// `|m1| / |m2|`, infinite when `m2 = 0`.
    pub enhancement: f64,
    pub branch: Branch,
}

/// `n = √(ε̃μ̃ − ¼(ξ_EH + ξ_HE)²) + (i/2)(ξ_EH − ξ_HE)`
pub fn refractive_index(chi_e: C64, chi_m: C64, xi_eh: C64, xi_he: C64, branch: IndexBranch) -> C64 {
    let eps = chi_e + 1.0;
    let mu = chi_m + 1.0;
    let sum = xi_eh + xi_he;
    let mut root = (eps * mu - 0.25 * sum * sum).sqrt();
    if branch == IndexBranch::Passive && root.im < 0.0 {
        root = -root;
    }
    root + 0.5 * I * (xi_eh - xi_he)
}

pub fn assemble(coeffs: &ExpansionCoefficients, medium: &MediumParams, drive: &DriveConfig) -> ResponseSet {
    assemble_with(coeffs, medium, drive, IndexBranch::default())
}

pub fn assemble_with(coeffs: &ExpansionCoefficients, medium: &MediumParams, drive: &DriveConfig, branch: IndexBranch) -> ResponseSet {
    let nn = medium.density;
    let (d32, mu21) = (medium.d32, medium.mu21);
    let dipole = C64::from_polar(1.0, medium.dipole_phase);
    let loop_phase = C64::from_polar(1.0, drive.loop_phase());

    let chi_e = nn * d32 * d32 * coeffs.d32;
    let chi_m = nn * mu21 * mu21 * coeffs.d21;
    let xi_he = -I * nn * d32 * mu21 * dipole * coeffs.c21 * loop_phase;
    let xi_eh = I * nn * d32 * mu21 * dipole.conj() * coeffs.c32 * loop_phase;

    let m1 = nn * d32 * mu21 * PROBE_E * dipole * coeffs.c21 * loop_phase;
    let m2 = nn * mu21 * mu21 * PROBE_B * coeffs.d21;
    let enhancement = if m2.norm() == 0.0 { f64::INFINITY } else { m1.norm() / m2.norm() };

    ResponseSet {
        chi_e,
        chi_m,
        xi_he,
        xi_eh,
        n: refractive_index(chi_e, chi_m, xi_eh, xi_he, branch),
        m1,
        m2,
        enhancement,
        branch: coeffs.branch,
    }
}
