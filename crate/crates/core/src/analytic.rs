//! Closed-form linear-response coefficients.
//!
//! Cross terms are given per unit of `Ω₂₃` (for `ρ₂₁`) and of `Ω₁₂` (for
//! `ρ₃₂`) with the control Rabi frequency taken real and equal to `|Ω₃₁|`,
//! the same convention as [`crate::floquet::harmonic_coefficients`].

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::floquet::zeroth_order_populations;
use crate::model::{DriveConfig, LevelSystem, Mode};

const I: C64 = C64::new(0.0, 1.0);

/// Denominators smaller than this are reported as degenerate.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticCoefficients {
    pub d21: C64,
    pub c21: C64,
    pub d32: C64,
    pub c32: C64,
    /// `B` off resonance, `D` on resonance; absent for the incoherent system.
    pub b: Option<f64>,
    /// `Γ = (γ₁ + γ₂)² γ₃`
    pub gamma_big: f64,
    pub gamma_s: f64,
    pub c_plus: Option<C64>,
    pub c_minus: Option<C64>,
}

fn check(name: &'static str, value: C64) -> Result<C64> {
    if value.norm() < DENOMINATOR_FLOOR || !value.is_finite() {
        return Err(Error::DegenerateDenominator {
            name,
            magnitude: value.norm(),
        });
    }
    Ok(value)
}

/// Coefficients for arbitrary multiphoton detuning.
///
/// The cross terms oscillate at the multiphoton detuning relative to the
/// probe; no in-phase filter is applied here.
pub fn general_coherences(system: &LevelSystem, drive: &DriveConfig) -> Result<AnalyticCoefficients> {
    let (g1, g2, g3) = (system.gamma1, system.gamma2, system.gamma3);
    let gs = system.gamma_sum();
    let gb = (g1 + g2).powi(2) * g3;
    let o = drive.omega31_mag;
    let o2 = o * o;
    let (d1, d2, d3) = (drive.delta1, drive.delta2, drive.delta3);

    let b = 4.0 * d1 * d1 * g3 + gb + 4.0 * o2 * (g2 + 2.0 * g3);
    check("B", b.into())?;
    let den21 = check("d21 denominator", 4.0 * o2 + (2.0 * d3 - I * g3) * (2.0 * d1 - 2.0 * d3 + I * gs))?;
    let den_c21 = check("c21 denominator", 4.0 * o2 + (2.0 * I * (d1 - d2) + g3) * (-2.0 * I * d2 + gs))?;
    let den_c32 = check("c32 denominator", 4.0 * o2 + (2.0 * d3 + I * g3) * (2.0 * d1 - 2.0 * d3 - I * gs))?;
    let den32 = check(
        "d32 denominator",
        4.0 * o2 + (-2.0 * I * d1 + 2.0 * I * d2 + g3) * (2.0 * I * d2 + gs),
    )?;

    let d21 = 2.0 / b
        * ((8.0 * d1.powi(3) * g3 + 4.0 * I * d1 * d1 * g3 * (2.0 * I * d3 + gs) + d3 * (8.0 * o2 * (g2 - g3) - 2.0 * gb)) / den21
            + (2.0 * d1 * (-4.0 * o2 * (g2 - 2.0 * g3) + gb) - I * ((4.0 * o2 * g2 - gb) * gs - 4.0 * o2 * g3 * g3)) / den21);
    let c21 = -(4.0 / b * (4.0 * o2 * (g2 - g3) + (2.0 * d1 + I * (g1 + g2)) * g3 * (-2.0 * d2 - I * gs)) / den_c21) * o;
    let c32 = (4.0 / b * (4.0 * o2 * (g3 - g2) + (2.0 * d1 + I * (g1 + g2)) * g3 * (2.0 * d1 - 2.0 * d3 - I * gs)) / den_c32) * o;
    let d32 = -(o2 * 8.0 / b * (2.0 * (d2 - d1) * g2 + I * g3 * (2.0 * I * d2 + g1 + g3)) / den32);

    Ok(AnalyticCoefficients {
        d21,
        c21,
        d32,
        c32,
        b: Some(b),
        gamma_big: gb,
        gamma_s: gs,
        c_plus: None,
        c_minus: None,
    })
}

/// Coefficients at multiphoton resonance. `Δ₁` is ignored and taken as
/// `Δ₂ + Δ₃`.
pub fn resonant_coherences(system: &LevelSystem, drive: &DriveConfig) -> Result<AnalyticCoefficients> {
    let (g1, g2, g3) = (system.gamma1, system.gamma2, system.gamma3);
    let gs = system.gamma_sum();
    let gb = (g1 + g2).powi(2) * g3;
    let o = drive.omega31_mag;
    let o2 = o * o;
    let (d2, d3) = (drive.delta2, drive.delta3);

    let cp = check("C+", 4.0 * o2 + (2.0 * I * d3 + g3) * (-2.0 * I * d2 + gs))?;
    let cm = check("C-", 4.0 * o2 + (-2.0 * I * d3 + g3) * (2.0 * I * d2 + gs))?;
    let d = 4.0 * (d2 + d3).powi(2) * g3 + gb + 4.0 * o2 * (g2 + 2.0 * g3);
    check("D", d.into())?;

    let d21 = -2.0 * I / (cp * d)
        * (8.0 * I * d2.powi(3) * g3 + 4.0 * d2 * d2 * (4.0 * I * d3 - gs) * g3 - (4.0 * d3 * d3 * g3 + gb) * gs
            + 4.0 * o2 * (g2 * (g1 + g2) + (2.0 * I * d3 + g2) * g3 - g3 * g3)
            + 2.0 * I * d2 * (-4.0 * o2 * (g2 - 2.0 * g3) + gb + 4.0 * g3 * d3 * (d3 + I * gs)));
    let c21 = -4.0 * o / (cp * d) * (4.0 * o2 * (g2 - g3) - (2.0 * (d2 + d3) + I * (g1 + g2)) * g3 * (2.0 * d2 + I * gs));
    let c32 = -4.0 * o / (cm * d) * (4.0 * o2 * (g2 - g3) - (2.0 * (d2 + d3) + I * (g1 + g2)) * g3 * (2.0 * d2 - I * gs));
    let d32 = -8.0 * I / (cm * d) * o2 * (2.0 * I * d3 * g2 + g3 * (2.0 * I * d2 + g1 + g3));

    Ok(AnalyticCoefficients {
        d21,
        c21,
        d32,
        c32,
        b: Some(d),
        gamma_big: gb,
        gamma_s: gs,
        c_plus: Some(cp),
        c_minus: Some(cm),
    })
}

/// Incoherently pumped system (`Ω₃₁ = 0`, `Δ₁ = 0`). No cross terms.
pub fn incoherent_coherences(system: &LevelSystem, r1: f64, delta2: f64, delta3: f64) -> AnalyticCoefficients {
    let (g1, g2, g3) = (system.gamma1, system.gamma2, system.gamma3);
    let gs = system.gamma_sum();
    let shared = (g1 + g2) * g3 + r1 * (g2 + 2.0 * g3);
    let d21 = 2.0 * I * (r1 * (g3 - g2) + (g1 + g2) * g3) / ((2.0 * I * delta3 + r1 + g3) * shared);
    let d32 = 2.0 * I * r1 * (g2 - g3) / ((2.0 * I * delta2 + gs + r1) * shared);
    let zero = C64::new(0.0, 0.0);
    AnalyticCoefficients {
        d21,
        c21: zero,
        d32,
        c32: zero,
        b: None,
        gamma_big: (g1 + g2).powi(2) * g3,
        gamma_s: gs,
        c_plus: None,
        c_minus: None,
    }
}

/// Zeroth-order populations `(ρ₁₁, ρ₂₂, ρ₃₃)` of the incoherent system.
pub fn incoherent_populations(system: &LevelSystem, r1: f64) -> [f64; 3] {
    let (g1, g2, g3) = (system.gamma1, system.gamma2, system.gamma3);
    let c = r1 * g2 + 2.0 * r1 * g3 + g1 * g3 + g2 * g3;
    [(r1 + g1 + g2) * g3 / c, r1 * g2 / c, r1 * g3 / c]
}

/// Direct coefficients rebuilt from the zeroth-order populations,
/// `(d21, d32)`.
pub fn coherences_from_populations(system: &LevelSystem, r1: f64, delta2: f64, delta3: f64, populations: [f64; 3]) -> (C64, C64) {
    let [p11, p22, p33] = populations;
    let d21 = 2.0 * (p11 - p22) / (2.0 * delta3 - I * (r1 + system.gamma3));
    let d32 = 2.0 * (p22 - p33) / (2.0 * delta2 - I * (r1 + system.gamma_sum()));
    (d21, d32)
}

/// Pump rate at which the incoherent magnetic coefficient vanishes at every
/// detuning; `None` when `γ₂ ≤ γ₃`.
pub fn incoherent_zero_absorption_pump(system: &LevelSystem) -> Option<f64> {
    let (g1, g2, g3) = (system.gamma1, system.gamma2, system.gamma3);
    (g2 > g3).then(|| (g1 + g2) * g3 / (g2 - g3))
}

/// Populations of the coherently driven system as `|Ω₃₁| → ∞`.
pub fn strong_field_populations(system: &LevelSystem) -> [f64; 3] {
    let (g2, g3) = (system.gamma2, system.gamma3);
    let outer = 1.0 / (g2 / g3 + 2.0);
    [outer, 1.0 / (2.0 * g3 / g2 + 1.0), outer]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopulationForms {
    pub populations: [f64; 3],
    /// Direct coefficients rebuilt from the populations; only available for
    /// the incoherent system.
    pub coherences: Option<(C64, C64)>,
}

/// Zeroth-order populations in `mode`, with the population-difference form
/// of the coherences where a closed form exists.
pub fn population_forms(system: &LevelSystem, drive: &DriveConfig, mode: Mode) -> Result<PopulationForms> {
    match mode {
        Mode::Incoherent => {
            let populations = incoherent_populations(system, drive.r1);
            let coherences = coherences_from_populations(system, drive.r1, drive.delta2, drive.delta3, populations);
            Ok(PopulationForms {
                populations,
                coherences: Some(coherences),
            })
        }
        Mode::ClosedLoop => Ok(PopulationForms {
            populations: zeroth_order_populations(system, drive, mode)?,
            coherences: None,
        }),
    }
}
