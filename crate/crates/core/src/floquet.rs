//! First-order Floquet solution and linear-response expansion coefficients.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{self, build_blocks, effective_drive, generator_from_parts, rates_of, Couplings, HarmonicGenerator, ProbeCoupling};
use crate::linalg::{solve_checked, Mat8, Vec8};
use crate::model::*;

/// Multiphoton detunings at or below this magnitude count as resonant.
pub const DELTA_TOL: f64 = 1e-9;
/// Probe amplitude of the linearity certificate.
pub const PROBE_EPSILON: f64 = 1e-6;
/// Allowed relative disagreement between the `ε` and `ε/2` extractions.
pub const LINEARITY_TOL: f64 = 1e-6;

const I: C64 = C64::new(0.0, 1.0);

/// Harmonic amplitudes of `R(t) = R₀ + R₊ Ω₂₁ e^{iΔt} + R₋ Ω₁₂ e^{−iΔt}`.
///
/// `r_plus` and `r_minus` are per unit of the magnetic Rabi frequency; the
/// amplitudes actually present in the state are [`Self::amplitude_plus`] and
/// [`Self::amplitude_minus`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloquetSolution {
    pub r0: DensityVector,
    pub r_plus: Vec8,
    pub r_minus: Vec8,
    pub omega21: C64,
    pub omega12: C64,
    pub delta: f64,
    /// Largest relative residual of the three solves.
    pub residual: f64,
    /// Largest 1-norm condition number of the three solves.
    pub condition: f64,
}

impl FloquetSolution {
    pub fn amplitude_plus(&self) -> Vec8 {
        self.r_plus * self.omega21
    }

    pub fn amplitude_minus(&self) -> Vec8 {
        self.r_minus * self.omega12
    }

    /// Reconstructed state at time `t`.
    pub fn state_at(&self, t: f64) -> DensityVector {
        let phase = C64::from_polar(1.0, self.delta * t);
        DensityVector(self.r0.0 + self.amplitude_plus() * phase + self.amplitude_minus() * phase.conj())
    }
}

/// Solve for `R₀`, `R₊`, `R₋` by comparison of coefficients.
pub fn solve_harmonics(gen: &HarmonicGenerator, omega21: C64, omega12: C64) -> Result<FloquetSolution> {
    let shift = Mat8::identity() * (I * gen.delta);
    let zeroth = solve_checked(&gen.m0, &(-gen.sigma0))?;
    let r0 = zeroth.x;
    let plus = solve_checked(&(gen.m0 - shift), &(-(gen.m_plus * r0 + gen.sigma_plus)))?;
    let minus = solve_checked(&(gen.m0 + shift), &(-(gen.m_minus * r0 + gen.sigma_minus)))?;
    Ok(FloquetSolution {
        r0: DensityVector(r0),
        r_plus: plus.x,
        r_minus: minus.x,
        omega21,
        omega12,
        delta: gen.delta,
        residual: zeroth.residual.max(plus.residual).max(minus.residual),
        condition: zeroth.condition.max(plus.condition).max(minus.condition),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Resonant,
    Detuned,
}

/// All four coefficients without the in-phase selection, for arbitrary `Δ`.
///
/// `c21` is per unit of `Ω₂₃` (it multiplies `e^{−iΔt}` in the probe frame)
/// and `c32` per unit of `Ω₁₂`. Evaluated with every phase set to zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicCoefficients {
    pub d21: C64,
    pub c21: C64,
    pub d32: C64,
    pub c32: C64,
    pub delta: f64,
    pub populations: [f64; 3],
    /// Relative `ε` vs `ε/2` discrepancy of the two static-probe derivatives.
    pub linearity: f64,
}

/// Linear-response expansion coefficients with the in-phase filter applied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoefficients {
    pub d21: C64,
    pub c21: C64,
    pub d32: C64,
    pub c32: C64,
    pub branch: Branch,
    pub populations: [f64; 3],
    pub linearity: f64,
}

/// Derivative of `R₀` with respect to one static probe coupling, solved
/// exactly from the linearized stationarity condition.
fn static_derivative(m0: &Mat8, r0: &Vec8, which: ProbeCoupling) -> Result<Vec8> {
    let (dm, ds) = generator::probe_derivative(which);
    Ok(solve_checked(m0, &(-(dm * r0 + ds)))?.x)
}

/// `(R₀(ε) − R₀(0))/ε`, solved without cancellation.
fn secant(base: &Mat8, r0: &Vec8, which: ProbeCoupling, eps: f64) -> Result<Vec8> {
    let (dm, ds) = generator::probe_derivative(which);
    Ok(solve_checked(&(base + dm * C64::from(eps)), &(-(dm * r0 + ds)))?.x)
}

fn certify(coefficient: &'static str, g1: C64, g2: C64) -> Result<f64> {
    let scale = g1.norm().max(g2.norm()).max(1e-6);
    let discrepancy = (g1 - g2).norm() / scale;
    if discrepancy > LINEARITY_TOL {
        return Err(Error::LinearityFailure { coefficient, discrepancy });
    }
    Ok(discrepancy)
}

/// Unfiltered coefficients. The probe amplitudes in `drive` are ignored.
pub fn harmonic_coefficients(system: &LevelSystem, drive: &DriveConfig, mode: Mode) -> Result<HarmonicCoefficients> {
    let mut d = effective_drive(system, drive, mode)?.without_phases();
    d.omega32_mag = 0.0;
    d.omega21_mag = 1.0;
    let gen = generator_from_parts(system, &d, mode);
    let sol = solve_harmonics(&gen, C64::new(1.0, 0.0), C64::new(1.0, 0.0))?;
    let r0 = sol.r0.0;

    let d_omega32 = static_derivative(&gen.m0, &r0, ProbeCoupling::Omega32)?;
    let d_omega23 = static_derivative(&gen.m0, &r0, ProbeCoupling::Omega23)?;

    let mut linearity: f64 = 0.0;
    for (which, index, name) in [(ProbeCoupling::Omega32, RHO32, "d32"), (ProbeCoupling::Omega23, RHO21, "c21")] {
        let g1 = secant(&gen.m0, &r0, which, PROBE_EPSILON)?[index];
        let g2 = secant(&gen.m0, &r0, which, PROBE_EPSILON / 2.0)?[index];
        linearity = linearity.max(certify(name, g1, g2)?);
    }

    Ok(HarmonicCoefficients {
        d21: sol.r_plus[RHO21],
        c21: d_omega23[RHO21],
        d32: d_omega32[RHO32],
        c32: sol.r_minus[RHO32],
        delta: gen.delta,
        populations: sol.r0.populations(),
        linearity,
    })
}

/// Expansion coefficients of the probe-frame coherences.
///
/// Off multiphoton resonance the cross terms oscillate at `Δ` relative to the
/// probe and are discarded, so `c21 = c32 = 0` exactly.
pub fn extract_coefficients(system: &LevelSystem, drive: &DriveConfig, mode: Mode) -> Result<ExpansionCoefficients> {
    let h = harmonic_coefficients(system, drive, mode)?;
    let resonant = h.delta.abs() <= DELTA_TOL;
    let zero = C64::new(0.0, 0.0);
    let (c21, c32) = match (resonant, mode) {
        (true, Mode::ClosedLoop) => (h.c21, h.c32),
        _ => (zero, zero),
    };
    Ok(ExpansionCoefficients {
        d21: h.d21,
        c21,
        d32: h.d32,
        c32,
        branch: if resonant { Branch::Resonant } else { Branch::Detuned },
        populations: h.populations,
        linearity: h.linearity,
    })
}

/// Zeroth-order populations `(ρ₁₁, ρ₂₂, ρ₃₃)` without probe fields.
pub fn zeroth_order_populations(system: &LevelSystem, drive: &DriveConfig, mode: Mode) -> Result<[f64; 3]> {
    let d = effective_drive(system, drive, mode)?;
    let b = build_blocks(Some(&rates_of(system, &d)), &Couplings::physical(d.omega31(), C64::new(0.0, 0.0)));
    let r0 = solve_checked(&b.m0, &(-b.sigma0))?.x;
    Ok(DensityVector(r0).populations())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::build_generator;
    use proptest::prelude::*;

    const ALPHA: f64 = FINE_STRUCTURE;

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn incoherent_populations_and_vanishing_drive_amplitudes() {
        let system = LevelSystem::default();
        let drive = DriveConfig {
            omega21_mag: 0.0,
            omega32_mag: 0.0,
            ..DriveConfig::incoherent()
        };
        let gen = build_generator(&system, &drive, Mode::Incoherent).unwrap();
        let sol = solve_harmonics(&gen, gen.omega21, gen.omega12()).unwrap();
        let a2 = ALPHA * ALPHA;
        let c = 1.0 + 4.0 * a2;
        let expected = [3.0 * a2 / c, 1.0 / c, a2 / c];
        for (p, e) in sol.r0.populations().iter().zip(expected) {
            assert!((p - e).abs() < 1e-12 * e.max(1e-3), "{p} vs {e}");
        }
        assert_eq!(sol.amplitude_plus(), Vec8::zeros());
        assert_eq!(sol.amplitude_minus(), Vec8::zeros());
        assert!(sol.residual < 1e-9);
    }

    #[test]
    fn weak_control_orders_the_populations() {
        // Small-field regime: the ground state keeps most of the population.
        let drive = DriveConfig {
            omega31_mag: 1e-3,
            ..Default::default()
        };
        let [p1, p2, p3] = zeroth_order_populations(&LevelSystem::default(), &drive, Mode::ClosedLoop).unwrap();
        assert!(p1 > p2 && p2 > p3, "{p1} {p2} {p3}");
    }

    #[test]
    fn unit_control_pumps_into_the_middle_level() {
        let [p1, p2, p3] = zeroth_order_populations(&LevelSystem::default(), &DriveConfig::default(), Mode::ClosedLoop).unwrap();
        assert!((p1 - 1.0649e-4).abs() < 1e-7);
        assert!((p2 - 0.99984).abs() < 1e-5);
        assert!((p3 - 5.3243e-5).abs() < 1e-8);
    }

    #[test]
    fn strong_control_approaches_the_saturated_populations() {
        let system = LevelSystem::default();
        let drive = DriveConfig {
            omega31_mag: 1000.0,
            ..Default::default()
        };
        let [p1, p2, p3] = zeroth_order_populations(&system, &drive, Mode::ClosedLoop).unwrap();
        let (g2, g3) = (system.gamma2, system.gamma3);
        let outer = 1.0 / (g2 / g3 + 2.0);
        let middle = 1.0 / (2.0 * g3 / g2 + 1.0);
        assert!((p1 / outer - 1.0).abs() < 0.01);
        assert!((p2 / middle - 1.0).abs() < 0.01);
        assert!((p3 / outer - 1.0).abs() < 0.01);
    }

    #[test]
    fn undriven_undamped_level_is_singular() {
        let system = LevelSystem::new(1.0, 1.0, 0.0);
        let drive = DriveConfig {
            omega31_mag: 0.0,
            omega32_mag: 0.0,
            omega21_mag: 0.0,
            ..Default::default()
        };
        let gen = build_generator(&system, &drive, Mode::ClosedLoop).unwrap();
        assert!(matches!(
            solve_harmonics(&gen, gen.omega21, gen.omega12()),
            Err(Error::SingularGenerator { .. })
        ));
    }

    #[test]
    fn incoherent_magnetic_coefficient() {
        let c = extract_coefficients(&LevelSystem::default(), &DriveConfig::incoherent(), Mode::Incoherent).unwrap();
        let a2 = ALPHA * ALPHA;
        let expected = C64::new(0.0, 2.0 * (3.0 * a2 - 1.0) / ((1.0 + a2) * (1.0 + 4.0 * a2)));
        assert!(rel(c.d21, expected) < 1e-10, "{} vs {}", c.d21, expected);
        assert!((c.d32 - C64::new(0.0, 0.666477)).norm() < 1e-6, "{}", c.d32);
        assert_eq!(c.branch, Branch::Resonant);
        assert_eq!(c.c21, C64::new(0.0, 0.0));
        assert_eq!(c.c32, C64::new(0.0, 0.0));
    }

    #[test]
    fn incoherent_electric_coefficient_vanishes_for_equal_rates() {
        let system = LevelSystem::new(1.0, 0.3, 0.3);
        let c = extract_coefficients(&system, &DriveConfig::incoherent(), Mode::Incoherent).unwrap();
        assert!(c.d32.norm() < 1e-14, "{}", c.d32);
    }

    #[test]
    fn detuned_point_has_no_cross_terms() {
        let drive = DriveConfig {
            delta2: 0.3,
            delta3: 0.1,
            ..Default::default()
        };
        let c = extract_coefficients(&LevelSystem::default(), &drive, Mode::ClosedLoop).unwrap();
        assert_eq!(c.branch, Branch::Detuned);
        assert_eq!(c.c21, C64::new(0.0, 0.0));
        assert_eq!(c.c32, C64::new(0.0, 0.0));
        assert!(c.d21.norm() > 0.0 && c.d32.norm() > 0.0);
    }

    #[test]
    fn resonant_point_values() {
        let c = extract_coefficients(&LevelSystem::default(), &DriveConfig::default(), Mode::ClosedLoop).unwrap();
        assert_eq!(c.branch, Branch::Resonant);
        assert!((c.d21 - C64::new(0.0, -0.999787)).norm() < 1e-6, "{}", c.d21);
        assert!((c.c21 - C64::new(-0.999814, 0.0)).norm() < 1e-6, "{}", c.c21);
        assert!((c.c32 - C64::new(-0.999707, 0.0)).norm() < 1e-6, "{}", c.c32);
        assert!((c.d32 - C64::new(0.0, -2.6622e-5)).norm() < 1e-9, "{}", c.d32);
        assert!(c.linearity < LINEARITY_TOL);
    }

    #[test]
    fn direct_terms_are_continuous_at_resonance() {
        let system = LevelSystem::new(1.0, 1.0, 0.1);
        let at = extract_coefficients(&system, &DriveConfig::default(), Mode::ClosedLoop).unwrap();
        let near = extract_coefficients(
            &system,
            &DriveConfig {
                delta3: 1e-10,
                ..Default::default()
            },
            Mode::ClosedLoop,
        )
        .unwrap();
        let off = extract_coefficients(
            &system,
            &DriveConfig {
                delta3: 1e-8,
                ..Default::default()
            },
            Mode::ClosedLoop,
        )
        .unwrap();
        assert_eq!(near.branch, Branch::Resonant);
        assert_eq!(off.branch, Branch::Detuned);
        assert!(rel(off.d21, at.d21) < 1e-8);
        assert!(rel(off.d32, at.d32) < 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn harmonics_pair_under_conjugation(
            o31 in 0.1..5.0f64, psi in -3.0..3.0f64, phi in -3.0..3.0f64,
            d1 in -3.0..3.0f64, d2 in -3.0..3.0f64, d3 in -3.0..3.0f64,
            g3 in 0.01..0.5f64,
        ) {
            let drive = DriveConfig { omega31_mag: o31, psi, phi, delta1: d1, delta2: d2, delta3: d3, omega21_mag: 1e-3, omega32_mag: 1e-3, ..Default::default() };
            let gen = build_generator(&LevelSystem::new(1.0, 1.0, g3), &drive, Mode::ClosedLoop).unwrap();
            let sol = solve_harmonics(&gen, gen.omega21, gen.omega12()).unwrap();
            prop_assert!(sol.residual < 1e-9);
            prop_assert!(sol.r0.hermiticity_error() < 1e-10);
            let (p, m) = (sol.amplitude_plus(), sol.amplitude_minus());
            for i in 0..8 {
                prop_assert!((p[i] - m[transposed(i)].conj()).norm() < 1e-12);
            }
        }

        #[test]
        fn zeroth_order_state_is_physical(
            o31 in 0.0..5.0f64, d1 in -5.0..5.0f64, g3 in 1e-4..1.0f64,
        ) {
            let drive = DriveConfig { omega31_mag: o31, delta1: d1, omega21_mag: 0.0, omega32_mag: 0.0, ..Default::default() };
            let gen = build_generator(&LevelSystem::new(1.0, 1.0, g3), &drive, Mode::ClosedLoop).unwrap();
            let sol = solve_harmonics(&gen, gen.omega21, gen.omega12()).unwrap();
            prop_assert!(sol.r0.is_physical(1e-10));
        }

        #[test]
        fn direct_response_is_gauge_invariant(psi in -6.0..6.0f64, phi in -6.0..6.0f64, d3 in -2.0..2.0f64) {
            let system = LevelSystem::default();
            let base = DriveConfig { delta3: d3, omega32_mag: 0.0, ..Default::default() };
            let reference = extract_coefficients(&system, &base, Mode::ClosedLoop).unwrap();
            let gen = build_generator(&system, &DriveConfig { psi, phi, ..base }, Mode::ClosedLoop).unwrap();
            let sol = solve_harmonics(&gen, gen.omega21, gen.omega12()).unwrap();
            prop_assert!(rel(sol.r_plus[RHO21], reference.d21) < 1e-10);
        }
    }
}
