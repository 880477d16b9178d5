//! Equations of motion in the rotated frame, split by time dependence.
//!
//! The density vector obeys `∂R/∂t = M(t) R + Σ` with
//! `M(t) = M₀ + M₊ Ω₂₁ e^{iΔt} + M₋ Ω₁₂ e^{−iΔt}`. Eliminating `ρ₃₃` through the
//! trace produces the inhomogeneous term; no `ρ₃₃` appears next to the
//! oscillating couplings, so `Σ` is time independent.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{Mat8, Vec8};
use crate::model::*;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicGenerator {
    pub m0: Mat8,
    /// Coefficient of `Ω₂₁ e^{iΔt}`.
    pub m_plus: Mat8,
    /// Coefficient of `Ω₁₂ e^{−iΔt}`.
    pub m_minus: Mat8,
    pub sigma0: Vec8,
    pub sigma_plus: Vec8,
    pub sigma_minus: Vec8,
    /// Multiphoton detuning `Δ`.
    pub delta: f64,
    /// Magnetic probe Rabi frequency used by [`rhs`].
    pub omega21: C64,
    pub mode: Mode,
}

impl HarmonicGenerator {
    pub fn omega12(&self) -> C64 {
        self.omega21.conj()
    }

    /// `M(t)`
    pub fn matrix_at(&self, t: f64) -> Mat8 {
        let phase = C64::from_polar(1.0, self.delta * t);
        self.m0 + self.m_plus * (self.omega21 * phase) + self.m_minus * (self.omega12() * phase.conj())
    }

    /// `Σ(t)`
    pub fn sigma_at(&self, t: f64) -> Vec8 {
        let phase = C64::from_polar(1.0, self.delta * t);
        self.sigma0 + self.sigma_plus * (self.omega21 * phase) + self.sigma_minus * (self.omega12() * phase.conj())
    }
}

/// Static couplings, kept independent so that derivatives with respect to a
/// single Rabi frequency (holding its conjugate fixed) are available.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Couplings {
    pub o31: C64,
    pub o13: C64,
    pub o32: C64,
    pub o23: C64,
}

impl Couplings {
    pub fn physical(omega31: C64, omega32: C64) -> Self {
        Self {
            o31: omega31,
            o13: omega31.conj(),
            o32: omega32,
            o23: omega32.conj(),
        }
    }

    /// Couplings seen by the conjugated equations.
    fn conj_swapped(&self) -> Self {
        Self {
            o31: self.o13.conj(),
            o13: self.o31.conj(),
            o32: self.o23.conj(),
            o23: self.o32.conj(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Rates {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub r1: f64,
    pub delta1: f64,
    pub delta2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Blocks {
    pub m0: Mat8,
    pub m_plus: Mat8,
    pub m_minus: Mat8,
    pub sigma0: Vec8,
}

impl Blocks {
    fn zeros() -> Self {
        Self {
            m0: Mat8::zeros(),
            m_plus: Mat8::zeros(),
            m_minus: Mat8::zeros(),
            sigma0: Vec8::zeros(),
        }
    }

    /// Add `c·ρ₃₃ = c·(1 − ρ₁₁ − ρ₂₂)` to `row`.
    fn rho33(&mut self, row: usize, c: C64) {
        self.sigma0[row] += c;
        self.m0[(row, RHO11)] -= c;
        self.m0[(row, RHO22)] -= c;
    }
}

/// Rows for `ρ₁₁, ρ₁₂, ρ₁₃, ρ₂₂, ρ₂₃`; the remaining rows follow by
/// conjugation. Linear in `c`; `rates = None` drops every term that does not
/// carry a static coupling.
fn fill_primary_rows(b: &mut Blocks, rates: Option<&Rates>, c: &Couplings) {
    let r = rates.copied().unwrap_or_default();
    let on = if rates.is_some() { 1.0 } else { 0.0 };
    let gs = r.gamma1 + r.gamma2 + r.gamma3;

    b.m0[(RHO11, RHO11)] += -r.r1;
    b.m0[(RHO11, RHO22)] += r.gamma3;
    if rates.is_some() {
        b.rho33(RHO11, C64::from(r.gamma1 + r.r1));
    }
    b.m_minus[(RHO11, RHO21)] += I * on;
    b.m_plus[(RHO11, RHO12)] += -I * on;
    b.m0[(RHO11, RHO31)] += I * c.o13;
    b.m0[(RHO11, RHO13)] += -I * c.o31;

    b.m0[(RHO12, RHO12)] += -(I * (r.delta2 - r.delta1) + 0.5 * (r.r1 + r.gamma3)) * on;
    b.m0[(RHO12, RHO13)] += -I * c.o32;
    b.m_minus[(RHO12, RHO11)] += -I * on;
    b.m_minus[(RHO12, RHO22)] += I * on;
    b.m0[(RHO12, RHO32)] += I * c.o13;

    b.m0[(RHO13, RHO13)] += -(-I * r.delta1 + 0.5 * (2.0 * r.r1 + r.gamma1 + r.gamma2)) * on;
    b.m0[(RHO13, RHO11)] += -I * c.o13;
    b.rho33(RHO13, I * c.o13);
    b.m0[(RHO13, RHO12)] += -I * c.o23;
    b.m_minus[(RHO13, RHO23)] += I * on;

    b.m0[(RHO22, RHO22)] += -r.gamma3;
    if rates.is_some() {
        b.rho33(RHO22, C64::from(r.gamma2));
    }
    b.m_minus[(RHO22, RHO21)] += -I * on;
    b.m_plus[(RHO22, RHO12)] += I * on;
    b.m0[(RHO22, RHO23)] += -I * c.o32;
    b.m0[(RHO22, RHO32)] += I * c.o23;

    b.m0[(RHO23, RHO23)] += -(-I * r.delta2 + 0.5 * (r.r1 + gs)) * on;
    b.m0[(RHO23, RHO21)] += -I * c.o13;
    b.m_plus[(RHO23, RHO13)] += I * on;
    b.rho33(RHO23, I * c.o23);
    b.m0[(RHO23, RHO22)] += -I * c.o23;
}

pub(crate) fn build_blocks(rates: Option<&Rates>, c: &Couplings) -> Blocks {
    let mut b = Blocks::zeros();
    fill_primary_rows(&mut b, rates, c);
    let mut mirror = Blocks::zeros();
    fill_primary_rows(&mut mirror, rates, &c.conj_swapped());
    for (src, dst) in [(RHO12, RHO21), (RHO13, RHO31), (RHO23, RHO32)] {
        for j in 0..8 {
            let k = transposed(j);
            b.m0[(dst, k)] = mirror.m0[(src, j)].conj();
            b.m_plus[(dst, k)] = mirror.m_minus[(src, j)].conj();
            b.m_minus[(dst, k)] = mirror.m_plus[(src, j)].conj();
        }
        b.sigma0[dst] = mirror.sigma0[src].conj();
    }
    b
}

/// Mode-adjusted copy of the drive after checking the mode constraints.
pub fn effective_drive(system: &LevelSystem, drive: &DriveConfig, mode: Mode) -> Result<DriveConfig> {
    let report = validate(system, drive, &MediumParams::default());
    if let Some(issue) = report.violations().next() {
        return Err(Error::InvalidConfig(issue.message.clone()));
    }
    let mut d = *drive;
    match mode {
        Mode::ClosedLoop => {
            if drive.r1 != 0.0 {
                return Err(Error::ModeMismatch {
                    mode,
                    what: "an incoherent pump (r1 != 0)",
                });
            }
        }
        Mode::Incoherent => {
            if drive.omega31_mag != 0.0 {
                return Err(Error::ModeMismatch {
                    mode,
                    what: "a control field (omega31_mag != 0)",
                });
            }
            d.delta1 = 0.0;
        }
    }
    Ok(d)
}

pub(crate) fn rates_of(system: &LevelSystem, drive: &DriveConfig) -> Rates {
    Rates {
        gamma1: system.gamma1,
        gamma2: system.gamma2,
        gamma3: system.gamma3,
        r1: drive.r1,
        delta1: drive.delta1,
        delta2: drive.delta2,
    }
}

/// Build the harmonic blocks for `mode`.
///
/// Closed-loop mode rejects a nonzero pump and incoherent mode rejects a
/// control field; incoherent mode additionally sets `Δ₁ = 0`.
pub fn build_generator(system: &LevelSystem, drive: &DriveConfig, mode: Mode) -> Result<HarmonicGenerator> {
    let d = effective_drive(system, drive, mode)?;
    Ok(generator_from_parts(system, &d, mode))
}

pub(crate) fn generator_from_parts(system: &LevelSystem, d: &DriveConfig, mode: Mode) -> HarmonicGenerator {
    let b = build_blocks(Some(&rates_of(system, d)), &Couplings::physical(d.omega31(), d.omega32()));
    HarmonicGenerator {
        m0: b.m0,
        m_plus: b.m_plus,
        m_minus: b.m_minus,
        sigma0: b.sigma0,
        sigma_plus: Vec8::zeros(),
        sigma_minus: Vec8::zeros(),
        delta: d.multiphoton_detuning(),
        omega21: d.omega21(),
        mode,
    }
}

/// Which static probe coupling a perturbation block differentiates by.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeCoupling {
    Omega32,
    Omega23,
}

/// `(∂M₀/∂x, ∂Σ₀/∂x)` for `x = Ω₃₂` or `x = Ω₂₃`, holding the other fixed.
pub fn probe_derivative(which: ProbeCoupling) -> (Mat8, Vec8) {
    let one = C64::new(1.0, 0.0);
    let c = match which {
        ProbeCoupling::Omega32 => Couplings {
            o32: one,
            ..Default::default()
        },
        ProbeCoupling::Omega23 => Couplings {
            o23: one,
            ..Default::default()
        },
    };
    let b = build_blocks(None, &c);
    (b.m0, b.sigma0)
}

/// `M(t)·state + Σ(t)`.
pub fn rhs(t: f64, state: &DensityVector, gen: &HarmonicGenerator) -> DensityVector {
    DensityVector(gen.matrix_at(t) * state.0 + gen.sigma_at(t))
}

/// Right-hand side written out term by term from the scalar equations of
/// motion. Used only to cross-check the block assembly.
pub fn direct_rhs(t: f64, state: &DensityVector, system: &LevelSystem, drive: &DriveConfig, mode: Mode) -> Result<DensityVector> {
    let d = effective_drive(system, drive, mode)?;
    let (g1, g2, g3, r1) = (system.gamma1, system.gamma2, system.gamma3, d.r1);
    let gs = g1 + g2 + g3;
    let (d1, d2) = (d.delta1, d.delta2);
    let delta = d.multiphoton_detuning();
    let o31 = d.omega31();
    let o13 = o31.conj();
    let o32 = d.omega32();
    let o23 = o32.conj();
    let o21t = d.omega21() * C64::from_polar(1.0, delta * t);
    let o12t = o21t.conj();

    let v = &state.0;
    let (p11, p12, p13, p21, p22, p23, p31, p32) = (v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]);
    let p33 = C64::new(1.0, 0.0) - p11 - p22;

    let mut out = Vec8::zeros();
    out[RHO11] = -r1 * p11 + g3 * p22 + (g1 + r1) * p33 + I * o12t * p21 - I * o21t * p12 + I * o13 * p31 - I * o31 * p13;
    out[RHO12] = -(I * (d2 - d1) + 0.5 * (r1 + g3)) * p12 - I * o32 * p13 - I * o12t * (p11 - p22) + I * o13 * p32;
    out[RHO13] = -(-I * d1 + 0.5 * (2.0 * r1 + g1 + g2)) * p13 - I * o13 * (p11 - p33) - I * o23 * p12 + I * o12t * p23;
    out[RHO22] = -g3 * p22 + g2 * p33 - I * o12t * p21 + I * o21t * p12 - I * o32 * p23 + I * o23 * p32;
    out[RHO23] = -(-I * d2 + 0.5 * (r1 + gs)) * p23 - I * o13 * p21 + I * o21t * p13 + I * o23 * (p33 - p22);
    out[RHO21] = -(-I * (d2 - d1) + 0.5 * (r1 + g3)) * p21 + I * o23 * p31 + I * o21t * (p11 - p22) - I * o31 * p23;
    out[RHO31] = -(I * d1 + 0.5 * (2.0 * r1 + g1 + g2)) * p31 + I * o31 * (p11 - p33) + I * o32 * p21 - I * o21t * p32;
    out[RHO32] = -(I * d2 + 0.5 * (r1 + gs)) * p32 + I * o31 * p12 - I * o12t * p31 - I * o32 * (p33 - p22);
    Ok(DensityVector(out))
}
