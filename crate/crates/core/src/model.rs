//! Level scheme, drive fields and medium parameters shared by every solver.
//!
//! All rates and detunings are expressed in units of the reference decay rate
//! `γ = 1` and `ħ = 1`, so times are measured in `1/γ`. The levels are
//! `|1⟩ < |2⟩ < |3⟩`: the magnetic probe component drives `|1⟩ ↔ |2⟩`, the
//! electric probe component drives `|2⟩ ↔ |3⟩` and the control field (or the
//! incoherent pump in the reference system) acts on `|1⟩ ↔ |3⟩`.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::linalg::Vec8;

/// Fine-structure constant.
pub const FINE_STRUCTURE: f64 = 1.0 / 137.035999;

/// Probe Rabi frequencies above this fraction of the smallest relevant rate
/// are flagged as leaving the linear-response regime.
pub const LINEAR_REGIME_FRACTION: f64 = 0.1;

/// Spontaneous decay rates of the ladder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevelSystem {
    /// Decay `|3⟩ → |1⟩`.
    pub gamma1: f64,
    /// Decay `|3⟩ → |2⟩`.
    pub gamma2: f64,
    /// Decay `|2⟩ → |1⟩` (magnetic dipole transition).
    pub gamma3: f64,
}

impl LevelSystem {
    pub fn new(gamma1: f64, gamma2: f64, gamma3: f64) -> Self {
        Self { gamma1, gamma2, gamma3 }
    }

    /// `γ₁ = γ₂ = 1`, `γ₃ = α²`.
    pub fn with_alpha(alpha: f64) -> Self {
        Self::new(1.0, 1.0, alpha * alpha)
    }

    /// `γ_s = γ₁ + γ₂ + γ₃`
    pub fn gamma_sum(&self) -> f64 {
        self.gamma1 + self.gamma2 + self.gamma3
    }

    /// Total decay rate of the upper level.
    pub fn upper_decay(&self) -> f64 {
        self.gamma1 + self.gamma2
    }
}

impl Default for LevelSystem {
    fn default() -> Self {
        Self::with_alpha(FINE_STRUCTURE)
    }
}

/// Amplitudes, phases and detunings of the applied fields.
///
/// Complex Rabi frequencies are never stored; they are assembled from the
/// magnitudes and phases so the conjugate pairs stay consistent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveConfig {
    /// `|Ω₃₁|`, control field.
    pub omega31_mag: f64,
    /// Control phase `ψ`.
    pub psi: f64,
    /// `|Ω₃₂|`, electric probe component.
    pub omega32_mag: f64,
    /// `|Ω₂₁|`, magnetic probe component.
    pub omega21_mag: f64,
    /// Probe phase `φ`, shared by both probe components.
    pub phi: f64,
    /// `Δ₁ = ω₃ − ω₁ − ω_c`
    pub delta1: f64,
    /// `Δ₂ = ω₃ − ω₂ − ω_p`
    pub delta2: f64,
    /// `Δ₃ = ω₂ − ω₁ − ω_p`
    pub delta3: f64,
    /// Bidirectional incoherent pump rate on `|1⟩ ↔ |3⟩`.
    pub r1: f64,
    /// Wave-vector mismatch phase `K·r` with `K = k_c − 2k_p`.
    pub k_mismatch_phase: f64,
}

impl DriveConfig {
    /// Probe amplitude used by the presets; deep inside the linear regime.
    pub const WEAK_PROBE: f64 = 1e-6;

    /// Closed-loop operating point: `Ω₃₁ = γ`, all detunings and phases zero.
    pub fn closed_loop() -> Self {
        Self {
            omega31_mag: 1.0,
            psi: 0.0,
            omega32_mag: Self::WEAK_PROBE,
            omega21_mag: Self::WEAK_PROBE,
            phi: 0.0,
            delta1: 0.0,
            delta2: 0.0,
            delta3: 0.0,
            r1: 0.0,
            k_mismatch_phase: 0.0,
        }
    }

    /// Incoherently pumped reference: no control field, `r₁ = γ`.
    pub fn incoherent() -> Self {
        Self {
            omega31_mag: 0.0,
            r1: 1.0,
            ..Self::closed_loop()
        }
    }

    /// Multiphoton detuning `Δ = Δ₂ + Δ₃ − Δ₁`.
    pub fn multiphoton_detuning(&self) -> f64 {
        self.delta2 + self.delta3 - self.delta1
    }

    /// `Ω₃₁ = |Ω₃₁| e^{iψ}`
    pub fn omega31(&self) -> C64 {
        C64::from_polar(self.omega31_mag, self.psi)
    }

    /// `Ω₃₂ = |Ω₃₂| e^{iφ}`
    pub fn omega32(&self) -> C64 {
        C64::from_polar(self.omega32_mag, self.phi)
    }

    /// `Ω₂₁ = |Ω₂₁| e^{iφ}`
    pub fn omega21(&self) -> C64 {
        C64::from_polar(self.omega21_mag, self.phi)
    }

    /// Phase `ψ − 2φ + K·r` accumulated around the interaction loop.
    pub fn loop_phase(&self) -> f64 {
        self.psi - 2.0 * self.phi + self.k_mismatch_phase
    }

    /// Copy with all phases set to zero.
    pub fn without_phases(&self) -> Self {
        Self {
            psi: 0.0,
            phi: 0.0,
            k_mismatch_phase: 0.0,
            ..*self
        }
    }
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self::closed_loop()
    }
}

/// Macroscopic medium parameters entering the response prefactors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MediumParams {
    /// Number density; overall prefactor of every response coefficient.
    #[serde(rename = "density_N")]
    pub density: f64,
    /// Electric dipole magnitude `d₃₂` (units of `e a₀`).
    pub d32: f64,
    /// Magnetic dipole magnitude `μ₂₁` (units of `e a₀` with `c = 1`, so a
    /// Bohr-magneton scale moment is `α`).
    pub mu21: f64,
    /// Relative dipole phase `Φ = φ₃₂ − φ₂₁`.
    #[serde(rename = "Phi")]
    pub dipole_phase: f64,
    pub alpha: f64,
}

impl Default for MediumParams {
    fn default() -> Self {
        Self {
            density: 1.0,
            d32: 1.0,
            mu21: FINE_STRUCTURE,
            dipole_phase: 0.0,
            alpha: FINE_STRUCTURE,
        }
    }
}

/// Which of the two model systems the generator describes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Coherent control field closing the loop, no incoherent pump.
    #[default]
    ClosedLoop,
    /// Control field replaced by the bidirectional pump `r₁`.
    Incoherent,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::ClosedLoop => "closed_loop",
            Mode::Incoherent => "incoherent",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "closed_loop" | "closed" => Ok(Mode::ClosedLoop),
            "incoherent" => Ok(Mode::Incoherent),
            other => Err(format!("unknown mode `{other}` (expected closed_loop or incoherent)")),
        }
    }
}

pub const RHO11: usize = 0;
pub const RHO12: usize = 1;
pub const RHO13: usize = 2;
pub const RHO21: usize = 3;
pub const RHO22: usize = 4;
pub const RHO23: usize = 5;
pub const RHO31: usize = 6;
pub const RHO32: usize = 7;

/// Index of the transposed element, `ρᵢⱼ ↦ ρⱼᵢ`.
pub const fn transposed(index: usize) -> usize {
    match index {
        RHO12 => RHO21,
        RHO21 => RHO12,
        RHO13 => RHO31,
        RHO31 => RHO13,
        RHO23 => RHO32,
        RHO32 => RHO23,
        other => other,
    }
}

/// Density matrix with `ρ₃₃` eliminated through the trace condition, ordered
/// `(ρ₁₁, ρ₁₂, ρ₁₃, ρ₂₁, ρ₂₂, ρ₂₃, ρ₃₁, ρ₃₂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityVector(pub Vec8);

impl DensityVector {
    pub fn zeros() -> Self {
        Self(Vec8::zeros())
    }

    /// All population in `|1⟩`.
    pub fn ground_state() -> Self {
        Self::from_populations(1.0, 0.0)
    }

    /// Diagonal state with `ρ₃₃ = 1 − ρ₁₁ − ρ₂₂`.
    pub fn from_populations(rho11: f64, rho22: f64) -> Self {
        let mut v = Vec8::zeros();
        v[RHO11] = C64::new(rho11, 0.0);
        v[RHO22] = C64::new(rho22, 0.0);
        Self(v)
    }

    pub fn get(&self, index: usize) -> C64 {
        self.0[index]
    }

    pub fn rho11(&self) -> f64 {
        self.0[RHO11].re
    }

    pub fn rho22(&self) -> f64 {
        self.0[RHO22].re
    }

    pub fn rho33(&self) -> f64 {
        1.0 - self.0[RHO11].re - self.0[RHO22].re
    }

    pub fn populations(&self) -> [f64; 3] {
        [self.rho11(), self.rho22(), self.rho33()]
    }

    /// Largest violation of Hermiticity: imaginary parts of the populations
    /// and mismatches `ρⱼᵢ − conj(ρᵢⱼ)`.
    pub fn hermiticity_error(&self) -> f64 {
        let v = &self.0;
        [
            v[RHO11].im.abs(),
            v[RHO22].im.abs(),
            (v[RHO21] - v[RHO12].conj()).norm(),
            (v[RHO31] - v[RHO13].conj()).norm(),
            (v[RHO32] - v[RHO23].conj()).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// True when the vector is Hermitian and its populations lie in `[0, 1]`,
    /// both within `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol && self.populations().iter().all(|&p| (-tol..=1.0 + tol).contains(&p))
    }
}

impl From<Vec8> for DensityVector {
    fn from(v: Vec8) -> Self {
        Self(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Violation,
    Warning,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
}

/// Outcome of [`validate`]; empty when every invariant holds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has_violations(&self) -> bool {
        self.violations().next().is_some()
    }

    pub fn violations(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Violation)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    fn violation(&mut self, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: Severity::Violation,
            message: message.into(),
        });
    }

    fn warning(&mut self, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: Severity::Warning,
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            let tag = match issue.severity {
                Severity::Violation => "violation",
                Severity::Warning => "warning",
            };
            writeln!(f, "{tag}: {}", issue.message)?;
        }
        Ok(())
    }
}

/// Check the parameter invariants. Never fails; problems are collected in the
/// returned report.
pub fn validate(system: &LevelSystem, drive: &DriveConfig, medium: &MediumParams) -> ValidationReport {
    let mut report = ValidationReport::default();

    let finite = [
        ("gamma1", system.gamma1),
        ("gamma2", system.gamma2),
        ("gamma3", system.gamma3),
        ("omega31_mag", drive.omega31_mag),
        ("psi", drive.psi),
        ("omega32_mag", drive.omega32_mag),
        ("omega21_mag", drive.omega21_mag),
        ("phi", drive.phi),
        ("delta1", drive.delta1),
        ("delta2", drive.delta2),
        ("delta3", drive.delta3),
        ("r1", drive.r1),
        ("k_mismatch_phase", drive.k_mismatch_phase),
        ("density_N", medium.density),
        ("d32", medium.d32),
        ("mu21", medium.mu21),
        ("Phi", medium.dipole_phase),
        ("alpha", medium.alpha),
    ];
    for (name, value) in finite {
        if !value.is_finite() {
            report.violation(format!("non-finite value for {name}"));
        }
    }

    for (name, rate) in [
        ("gamma1", system.gamma1),
        ("gamma2", system.gamma2),
        ("gamma3", system.gamma3),
        ("r1", drive.r1),
    ] {
        if rate < 0.0 {
            report.violation(format!("negative rate: {name} = {rate}"));
        }
    }
    if system.upper_decay() <= 0.0 {
        report.violation("upper state does not decay (gamma1 + gamma2 must be > 0)");
    }

    for (name, magnitude) in [
        ("omega31_mag", drive.omega31_mag),
        ("omega32_mag", drive.omega32_mag),
        ("omega21_mag", drive.omega21_mag),
    ] {
        if magnitude < 0.0 {
            report.violation(format!("negative Rabi magnitude: {name} = {magnitude}"));
        }
    }

    let mut smallest = system.upper_decay();
    if drive.omega31_mag > 0.0 {
        smallest = smallest.min(drive.omega31_mag);
    }
    let limit = LINEAR_REGIME_FRACTION * smallest;
    for (name, magnitude) in [("omega32_mag", drive.omega32_mag), ("omega21_mag", drive.omega21_mag)] {
        if magnitude > limit {
            report.warning(format!("probe beyond linear regime: {name} = {magnitude} exceeds {limit:.3e}"));
        }
    }

    if medium.density < 0.0 {
        report.violation(format!("negative density: {}", medium.density));
    } else if medium.density == 0.0 {
        report.warning("density_N = 0: no medium coupling");
    }
    if medium.d32 <= 0.0 {
        report.violation(format!("d32 must be positive, got {}", medium.d32));
    }
    if medium.mu21 <= 0.0 {
        report.violation(format!("mu21 must be positive, got {}", medium.mu21));
    }
    if medium.alpha <= 0.0 {
        report.violation(format!("alpha must be positive, got {}", medium.alpha));
    }

    report
}
