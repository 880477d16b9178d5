//! Seeded oracle-equivalence and property checks.
//!
//! The measurement functions return worst-case errors rather than verdicts so
//! that callers pin their own thresholds; [`run_verify`] applies the default
//! ones.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{
    coherences_from_populations, general_coherences, incoherent_coherences, incoherent_populations, incoherent_zero_absorption_pump,
    resonant_coherences, strong_field_populations,
};
use crate::error::{Error, Result};
use crate::floquet::{extract_coefficients, harmonic_coefficients, solve_harmonics, zeroth_order_populations};
use crate::generator::{build_generator, direct_rhs, rhs};
use crate::linalg::Vec8;
use crate::model::{DensityVector, DriveConfig, LevelSystem, MediumParams, Mode, FINE_STRUCTURE, RHO21, RHO32};
use crate::response::assemble;
use crate::timedomain::{harmonic, integrate_with, slowest_relaxation, IntegrateOptions};

pub type Point = (LevelSystem, DriveConfig);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Fast,
    Full,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            _ => Err(Error::InvalidConfig(format!("unknown suite `{s}`"))),
        }
    }
}

pub fn rel(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

pub fn rel_vec(a: &Vec8, b: &Vec8) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

fn rates(rng: &mut ChaCha8Rng) -> LevelSystem {
    LevelSystem::new(
        rng.random_range(0.2..2.0),
        rng.random_range(0.2..2.0),
        10f64.powf(rng.random_range(-4.0..-0.3)),
    )
}

/// Closed-loop points with `|Δ| ≥ 0.05`.
pub fn general_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let system = rates(rng);
            loop {
                let drive = DriveConfig {
                    omega31_mag: rng.random_range(0.05..5.0),
                    delta1: rng.random_range(-4.0..4.0),
                    delta2: rng.random_range(-4.0..4.0),
                    delta3: rng.random_range(-4.0..4.0),
                    ..Default::default()
                };
                if drive.multiphoton_detuning().abs() >= 0.05 {
                    return (system, drive);
                }
            }
        })
        .collect()
}

/// Closed-loop points on multiphoton resonance, `Δ₁ = Δ₂ + Δ₃`.
pub fn resonant_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let system = rates(rng);
            let delta2 = rng.random_range(-4.0..4.0);
            let delta3 = rng.random_range(-4.0..4.0);
            let drive = DriveConfig {
                omega31_mag: rng.random_range(0.05..5.0),
                delta1: delta2 + delta3,
                delta2,
                delta3,
                ..Default::default()
            };
            (system, drive)
        })
        .collect()
}

pub fn incoherent_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let system = rates(rng);
            let drive = DriveConfig {
                r1: rng.random_range(0.0..5.0),
                delta2: rng.random_range(-4.0..4.0),
                delta3: rng.random_range(-4.0..4.0),
                ..DriveConfig::incoherent()
            };
            (system, drive)
        })
        .collect()
}

/// Detuned closed-loop points with `γ₃ ∈ [0.05, 0.2]` for the time-domain
/// comparison. The probes are weak enough that second-order corrections to
/// the harmonics stay near 1e-8.
pub fn timedomain_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let system = LevelSystem::new(rng.random_range(0.5..1.5), rng.random_range(0.5..1.5), rng.random_range(0.05..0.2));
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let drive = DriveConfig {
                omega31_mag: rng.random_range(0.2..2.0),
                delta1: rng.random_range(-1.0..1.0),
                delta3: rng.random_range(-1.0..1.0),
                omega21_mag: 1e-5,
                omega32_mag: 1e-5,
                ..Default::default()
            };
            // Δ₂ chosen so that |Δ| ∈ [0.3, 1.5].
            let delta = sign * rng.random_range(0.3..1.5);
            (
                system,
                DriveConfig {
                    delta2: delta + drive.delta1 - drive.delta3,
                    ..drive
                },
            )
        })
        .collect()
}

fn worst<I: IntoParallelIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    it.into_par_iter().try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Worst relative deviation of the unfiltered solver coefficients from the
/// general closed form.
pub fn general_oracle_error(points: &[Point]) -> Result<f64> {
    worst(points.par_iter().map(|(s, d)| {
        let a = general_coherences(s, d)?;
        let h = harmonic_coefficients(s, d, Mode::ClosedLoop)?;
        Ok(rel(h.d21, a.d21)
            .max(rel(h.c21, a.c21))
            .max(rel(h.d32, a.d32))
            .max(rel(h.c32, a.c32)))
    }))
}

/// Worst relative deviation of the extracted coefficients from the resonant
/// closed form.
pub fn resonant_oracle_error(points: &[Point]) -> Result<f64> {
    worst(points.par_iter().map(|(s, d)| {
        let a = resonant_coherences(s, d)?;
        let e = extract_coefficients(s, d, Mode::ClosedLoop)?;
        Ok(rel(e.d21, a.d21)
            .max(rel(e.c21, a.c21))
            .max(rel(e.d32, a.d32))
            .max(rel(e.c32, a.c32)))
    }))
}

/// `(extraction vs closed form, population form vs closed form)`.
pub fn incoherent_oracle_errors(points: &[Point]) -> Result<(f64, f64)> {
    let extraction = worst(points.par_iter().map(|(s, d)| {
        let a = incoherent_coherences(s, d.r1, d.delta2, d.delta3);
        let e = extract_coefficients(s, d, Mode::Incoherent)?;
        Ok(rel(e.d21, a.d21).max(rel(e.d32, a.d32)))
    }))?;
    let reconstruction = points
        .iter()
        .map(|(s, d)| {
            let a = incoherent_coherences(s, d.r1, d.delta2, d.delta3);
            let (d21, d32) = coherences_from_populations(s, d.r1, d.delta2, d.delta3, incoherent_populations(s, d.r1));
            rel(d21, a.d21).max(rel(d32, a.d32))
        })
        .fold(0.0, f64::max);
    Ok((extraction, reconstruction))
}

/// Relative deviation of the projected harmonics from the Floquet ones at one
/// detuned point, integrating from the ground state up to `t_end`
/// (default: forty relaxation times plus the projection window).
pub fn timedomain_error(system: &LevelSystem, drive: &DriveConfig, t_end: Option<f64>, tol: f64) -> Result<f64> {
    let gen = build_generator(system, drive, Mode::ClosedLoop)?;
    let sol = solve_harmonics(&gen, gen.omega21, gen.omega12())?;
    let opts = IntegrateOptions { tol, ..Default::default() };
    let beat = std::f64::consts::TAU / gen.delta.abs();
    let t_end = t_end.unwrap_or(40.0 / slowest_relaxation(&gen) + (opts.beat_periods + 2) as f64 * beat);
    let res = integrate_with(&gen, &DensityVector::ground_state(), t_end, &opts)?;
    let p = res.projection;
    let (Some(rp), Some(rm)) = (p.r_plus, p.r_minus) else {
        return Err(Error::InvalidConfig("time-domain comparison needs a detuned point".into()));
    };
    Ok(rel_vec(&p.r0, &sol.r0.0)
        .max(rel_vec(&rp, &sol.amplitude_plus()))
        .max(rel_vec(&rm, &sol.amplitude_minus())))
}

/// Time-domain leakage of the cross response out of its harmonic at a
/// detuned point: `(ρ₂₁ with only Ω₃₂ on, ρ₃₂ with only Ω₂₁ on)`, each the
/// in-phase magnitude over the cross magnitude. In the rotated frame the
/// `Ω₃₂`-driven `ρ₂₁` cross term is static and the probe-frame in-phase
/// component is the `e^{iΔt}` harmonic; the `Ω₂₁`-driven `ρ₃₂` cross term is
/// the `e^{−iΔt}` harmonic and the in-phase component is static.
pub fn cross_harmonic_leakage(system: &LevelSystem, drive: &DriveConfig, tol: f64) -> Result<(f64, f64)> {
    let run = |d: DriveConfig, index: usize, cross: i32, in_phase: i32| -> Result<f64> {
        let gen = build_generator(system, &d, Mode::ClosedLoop)?;
        let sol = solve_harmonics(&gen, gen.omega21, gen.omega12())?;
        let beat = std::f64::consts::TAU / gen.delta.abs();
        let opts = IntegrateOptions {
            tol,
            beat_periods: 4,
            ..Default::default()
        };
        let t_end = 40.0 / slowest_relaxation(&gen) + 6.0 * beat;
        let res = integrate_with(&gen, &sol.r0, t_end, &opts)?;
        let c = harmonic(&res.window, gen.delta, cross)[index].norm();
        let i = harmonic(&res.window, gen.delta, in_phase)[index].norm();
        Ok(i / c)
    };
    let probe = drive.omega21_mag.max(drive.omega32_mag);
    let only32 = DriveConfig {
        omega21_mag: 0.0,
        omega32_mag: probe,
        ..*drive
    };
    let only21 = DriveConfig {
        omega21_mag: probe,
        omega32_mag: 0.0,
        ..*drive
    };
    Ok((run(only32, RHO21, 0, 1)?, run(only21, RHO32, -1, 0)?))
}

/// Largest `|ξ|` assembled at detuned points; exactly zero when the in-phase
/// filter works.
pub fn detuned_chirality(points: &[Point]) -> Result<f64> {
    let medium = MediumParams::default();
    worst(points.par_iter().map(|(s, d)| {
        let r = assemble(&extract_coefficients(s, d, Mode::ClosedLoop)?, &medium, d);
        Ok(r.xi_he.norm().max(r.xi_eh.norm()))
    }))
}

/// Pump rate at which the incoherent `Im(d21)` at line centre changes sign,
/// by bisection on the numerical extraction.
pub fn zero_absorption_root(system: &LevelSystem) -> Result<f64> {
    let f = |r1: f64| -> Result<f64> {
        let d = DriveConfig {
            r1,
            ..DriveConfig::incoherent()
        };
        Ok(extract_coefficients(system, &d, Mode::Incoherent)?.d21.im)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidConfig("no sign change of Im(d21) for r1 in [0, 1]".into()));
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid)?.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Worst deviations from the phase laws: `(|ξ| change, arg error)` over
/// random shifts of `ψ`, `φ`, `K·r` and the dipole phase.
pub fn phase_law_errors(rng: &mut ChaCha8Rng, n: usize) -> Result<(f64, f64)> {
    let system = LevelSystem::default();
    let base = DriveConfig::default();
    let medium = MediumParams::default();
    let c = extract_coefficients(&system, &base, Mode::ClosedLoop)?;
    let a = assemble(&c, &medium, &base);
    let wrap = |x: f64| (x + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    let (mut mag, mut arg): (f64, f64) = (0.0, 0.0);
    for _ in 0..n {
        let (dpsi, dphi, dk, ddip) = (
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-3.0..3.0),
        );
        let drive = DriveConfig {
            psi: dpsi,
            phi: dphi,
            k_mismatch_phase: dk,
            ..base
        };
        let b = assemble(
            &c,
            &MediumParams {
                dipole_phase: ddip,
                ..medium
            },
            &drive,
        );
        let loop_shift = dpsi - 2.0 * dphi + dk;
        mag = mag
            .max((a.xi_he.norm() - b.xi_he.norm()).abs() / a.xi_he.norm())
            .max((a.xi_eh.norm() - b.xi_eh.norm()).abs() / a.xi_eh.norm());
        arg = arg
            .max(wrap(b.xi_he.arg() - a.xi_he.arg() - loop_shift - ddip).abs())
            .max(wrap(b.xi_eh.arg() - a.xi_eh.arg() - loop_shift + ddip).abs());
    }
    Ok((mag, arg))
}

/// `|⟨ξ_HE⟩|` over `k` equally spaced loop phases, relative to `|ξ_HE|`.
pub fn phase_average(k: usize) -> Result<f64> {
    let system = LevelSystem::default();
    let c = extract_coefficients(&system, &DriveConfig::default(), Mode::ClosedLoop)?;
    let medium = MediumParams::default();
    let one = assemble(&c, &medium, &DriveConfig::default()).xi_he.norm();
    let mean = (0..k)
        .map(|j| {
            let drive = DriveConfig {
                psi: std::f64::consts::TAU * j as f64 / k as f64,
                ..Default::default()
            };
            assemble(&c, &medium, &drive).xi_he
        })
        .sum::<C64>()
        / k as f64;
    Ok(mean.norm() / one)
}

/// Worst relative mismatch between the block generator and the scalar
/// equations at random states and times.
pub fn generator_error(rng: &mut ChaCha8Rng, n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let system = rates(rng);
        let drive = DriveConfig {
            omega31_mag: rng.random_range(0.0..3.0),
            psi: rng.random_range(-3.0..3.0),
            omega32_mag: rng.random_range(0.0..0.1),
            omega21_mag: rng.random_range(0.0..0.1),
            phi: rng.random_range(-3.0..3.0),
            delta1: rng.random_range(-3.0..3.0),
            delta2: rng.random_range(-3.0..3.0),
            delta3: rng.random_range(-3.0..3.0),
            ..Default::default()
        };
        let state = DensityVector(Vec8::from_fn(|_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }));
        let t = rng.random_range(0.0..20.0);
        let gen = build_generator(&system, &drive, Mode::ClosedLoop)?;
        let a = rhs(t, &state, &gen).0;
        let b = direct_rhs(t, &state, &system, &drive, Mode::ClosedLoop)?.0;
        worst = worst.max(rel_vec(&a, &b));
    }
    Ok(worst)
}

/// Largest relative deviation of the zeroth-order populations at strong
/// control from the saturated limit.
pub fn strong_field_error(system: &LevelSystem, omega31: f64) -> Result<f64> {
    let drive = DriveConfig {
        omega31_mag: omega31,
        ..Default::default()
    };
    let p = zeroth_order_populations(system, &drive, Mode::ClosedLoop)?;
    let l = strong_field_populations(system);
    Ok((0..3).map(|i| (p[i] / l[i] - 1.0).abs()).fold(0.0, f64::max))
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {:?} seed {}", self.suite, self.seed)?;
        for c in &self.checks {
            let tag = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "{tag} {:<24} {:>8.2}s  {}", c.name, c.seconds, c.detail)?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

struct Runner {
    checks: Vec<CheckResult>,
}

impl Runner {
    fn run(&mut self, name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) {
        let start = Instant::now();
        let (passed, detail) = body().unwrap_or_else(|e| (false, format!("error: {e}")));
        self.checks.push(CheckResult {
            name,
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
}

fn below(name: &str, value: f64, limit: f64) -> (bool, String) {
    (value <= limit, format!("{name} {value:.3e} (limit {limit:.0e})"))
}

/// Run every property suite. `Full` adds larger samples, the long
/// `γ₃ = α²` integration and the saturated-control check.
pub fn run_verify(suite: Suite, seed: u64) -> VerifyReport {
    let scale = match suite {
        Suite::Fast => 1,
        Suite::Full => 10,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Runner { checks: Vec::new() };
    let alpha = FINE_STRUCTURE;

    let pts = general_points(&mut rng, 100 * scale);
    r.run("general_oracle", || Ok(below("max rel", general_oracle_error(&pts)?, 1e-9)));
    let pts = resonant_points(&mut rng, 100 * scale);
    r.run("resonant_oracle", || Ok(below("max rel", resonant_oracle_error(&pts)?, 1e-9)));
    let pts = incoherent_points(&mut rng, 50 * scale);
    r.run("incoherent_oracle", || {
        let (e, p) = incoherent_oracle_errors(&pts)?;
        Ok((
            e <= 1e-10 && p <= 1e-12,
            format!("extraction {e:.3e} (1e-10), population form {p:.3e} (1e-12)"),
        ))
    });
    let pts = timedomain_points(&mut rng, 20);
    r.run("timedomain_oracle", || {
        let e = worst(pts.par_iter().map(|(s, d)| timedomain_error(s, d, None, 1e-11)))?;
        Ok(below("max rel", e, 1e-5))
    });
    if suite == Suite::Full {
        r.run("timedomain_alpha_squared", || {
            let drive = DriveConfig {
                delta2: 0.5,
                omega21_mag: 1e-4,
                omega32_mag: 1e-4,
                ..Default::default()
            };
            Ok(below(
                "rel",
                timedomain_error(&LevelSystem::default(), &drive, Some(2e5), 1e-8)?,
                1e-5,
            ))
        });
    }
    let pts = general_points(&mut rng, 50 * scale);
    r.run("selection_rule", || {
        let xi = detuned_chirality(&pts)?;
        let (s, d) = &timedomain_points(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5e1), 1)[0];
        let (l21, l32) = cross_harmonic_leakage(s, d, 1e-12)?;
        Ok((
            xi == 0.0 && l21 < 1e-7 && l32 < 1e-7,
            format!("max |xi| {xi:e}, in-phase leakage rho21 {l21:.2e} rho32 {l32:.2e} (1e-7)"),
        ))
    });
    r.run("enhancement", || {
        let system = LevelSystem::default();
        let drive = DriveConfig::default();
        let c = extract_coefficients(&system, &drive, Mode::ClosedLoop)?;
        let resp = assemble(&c, &MediumParams::default(), &drive);
        let ratio = c.c21.norm() / c.d21.norm();
        let ok = (0.1..=10.0).contains(&ratio) && (0.1 / alpha..=10.0 / alpha).contains(&resp.enhancement);
        Ok((ok, format!("|c21|/|d21| {ratio:.6}, |M1|/|M2| {:.4}", resp.enhancement)))
    });
    r.run("strong_field", || {
        Ok(below("max rel", strong_field_error(&LevelSystem::default(), 1e3)?, 0.01))
    });
    if suite == Suite::Full {
        r.run("strong_field_wide", || {
            let e = [LevelSystem::new(1.0, 1.0, 0.01), LevelSystem::new(0.5, 1.5, 1e-3)]
                .iter()
                .map(|s| strong_field_error(s, 1e4))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(below("max rel", e, 0.01))
        });
    }
    r.run("zero_absorption_root", || {
        let system = LevelSystem::default();
        let root = zero_absorption_root(&system)?;
        let expected = 2.0 * alpha * alpha / (1.0 - alpha * alpha);
        let closed = incoherent_zero_absorption_pump(&system).unwrap_or(f64::NAN);
        let e = (root / expected - 1.0).abs().max((closed / expected - 1.0).abs());
        Ok(below("rel", e, 1e-6))
    });
    r.run("degenerate_rates", || {
        let m = [0.01, 0.1, 0.5, 1.0]
            .iter()
            .map(|&g| {
                let d = DriveConfig {
                    delta2: 0.3,
                    ..DriveConfig::incoherent()
                };
                Ok(extract_coefficients(&LevelSystem::new(1.0, g, g), &d, Mode::Incoherent)?.d32.norm())
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok(below("max |d32|", m, 1e-14))
    });
    r.run("phase_laws", || {
        let (mag, arg) = phase_law_errors(&mut rng.clone(), 50 * scale)?;
        let avg = phase_average(64)?;
        Ok((
            mag < 1e-12 && arg < 1e-12 && avg < 1e-10,
            format!("|xi| change {mag:.1e}, arg error {arg:.1e}, phase average {avg:.1e}"),
        ))
    });
    r.run("generator", || {
        Ok(below("max rel", generator_error(&mut rng.clone(), 50 * scale)?, 1e-12))
    });

    VerifyReport {
        suite,
        seed,
        checks: r.checks,
    }
}
