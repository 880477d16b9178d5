//! Brute-force time integration of the master equation and Fourier
//! projection of the quasi-steady state onto the harmonics `0, ±Δ`.

pub mod dopri;

use std::f64::consts::TAU;
use std::io::{self, Write};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::generator::HarmonicGenerator;
use crate::linalg::Vec8;
use crate::model::DensityVector;

/// Options of [`integrate_with`].
#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    /// Relative per-step tolerance.
    pub tol: f64,
    /// Length of the projection window in beat periods `2π/|Δ|`.
    pub beat_periods: usize,
    pub samples_per_period: usize,
    /// Spacing of the recorded trajectory; `None` keeps only the window.
    pub trace_interval: Option<f64>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            beat_periods: 2,
            samples_per_period: 64,
            trace_interval: None,
        }
    }
}

/// Harmonic content of the final window. On multiphoton resonance the
/// harmonics cannot be separated and only `r0` (the endpoint) is available.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub r0: Vec8,
    /// Amplitude of `e^{iΔt}`.
    pub r_plus: Option<Vec8>,
    /// Amplitude of `e^{−iΔt}`.
    pub r_minus: Option<Vec8>,
}

#[derive(Clone, Debug)]
pub struct IntegrationResult {
    pub trajectory: Vec<(f64, DensityVector)>,
    /// Uniform samples covering the projection window, endpoint excluded.
    pub window: Vec<(f64, Vec8)>,
    pub endpoint: DensityVector,
    pub projection: Projection,
    pub transient_time: f64,
    pub projection_window: (f64, f64),
    pub steps: usize,
    pub max_hermiticity_error: f64,
    /// Largest imaginary part of `ρ₁₁ + ρ₂₂`; the real trace is fixed by the
    /// elimination of `ρ₃₃`.
    pub max_trace_error: f64,
}

/// Slowest nonzero relaxation rate of `M₀`.
pub fn slowest_relaxation(gen: &HarmonicGenerator) -> f64 {
    let fallback = || {
        let diag = (0..8).map(|i| -gen.m0[(i, i)].re).filter(|r| *r > 1e-12);
        diag.fold(f64::INFINITY, f64::min)
    };
    match gen.m0.schur().eigenvalues() {
        Some(ev) => {
            let rate = ev.iter().map(|l| -l.re).filter(|r| *r > 1e-12).fold(f64::INFINITY, f64::min);
            if rate.is_finite() {
                rate
            } else {
                fallback()
            }
        }
        None => fallback(),
    }
}

/// `10 / (slowest relaxation rate)`.
pub fn transient_time(gen: &HarmonicGenerator) -> f64 {
    10.0 / slowest_relaxation(gen)
}

fn window_length(delta: f64, opts: &IntegrateOptions) -> f64 {
    if delta == 0.0 {
        0.0
    } else {
        opts.beat_periods as f64 * TAU / delta.abs()
    }
}

pub fn integrate(gen: &HarmonicGenerator, initial: &DensityVector, t_end: f64, tol: f64) -> Result<IntegrationResult> {
    integrate_with(gen, initial, t_end, &IntegrateOptions { tol, ..Default::default() })
}

/// Integrate `∂R/∂t = M(t)R + Σ` from `t = 0` and project the last
/// `beat_periods` beat periods onto the harmonics.
pub fn integrate_with(gen: &HarmonicGenerator, initial: &DensityVector, t_end: f64, opts: &IntegrateOptions) -> Result<IntegrationResult> {
    if opts.beat_periods < 2 {
        return Err(Error::InvalidConfig("projection needs at least two beat periods".into()));
    }
    let window = window_length(gen.delta, opts);
    if window > t_end {
        return Err(Error::WindowTooShort {
            window: t_end,
            required: window,
        });
    }
    let t_start = t_end - window;
    let n_window = if window > 0.0 {
        opts.beat_periods * opts.samples_per_period
    } else {
        0
    };
    let dt_window = if n_window > 0 { window / n_window as f64 } else { 0.0 };

    let mut trajectory = vec![(0.0, *initial)];
    let mut next_trace = opts.trace_interval.unwrap_or(f64::INFINITY);
    let mut samples = Vec::with_capacity(n_window);
    let mut next_sample = 0usize;
    let mut herm: f64 = initial.hermiticity_error();
    let mut trace: f64 = (initial.0[0] + initial.0[4]).im.abs();

    let f = |t: f64, y: &Vec8| gen.matrix_at(t) * y + gen.sigma_at(t);
    let (y, steps) = dopri::integrate(f, 0.0, initial.0, t_end, &dopri::Options::with_tolerance(opts.tol), |step| {
        let t1 = step.t1();
        while next_sample < n_window {
            let ts = t_start + next_sample as f64 * dt_window;
            if ts > t1 {
                break;
            }
            if ts >= step.t0 {
                samples.push((ts, step.eval(ts)));
            }
            next_sample += 1;
        }
        while next_trace <= t1 {
            trajectory.push((next_trace, DensityVector(step.eval(next_trace))));
            next_trace += opts.trace_interval.unwrap_or(f64::INFINITY);
        }
        let state = DensityVector(step.y1);
        herm = herm.max(state.hermiticity_error());
        trace = trace.max((step.y1[0] + step.y1[4]).im.abs());
    })?;
    let endpoint = DensityVector(y);
    if trajectory.last().map(|(t, _)| *t) != Some(t_end) {
        trajectory.push((t_end, endpoint));
    }

    let mut result = IntegrationResult {
        trajectory,
        window: samples,
        endpoint,
        projection: Projection {
            r0: y,
            r_plus: None,
            r_minus: None,
        },
        transient_time: t_start,
        projection_window: (t_start, t_end),
        steps,
        max_hermiticity_error: herm,
        max_trace_error: trace,
    };
    result.projection = project_harmonics(&result, gen.delta)?;
    Ok(result)
}

/// Windowed Fourier coefficients `(1/T)∫ R(t) e^{−ikΔt} dt`, `k ∈ {0, ±1}`.
pub fn project_harmonics(result: &IntegrationResult, delta: f64) -> Result<Projection> {
    if delta == 0.0 {
        return Ok(Projection {
            r0: result.endpoint.0,
            r_plus: None,
            r_minus: None,
        });
    }
    let (t0, t1) = result.projection_window;
    let required = 2.0 * TAU / delta.abs();
    if t1 - t0 < required * (1.0 - 1e-12) || result.window.is_empty() {
        return Err(Error::WindowTooShort { window: t1 - t0, required });
    }
    Ok(Projection {
        r0: harmonic(&result.window, delta, 0),
        r_plus: Some(harmonic(&result.window, delta, 1)),
        r_minus: Some(harmonic(&result.window, delta, -1)),
    })
}

/// Mean of `R(t_j) e^{−ikΔt_j}` over uniform samples spanning whole periods.
pub fn harmonic(samples: &[(f64, Vec8)], delta: f64, k: i32) -> Vec8 {
    let sum = samples
        .iter()
        .fold(Vec8::zeros(), |acc, (t, r)| acc + r * C64::from_polar(1.0, -(k as f64) * delta * t));
    sum / C64::from(samples.len() as f64)
}

/// Write the recorded trajectory as CSV: `t` followed by the real and
/// imaginary part of every component.
pub fn write_trajectory_csv<W: Write>(result: &IntegrationResult, mut out: W) -> io::Result<()> {
    const NAMES: [&str; 8] = ["rho11", "rho12", "rho13", "rho21", "rho22", "rho23", "rho31", "rho32"];
    let header: Vec<String> = NAMES.iter().flat_map(|n| [format!("re_{n}"), format!("im_{n}")]).collect();
    writeln!(out, "t,{}", header.join(","))?;
    for (t, state) in &result.trajectory {
        let cols: Vec<String> = state
            .0
            .iter()
            .flat_map(|z| [format!("{:.16e}", z.re), format!("{:.16e}", z.im)])
            .collect();
        writeln!(out, "{:.16e},{}", t, cols.join(","))?;
    }
    Ok(())
}
