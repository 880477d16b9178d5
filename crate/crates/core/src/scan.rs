//! Single-point evaluation, parameter sweeps and their CSV form.

use std::fmt::{self, Write as _};
use std::io::{self, Write};
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{extract_coefficients, ExpansionCoefficients};
use crate::model::{validate, DriveConfig, LevelSystem, MediumParams, Mode};
use crate::response::{assemble, ResponseSet};

pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

pub const UNITS: &str = "rates and detunings in units of gamma; hbar = c = eps0 = mu0 = 1; \
response prefactors N/(eps0 hbar) = 1; E_p = B_p = 1";

/// Complete parameter set of one evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub mode: Mode,
    pub system: LevelSystem,
    pub drive: DriveConfig,
    pub medium: MediumParams,
}

impl Config {
    pub fn preset(mode: Mode) -> Self {
        Self {
            mode,
            system: LevelSystem::default(),
            drive: match mode {
                Mode::ClosedLoop => DriveConfig::closed_loop(),
                Mode::Incoherent => DriveConfig::incoherent(),
            },
            medium: MediumParams::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Override one field addressed by a dotted path such as
    /// `drive.delta2`. The value is parsed as JSON, falling back to a string.
    pub fn set(&mut self, path: &str, value: &str) -> Result<()> {
        let mut root = serde_json::to_value(*self).expect("config serializes");
        let parsed = serde_json::from_str(value).unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
        let mut node = &mut root;
        let mut keys = path.split('.').peekable();
        while let Some(key) = keys.next() {
            let obj = node
                .as_object_mut()
                .ok_or_else(|| Error::InvalidConfig(format!("`{path}` does not name a field")))?;
            if !obj.contains_key(key) {
                return Err(Error::InvalidConfig(format!("unknown field `{key}` in `{path}`")));
            }
            if keys.peek().is_none() {
                obj.insert(key.to_string(), parsed);
                break;
            }
            node = obj.get_mut(key).expect("checked");
        }
        *self = serde_json::from_value(root).map_err(|e| Error::InvalidConfig(format!("{path}: {e}")))?;
        Ok(())
    }
}

impl Default for Config {
    fn default() -> Self {
        Self::preset(Mode::ClosedLoop)
    }
}

/// Everything computed at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointResult {
    pub coefficients: ExpansionCoefficients,
    pub response: ResponseSet,
    pub populations: [f64; 3],
    pub warnings: Vec<String>,
}

pub fn run_point(config: &Config) -> Result<PointResult> {
    let report = validate(&config.system, &config.drive, &config.medium);
    if let Some(v) = report.violations().next() {
        return Err(Error::InvalidConfig(v.message.clone()));
    }
    let coefficients = extract_coefficients(&config.system, &config.drive, config.mode)?;
    let response = assemble(&coefficients, &config.medium, &config.drive);
    Ok(PointResult {
        coefficients,
        response,
        populations: coefficients.populations,
        warnings: report.warnings().map(|w| w.message.clone()).collect(),
    })
}

impl PointResult {
    /// Single-row CSV with every output, in the scan column layout.
    pub fn write_csv<W: Write>(&self, config: &Config, mut out: W) -> io::Result<()> {
        writeln!(out, "# loopresp {VERSION}")?;
        writeln!(out, "# config: {}", config.to_json())?;
        writeln!(out, "# units: {UNITS}")?;
        let columns: Vec<String> = Output::ALL.iter().flat_map(|o| o.columns()).collect();
        writeln!(out, "{}", columns.join(","))?;
        let values: Vec<String> = Output::ALL
            .iter()
            .flat_map(|o| o.values(self))
            .map(|v| format!("{v:.16e}"))
            .collect();
        writeln!(out, "{}", values.join(","))
    }
}

impl fmt::Display for PointResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.coefficients;
        let r = &self.response;
        // `+ 0.0` prints negative zeros as zeros.
        let z = |f: &mut fmt::Formatter<'_>, name: &str, v: C64| writeln!(f, "{name:<12} {:+.16e} {:+.16e}i", v.re + 0.0, v.im + 0.0);
        writeln!(f, "{:<12} {}", "branch", serde_json::to_value(c.branch).unwrap().as_str().unwrap())?;
        z(f, "d21", c.d21)?;
        z(f, "c21", c.c21)?;
        z(f, "d32", c.d32)?;
        z(f, "c32", c.c32)?;
        z(f, "chi_e", r.chi_e)?;
        z(f, "chi_m", r.chi_m)?;
        z(f, "xi_he", r.xi_he)?;
        z(f, "xi_eh", r.xi_eh)?;
        z(f, "n", r.n)?;
        z(f, "m1", r.m1)?;
        z(f, "m2", r.m2)?;
        writeln!(f, "{:<12} {:.16e}", "enhancement", r.enhancement)?;
        let [p1, p2, p3] = self.populations;
        writeln!(f, "{:<12} {p1:.16e}", "rho11")?;
        writeln!(f, "{:<12} {p2:.16e}", "rho22")?;
        writeln!(f, "{:<12} {p3:.16e}", "rho33")?;
        writeln!(f, "{:<12} {:.3e}", "linearity", c.linearity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Delta2,
    Delta3,
    Omega31,
    R1,
    /// `Δ₂ = −σ`, `Δ₃ = σ`, `Δ₁ = 0`, which keeps `Δ = 0`.
    Sigma,
    /// Loop phase `ψ − 2φ + K·r`, set through `ψ`.
    PhaseLoop,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::Delta2, Axis::Delta3, Axis::Omega31, Axis::R1, Axis::Sigma, Axis::PhaseLoop];

    pub fn name(&self) -> &'static str {
        match self {
            Axis::Delta2 => "delta2",
            Axis::Delta3 => "delta3",
            Axis::Omega31 => "omega31",
            Axis::R1 => "r1",
            Axis::Sigma => "sigma",
            Axis::PhaseLoop => "phase_loop",
        }
    }

    pub fn apply(&self, config: &Config, value: f64) -> Config {
        let mut c = *config;
        let d = &mut c.drive;
        match self {
            Axis::Delta2 => d.delta2 = value,
            Axis::Delta3 => d.delta3 = value,
            Axis::Omega31 => d.omega31_mag = value,
            Axis::R1 => d.r1 = value,
            Axis::Sigma => {
                d.delta1 = 0.0;
                d.delta2 = -value;
                d.delta3 = value;
            }
            Axis::PhaseLoop => d.psi = value + 2.0 * d.phi - d.k_mismatch_phase,
        }
        c
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown axis `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    D21,
    D32,
    C21,
    C32,
    ChiE,
    ChiM,
    XiHe,
    XiEh,
    N,
    Enhancement,
    Populations,
}

impl Output {
    pub const ALL: [Output; 11] = [
        Output::D21,
        Output::D32,
        Output::C21,
        Output::C32,
        Output::ChiE,
        Output::ChiM,
        Output::XiHe,
        Output::XiEh,
        Output::N,
        Output::Enhancement,
        Output::Populations,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Output::D21 => "d21",
            Output::D32 => "d32",
            Output::C21 => "c21",
            Output::C32 => "c32",
            Output::ChiE => "chi_e",
            Output::ChiM => "chi_m",
            Output::XiHe => "xi_he",
            Output::XiEh => "xi_eh",
            Output::N => "n",
            Output::Enhancement => "enhancement",
            Output::Populations => "populations",
        }
    }

    fn columns(&self) -> Vec<String> {
        match self {
            Output::Enhancement => vec!["enhancement".into()],
            Output::Populations => vec!["rho11".into(), "rho22".into(), "rho33".into()],
            other => vec![format!("re_{}", other.name()), format!("im_{}", other.name())],
        }
    }

    fn values(&self, p: &PointResult) -> Vec<f64> {
        let c = &p.coefficients;
        let r = &p.response;
        let pair = |z: C64| vec![z.re, z.im];
        match self {
            Output::D21 => pair(c.d21),
            Output::D32 => pair(c.d32),
            Output::C21 => pair(c.c21),
            Output::C32 => pair(c.c32),
            Output::ChiE => pair(r.chi_e),
            Output::ChiM => pair(r.chi_m),
            Output::XiHe => pair(r.xi_he),
            Output::XiEh => pair(r.xi_eh),
            Output::N => pair(r.n),
            Output::Enhancement => vec![r.enhancement],
            Output::Populations => p.populations.to_vec(),
        }
    }
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Output::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown output `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

impl FromStr for Range {
    type Err = Error;

    /// `start:stop:count`
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("range `{s}` is not start:stop:count"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(Range {
            start: parts[0].trim().parse().map_err(|_| bad())?,
            stop: parts[1].trim().parse().map_err(|_| bad())?,
            count: parts[2].trim().parse().map_err(|_| bad())?,
        })
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub config: Config,
    pub axis: Axis,
    pub range: Range,
    pub outputs: Vec<Output>,
    /// Report direct terms at the detuning of maximal `|Im|` instead of at
    /// the configured detuning (`d21` over `Δ₃`, `d32` over `Δ₂`).
    pub extremal: bool,
}

/// Default sweep range of an axis.
pub fn default_range(axis: Axis) -> Range {
    match axis {
        Axis::Omega31 | Axis::R1 => Range {
            start: 0.0,
            stop: 4.0,
            count: 401,
        },
        Axis::PhaseLoop => Range {
            start: 0.0,
            stop: std::f64::consts::TAU,
            count: 401,
        },
        _ => Range {
            start: -4.0,
            stop: 4.0,
            count: 401,
        },
    }
}

pub const PRESETS: [&str; 9] = [
    "fig2a-magnetic",
    "fig2a-electric",
    "fig2b-magnetic",
    "fig2b-electric",
    "fig3-closed",
    "fig3-incoherent",
    "fig4-magnetic",
    "fig4-electric",
    "fig6",
];

impl ScanSpec {
    pub fn new(config: Config, axis: Axis, outputs: Vec<Output>) -> Self {
        Self {
            config,
            axis,
            range: default_range(axis),
            outputs,
            extremal: false,
        }
    }

    /// Sweep reproducing one figure panel.
    pub fn preset(name: &str) -> Option<Self> {
        let closed = Config::preset(Mode::ClosedLoop);
        let incoherent = Config::preset(Mode::Incoherent);
        let shifted = Config {
            drive: DriveConfig {
                delta1: 2.0,
                ..closed.drive
            },
            ..closed
        };
        let spec = match name {
            "fig2a-magnetic" => Self::new(closed, Axis::Delta3, vec![Output::D21]),
            "fig2a-electric" => Self::new(closed, Axis::Delta2, vec![Output::D32]),
            "fig2b-magnetic" => Self::new(incoherent, Axis::Delta3, vec![Output::D21]),
            "fig2b-electric" => Self::new(incoherent, Axis::Delta2, vec![Output::D32]),
            "fig3-closed" => Self {
                extremal: true,
                ..Self::new(closed, Axis::Omega31, vec![Output::D21, Output::D32])
            },
            "fig3-incoherent" => Self {
                extremal: true,
                ..Self::new(incoherent, Axis::R1, vec![Output::D21, Output::D32])
            },
            "fig4-magnetic" => Self::new(shifted, Axis::Delta3, vec![Output::D21]),
            "fig4-electric" => Self::new(shifted, Axis::Delta2, vec![Output::D32]),
            "fig6" => Self::new(closed, Axis::Sigma, vec![Output::C21, Output::C32]),
            _ => return None,
        };
        Some(spec)
    }

    pub fn check(&self) -> Result<()> {
        let r = &self.range;
        if r.count < 2 {
            return Err(Error::InvalidConfig("range count must be at least 2".into()));
        }
        if !(r.start.is_finite() && r.stop.is_finite() && r.start < r.stop) {
            return Err(Error::InvalidConfig("range must satisfy start < stop".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidConfig("no outputs requested".into()));
        }
        match (self.axis, self.config.mode) {
            (Axis::R1, Mode::ClosedLoop) => {
                return Err(Error::ModeMismatch {
                    mode: Mode::ClosedLoop,
                    what: "an r1 sweep",
                })
            }
            (Axis::Omega31, Mode::Incoherent) => {
                return Err(Error::ModeMismatch {
                    mode: Mode::Incoherent,
                    what: "an omega31 sweep",
                })
            }
            _ => {}
        }
        if self.extremal {
            if let Some(o) = self.outputs.iter().find(|o| !matches!(o, Output::D21 | Output::D32)) {
                return Err(Error::InvalidConfig(format!(
                    "extremal mode supports d21 and d32 only, not {}",
                    o.name()
                )));
            }
            if matches!(self.axis, Axis::Delta2 | Axis::Delta3 | Axis::Sigma) {
                return Err(Error::InvalidConfig("extremal mode needs a pump-strength or phase axis".into()));
            }
        }
        let report = validate(&self.config.system, &self.config.drive, &self.config.medium);
        if let Some(v) = report.violations().next() {
            return Err(Error::InvalidConfig(v.message.clone()));
        }
        Ok(())
    }

    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec![self.axis.name().to_string()];
        for o in &self.outputs {
            cols.extend(o.columns());
            if self.extremal {
                cols.push(match o {
                    Output::D21 => "delta3_ext".into(),
                    _ => "delta2_ext".into(),
                });
            }
        }
        cols
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub axis_value: f64,
    pub values: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub spec: ScanSpec,
    pub columns: Vec<String>,
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// Values of one column, the axis included.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| if idx == 0 { r.axis_value } else { r.values[idx - 1] })
                .collect(),
        )
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let s = &self.spec;
        writeln!(out, "# loopresp {VERSION}")?;
        writeln!(out, "# config: {}", s.config.to_json())?;
        writeln!(out, "# axis: {} range: {} extremal: {}", s.axis.name(), s.range, s.extremal)?;
        writeln!(out, "# units: {UNITS}")?;
        for row in &self.rows {
            if let Some(e) = &row.error {
                writeln!(out, "# row {:.16e} failed: {e}", row.axis_value)?;
            }
        }
        writeln!(out, "{}", self.columns.join(","))?;
        let mut line = String::new();
        for row in &self.rows {
            line.clear();
            write!(line, "{:.16e}", row.axis_value).unwrap();
            for v in &row.values {
                write!(line, ",{v:.16e}").unwrap();
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

const EXTREMAL_GRID: usize = 241;
const EXTREMAL_TOL: f64 = 1e-6;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn detuning_axis(output: Output) -> Axis {
    match output {
        Output::D21 => Axis::Delta3,
        _ => Axis::Delta2,
    }
}

fn imag_of(config: &Config, output: Output) -> Result<f64> {
    let c = extract_coefficients(&config.system, &config.drive, config.mode)?;
    Ok(match output {
        Output::D21 => c.d21.im,
        _ => c.d32.im,
    })
}

/// Detuning maximizing `|Im|` of a direct coefficient and the signed value
/// there: grid search with physically motivated seeds, then golden-section
/// refinement of the best bracket.
pub fn extremal_detuning(config: &Config, output: Output) -> Result<(f64, f64)> {
    let axis = detuning_axis(output);
    let o = config.drive.omega31_mag;
    let half = 2.0 * o + 4.0;
    let f = |x: f64| -> Result<f64> { imag_of(&axis.apply(config, x), output) };

    let mut grid: Vec<f64> = (0..EXTREMAL_GRID)
        .map(|i| -half + 2.0 * half * i as f64 / (EXTREMAL_GRID - 1) as f64)
        .collect();
    let r2 = std::f64::consts::SQRT_2;
    grid.extend([0.0, o, -o, o / r2, -o / r2, config.drive.delta1]);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let vals = grid.iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    let best = (0..grid.len())
        .max_by(|&i, &j| vals[i].abs().partial_cmp(&vals[j].abs()).unwrap())
        .unwrap();

    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let (mut best_x, mut best_v) = (grid[best], vals[best]);
    let g = |x: f64| f(x).map(|v| v.abs());
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (g(c)?, g(d)?);
    while (b - a).abs() > EXTREMAL_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = g(d)?;
        }
    }
    let x = 0.5 * (a + b);
    let v = f(x)?;
    if v.abs() > best_v.abs() {
        best_x = x;
        best_v = v;
    }
    Ok((best_x, best_v))
}

fn run_row(spec: &ScanSpec, x: f64) -> Result<Vec<f64>> {
    let config = spec.axis.apply(&spec.config, x);
    if spec.extremal {
        let mut values = Vec::new();
        for &o in &spec.outputs {
            let (at, _) = extremal_detuning(&config, o)?;
            let point = run_point(&detuning_axis(o).apply(&config, at))?;
            values.extend(o.values(&point));
            values.push(at);
        }
        Ok(values)
    } else {
        let point = run_point(&config)?;
        Ok(spec.outputs.iter().flat_map(|o| o.values(&point)).collect())
    }
}

/// Evaluate every axis sample on `parallelism` worker threads. Rows come back
/// in axis order; a failing row is filled with NaN and keeps its error.
pub fn run_scan(spec: &ScanSpec, parallelism: usize) -> Result<ScanResult> {
    spec.check()?;
    let columns = spec.columns();
    let width = columns.len() - 1;
    let xs = spec.range.values();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let rows = pool.install(|| {
        xs.par_iter()
            .map(|&x| match run_row(spec, x) {
                Ok(values) => ScanRow {
                    axis_value: x,
                    values,
                    error: None,
                },
                Err(e) => ScanRow {
                    axis_value: x,
                    values: vec![f64::NAN; width],
                    error: Some(e.to_string()),
                },
            })
            .collect::<Vec<_>>()
    });
    Ok(ScanResult {
        spec: spec.clone(),
        columns,
        rows,
    })
}
