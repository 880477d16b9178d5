//! Linear electric/magnetic response of a closed-loop three-level ladder atom.
//!
//! The density-matrix equations are solved by harmonic balance
//! ([`floquet`]), checked against closed forms ([`analytic`]) and a direct
//! time integration ([`timedomain`]), and turned into susceptibilities,
//! chirality coefficients and a refractive index ([`response`]).

pub mod analytic;
pub mod error;
pub mod floquet;
pub mod generator;
pub mod linalg;
pub mod model;
pub mod response;
pub mod scan;
pub mod timedomain;
pub mod verify;

pub use error::{Error, Result};
pub use floquet::{extract_coefficients, harmonic_coefficients, solve_harmonics, Branch, ExpansionCoefficients, FloquetSolution};
pub use generator::{build_generator, rhs, HarmonicGenerator};
pub use model::{validate, DensityVector, DriveConfig, LevelSystem, MediumParams, Mode, ValidationReport, FINE_STRUCTURE};
pub use response::{assemble, assemble_with, refractive_index, IndexBranch, ResponseSet};
pub use scan::{run_point, run_scan, Axis, Config, Output, PointResult, Range, ScanResult, ScanSpec};
pub use timedomain::{integrate, integrate_with, IntegrateOptions, IntegrationResult};
pub use verify::{run_verify, Suite, VerifyReport};
