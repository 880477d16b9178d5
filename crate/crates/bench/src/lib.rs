//! Shared fixtures for the benchmarks.

use loopresp_core::scan::Range;
use loopresp_core::{Axis, Config, DriveConfig, LevelSystem, Mode, Output, ScanSpec};

/// Closed-loop operating point on multiphoton resonance.
pub fn resonant() -> (LevelSystem, DriveConfig) {
    (LevelSystem::default(), DriveConfig::default())
}

/// Closed-loop point off multiphoton resonance.
pub fn detuned() -> (LevelSystem, DriveConfig) {
    (
        LevelSystem::default(),
        DriveConfig {
            delta2: 0.4,
            delta3: -0.1,
            ..Default::default()
        },
    )
}

/// Detuned point with a fast-relaxing middle level, cheap to integrate.
pub fn integrable() -> (LevelSystem, DriveConfig) {
    let drive = DriveConfig {
        delta2: 0.5,
        omega21_mag: 1e-5,
        omega32_mag: 1e-5,
        ..Default::default()
    };
    (LevelSystem::new(1.0, 1.0, 0.1), drive)
}

/// Detuning sweep over every output.
pub fn detuning_scan(count: usize) -> ScanSpec {
    ScanSpec {
        range: Range {
            start: -4.0,
            stop: 4.0,
            count,
        },
        ..ScanSpec::new(Config::default(), Axis::Delta3, Output::ALL.to_vec())
    }
}

/// Pump-strength sweep with extremal-detuning tracking.
pub fn extremal_scan(count: usize) -> ScanSpec {
    ScanSpec {
        range: Range {
            start: 0.0,
            stop: 4.0,
            count,
        },
        extremal: true,
        ..ScanSpec::new(Config::preset(Mode::ClosedLoop), Axis::Omega31, vec![Output::D21, Output::D32])
    }
}
