//! Acceptance criteria, one PASS/FAIL line each. Exits 1 if any line fails.

use std::time::Instant;

use loopresp_core::analytic::{incoherent_zero_absorption_pump, strong_field_populations};
use loopresp_core::floquet::{extract_coefficients, zeroth_order_populations};
use loopresp_core::scan::{run_scan, ScanResult, ScanSpec, PRESETS};
use loopresp_core::verify::{
    cross_harmonic_leakage, detuned_chirality, general_oracle_error, general_points, incoherent_oracle_errors, incoherent_points,
    phase_average, phase_law_errors, resonant_oracle_error, resonant_points, timedomain_error, timedomain_points, zero_absorption_root,
};
use loopresp_core::{assemble, DriveConfig, LevelSystem, MediumParams, Mode, FINE_STRUCTURE};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;
const ALPHA: f64 = FINE_STRUCTURE;

struct Board {
    failed: usize,
}

impl Board {
    fn line(&mut self, id: &str, pass: bool, text: String) {
        if !pass {
            self.failed += 1;
        }
        println!("{} {id:<4} {text}", if pass { "PASS" } else { "FAIL" });
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ stream)
}

fn threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Interior local maxima of `|y|`, refined by a parabola through the three
/// surrounding samples, largest first.
fn peaks(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let a: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    let mut out: Vec<(f64, f64)> = (1..a.len() - 1)
        .filter(|&i| a[i] >= a[i - 1] && a[i] > a[i + 1])
        .map(|i| {
            let den = a[i - 1] - 2.0 * a[i] + a[i + 1];
            let shift = if den == 0.0 { 0.0 } else { 0.5 * (a[i - 1] - a[i + 1]) / den };
            (x[i] + shift * (x[i + 1] - x[i]), a[i])
        })
        .collect();
    out.sort_by(|p, q| q.1.partial_cmp(&p.1).unwrap());
    out
}

/// Local minima of the signed curve, for dips inside a peak structure.
fn dips(x: &[f64], y: &[f64]) -> Vec<f64> {
    (1..y.len() - 1)
        .filter(|&i| y[i] < y[i - 1] && y[i] <= y[i + 1])
        .map(|i| x[i])
        .collect()
}

fn doublet_splitting(scan: &ScanResult, column: &str) -> (f64, Vec<(f64, f64)>) {
    let x = scan.column(scan.columns[0].as_str()).unwrap();
    let y = scan.column(column).unwrap();
    let p = peaks(&x, &y);
    ((p[0].0 - p[1].0).abs(), p.into_iter().take(4).collect())
}

fn sign_changes(v: &[f64]) -> Vec<usize> {
    (1..v.len()).filter(|&i| v[i - 1].signum() != v[i].signum()).collect()
}

fn main() {
    let mut b = Board { failed: 0 };

    // 1. General-detuning oracle.
    let t = Instant::now();
    let pts = general_points(&mut rng(1), 200);
    let e = general_oracle_error(&pts).unwrap_or(f64::INFINITY);
    let s = t.elapsed().as_secs_f64();
    b.line(
        "1",
        e <= 1e-9 && s < 10.0,
        format!(
            "general detuning: max rel {e:.3e} (tol 1e-9) over {} points in {s:.2} s (< 10 s)",
            pts.len()
        ),
    );

    // 2. Resonant oracle.
    let t = Instant::now();
    let pts = resonant_points(&mut rng(2), 200);
    let e = resonant_oracle_error(&pts).unwrap_or(f64::INFINITY);
    let s = t.elapsed().as_secs_f64();
    b.line(
        "2",
        e <= 1e-9 && s < 10.0,
        format!(
            "multiphoton resonance: max rel {e:.3e} (tol 1e-9) over {} points in {s:.2} s (< 10 s)",
            pts.len()
        ),
    );

    // 3. Incoherent system.
    let pts = incoherent_points(&mut rng(3), 100);
    let (ext, rec) = incoherent_oracle_errors(&pts).unwrap_or((f64::INFINITY, f64::INFINITY));
    b.line(
        "3",
        ext <= 1e-10 && rec <= 1e-12,
        format!(
            "incoherent: extraction {ext:.3e} (tol 1e-10), population form {rec:.3e} (tol 1e-12) over {} points",
            pts.len()
        ),
    );

    // 4. Time-domain oracle.
    let t = Instant::now();
    let pts = timedomain_points(&mut rng(4), 24);
    let e = pts
        .iter()
        .map(|(s, d)| timedomain_error(s, d, None, 1e-11).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let s = t.elapsed().as_secs_f64();
    b.line(
        "4a",
        e <= 1e-5 && s < 120.0,
        format!(
            "time domain, gamma3 in [0.05, 0.2]: max rel {e:.3e} (tol 1e-5) over {} points in {s:.2} s (< 120 s)",
            pts.len()
        ),
    );
    let t = Instant::now();
    let drive = DriveConfig {
        delta2: 0.5,
        omega21_mag: 1e-4,
        omega32_mag: 1e-4,
        ..Default::default()
    };
    let e = timedomain_error(&LevelSystem::default(), &drive, Some(2e5), 1e-8).unwrap_or(f64::INFINITY);
    b.line(
        "4b",
        e <= 1e-5,
        format!(
            "time domain, gamma3 = alpha^2, t_end = 2e5: rel {e:.3e} (tol 1e-5) in {:.2} s",
            t.elapsed().as_secs_f64()
        ),
    );

    // 5. Selection rule.
    let pts = general_points(&mut rng(5), 200);
    let xi = detuned_chirality(&pts).unwrap_or(f64::INFINITY);
    b.line(
        "5a",
        xi == 0.0,
        format!("detuned chirality: max |xi| = {xi:e} over {} points (exactly 0)", pts.len()),
    );
    let (s, d) = timedomain_points(&mut rng(55), 1)[0];
    let (l21, l32) = cross_harmonic_leakage(&s, &d, 1e-12).unwrap_or((f64::INFINITY, f64::INFINITY));
    b.line(
        "5b",
        l21 < 1e-7 && l32 < 1e-7,
        format!(
            "in-phase/cross harmonic ratio: rho21 {l21:.2e}, rho32 {l32:.2e} (tol 1e-7), Delta = {:.3}",
            d.multiphoton_detuning()
        ),
    );

    // 6. Enhancement at the operating point.
    let system = LevelSystem::default();
    let drive = DriveConfig::default();
    let c = extract_coefficients(&system, &drive, Mode::ClosedLoop).unwrap();
    let medium = MediumParams {
        d32: 1.0,
        mu21: ALPHA,
        ..Default::default()
    };
    let r = assemble(&c, &medium, &drive);
    let ratio = c.c21.norm() / c.d21.norm();
    b.line(
        "6",
        (0.1..=10.0).contains(&ratio) && (0.1 / ALPHA..=10.0 / ALPHA).contains(&r.enhancement),
        format!(
            "enhancement: |c21|/|d21| = {ratio:.6} (band [0.1, 10]), |M1|/|M2| = {:.4} (band [{:.2}, {:.1}])",
            r.enhancement,
            0.1 / ALPHA,
            10.0 / ALPHA
        ),
    );

    // 7. Strong control.
    let p = zeroth_order_populations(
        &system,
        &DriveConfig {
            omega31_mag: 1e3,
            ..Default::default()
        },
        Mode::ClosedLoop,
    )
    .unwrap();
    let limit = strong_field_populations(&system);
    let quoted = [5.3246e-5, 0.999894, 5.3246e-5];
    let dev = (0..3).map(|i| (p[i] / limit[i] - 1.0).abs()).fold(0.0, f64::max);
    let dev_quoted = (0..3).map(|i| (p[i] / quoted[i] - 1.0).abs()).fold(0.0, f64::max);
    b.line(
        "7",
        dev <= 0.01 && dev_quoted <= 0.01,
        format!(
            "strong field: populations ({:.6e}, {:.6}, {:.6e}), max rel dev {dev:.2e} from limit, {dev_quoted:.2e} from quoted (tol 1e-2)",
            p[0], p[1], p[2]
        ),
    );

    // 8. Zero-absorption pump rate and sign pattern.
    let expected = 2.0 * ALPHA * ALPHA / (1.0 - ALPHA * ALPHA);
    let root = zero_absorption_root(&system).unwrap_or(f64::NAN);
    let closed = incoherent_zero_absorption_pump(&system).unwrap_or(f64::NAN);
    let e = (root / expected - 1.0).abs().max((closed / expected - 1.0).abs());
    b.line(
        "8a",
        e <= 1e-6,
        format!("zero-absorption root r1 = {root:.10e}, expected {expected:.10e}: rel {e:.2e} (tol 1e-6)"),
    );
    let mut pattern = true;
    for k in 0..=90 {
        let r1 = 10f64.powf(-8.0 + 0.1 * k as f64);
        let c = extract_coefficients(
            &system,
            &DriveConfig {
                r1,
                ..DriveConfig::incoherent()
            },
            Mode::Incoherent,
        )
        .unwrap();
        let magnetic_ok = if r1 < expected { c.d21.im > 0.0 } else { c.d21.im < 0.0 };
        pattern &= magnetic_ok && c.d32.im > 0.0;
    }
    b.line(
        "8b",
        pattern,
        "sign pattern on r1 in [1e-8, 10]: Im(d21) > 0 below the root, < 0 above; Im(d32) > 0 throughout".into(),
    );

    // 9. Equal rates switch off the electric response.
    let m = [1e-3, 0.05, 0.5, 1.0, 3.0]
        .iter()
        .map(|&g| {
            let d = DriveConfig {
                r1: 0.7,
                delta2: 0.4,
                delta3: -0.2,
                ..DriveConfig::incoherent()
            };
            extract_coefficients(&LevelSystem::new(1.0, g, g), &d, Mode::Incoherent)
                .unwrap()
                .d32
                .norm()
        })
        .fold(0.0, f64::max);
    b.line("9", m <= 1e-14, format!("gamma2 = gamma3: max |d32| = {m:.3e} (tol 1e-14)"));

    // 10. Phase laws.
    let (mag, arg) = phase_law_errors(&mut rng(10), 200).unwrap_or((f64::INFINITY, f64::INFINITY));
    let avg = phase_average(64).unwrap_or(f64::INFINITY);
    b.line(
        "10",
        mag <= 1e-12 && arg <= 1e-12 && avg <= 1e-10,
        format!("phase laws: |xi| change {mag:.1e}, arg error {arg:.1e} (tol 1e-12), loop-phase average {avg:.1e} (tol 1e-10)"),
    );

    // 11. Figure presets.
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut scans = std::collections::HashMap::new();
    let mut emitted = true;
    for name in PRESETS {
        let spec = ScanSpec::preset(name).unwrap();
        let res = run_scan(&spec, threads()).unwrap();
        let path = dir.path().join(format!("{name}.csv"));
        res.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let data = text.lines().filter(|l| !l.starts_with('#')).count();
        emitted &= data == spec.range.count + 1 && res.failures() == 0 && !text.contains("NaN");
        scans.insert(name, res);
    }
    b.line(
        "11a",
        emitted,
        format!("CSV emitted for {} presets, every row finite", PRESETS.len()),
    );

    let omega = DriveConfig::default().omega31_mag;
    for (id, name, col) in [("11b", "fig2a-magnetic", "im_d21"), ("11c", "fig2a-electric", "im_d32")] {
        let (split, top) = doublet_splitting(&scans[name], col);
        let rel = (split / (2.0 * omega) - 1.0).abs();
        b.line(
            id,
            rel <= 0.15,
            format!(
                "{name} doublet splitting {split:.4} vs 2|Omega31| = {:.1}: rel {rel:.3} (tol 0.15); peaks {top:.3?}",
                2.0 * omega
            ),
        );
    }

    let closed = scans["fig3-closed"].column("im_d21").unwrap();
    let changes = sign_changes(&closed);
    b.line(
        "11d",
        changes.len() == 1,
        format!("fig3-closed: Im(d21) at extremal detuning changes sign {} time(s)", changes.len()),
    );
    let inc = &scans["fig3-incoherent"];
    let r1 = inc.column("r1").unwrap();
    let changes = sign_changes(&inc.column("im_d21").unwrap());
    let brackets = changes.len() == 1 && r1[changes[0] - 1] < expected && expected <= r1[changes[0]];
    b.line(
        "11e",
        brackets,
        format!(
            "fig3-incoherent: Im(d21) changes sign {} time(s), bracket {:?} around 2alpha^2 = {:.4e}",
            changes.len(),
            changes.first().map(|&i| (r1[i - 1], r1[i])),
            2.0 * ALPHA * ALPHA
        ),
    );

    let f4 = &scans["fig4-electric"];
    let x = f4.column("delta2").unwrap();
    let y = f4.column("im_d32").unwrap();
    let near = |p: &f64| (p - 2.0).abs();
    let peak = peaks(&x, &y)
        .into_iter()
        .map(|p| p.0)
        .min_by(|a, b| near(a).partial_cmp(&near(b)).unwrap())
        .unwrap();
    let dip = dips(&x, &y)
        .into_iter()
        .min_by(|a, b| (a - 2.0).abs().partial_cmp(&(b - 2.0).abs()).unwrap());
    b.line(
        "11f",
        near(&peak) <= 0.25,
        format!("fig4-electric: Im(d32) peak nearest 2 at delta2 = {peak:.4} (target 2 +- 0.25); nearest dip at {dip:.4?}"),
    );

    let f6 = &scans["fig6"];
    let (re21, im21, re32, im32) = (
        f6.column("re_c21").unwrap(),
        f6.column("im_c21").unwrap(),
        f6.column("re_c32").unwrap(),
        f6.column("im_c32").unwrap(),
    );
    let diff = (0..re21.len())
        .map(|i| (re21[i].hypot(im21[i]) - re32[i].hypot(im32[i])).abs())
        .fold(0.0, f64::max);
    b.line("11g", diff <= 1e-6, format!("fig6: max ||c21| - |c32|| = {diff:.4e} (tol 1e-6)"));

    let s = t.elapsed().as_secs_f64();
    b.line("11h", s < 60.0, format!("figure presets total runtime {s:.2} s (< 60 s)"));

    println!("{} line(s) failed", b.failed);
    if b.failed > 0 {
        std::process::exit(1);
    }
}
