use loopresp_bench::{detuned, detuning_scan, extremal_scan, integrable, resonant};
use loopresp_core::{extract_coefficients, Branch, Mode};

#[test]
fn fixtures_sit_on_their_branches() {
    for ((s, d), branch) in [
        (resonant(), Branch::Resonant),
        (detuned(), Branch::Detuned),
        (integrable(), Branch::Detuned),
    ] {
        assert_eq!(extract_coefficients(&s, &d, Mode::ClosedLoop).unwrap().branch, branch);
    }
}

#[test]
fn scan_fixtures_are_valid() {
    detuning_scan(11).check().unwrap();
    extremal_scan(3).check().unwrap();
}
