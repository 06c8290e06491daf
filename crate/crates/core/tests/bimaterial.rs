use std::path::Path;

use polyvem::assembly::MethodParams;
use polyvem::benchmarks::{run_bimaterial_demo, BimaterialParams};
use polyvem::postprocess::line_csv;

/// Regression snapshot; regenerate with UPDATE_GOLDEN=1 after a deliberate change.
#[test]
fn interface_profile_matches_snapshot() {
    let report = run_bimaterial_demo(&BimaterialParams::default(), &MethodParams::sfvem(None)).unwrap();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/bimaterial_profile.csv");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, line_csv(&report.interface_profile)).unwrap();
    }
    let golden = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<f64>> = golden.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), report.interface_profile.len());
    let peak = report.interface_profile.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    for (row, (s, v)) in rows.iter().zip(&report.interface_profile) {
        assert!((row[0] - s).abs() <= 1e-10 * s.abs().max(1.0));
        assert!((row[1] - v).abs() <= 1e-10 * peak, "{} vs {v}", row[1]);
    }
}

#[test]
fn heat_balance_and_bounds_hold_for_both_methods() {
    let p = BimaterialParams::default();
    for params in [MethodParams::vem(0.5), MethodParams::sfvem(None)] {
        let r = run_bimaterial_demo(&p, &params).unwrap();
        assert!(r.heat_in > 0.0);
        assert!(r.heat_imbalance <= 1e-8);
        assert!(r.temperature_min >= p.t_bottom - 1e-9 && r.temperature_max <= p.t_top + 1e-9);
        assert!(r.von_mises_max > 0.0);
    }
}
