use polyvem::assembly::MethodParams;
use polyvem::benchmarks::{cylinder_exact, cylinder_ode_displacement, run_cylinder_benchmark, CylinderMesh, CylinderParams, CylinderRun};

fn radii(p: &CylinderParams, n: usize) -> Vec<f64> {
    (0..=n).map(|i| p.r_a + (p.r_b - p.r_a) * i as f64 / n as f64).collect()
}

#[test]
fn closed_form_matches_shooting_solve() {
    let p = CylinderParams::default();
    for r in radii(&p, 16) {
        let exact = cylinder_exact(r, &p).unwrap().u_r;
        let ode = cylinder_ode_displacement(r, &p, 4000).unwrap();
        assert!((exact - ode).abs() <= 1e-8 * exact.abs().max(1e-12), "r = {r}: {exact} vs {ode}");
    }
}

#[test]
fn closed_form_satisfies_boundary_and_equilibrium() {
    let p = CylinderParams::default();
    let inner = cylinder_exact(p.r_a, &p).unwrap();
    let outer = cylinder_exact(p.r_b, &p).unwrap();
    let scale = inner.sigma_theta.abs().max(outer.sigma_theta.abs());
    assert!(inner.sigma_r.abs() < 1e-10 * scale && outer.sigma_r.abs() < 1e-10 * scale);
    assert_eq!(inner.temperature, p.t_a);
    assert!((outer.temperature - p.t_b).abs() < 1e-12 * p.t_b);
    let h = 1e-4;
    for r in radii(&p, 8).into_iter().skip(1).take(7) {
        let s = |x: f64| cylinder_exact(x, &p).unwrap();
        let ds = (s(r + h).sigma_r - s(r - h).sigma_r) / (2.0 * h);
        let residual = ds + (s(r).sigma_r - s(r).sigma_theta) / r;
        assert!(residual.abs() < 1e-6 * scale / p.r_a, "r = {r}: {residual}");
    }
    assert!(cylinder_exact(p.r_b * 1.01, &p).is_err());
}

#[test]
fn refinement_reduces_errors() {
    for params in [MethodParams::vem(0.5), MethodParams::sfvem(None)] {
        let coarse = run_cylinder_benchmark(&CylinderRun::new(CylinderMesh::Quad { nr: 7, ntheta: 11 }, params.clone())).unwrap();
        let fine = run_cylinder_benchmark(&CylinderRun::new(CylinderMesh::Quad { nr: 14, ntheta: 22 }, params)).unwrap();
        assert!(fine.rms_temperature < coarse.rms_temperature);
        assert!(fine.rms_stress < coarse.rms_stress);
        assert!(fine.eav_theta < coarse.eav_theta);
    }
}

#[test]
fn polygonal_mesh_accuracy_is_comparable_to_quads() {
    let polygonal = CylinderRun::new(CylinderMesh::Polygonal { seeds: 2000, lloyd: 5, seed: 1 }, MethodParams::sfvem(None));
    let poly = run_cylinder_benchmark(&polygonal).unwrap();
    let quad = run_cylinder_benchmark(&CylinderRun::new(CylinderMesh::quad_with_nodes(poly.nodes), MethodParams::sfvem(None))).unwrap();
    // polar quads align with the isotherms, so temperature is only bounded
    assert!(poly.rms_temperature < 1e-4, "{}", poly.rms_temperature);
    assert!(poly.rms_stress <= 2.0 * quad.rms_stress, "{} vs {}", poly.rms_stress, quad.rms_stress);
}
