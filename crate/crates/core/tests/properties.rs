use polyvem::material::AnalysisMode;
use polyvem::mesh::{generate_quad_mesh, Element, PolygonalMesh};
use polyvem::postprocess::{average_to_nodes, error_eav, error_rms, to_polar, von_mises};
use proptest::prelude::*;

fn rotate_stress(s: [f64; 3], t: f64) -> [f64; 3] {
    let (c, sn) = (t.cos(), t.sin());
    let [sx, sy, txy] = s;
    [
        sx * c * c + sy * sn * sn - 2.0 * txy * sn * c,
        sx * sn * sn + sy * c * c + 2.0 * txy * sn * c,
        (sx - sy) * sn * c + txy * (c * c - sn * sn),
    ]
}

proptest! {
    #[test]
    fn von_mises_is_frame_invariant(sx in -1e3..1e3f64, sy in -1e3..1e3f64, txy in -1e3..1e3f64, t in 0.0..6.3f64, nu in 0.0..0.49f64) {
        for mode in [AnalysisMode::PlaneStress, AnalysisMode::PlaneStrain] {
            let a = von_mises([sx, sy, txy], mode, nu);
            let b = von_mises(rotate_stress([sx, sy, txy], t), mode, nu);
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
        }
    }

    #[test]
    fn polar_components_preserve_invariants(sx in -1e3..1e3f64, sy in -1e3..1e3f64, txy in -1e3..1e3f64, x in 0.1..5.0f64, y in 0.1..5.0f64) {
        let p = to_polar([sx, sy, txy], [x, y], [0.0, 0.0]);
        prop_assert!((p[0] + p[1] - sx - sy).abs() <= 1e-9 * 3e3);
        let det = |s: [f64; 3]| s[0] * s[1] - s[2] * s[2];
        prop_assert!((det(p) - det([sx, sy, txy])).abs() <= 1e-9 * 1e6);
    }

    #[test]
    fn error_metrics_ignore_sample_order(pairs in prop::collection::vec((-10.0..10.0f64, 0.5..10.0f64), 1..40), shift in 0usize..40) {
        let (num, exact): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let k = shift % num.len();
        let rot = |v: &[f64]| { let mut v = v.to_vec(); v.rotate_left(k); v };
        let a = error_eav(&num, &exact).unwrap().percent;
        let b = error_eav(&rot(&num), &rot(&exact)).unwrap().percent;
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        let a = error_rms(&num, &exact).unwrap();
        let b = error_rms(&rot(&num), &rot(&exact)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn nodal_averaging_ignores_element_order(nx in 1usize..6, ny in 1usize..6, seed in any::<u64>()) {
        let mut mesh = generate_quad_mesh([0.0, 1.0], [0.0, 1.0], nx, ny, "a").unwrap();
        for (i, el) in mesh.elements.iter_mut().enumerate() {
            if i % 3 == 0 { el.region = "b".into(); }
        }
        let values: Vec<[f64; 1]> = (0..mesh.num_elements()).map(|i| [((i as u64 ^ seed) % 97) as f64]).collect();
        let (_, forward) = average_to_nodes(&mesh, &values);
        let reversed = PolygonalMesh {
            elements: mesh.elements.iter().rev().cloned().collect::<Vec<Element>>(),
            ..mesh.clone()
        };
        let rev_values: Vec<[f64; 1]> = values.iter().rev().copied().collect();
        let (_, backward) = average_to_nodes(&reversed, &rev_values);
        for (a, b) in forward.iter().zip(&backward) {
            prop_assert!((a[0] - b[0]).abs() <= 1e-12 * (1.0 + a[0].abs()));
        }
    }

    #[test]
    fn quad_mesh_area_sums_to_domain(x0 in -5.0..5.0f64, w in 0.1..10.0f64, y0 in -5.0..5.0f64, h in 0.1..10.0f64, nx in 1usize..12, ny in 1usize..12) {
        let mesh = generate_quad_mesh([x0, x0 + w], [y0, y0 + h], nx, ny, "a").unwrap();
        prop_assert_eq!(mesh.num_nodes(), (nx + 1) * (ny + 1));
        prop_assert!((mesh.total_area() - w * h).abs() <= 1e-12 * w * h);
    }
}
