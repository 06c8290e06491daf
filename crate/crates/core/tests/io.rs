use std::path::Path;

use polyvem::io::{vtk_counts, vtk_string, RunConfig, VtkFields};
use polyvem::mesh::{generate_polygonal_mesh, generate_quad_mesh, read_mesh, write_mesh, Domain, PolygonalMesh};
use polyvem::VemError;

#[test]
fn vtk_matches_golden_file() {
    let mesh = generate_quad_mesh([0.0, 1.0], [0.0, 1.0], 1, 1, "domain").unwrap();
    let fields = VtkFields { point_scalars: vec![("temperature".into(), vec![0.0, 1.0, 1.0, 0.0])], ..Default::default() };
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/unit_square.vtk")).unwrap();
    assert_eq!(vtk_string(&mesh, &fields).unwrap(), golden);
}

#[test]
fn vtk_counts_match_polygonal_mesh() {
    let mesh = generate_polygonal_mesh(&Domain::rectangle([0.0, 2.0], [0.0, 1.0]), 40, 2, 3, "a").unwrap();
    let fields = VtkFields {
        point_vectors: vec![("displacement".into(), mesh.nodes.clone())],
        cell_scalars: vec![("von_mises".into(), vec![1.0; mesh.num_elements()])],
        ..Default::default()
    };
    let text = vtk_string(&mesh, &fields).unwrap();
    assert_eq!(vtk_counts(&text).unwrap(), (mesh.num_nodes(), mesh.num_elements()));
    assert!(vtk_counts(&text.replacen("CELLS", "CELLZ", 1)).is_err());
}

#[test]
fn mesh_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mesh.json");
    let mesh = generate_polygonal_mesh(&Domain::rectangle([0.0, 1.0], [0.0, 1.0]), 25, 1, 8, "a").unwrap();
    write_mesh(&path, &mesh).unwrap();
    let back = read_mesh(&path).unwrap();
    assert_eq!(back, mesh);
    assert_eq!(back.content_hash(), mesh.content_hash());
}

#[test]
fn mesh_json_rejects_unknown_keys_and_bad_topology() {
    let good = r#"{"nodes": [[0,0],[1,0],[0,1]], "elements": [{"v": [0,1,2], "region": "a"}]}"#;
    assert_eq!(PolygonalMesh::from_json_str(good).unwrap().num_elements(), 1);
    let extra = good.replace(r#""region": "a""#, r#""region": "a", "material": "steel""#);
    assert!(PolygonalMesh::from_json_str(&extra).unwrap_err().to_string().contains("material"));
    let out_of_range = good.replace("[0,1,2]", "[0,1,7]");
    assert!(PolygonalMesh::from_json_str(&out_of_range).is_err());
}

#[test]
fn missing_files_name_the_path() {
    match read_mesh("/nonexistent/mesh.json") {
        Err(e @ VemError::File { .. }) => assert!(e.to_string().contains("/nonexistent/mesh.json")),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn config_round_trip_preserves_hash() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../cli/configs/strip_coupled.json");
    let config = RunConfig::read(&path).unwrap();
    let again = RunConfig::from_json_str(&config.to_json_string()).unwrap();
    assert_eq!(again, config);
    assert_eq!(again.content_hash(), config.content_hash());
    let mut changed = config.clone();
    changed.tau_h = 0.25;
    assert_ne!(changed.content_hash(), config.content_hash());
}
