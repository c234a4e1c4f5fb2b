use std::fs;
use std::path::PathBuf;

use misre::data::{generate, read_covariances, read_labels, read_points, read_result, scenario, write_labels, write_points, write_result};
use misre::{run, EstimationConfig, InputPoint, ModelKind};

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn points_round_trip_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pts.csv");
    let points: Vec<InputPoint> = [
        [0.1 + 0.2, 1.0 / 3.0],
        [std::f64::consts::PI, -1e-300],
        [123456789.123456789, 5e-324],
        [-0.0, 1.7976931348623157e308],
    ]
    .iter()
    .map(|p| InputPoint::new(p.to_vec()))
    .collect();
    write_points(&file, &points).unwrap();
    let back = read_points(&file, 2).unwrap();
    for (a, b) in points.iter().zip(&back) {
        for (x, y) in a.y.iter().zip(&b.y) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn labels_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("l.labels");
    let data = generate(&scenario::five_lines(2)).unwrap();
    write_labels(&file, &data.labels).unwrap();
    assert_eq!(read_labels(&file).unwrap(), data.labels);
}

#[test]
fn bundled_files_parse() {
    let plane = read_points(&bundled("plane_scene.ply"), 3).unwrap();
    assert_eq!(plane.len(), 2100);
    let pairs = read_points(&bundled("correspondences.csv"), 4).unwrap();
    assert_eq!(pairs.len(), 550);
}

#[test]
fn shared_and_per_point_covariances() {
    let dir = tempfile::tempdir().unwrap();
    let shared = dir.path().join("shared.csv");
    fs::write(&shared, "2,0,0,0.5\n").unwrap();
    assert_eq!(read_covariances(&shared, 2, 5).unwrap().len(), 5);
    fs::write(&shared, "2,0,0,1\n").unwrap();
    assert!(read_covariances(&shared, 2, 5).is_err());

    let per_point = dir.path().join("each.csv");
    fs::write(&per_point, "1,0,0,1\n4,0,0,0.25\n").unwrap();
    assert_eq!(read_covariances(&per_point, 2, 2).unwrap().len(), 2);
    assert!(read_covariances(&per_point, 2, 3).is_err());
}

#[test]
fn result_documents_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("r.json");
    let data = generate(&scenario::single_line(3.0, 4)).unwrap();
    let result = run(&data.points, &EstimationConfig::new(ModelKind::Line2d).trials(300)).unwrap();
    write_result(&result, &file).unwrap();
    let back = read_result(&file).unwrap();
    assert_eq!(back.structures, result.structures);
    assert_eq!(back.schema_version, result.schema_version);
}

#[test]
fn malformed_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.csv");
    fs::write(&file, "1,2\n3,x\n").unwrap();
    assert!(read_points(&file, 2).is_err());
    fs::write(&file, "1,2,3\n").unwrap();
    assert!(read_points(&file, 2).is_err());
}
