#![allow(dead_code)]

use std::path::PathBuf;

use ap_perturb::coco_io::{gt_as_detections, load_dataset, load_detections, Dataset, Detection};

pub mod proxy;

pub const FIXTURES: [&str; 3] = ["mixed", "ties", "dense"];

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn annotations_path(name: &str) -> PathBuf {
    fixture_dir().join(format!("{name}_annotations.json"))
}

pub fn detections_path(name: &str) -> PathBuf {
    fixture_dir().join(format!("{name}_detections.json"))
}

pub fn load_fixture(name: &str) -> (Dataset, Vec<Detection>) {
    let ds = load_dataset(annotations_path(name)).unwrap();
    let dets = load_detections(detections_path(name), &ds).unwrap();
    (ds, dets)
}

/// Reference stats for a fixture: `(detections, gt_as_detections)`, first six values.
pub fn goldens(name: &str) -> ([f64; 6], [f64; 6]) {
    let text = std::fs::read_to_string(fixture_dir().join("goldens.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let take = |key: &str| -> [f64; 6] {
        let arr = v[name][key].as_array().unwrap();
        std::array::from_fn(|i| arr[i].as_f64().unwrap())
    };
    (take("detections"), take("gt_as_detections"))
}

pub fn gt_dets(ds: &Dataset) -> Vec<Detection> {
    gt_as_detections(ds)
}
