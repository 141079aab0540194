//! mAP drop of the ground truth shifted in each of the eight fixed directions.
//!
//!     cargo run --release --example direction_matrix [ANNOTATIONS]

use std::path::PathBuf;

use ap_perturb::coco_io::{gt_as_detections, load_dataset};
use ap_perturb::evaluator::{EvalParams, Evaluator};
use ap_perturb::sweep::run_direction_matrix;

fn main() -> ap_perturb::Result<()> {
    let ann = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/dense_annotations.json")
    });
    let ds = load_dataset(&ann)?;
    let evaluator = Evaluator::new(&ds, EvalParams::default());
    let offsets = [0.0, 1.0, 2.0, 3.0, 5.0];
    let matrix = run_direction_matrix(&evaluator, &gt_as_detections(&ds), &offsets, 0)?;

    print!("{:<11}", "direction");
    for o in offsets {
        print!("{:>9}", format!("{o}px"));
    }
    println!();
    for (d, res) in &matrix {
        print!("{:<11}", d.name());
        for row in &res.rows {
            print!("{:>9}", row.relative_drop.map().map_or("n/a".into(), |v| format!("{v:.1}%")));
        }
        println!();
    }
    Ok(())
}
