//! COCO-style bbox evaluation of a results file.
//!
//!     cargo run --example evaluate_fixture [ANNOTATIONS DETECTIONS]
//!
//! Without arguments the bundled `mixed` test fixture is used.

use std::path::PathBuf;

use ap_perturb::coco_io::{gt_as_detections, load_dataset, load_detections};
use ap_perturb::evaluator::{accumulate, ApSummary, EvalParams, Evaluator};

fn fixture(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(file)
}

fn main() -> ap_perturb::Result<()> {
    let mut args = std::env::args_os().skip(1).map(PathBuf::from);
    let ann = args.next().unwrap_or_else(|| fixture("mixed_annotations.json"));
    let dets_path = args.next().unwrap_or_else(|| fixture("mixed_detections.json"));

    let ds = load_dataset(&ann)?;
    let dets = load_detections(&dets_path, &ds)?;
    let evaluator = Evaluator::new(&ds, EvalParams::default());

    let summary = evaluator.evaluate(&dets)?;
    let perfect = evaluator.evaluate(&gt_as_detections(&ds))?;
    println!("{:<10} {:>10} {:>10}", "metric", "results", "gt");
    for ((name, a), b) in ApSummary::METRIC_NAMES.iter().zip(summary.to_array()).zip(perfect.to_array()) {
        println!("{name:<10} {a:>10.4} {b:>10.4}");
    }

    let records = evaluator.match_all(&dets)?;
    let acc = accumulate(&records, evaluator.params());
    println!("\nrecall and precision at recall 0.5 (IoU 0.5, all areas):");
    for (k, id) in records.category_ids.iter().enumerate() {
        let name = ds.categories().iter().find(|c| c.id == *id).map_or("?", |c| c.name.as_str());
        let (r, p) = (acc.recall_at(0, k, 0), acc.precision_at(0, 50, k, 0));
        if r < 0.0 {
            println!("  {name:<12} no ground truth");
        } else {
            println!("  {name:<12} recall {r:.3}  precision {p:.3}");
        }
    }
    Ok(())
}
