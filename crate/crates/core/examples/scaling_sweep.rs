//! Enlarge and shrink every ground-truth box and compare the AP drops.
//!
//!     cargo run --release --example scaling_sweep [ANNOTATIONS]

use std::path::PathBuf;

use ap_perturb::coco_io::{gt_as_detections, load_dataset};
use ap_perturb::evaluator::{EvalParams, Evaluator};
use ap_perturb::sweep::{run_scaling_sweep, Scaling};

fn main() -> ap_perturb::Result<()> {
    let ann = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/dense_annotations.json")
    });
    let ds = load_dataset(&ann)?;
    let dets = gt_as_detections(&ds);
    let evaluator = Evaluator::new(&ds, EvalParams::default());
    let offsets = [0.0, 1.0, 2.0, 4.0];

    for scaling in [Scaling::Enlarge, Scaling::Shrink] {
        let res = run_scaling_sweep(&evaluator, &dets, scaling, &offsets)?;
        println!("{}:", res.kind);
        for row in &res.rows {
            let s = row.summary;
            let drop = row.relative_drop.map().map_or("n/a".into(), |v| format!("{v:.1}%"));
            println!(
                "  {}px  map {:.4} (drop {drop})  small {:.4}  medium {:.4}  large {:.4}",
                row.spec.offset, s.map, s.ap_small, s.ap_medium, s.ap_large
            );
        }
    }
    Ok(())
}
