//! Submit the ground truth as detections, translate every box by 0..10 px in
//! a random per-box direction and report the relative AP drop.
//!
//!     cargo run --release --example gt_translation_sweep [ANNOTATIONS [OUT_DIR]]

use std::path::PathBuf;

use ap_perturb::coco_io::{gt_as_detections, load_dataset};
use ap_perturb::evaluator::{EvalParams, Evaluator};
use ap_perturb::report::{sweep_chart, write_svg_chart, write_sweep_csv};
use ap_perturb::sweep::{run_sweep, PerturbationKind, Regime};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args_os().skip(1).map(PathBuf::from);
    let ann = args.next().unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/dense_annotations.json")
    });
    let out = args.next();

    let ds = load_dataset(&ann)?;
    let dets = gt_as_detections(&ds);
    let evaluator = Evaluator::new(&ds, EvalParams::default());
    let offsets: Vec<f64> = (0..=10).map(f64::from).collect();
    let kind = PerturbationKind::Translate(Regime::RandomDirection);
    let res = run_sweep(&evaluator, &dets, kind, &offsets, 0)?;

    println!("baseline mAP {:.4} on {} boxes", res.baseline.map, dets.len());
    println!("{:>6} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}", "px", "map", "ap50", "ap75", "small", "medium", "large");
    for row in &res.rows {
        print!("{:>6}", row.spec.offset);
        for d in row.relative_drop.0 {
            print!(" {:>8}", d.map_or("n/a".into(), |v| format!("{v:.1}%")));
        }
        println!();
    }

    if let Some(dir) = out {
        std::fs::create_dir_all(&dir)?;
        write_sweep_csv(&res, dir.join("translate_random.csv"))?;
        write_svg_chart(&sweep_chart(&res, "AP under random-direction translation"), dir.join("translate_random.svg"))?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
