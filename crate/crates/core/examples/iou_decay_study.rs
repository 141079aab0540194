//! IOU of random boxes against their shifted copies, proportional and in
//! fixed pixels.
//!
//!     cargo run --example iou_decay_study [OUT_DIR]

use std::path::PathBuf;

use ap_perturb::report::{decay_chart, write_decay_csv, write_svg_chart};
use ap_perturb::synthetic::{
    generate_boxes, iou_decay_fixed, iou_decay_proportional, proportional_offsets, RandomBoxConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let boxes = generate_boxes(&RandomBoxConfig::default())?;
    let proportional = iou_decay_proportional(&boxes, &proportional_offsets())?;
    let pixels: Vec<f64> = (0..=10).map(f64::from).collect();
    let fixed = iou_decay_fixed(&boxes, &pixels)?;

    for table in [&proportional, &fixed] {
        println!("{} shift, {} boxes:", table.mode.name(), boxes.len());
        for (i, o) in table.offsets.iter().enumerate() {
            let s = table.stats(i);
            println!("  {o:>4.1}  mean {:.4}  min {:.4}  max {:.4}", s.mean, s.min, s.max);
        }
    }

    if let Some(dir) = std::env::args_os().nth(1).map(PathBuf::from) {
        std::fs::create_dir_all(&dir)?;
        write_decay_csv(&proportional, dir.join("iou_proportional.csv"))?;
        write_decay_csv(&fixed, dir.join("iou_fixed.csv"))?;
        let p = decay_chart(&proportional, "IOU under proportional shift", "offset (fraction)", 12);
        let f = decay_chart(&fixed, "IOU under fixed shift", "offset (pixels)", 12);
        write_svg_chart(&p, dir.join("iou_proportional.svg"))?;
        write_svg_chart(&f, dir.join("iou_fixed.svg"))?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
