//! Box transforms and the IOU they leave behind.
//!
//!     cargo run --example iou_geometry

use ap_perturb::geometry::{enlarge, iou, iou_crowd, shift_direction, shift_proportional, shrink, BBox, Direction};

fn main() -> ap_perturb::Result<()> {
    let b = BBox::from_xywh(100.0, 50.0, 40.0, 30.0)?;
    println!("box {b}  area {}", b.area());

    println!("\n8-direction shifts by 2px:");
    for d in Direction::ALL {
        let moved = shift_direction(&b, d, 2.0)?;
        println!("  {:<10} iou {:.4}", d.name(), iou(&b, &moved));
    }

    println!("\nproportional shift down-right:");
    for i in 0..=10 {
        let t = f64::from(i) / 10.0;
        let keep = (1.0 - t) * (1.0 - t);
        let moved = shift_proportional(&b, t)?;
        println!("  t={t:.1} iou {:.4}  closed form {:.4}", iou(&b, &moved), keep / (2.0 - keep));
    }

    println!("\nscaling by 1px:");
    println!("  enlarge iou {:.4}", iou(&b, &enlarge(&b, 1.0)?));
    println!("  shrink  iou {:.4}", iou(&b, &shrink(&b, 1.0)?));

    let crowd = BBox::from_xywh(0.0, 0.0, 400.0, 400.0)?;
    println!("\ncrowd overlap of the box inside a crowd region: {:.4}", iou_crowd(&b, &crowd));
    Ok(())
}
