//! Sensitivity of COCO-style Average Precision to bounding-box perturbations.
//!
//! The crate re-implements the COCO bbox evaluation protocol
//! ([`evaluator`]), perturbs detections by translation or rescaling
//! ([`geometry`], [`sweep`]), studies IOU decay on random boxes
//! ([`synthetic`]) and writes CSV tables and SVG charts ([`report`]).
//!
//! ```
//! use ap_perturb::coco_io::{gt_as_detections, parse_dataset};
//! use ap_perturb::evaluator::{EvalParams, Evaluator};
//! use ap_perturb::sweep::{run_sweep, PerturbationKind, Regime};
//!
//! let ds = parse_dataset(r#"{
//!     "images": [{"id": 1, "width": 100, "height": 100}],
//!     "categories": [{"id": 1, "name": "thing"}],
//!     "annotations": [{"id": 1, "image_id": 1, "category_id": 1,
//!                      "bbox": [10, 10, 20, 20], "area": 400, "iscrowd": 0}]
//! }"#, "inline").unwrap();
//! let dets = gt_as_detections(&ds);
//! let evaluator = Evaluator::new(&ds, EvalParams::default());
//! let kind = PerturbationKind::Translate(Regime::RandomDirection);
//! let sweep = run_sweep(&evaluator, &dets, kind, &[0.0, 1.0, 2.0], 7).unwrap();
//! assert!(sweep.rows[2].summary.map < sweep.baseline.map);
//! ```

pub mod cli;
pub mod coco_io;
pub mod error;
pub mod evaluator;
pub mod geometry;
pub mod report;
pub mod sweep;
pub mod synthetic;

pub use error::{Error, Result};
