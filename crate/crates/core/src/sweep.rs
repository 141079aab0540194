//! Perturbation sweeps: evaluate a detection set after translating or
//! rescaling every box by increasing offsets.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coco_io::Detection;
use crate::error::{Error, Result};
use crate::evaluator::{ApSummary, Evaluator};
use crate::geometry::{enlarge, shift_direction, shrink, Direction};

/// How translation directions are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Each box gets its own uniformly drawn direction.
    RandomDirection,
    /// Every box moves the same way.
    Fixed(Direction),
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::RandomDirection => "random",
            Regime::Fixed(_) => "fixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    Enlarge,
    Shrink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationKind {
    Translate(Regime),
    Scale(Scaling),
}

impl PerturbationKind {
    pub fn name(&self) -> &'static str {
        match self {
            PerturbationKind::Translate(_) => "translate",
            PerturbationKind::Scale(Scaling::Enlarge) => "enlarge",
            PerturbationKind::Scale(Scaling::Shrink) => "shrink",
        }
    }

    pub fn regime(&self) -> Option<Regime> {
        match self {
            PerturbationKind::Translate(r) => Some(*r),
            PerturbationKind::Scale(_) => None,
        }
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerturbationKind::Translate(Regime::RandomDirection) => f.write_str("translate-random"),
            PerturbationKind::Translate(Regime::Fixed(d)) => write!(f, "translate-{d}"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    /// Pixels, non-negative.
    pub offset: f64,
    pub seed: u64,
}

/// Direction assigned to the detection with `ordinal` under `seed`.
///
/// The stream is keyed by the ordinal so the draw does not depend on
/// iteration order or on the offset being evaluated.
pub fn random_direction(seed: u64, ordinal: usize) -> Direction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ordinal as u64);
    Direction::ALL[rng.gen_range(0..Direction::ALL.len())]
}

/// Applies `spec` to every detection box; ids, scores and ordinals are kept.
pub fn perturb_detections(dets: &[Detection], spec: &PerturbationSpec) -> Result<Vec<Detection>> {
    if !(spec.offset.is_finite() && spec.offset >= 0.0) {
        return Err(Error::InvalidOffset {
            value: spec.offset,
            reason: "sweep offsets must be finite and non-negative",
        });
    }
    dets.iter()
        .map(|d| {
            let bbox = match spec.kind {
                PerturbationKind::Translate(Regime::Fixed(dir)) => {
                    shift_direction(&d.bbox, dir, spec.offset)?
                }
                PerturbationKind::Translate(Regime::RandomDirection) => {
                    shift_direction(&d.bbox, random_direction(spec.seed, d.ordinal), spec.offset)?
                }
                PerturbationKind::Scale(Scaling::Enlarge) => enlarge(&d.bbox, spec.offset)?,
                PerturbationKind::Scale(Scaling::Shrink) => shrink(&d.bbox, spec.offset)?,
            };
            Ok(Detection { bbox, ..d.clone() })
        })
        .collect()
}

/// Percentage drop of each headline metric against the baseline; `None`
/// where the baseline is not positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeDrop(pub [Option<f64>; 6]);

impl RelativeDrop {
    pub fn between(baseline: &ApSummary, perturbed: &ApSummary) -> Self {
        let b = baseline.to_array();
        let p = perturbed.to_array();
        RelativeDrop(std::array::from_fn(|m| {
            (b[m] > 0.0).then(|| 100.0 * (b[m] - p[m]) / b[m])
        }))
    }

    pub fn map(&self) -> Option<f64> {
        self.0[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub spec: PerturbationSpec,
    pub summary: ApSummary,
    pub relative_drop: RelativeDrop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub kind: PerturbationKind,
    pub baseline: ApSummary,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row_at(&self, offset: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.spec.offset == offset)
    }
}

fn check_offsets(offsets: &[f64]) -> Result<()> {
    if offsets.is_empty() {
        return Err(Error::Usage("offset list is empty".into()));
    }
    for &o in offsets {
        if !(o.is_finite() && o >= 0.0) {
            return Err(Error::InvalidOffset {
                value: o,
                reason: "sweep offsets must be finite and non-negative",
            });
        }
    }
    Ok(())
}

/// Evaluates the original detections perturbed by each offset. The baseline
/// is always the unperturbed set, whether or not `offsets` contains 0.
pub fn run_sweep(
    evaluator: &Evaluator<'_>,
    dets: &[Detection],
    kind: PerturbationKind,
    offsets: &[f64],
    seed: u64,
) -> Result<SweepResult> {
    check_offsets(offsets)?;
    let baseline = evaluator.evaluate(dets)?;
    let rows = offsets
        .par_iter()
        .map(|&offset| {
            let spec = PerturbationSpec { kind, offset, seed };
            let summary = if offset == 0.0 {
                baseline
            } else {
                evaluator.evaluate(&perturb_detections(dets, &spec)?)?
            };
            Ok(SweepRow {
                spec,
                summary,
                relative_drop: RelativeDrop::between(&baseline, &summary),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        kind,
        baseline,
        rows,
    })
}

pub fn run_scaling_sweep(
    evaluator: &Evaluator<'_>,
    dets: &[Detection],
    scaling: Scaling,
    offsets: &[f64],
) -> Result<SweepResult> {
    run_sweep(evaluator, dets, PerturbationKind::Scale(scaling), offsets, 0)
}

/// One fixed-direction sweep per compass direction.
pub fn run_direction_matrix(
    evaluator: &Evaluator<'_>,
    dets: &[Detection],
    offsets: &[f64],
    seed: u64,
) -> Result<BTreeMap<Direction, SweepResult>> {
    Direction::ALL
        .par_iter()
        .map(|&d| {
            let kind = PerturbationKind::Translate(Regime::Fixed(d));
            Ok((d, run_sweep(evaluator, dets, kind, offsets, seed)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coco_io::{gt_as_detections, parse_dataset};
    use crate::evaluator::EvalParams;
    use crate::geometry::BBox;

    fn det(ordinal: usize, bbox: BBox) -> Detection {
        Detection {
            image_id: 1,
            category_id: 1,
            bbox,
            score: 0.5,
            ordinal,
        }
    }

    #[test]
    fn zero_offset_is_identity() {
        let dets = vec![det(0, BBox::new(1.5, 2.0, 10.0, 12.0).unwrap())];
        for kind in [
            PerturbationKind::Translate(Regime::Fixed(Direction::Right)),
            PerturbationKind::Translate(Regime::RandomDirection),
            PerturbationKind::Scale(Scaling::Enlarge),
            PerturbationKind::Scale(Scaling::Shrink),
        ] {
            let spec = PerturbationSpec { kind, offset: 0.0, seed: 9 };
            assert_eq!(perturb_detections(&dets, &spec).unwrap(), dets);
        }
    }

    #[test]
    fn fixed_diagonal_shift() {
        let dets = vec![det(0, BBox::new(0.0, 0.0, 10.0, 10.0).unwrap())];
        let spec = PerturbationSpec {
            kind: PerturbationKind::Translate(Regime::Fixed(Direction::DownRight)),
            offset: 2.0,
            seed: 0,
        };
        let out = perturb_detections(&dets, &spec).unwrap();
        assert_eq!(out[0].bbox, BBox::new(2.0, 2.0, 12.0, 12.0).unwrap());
        assert_eq!(out[0].score, 0.5);
    }

    #[test]
    fn random_directions_are_reproducible_and_order_free() {
        let dets: Vec<Detection> =
            (0..200).map(|i| det(i, BBox::new(0.0, 0.0, 10.0, 10.0).unwrap())).collect();
        let spec = PerturbationSpec {
            kind: PerturbationKind::Translate(Regime::RandomDirection),
            offset: 1.0,
            seed: 42,
        };
        let a = perturb_detections(&dets, &spec).unwrap();
        assert_eq!(a, perturb_detections(&dets, &spec).unwrap());

        let mut reversed = dets.clone();
        reversed.reverse();
        let mut b = perturb_detections(&reversed, &spec).unwrap();
        b.reverse();
        assert_eq!(a, b);

        let other = perturb_detections(&dets, &PerturbationSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn random_directions_cover_all_eight_roughly_uniformly() {
        let mut counts = [0usize; 8];
        for ordinal in 0..8000 {
            let d = random_direction(7, ordinal);
            counts[Direction::ALL.iter().position(|&x| x == d).unwrap()] += 1;
        }
        for c in counts {
            assert!((850..1150).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn negative_offsets_rejected() {
        let spec = PerturbationSpec {
            kind: PerturbationKind::Scale(Scaling::Enlarge),
            offset: -1.0,
            seed: 0,
        };
        assert!(perturb_detections(&[], &spec).is_err());
    }

    #[test]
    fn relative_drop_handles_zero_baseline() {
        let base = ApSummary::from_array([0.5, 1.0, 0.0, -1.0, 0.25, 0.8]);
        let pert = ApSummary::from_array([0.25, 0.9, 0.0, -1.0, 0.25, 0.8]);
        let d = RelativeDrop::between(&base, &pert);
        assert_eq!(d.0[0], Some(50.0));
        assert!((d.0[1].unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(d.0[2], None);
        assert_eq!(d.0[3], None);
        assert_eq!(d.0[4], Some(0.0));
    }

    const DOC: &str = r#"{
        "images": [{"id": 1, "width": 640, "height": 480}, {"id": 2, "width": 640, "height": 480}],
        "categories": [{"id": 1, "name": "a"}, {"id": 2, "name": "b"}],
        "annotations": [
            {"id": 1, "image_id": 1, "category_id": 1, "bbox": [10, 10, 12, 14], "area": 150, "iscrowd": 0},
            {"id": 2, "image_id": 1, "category_id": 2, "bbox": [100, 100, 60, 50], "area": 2800, "iscrowd": 0},
            {"id": 3, "image_id": 2, "category_id": 1, "bbox": [200, 50, 150, 120], "area": 16000, "iscrowd": 0},
            {"id": 4, "image_id": 2, "category_id": 2, "bbox": [20, 300, 25, 25], "area": 600, "iscrowd": 0}
        ]
    }"#;

    #[test]
    fn sweep_rows_follow_offsets_and_start_at_baseline() {
        let ds = parse_dataset(DOC, "doc").unwrap();
        let evaluator = Evaluator::new(&ds, EvalParams::default());
        let dets = gt_as_detections(&ds);
        let offsets = [0.0, 1.0, 2.0, 3.0];
        let kind = PerturbationKind::Translate(Regime::RandomDirection);
        let res = run_sweep(&evaluator, &dets, kind, &offsets, 5).unwrap();
        assert_eq!(res.rows.len(), 4);
        assert_eq!(res.rows[0].summary, res.baseline);
        assert!(res.rows[0].relative_drop.0.iter().all(|d| *d == Some(0.0)));
        for w in res.rows.windows(2) {
            assert!(w[1].summary.map <= w[0].summary.map);
        }
        assert_eq!(res, run_sweep(&evaluator, &dets, kind, &offsets, 5).unwrap());
    }

    #[test]
    fn direction_matrix_shares_offset_zero_row() {
        let ds = parse_dataset(DOC, "doc").unwrap();
        let evaluator = Evaluator::new(&ds, EvalParams::default());
        let dets = gt_as_detections(&ds);
        let m = run_direction_matrix(&evaluator, &dets, &[0.0, 1.0, 2.0], 0).unwrap();
        assert_eq!(m.len(), 8);
        let first = m[&Direction::Left].rows[0].summary;
        assert!(m.values().all(|r| r.rows[0].summary == first));
        // mirror shifts of isolated boxes lose exactly the same IOU
        assert_eq!(m[&Direction::Left].rows[2].summary, m[&Direction::Right].rows[2].summary);
    }

    #[test]
    fn scaling_sweep_zero_offset_has_no_drop() {
        let ds = parse_dataset(DOC, "doc").unwrap();
        let evaluator = Evaluator::new(&ds, EvalParams::default());
        let dets = gt_as_detections(&ds);
        for s in [Scaling::Enlarge, Scaling::Shrink] {
            let res = run_scaling_sweep(&evaluator, &dets, s, &[0.0, 1.0]).unwrap();
            assert!(res.rows[0].relative_drop.0.iter().all(|d| *d == Some(0.0)));
            assert!(res.rows[1].summary.map < res.baseline.map);
        }
        assert!(run_scaling_sweep(&evaluator, &dets, Scaling::Shrink, &[]).is_err());
    }
}
