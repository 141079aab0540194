//! IOU decay of randomly generated boxes under proportional and fixed-pixel
//! diagonal shifts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{iou, shift_direction, shift_proportional, BBox, Direction};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomBoxConfig {
    pub count: usize,
    pub width_range: (f64, f64),
    pub height_range: (f64, f64),
    /// Range of the top-left corner on both axes.
    pub origin_range: (f64, f64),
    pub seed: u64,
}

impl Default for RandomBoxConfig {
    fn default() -> Self {
        RandomBoxConfig {
            count: 1000,
            width_range: (4.0, 256.0),
            height_range: (4.0, 256.0),
            origin_range: (0.0, 512.0),
            seed: 0,
        }
    }
}

impl RandomBoxConfig {
    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Validation("box count must be positive".into()));
        }
        let ranges = [
            ("width", self.width_range),
            ("height", self.height_range),
            ("origin", self.origin_range),
        ];
        for (name, (lo, hi)) in ranges {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Validation(format!("{name} range [{lo}, {hi}] is empty")));
            }
        }
        if self.width_range.0 <= 0.0 || self.height_range.0 <= 0.0 {
            return Err(Error::Validation("box sizes must be positive".into()));
        }
        Ok(())
    }
}

pub fn generate_boxes(cfg: &RandomBoxConfig) -> Result<Vec<BBox>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.count)
        .map(|_| {
            let w = rng.gen_range(cfg.width_range.0..=cfg.width_range.1);
            let h = rng.gen_range(cfg.height_range.0..=cfg.height_range.1);
            let x = rng.gen_range(cfg.origin_range.0..=cfg.origin_range.1);
            let y = rng.gen_range(cfg.origin_range.0..=cfg.origin_range.1);
            BBox::from_xywh(x, y, w, h)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayMode {
    /// Offsets are fractions of the box width/height.
    Proportional,
    /// Offsets are pixels, applied down-right.
    Fixed,
}

impl DecayMode {
    pub fn name(&self) -> &'static str {
        match self {
            DecayMode::Proportional => "proportional",
            DecayMode::Fixed => "fixed",
        }
    }
}

/// IOU of every box with its shifted copy, for each offset.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayTable {
    pub mode: DecayMode,
    pub offsets: Vec<f64>,
    pub boxes: Vec<BBox>,
    /// `[offset][box]`
    pub iou: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl DecayTable {
    pub fn stats(&self, offset_index: usize) -> DecayStats {
        let row = &self.iou[offset_index];
        let sum: f64 = row.iter().sum();
        DecayStats {
            mean: sum / row.len() as f64,
            min: row.iter().copied().fold(f64::INFINITY, f64::min),
            max: row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// IOU curve of one box across all offsets.
    pub fn curve(&self, box_index: usize) -> Vec<f64> {
        self.iou.iter().map(|row| row[box_index]).collect()
    }
}

fn decay(
    mode: DecayMode,
    boxes: &[BBox],
    offsets: &[f64],
    shift: impl Fn(&BBox, f64) -> Result<BBox>,
) -> Result<DecayTable> {
    if boxes.is_empty() {
        return Err(Error::Validation("no boxes to shift".into()));
    }
    let iou = offsets
        .iter()
        .map(|&o| boxes.iter().map(|b| Ok(iou(b, &shift(b, o)?))).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(DecayTable {
        mode,
        offsets: offsets.to_vec(),
        boxes: boxes.to_vec(),
        iou,
    })
}

pub fn iou_decay_proportional(boxes: &[BBox], offsets: &[f64]) -> Result<DecayTable> {
    decay(DecayMode::Proportional, boxes, offsets, shift_proportional)
}

pub fn iou_decay_fixed(boxes: &[BBox], offsets: &[f64]) -> Result<DecayTable> {
    decay(DecayMode::Fixed, boxes, offsets, |b, o| {
        shift_direction(b, Direction::DownRight, o)
    })
}

/// `numpy.linspace(0, 1, 11)`: the proportional offsets.
pub fn proportional_offsets() -> Vec<f64> {
    let mut v: Vec<f64> = (0..11).map(|i| f64::from(i) * 0.1).collect();
    v[10] = 1.0;
    v
}
