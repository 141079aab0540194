//! Axis-aligned boxes, overlap measures and the perturbation transforms.
//!
//! Coordinates are continuous pixels in corner form. Areas are plain
//! `width * height` with no "+1" pixel correction, matching the COCO bbox
//! arithmetic.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Axis-aligned rectangle `(x_l, y_l, x_r, y_r)` with `x_r >= x_l`, `y_r >= y_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    x_l: f64,
    y_l: f64,
    x_r: f64,
    y_r: f64,
}

impl BBox {
    pub fn new(x_l: f64, y_l: f64, x_r: f64, y_r: f64) -> Result<Self> {
        let invalid = |reason| Error::InvalidBox {
            x_l,
            y_l,
            x_r,
            y_r,
            reason,
        };
        if !(x_l.is_finite() && y_l.is_finite() && x_r.is_finite() && y_r.is_finite()) {
            return Err(invalid("non-finite coordinate"));
        }
        if x_r < x_l || y_r < y_l {
            return Err(invalid("negative extent"));
        }
        Ok(BBox { x_l, y_l, x_r, y_r })
    }

    /// Builds a box from COCO `[x, y, w, h]`.
    pub fn from_xywh(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        if w < 0.0 || h < 0.0 {
            return Err(Error::InvalidBox {
                x_l: x,
                y_l: y,
                x_r: x + w,
                y_r: y + h,
                reason: "negative width or height",
            });
        }
        BBox::new(x, y, x + w, y + h)
    }

    pub fn x_l(&self) -> f64 {
        self.x_l
    }

    pub fn y_l(&self) -> f64 {
        self.y_l
    }

    pub fn x_r(&self) -> f64 {
        self.x_r
    }

    pub fn y_r(&self) -> f64 {
        self.y_r
    }

    pub fn width(&self) -> f64 {
        self.x_r - self.x_l
    }

    pub fn height(&self) -> f64 {
        self.y_r - self.y_l
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// COCO `[x, y, w, h]` form.
    pub fn to_xywh(&self) -> [f64; 4] {
        [self.x_l, self.y_l, self.width(), self.height()]
    }

    fn translated(&self, dx: f64, dy: f64) -> Self {
        BBox {
            x_l: self.x_l + dx,
            y_l: self.y_l + dy,
            x_r: self.x_r + dx,
            y_r: self.y_r + dy,
        }
    }

    /// Side lengths of the overlap rectangle, `None` when the boxes do not
    /// overlap with positive area.
    fn overlap(&self, other: &BBox) -> Option<f64> {
        let w = self.x_r.min(other.x_r) - self.x_l.max(other.x_l);
        if w <= 0.0 {
            return None;
        }
        let h = self.y_r.min(other.y_r) - self.y_l.max(other.y_l);
        if h <= 0.0 {
            return None;
        }
        Some(w * h)
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x_l, self.y_l, self.x_r, self.y_r)
    }
}

/// Intersection over union. Zero when the boxes do not overlap, which also
/// covers two degenerate boxes.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    match a.overlap(b) {
        Some(inter) => inter / (a.area() + b.area() - inter),
        None => 0.0,
    }
}

/// Overlap against a crowd region: intersection over the detection's own area.
pub fn iou_crowd(det: &BBox, crowd: &BBox) -> f64 {
    match det.overlap(crowd) {
        Some(inter) => inter / det.area(),
        None => 0.0,
    }
}

/// The eight compass directions a box can be translated in.
///
/// Image coordinates: `y` grows downwards, so `Up` is `(0, -1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Left,
    Right,
    Up,
    Down,
    UpLeft,
    UpRight,
    DownLeft,
    DownRight,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::Left,
        Direction::Right,
        Direction::Up,
        Direction::Down,
        Direction::UpLeft,
        Direction::UpRight,
        Direction::DownLeft,
        Direction::DownRight,
    ];

    /// Per-axis unit displacement. Diagonals move a full unit on both axes.
    pub fn unit(self) -> (i8, i8) {
        match self {
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
            Direction::Up => (0, -1),
            Direction::Down => (0, 1),
            Direction::UpLeft => (-1, -1),
            Direction::UpRight => (1, -1),
            Direction::DownLeft => (-1, 1),
            Direction::DownRight => (1, 1),
        }
    }

    pub fn is_diagonal(self) -> bool {
        let (dx, dy) = self.unit();
        dx != 0 && dy != 0
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::UpLeft => Direction::DownRight,
            Direction::UpRight => Direction::DownLeft,
            Direction::DownLeft => Direction::UpRight,
            Direction::DownRight => Direction::UpLeft,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::UpLeft => "up-left",
            Direction::UpRight => "up-right",
            Direction::DownLeft => "down-left",
            Direction::DownRight => "down-right",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Direction::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown direction `{s}`")))
    }
}

fn check_pixels(offset: f64) -> Result<()> {
    if !offset.is_finite() {
        return Err(Error::InvalidOffset {
            value: offset,
            reason: "must be finite",
        });
    }
    if offset < 0.0 {
        return Err(Error::InvalidOffset {
            value: offset,
            reason: "must be non-negative",
        });
    }
    Ok(())
}

/// Moves the box diagonally by `t` times its own width and height.
pub fn shift_proportional(b: &BBox, t: f64) -> Result<BBox> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidOffset {
            value: t,
            reason: "proportional offset must lie in [0, 1]",
        });
    }
    Ok(b.translated(t * b.width(), t * b.height()))
}

/// Moves the box `offset` pixels along each non-zero axis of `d`. No clipping.
pub fn shift_direction(b: &BBox, d: Direction, offset: f64) -> Result<BBox> {
    check_pixels(offset)?;
    let (dx, dy) = d.unit();
    Ok(b.translated(f64::from(dx) * offset, f64::from(dy) * offset))
}

/// Keeps the top-left corner and pushes the bottom-right corner outwards.
pub fn enlarge(b: &BBox, offset: f64) -> Result<BBox> {
    check_pixels(offset)?;
    Ok(BBox {
        x_r: b.x_r + offset,
        y_r: b.y_r + offset,
        ..*b
    })
}

/// Pulls the bottom-right corner inwards; each extent stops at zero.
pub fn shrink(b: &BBox, offset: f64) -> Result<BBox> {
    check_pixels(offset)?;
    Ok(BBox {
        x_r: (b.x_r - offset).max(b.x_l),
        y_r: (b.y_r - offset).max(b.y_l),
        ..*b
    })
}
