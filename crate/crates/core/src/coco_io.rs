//! Reading and writing COCO instance annotations and detection results.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::BBox;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Image {
    pub id: u64,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Category {
    pub id: u64,
    pub name: String,
}

/// One annotated object.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub id: u64,
    pub image_id: u64,
    pub category_id: u64,
    pub bbox: BBox,
    /// Area as stored in the annotation (segmentation area for COCO), used
    /// for size bucketing. Never recomputed from `bbox`.
    pub area: f64,
    pub iscrowd: bool,
}

/// A scored prediction. `ordinal` is its position in the source list and
/// breaks score ties.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub image_id: u64,
    pub category_id: u64,
    pub bbox: BBox,
    pub score: f64,
    pub ordinal: usize,
}

/// A validated annotation document.
#[derive(Debug, Clone)]
pub struct Dataset {
    images: Vec<Image>,
    categories: Vec<Category>,
    ground_truths: Vec<GroundTruth>,
}

impl Dataset {
    /// Checks id uniqueness and that every ground truth points at a known
    /// image and category.
    pub fn new(
        images: Vec<Image>,
        categories: Vec<Category>,
        ground_truths: Vec<GroundTruth>,
    ) -> Result<Self> {
        let mut image_ids = HashSet::with_capacity(images.len());
        for img in &images {
            if !image_ids.insert(img.id) {
                return Err(Error::Validation(format!("duplicate image id {}", img.id)));
            }
        }
        let mut category_ids = HashSet::with_capacity(categories.len());
        for cat in &categories {
            if !category_ids.insert(cat.id) {
                return Err(Error::Validation(format!("duplicate category id {}", cat.id)));
            }
        }
        for gt in &ground_truths {
            if !image_ids.contains(&gt.image_id) {
                return Err(Error::Validation(format!(
                    "annotation {} references unknown image id {}",
                    gt.id, gt.image_id
                )));
            }
            if !category_ids.contains(&gt.category_id) {
                return Err(Error::Validation(format!(
                    "annotation {} references unknown category id {}",
                    gt.id, gt.category_id
                )));
            }
            if gt.area.is_nan() || gt.area < 0.0 {
                return Err(Error::Validation(format!(
                    "annotation {} has invalid area {}",
                    gt.id, gt.area
                )));
            }
        }
        Ok(Dataset {
            images,
            categories,
            ground_truths,
        })
    }

    pub fn images(&self) -> &[Image] {
        &self.images
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn ground_truths(&self) -> &[GroundTruth] {
        &self.ground_truths
    }

    fn id_sets(&self) -> (HashSet<u64>, HashSet<u64>) {
        (
            self.images.iter().map(|i| i.id).collect(),
            self.categories.iter().map(|c| c.id).collect(),
        )
    }
}

#[derive(Deserialize)]
struct RawDocument {
    images: Vec<Value>,
    annotations: Vec<Value>,
    categories: Vec<Value>,
}

#[derive(Deserialize)]
struct RawAnnotation {
    id: u64,
    image_id: u64,
    category_id: u64,
    bbox: [f64; 4],
    area: f64,
    #[serde(default, deserialize_with = "crowd_flag")]
    iscrowd: bool,
}

/// COCO writes `iscrowd` as 0/1; accept booleans too.
fn crowd_flag<'de, D: serde::Deserializer<'de>>(de: D) -> std::result::Result<bool, D::Error> {
    match Value::deserialize(de)? {
        Value::Bool(b) => Ok(b),
        Value::Number(n) => Ok(n.as_f64().is_some_and(|v| v != 0.0)),
        Value::Null => Ok(false),
        other => Err(serde::de::Error::custom(format!(
            "iscrowd must be 0/1 or boolean, got {other}"
        ))),
    }
}

#[derive(Deserialize)]
struct RawDetection {
    image_id: u64,
    category_id: u64,
    bbox: [f64; 4],
    score: f64,
}

#[derive(Serialize)]
struct OutDetection {
    image_id: u64,
    category_id: u64,
    bbox: [f64; 4],
    score: f64,
}

/// Human-readable handle for a record that failed to parse.
fn describe(kind: &str, index: usize, value: &Value) -> String {
    match value.get("id").and_then(Value::as_u64) {
        Some(id) => format!("{kind}[{index}] (id {id})"),
        None => format!("{kind}[{index}]"),
    }
}

fn parse_records<T: for<'de> Deserialize<'de>>(kind: &str, values: Vec<Value>) -> Result<Vec<T>> {
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let ctx = describe(kind, i, &v);
            serde_json::from_value(v).map_err(|e| Error::parse(ctx, e))
        })
        .collect()
}

/// Parses an instances-format annotation document from a string.
pub fn parse_dataset(text: &str, source: &str) -> Result<Dataset> {
    let doc: RawDocument = serde_json::from_str(text).map_err(|e| Error::parse(source, e))?;
    let images: Vec<Image> = parse_records("images", doc.images)?;
    let categories: Vec<Category> = parse_records("categories", doc.categories)?;
    let raw: Vec<RawAnnotation> = parse_records("annotations", doc.annotations)?;
    let ground_truths = raw
        .into_iter()
        .map(|a| {
            let [x, y, w, h] = a.bbox;
            if w < 0.0 || h < 0.0 {
                return Err(Error::Validation(format!(
                    "annotation {} has negative bbox extent {:?}",
                    a.id, a.bbox
                )));
            }
            let bbox = BBox::from_xywh(x, y, w, h)
                .map_err(|e| Error::Validation(format!("annotation {}: {e}", a.id)))?;
            Ok(GroundTruth {
                id: a.id,
                image_id: a.image_id,
                category_id: a.category_id,
                bbox,
                area: a.area,
                iscrowd: a.iscrowd,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(images, categories, ground_truths)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, &path.display().to_string())
}

/// Parses a results array against `ds`. Entries naming an image or category
/// that `ds` does not contain are rejected together in one error.
pub fn parse_detections(text: &str, source: &str, ds: &Dataset) -> Result<Vec<Detection>> {
    let values: Vec<Value> = serde_json::from_str(text).map_err(|e| Error::parse(source, e))?;
    let raw: Vec<RawDetection> = parse_records("detections", values)?;
    let (image_ids, category_ids) = ds.id_sets();

    let mut unknown = Vec::new();
    let mut dets = Vec::with_capacity(raw.len());
    for (ordinal, r) in raw.into_iter().enumerate() {
        if !image_ids.contains(&r.image_id) {
            unknown.push(format!("#{ordinal}: unknown image_id {}", r.image_id));
            continue;
        }
        if !category_ids.contains(&r.category_id) {
            unknown.push(format!("#{ordinal}: unknown category_id {}", r.category_id));
            continue;
        }
        if !(0.0..=1.0).contains(&r.score) {
            unknown.push(format!("#{ordinal}: score {} outside [0, 1]", r.score));
            continue;
        }
        let [x, y, w, h] = r.bbox;
        let bbox = BBox::from_xywh(x, y, w, h)
            .map_err(|e| Error::Validation(format!("detection #{ordinal}: {e}")))?;
        dets.push(Detection {
            image_id: r.image_id,
            category_id: r.category_id,
            bbox,
            score: r.score,
            ordinal,
        });
    }
    if !unknown.is_empty() {
        const SHOWN: usize = 20;
        let mut msg = format!("{source}: {} invalid detection(s): ", unknown.len());
        msg.push_str(&unknown[..unknown.len().min(SHOWN)].join(", "));
        if unknown.len() > SHOWN {
            msg.push_str(", ...");
        }
        return Err(Error::Validation(msg));
    }
    Ok(dets)
}

pub fn load_detections(path: impl AsRef<Path>, ds: &Dataset) -> Result<Vec<Detection>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_detections(&text, &path.display().to_string(), ds)
}

/// Every ground truth, crowd regions included, as a score-1 detection.
/// Ordinals follow ascending annotation id.
pub fn gt_as_detections(ds: &Dataset) -> Vec<Detection> {
    let mut gts: Vec<&GroundTruth> = ds.ground_truths.iter().collect();
    gts.sort_by_key(|g| g.id);
    gts.into_iter()
        .enumerate()
        .map(|(ordinal, g)| Detection {
            image_id: g.image_id,
            category_id: g.category_id,
            bbox: g.bbox,
            score: 1.0,
            ordinal,
        })
        .collect()
}

/// Serializes detections as a COCO results array, in slice order.
pub fn detections_to_json(dets: &[Detection]) -> String {
    let out: Vec<OutDetection> = dets
        .iter()
        .map(|d| OutDetection {
            image_id: d.image_id,
            category_id: d.category_id,
            bbox: d.bbox.to_xywh(),
            score: d.score,
        })
        .collect();
    serde_json::to_string(&out).expect("detections always serialize")
}

pub fn write_detections(dets: &[Detection], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, detections_to_json(dets)).map_err(|e| Error::io(path, e))
}
