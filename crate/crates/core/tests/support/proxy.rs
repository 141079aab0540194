//! Deterministic COCO-like dataset: clutter, crowd regions, segmentation
//! areas below box areas, and roughly COCO's small/medium/large mix.

use ap_perturb::coco_io::{Category, Dataset, Detection, GroundTruth, Image};
use ap_perturb::geometry::{iou, BBox};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

pub struct ProxyConfig {
    pub images: u64,
    pub categories: u64,
    pub seed: u64,
}

impl Default for ProxyConfig {
    fn default() -> Self {
        ProxyConfig { images: 600, categories: 20, seed: 2017 }
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

pub fn proxy_dataset(cfg: &ProxyConfig) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (img_w, img_h) = (640.0, 480.0);
    let images: Vec<Image> =
        (1..=cfg.images).map(|id| Image { id, width: 640, height: 480 }).collect();
    let categories: Vec<Category> =
        (1..=cfg.categories).map(|id| Category { id, name: format!("cat{id}") }).collect();
    let mut gts = Vec::new();
    let mut next_id = 1;
    for img in &images {
        let n = rng.gen_range(1..=14);
        for _ in 0..n {
            let crowd = rng.gen_bool(0.01);
            let side: f64 = if crowd {
                rng.gen_range(150.0..400.0)
            } else {
                rng.gen_range(6f64.ln()..300f64.ln()).exp()
            };
            let aspect: f64 = rng.gen_range(-0.7f64..0.7).exp();
            let w = round2((side * aspect.sqrt()).min(img_w - 1.0));
            let h = round2((side / aspect.sqrt()).min(img_h - 1.0));
            let x = round2(rng.gen_range(0.0..img_w - w));
            let y = round2(rng.gen_range(0.0..img_h - h));
            let bbox = BBox::from_xywh(x, y, w, h).unwrap();
            gts.push(GroundTruth {
                id: next_id,
                image_id: img.id,
                category_id: rng.gen_range(1..=cfg.categories),
                area: round2(bbox.area() * rng.gen_range(0.45..0.85)),
                bbox,
                iscrowd: crowd,
            });
            next_id += 1;
        }
    }
    Dataset::new(images, categories, gts).unwrap()
}

/// Imperfect "model" output: localisation noise proportional to object size,
/// missed objects, and low-scoring false positives.
pub fn proxy_predictions(ds: &Dataset, seed: u64) -> Vec<Detection> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let fp_count = Poisson::new(3.0).unwrap();
    let mut dets = Vec::new();
    for g in ds.ground_truths().iter().filter(|g| !g.iscrowd) {
        if !rng.gen_bool(0.85) {
            continue;
        }
        let b = &g.bbox;
        let sigma = 0.06;
        let x = b.x_l() + unit.sample(&mut rng) * sigma * b.width();
        let y = b.y_l() + unit.sample(&mut rng) * sigma * b.height();
        let w = (b.width() * (1.0 + unit.sample(&mut rng) * sigma)).max(1.0);
        let h = (b.height() * (1.0 + unit.sample(&mut rng) * sigma)).max(1.0);
        let bbox = BBox::from_xywh(round2(x), round2(y), round2(w), round2(h)).unwrap();
        let score = (0.2 + 0.7 * iou(&bbox, b) + 0.1 * unit.sample(&mut rng)).clamp(0.01, 1.0);
        dets.push((g.image_id, g.category_id, bbox, score));
    }
    let n_cat = ds.categories().len() as u64;
    for img in ds.images() {
        let n: f64 = fp_count.sample(&mut rng);
        for _ in 0..n as usize {
            let s: f64 = rng.gen_range(8f64.ln()..200f64.ln()).exp();
            let x = rng.gen_range(0.0..640.0 - s);
            let y = rng.gen_range(0.0..(480.0 - s).max(1.0));
            let bbox = BBox::from_xywh(round2(x), round2(y), round2(s), round2(s)).unwrap();
            dets.push((img.id, rng.gen_range(1..=n_cat), bbox, rng.gen_range(0.01..0.5)));
        }
    }
    dets.into_iter()
        .enumerate()
        .map(|(ordinal, (image_id, category_id, bbox, score))| Detection {
            image_id,
            category_id,
            bbox,
            score: (score * 1000.0).round() / 1000.0,
            ordinal,
        })
        .collect()
}
