//! COCO bbox Average Precision, reproducing the reference `COCOeval`
//! arithmetic: greedy per-threshold matching, cumulative precision/recall,
//! right-to-left precision envelope and 101-point recall sampling.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::coco_io::{Dataset, Detection, GroundTruth};
use crate::error::{Error, Result};
use crate::geometry::{iou, iou_crowd};

/// Upper clamp the reference matcher applies to every threshold.
const MAX_MATCH_IOU: f64 = 1.0 - 1e-10;

/// `numpy.linspace(start, stop, num)`, including its rounding: `i * step + start`
/// with the last element pinned to `stop`.
fn linspace(start: f64, stop: f64, num: usize) -> Vec<f64> {
    let step = (stop - start) / (num - 1) as f64;
    let mut v: Vec<f64> = (0..num).map(|i| i as f64 * step + start).collect();
    if let Some(last) = v.last_mut() {
        *last = stop;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaRange {
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
}

impl AreaRange {
    /// Closed interval: both bounds count as inside.
    pub fn contains(&self, area: f64) -> bool {
        !(area < self.min || area > self.max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalParams {
    pub iou_thresholds: Vec<f64>,
    pub recall_thresholds: Vec<f64>,
    pub area_ranges: Vec<AreaRange>,
    pub max_dets: usize,
}

impl Default for EvalParams {
    fn default() -> Self {
        const HUGE: f64 = 1e5 * 1e5;
        EvalParams {
            iou_thresholds: linspace(0.5, 0.95, 10),
            recall_thresholds: linspace(0.0, 1.0, 101),
            area_ranges: vec![
                AreaRange { name: "all", min: 0.0, max: HUGE },
                AreaRange { name: "small", min: 0.0, max: 32.0 * 32.0 },
                AreaRange { name: "medium", min: 32.0 * 32.0, max: 96.0 * 96.0 },
                AreaRange { name: "large", min: 96.0 * 96.0, max: HUGE },
            ],
            max_dets: 100,
        }
    }
}

impl EvalParams {
    fn area_index(&self, name: &str) -> Option<usize> {
        self.area_ranges.iter().position(|a| a.name == name)
    }

    fn threshold_index(&self, t: f64) -> Option<usize> {
        self.iou_thresholds.iter().position(|&x| x == t)
    }
}

/// Matching outcome for one image, one category and one area range.
///
/// Detections are in evaluation order (score descending, ordinal ascending,
/// truncated to `max_dets`); ground truths have non-ignored entries first.
/// Per-threshold vectors are indexed `[threshold][item]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchRecord {
    pub image_id: u64,
    pub category_id: u64,
    pub area_range: AreaRange,
    pub det_ordinals: Vec<usize>,
    pub det_scores: Vec<f64>,
    pub gt_ids: Vec<u64>,
    pub gt_ignore: Vec<bool>,
    /// Annotation id of the claimed ground truth.
    pub det_matches: Vec<Vec<Option<u64>>>,
    pub det_ignore: Vec<Vec<bool>>,
    /// Ordinal of the claiming detection.
    pub gt_matches: Vec<Vec<Option<usize>>>,
}

/// Detections of one (image, category) in evaluation order plus their
/// overlaps with each ground truth, shared by all area ranges.
struct Prepared<'a> {
    dets: Vec<&'a Detection>,
    gts: Vec<&'a GroundTruth>,
    /// `dets.len() x gts.len()`, row-major.
    ious: Vec<f64>,
}

impl<'a> Prepared<'a> {
    fn new(mut dets: Vec<&'a Detection>, gts: Vec<&'a GroundTruth>, max_dets: usize) -> Self {
        dets.sort_by_key(|d| d.ordinal);
        dets.sort_by(|a, b| b.score.total_cmp(&a.score));
        dets.truncate(max_dets);
        let mut ious = Vec::with_capacity(dets.len() * gts.len());
        for d in &dets {
            for g in &gts {
                ious.push(if g.iscrowd {
                    iou_crowd(&d.bbox, &g.bbox)
                } else {
                    iou(&d.bbox, &g.bbox)
                });
            }
        }
        Prepared { dets, gts, ious }
    }

    fn match_area(
        &self,
        image_id: u64,
        category_id: u64,
        params: &EvalParams,
        area: AreaRange,
    ) -> MatchRecord {
        let n_gt = self.gts.len();
        let ignored = |g: &GroundTruth| g.iscrowd || !area.contains(g.area);
        // stable: non-ignored first, original order otherwise
        let mut order: Vec<usize> = (0..n_gt).collect();
        order.sort_by_key(|&g| ignored(self.gts[g]));
        let gt_ignore: Vec<bool> = order.iter().map(|&g| ignored(self.gts[g])).collect();
        let crowd: Vec<bool> = order.iter().map(|&g| self.gts[g].iscrowd).collect();

        let n_det = self.dets.len();
        let n_thr = params.iou_thresholds.len();
        let mut det_matches = vec![vec![None; n_det]; n_thr];
        let mut det_ignore = vec![vec![false; n_det]; n_thr];
        let mut gt_matches = vec![vec![None; n_gt]; n_thr];

        for (ti, &thr) in params.iou_thresholds.iter().enumerate() {
            let gtm = &mut gt_matches[ti];
            for (di, det) in self.dets.iter().enumerate() {
                let row = &self.ious[di * n_gt..(di + 1) * n_gt];
                let mut best = thr.min(MAX_MATCH_IOU);
                let mut found: Option<usize> = None;
                for (gi, &g) in order.iter().enumerate() {
                    if gtm[gi].is_some() && !crowd[gi] {
                        continue;
                    }
                    // a regular match is never traded for an ignored one
                    if let Some(m) = found {
                        if !gt_ignore[m] && gt_ignore[gi] {
                            break;
                        }
                    }
                    if row[g] < best {
                        continue;
                    }
                    best = row[g];
                    found = Some(gi);
                }
                if let Some(gi) = found {
                    det_ignore[ti][di] = gt_ignore[gi];
                    det_matches[ti][di] = Some(self.gts[order[gi]].id);
                    gtm[gi] = Some(det.ordinal);
                }
            }
        }

        for (di, det) in self.dets.iter().enumerate() {
            if !area.contains(det.bbox.area()) {
                for ti in 0..n_thr {
                    if det_matches[ti][di].is_none() {
                        det_ignore[ti][di] = true;
                    }
                }
            }
        }

        MatchRecord {
            image_id,
            category_id,
            area_range: area,
            det_ordinals: self.dets.iter().map(|d| d.ordinal).collect(),
            det_scores: self.dets.iter().map(|d| d.score).collect(),
            gt_ids: order.iter().map(|&g| self.gts[g].id).collect(),
            gt_ignore,
            det_matches,
            det_ignore,
            gt_matches,
        }
    }
}

/// Greedy matching of one image/category pair in one area range.
///
/// Every detection and ground truth must carry `key = (image_id, category_id)`.
pub fn match_image_category(
    key: (u64, u64),
    dets: &[Detection],
    gts: &[GroundTruth],
    params: &EvalParams,
    area: AreaRange,
) -> Result<MatchRecord> {
    let foreign_det = dets.iter().find(|d| (d.image_id, d.category_id) != key);
    let foreign_gt = gts.iter().find(|g| (g.image_id, g.category_id) != key);
    if foreign_det.is_some() || foreign_gt.is_some() {
        return Err(Error::Contract(format!(
            "match_image_category called for image {} category {} with mixed inputs",
            key.0, key.1
        )));
    }
    let prepared = Prepared::new(dets.iter().collect(), gts.iter().collect(), params.max_dets);
    Ok(prepared.match_area(key.0, key.1, params, area))
}

/// All match records of one evaluation, grouped per (category, image) in
/// ascending id order. Each group holds one record per area range.
#[derive(Debug, Clone)]
pub struct EvalRecords {
    pub category_ids: Vec<u64>,
    pub image_ids: Vec<u64>,
    /// `(category index, image index, records per area range)`, sorted.
    pub groups: Vec<(usize, usize, Vec<MatchRecord>)>,
}

/// Precision and recall tensors. Entries stay at -1 where a category has no
/// non-ignored ground truth in an area range.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulation {
    pub n_thresholds: usize,
    pub n_recall: usize,
    pub n_categories: usize,
    pub n_areas: usize,
    /// `[threshold][recall][category][area]`
    pub precision: Vec<f64>,
    /// `[threshold][category][area]`
    pub recall: Vec<f64>,
}

impl Accumulation {
    pub fn precision_at(&self, t: usize, r: usize, k: usize, a: usize) -> f64 {
        self.precision[((t * self.n_recall + r) * self.n_categories + k) * self.n_areas + a]
    }

    pub fn recall_at(&self, t: usize, k: usize, a: usize) -> f64 {
        self.recall[(t * self.n_categories + k) * self.n_areas + a]
    }
}

/// Sampled precision (`[threshold][recall]`) and final recall per threshold
/// for one category/area cell, or `None` when it has no non-ignored GT.
fn accumulate_cell(records: &[&MatchRecord], params: &EvalParams) -> Option<(Vec<f64>, Vec<f64>)> {
    let npig = records
        .iter()
        .map(|r| r.gt_ignore.iter().filter(|&&ig| !ig).count())
        .sum::<usize>();
    if records.is_empty() || npig == 0 {
        return None;
    }
    let npig = npig as f64;

    // (record, detection) pairs in image order, then stable by descending score
    let mut order: Vec<(usize, usize)> = records
        .iter()
        .enumerate()
        .flat_map(|(ri, r)| (0..r.det_scores.len()).map(move |di| (ri, di)))
        .collect();
    order.sort_by(|&(ra, da), &(rb, db)| {
        records[rb].det_scores[db].total_cmp(&records[ra].det_scores[da])
    });

    let n_thr = params.iou_thresholds.len();
    let n_rec = params.recall_thresholds.len();
    let mut precision = vec![0.0; n_thr * n_rec];
    let mut recall = vec![0.0; n_thr];
    let nd = order.len();
    let mut rc = Vec::with_capacity(nd);
    let mut pr = Vec::with_capacity(nd);

    for t in 0..n_thr {
        rc.clear();
        pr.clear();
        let (mut tp, mut fp) = (0u64, 0u64);
        for &(ri, di) in &order {
            let rec = records[ri];
            if !rec.det_ignore[t][di] {
                if rec.det_matches[t][di].is_some() {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
            let (tpf, fpf) = (tp as f64, fp as f64);
            rc.push(tpf / npig);
            pr.push(tpf / (fpf + tpf + f64::EPSILON));
        }
        recall[t] = rc.last().copied().unwrap_or(0.0);

        for i in (1..nd).rev() {
            if pr[i] > pr[i - 1] {
                pr[i - 1] = pr[i];
            }
        }

        let row = &mut precision[t * n_rec..(t + 1) * n_rec];
        for (ri, &r) in params.recall_thresholds.iter().enumerate() {
            let pi = rc.partition_point(|&x| x < r);
            if pi >= nd {
                break;
            }
            row[ri] = pr[pi];
        }
    }
    Some((precision, recall))
}

/// Builds the precision/recall tensors from match records.
pub fn accumulate(records: &EvalRecords, params: &EvalParams) -> Accumulation {
    let n_thr = params.iou_thresholds.len();
    let n_rec = params.recall_thresholds.len();
    let n_cat = records.category_ids.len();
    let n_area = params.area_ranges.len();

    // contiguous group slice per category
    let mut bounds = vec![(0usize, 0usize); n_cat];
    let mut start = 0;
    while start < records.groups.len() {
        let k = records.groups[start].0;
        let end = start + records.groups[start..].iter().take_while(|g| g.0 == k).count();
        bounds[k] = (start, end);
        start = end;
    }

    let cells: Vec<Option<(Vec<f64>, Vec<f64>)>> = (0..n_cat * n_area)
        .into_par_iter()
        .map(|cell| {
            let (k, a) = (cell / n_area, cell % n_area);
            let (lo, hi) = bounds[k];
            let recs: Vec<&MatchRecord> = records.groups[lo..hi].iter().map(|g| &g.2[a]).collect();
            accumulate_cell(&recs, params)
        })
        .collect();

    let mut acc = Accumulation {
        n_thresholds: n_thr,
        n_recall: n_rec,
        n_categories: n_cat,
        n_areas: n_area,
        precision: vec![-1.0; n_thr * n_rec * n_cat * n_area],
        recall: vec![-1.0; n_thr * n_cat * n_area],
    };
    for (cell, result) in cells.into_iter().enumerate() {
        let Some((precision, recall)) = result else {
            continue;
        };
        let (k, a) = (cell / n_area, cell % n_area);
        for t in 0..n_thr {
            for r in 0..n_rec {
                acc.precision[((t * n_rec + r) * n_cat + k) * n_area + a] = precision[t * n_rec + r];
            }
            acc.recall[(t * n_cat + k) * n_area + a] = recall[t];
        }
    }
    acc
}

/// The six headline AP numbers. `-1` marks "no ground truth in scope".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApSummary {
    pub map: f64,
    pub ap50: f64,
    pub ap75: f64,
    pub ap_small: f64,
    pub ap_medium: f64,
    pub ap_large: f64,
}

impl ApSummary {
    pub const METRIC_NAMES: [&'static str; 6] =
        ["map", "ap50", "ap75", "ap_small", "ap_medium", "ap_large"];

    pub fn to_array(&self) -> [f64; 6] {
        [self.map, self.ap50, self.ap75, self.ap_small, self.ap_medium, self.ap_large]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        ApSummary {
            map: v[0],
            ap50: v[1],
            ap75: v[2],
            ap_small: v[3],
            ap_medium: v[4],
            ap_large: v[5],
        }
    }
}

fn mean_precision(acc: &Accumulation, thresholds: &[usize], area: Option<usize>) -> f64 {
    let Some(a) = area else {
        return -1.0;
    };
    let (mut sum, mut n) = (0.0, 0usize);
    for &t in thresholds {
        for r in 0..acc.n_recall {
            for k in 0..acc.n_categories {
                let v = acc.precision_at(t, r, k, a);
                if v > -1.0 {
                    sum += v;
                    n += 1;
                }
            }
        }
    }
    if n == 0 {
        -1.0
    } else {
        sum / n as f64
    }
}

pub fn summarize(acc: &Accumulation, params: &EvalParams) -> ApSummary {
    let all_t: Vec<usize> = (0..acc.n_thresholds).collect();
    let at = |t: f64| params.threshold_index(t).map(|i| vec![i]).unwrap_or_default();
    let all = params.area_index("all");
    ApSummary {
        map: mean_precision(acc, &all_t, all),
        ap50: mean_precision(acc, &at(0.5), all),
        ap75: mean_precision(acc, &at(0.75), all),
        ap_small: mean_precision(acc, &all_t, params.area_index("small")),
        ap_medium: mean_precision(acc, &all_t, params.area_index("medium")),
        ap_large: mean_precision(acc, &all_t, params.area_index("large")),
    }
}

/// Evaluates detection sets against one dataset. Ground-truth grouping is
/// done once, so repeated calls (sweeps) only pay for matching.
#[derive(Debug)]
pub struct Evaluator<'a> {
    params: EvalParams,
    image_ids: Vec<u64>,
    category_ids: Vec<u64>,
    image_index: HashMap<u64, usize>,
    category_index: HashMap<u64, usize>,
    /// `(category index, image index)` -> ground truths in file order
    gt_groups: HashMap<(usize, usize), Vec<&'a GroundTruth>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(dataset: &'a Dataset, params: EvalParams) -> Self {
        let mut image_ids: Vec<u64> = dataset.images().iter().map(|i| i.id).collect();
        image_ids.sort_unstable();
        let mut category_ids: Vec<u64> = dataset.categories().iter().map(|c| c.id).collect();
        category_ids.sort_unstable();
        let image_index: HashMap<u64, usize> =
            image_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let category_index: HashMap<u64, usize> =
            category_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

        let mut gt_groups: HashMap<(usize, usize), Vec<&GroundTruth>> = HashMap::new();
        for gt in dataset.ground_truths() {
            let key = (category_index[&gt.category_id], image_index[&gt.image_id]);
            gt_groups.entry(key).or_default().push(gt);
        }
        Evaluator {
            params,
            image_ids,
            category_ids,
            image_index,
            category_index,
            gt_groups,
        }
    }

    pub fn params(&self) -> &EvalParams {
        &self.params
    }

    /// Runs matching for every (category, image) pair that has ground truth
    /// or detections.
    pub fn match_all(&self, dets: &[Detection]) -> Result<EvalRecords> {
        let mut det_groups: HashMap<(usize, usize), Vec<&Detection>> = HashMap::new();
        let mut bad = Vec::new();
        for d in dets {
            match (
                self.category_index.get(&d.category_id),
                self.image_index.get(&d.image_id),
            ) {
                (Some(&k), Some(&i)) => det_groups.entry((k, i)).or_default().push(d),
                _ => bad.push(d.ordinal),
            }
        }
        if !bad.is_empty() {
            return Err(Error::Validation(format!(
                "{} detection(s) reference unknown images or categories (ordinals {:?})",
                bad.len(),
                &bad[..bad.len().min(20)]
            )));
        }

        let mut keys: Vec<(usize, usize)> = self
            .gt_groups
            .keys()
            .chain(det_groups.keys())
            .copied()
            .collect();
        keys.sort_unstable();
        keys.dedup();

        let groups = keys
            .into_par_iter()
            .map(|(k, i)| {
                let gts = self.gt_groups.get(&(k, i)).cloned().unwrap_or_default();
                let ds = det_groups.get(&(k, i)).cloned().unwrap_or_default();
                let prepared = Prepared::new(ds, gts, self.params.max_dets);
                let (image_id, category_id) = (self.image_ids[i], self.category_ids[k]);
                let recs = self
                    .params
                    .area_ranges
                    .iter()
                    .map(|&area| prepared.match_area(image_id, category_id, &self.params, area))
                    .collect();
                (k, i, recs)
            })
            .collect();

        Ok(EvalRecords {
            category_ids: self.category_ids.clone(),
            image_ids: self.image_ids.clone(),
            groups,
        })
    }

    pub fn accumulate(&self, dets: &[Detection]) -> Result<Accumulation> {
        Ok(accumulate(&self.match_all(dets)?, &self.params))
    }

    pub fn evaluate(&self, dets: &[Detection]) -> Result<ApSummary> {
        Ok(summarize(&self.accumulate(dets)?, &self.params))
    }
}

/// One-shot evaluation of `dets` against `ds`.
pub fn evaluate(ds: &Dataset, dets: &[Detection], params: &EvalParams) -> Result<ApSummary> {
    Evaluator::new(ds, params.clone()).evaluate(dets)
}
