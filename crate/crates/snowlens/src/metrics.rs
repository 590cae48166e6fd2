//! Segmentation evaluation: confusion-matrix metrics (per-class IoU, mIoU,
//! mean accuracy, mean F1) and ROI-restricted Dice similarity between two
//! label maps.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{class_mask, mask_intersection, LabelMap};
use crate::taxonomy::{Class, NUM_CLASSES};

/// Reference triple reported for the real six-class corpus; kept for
/// documentation, never used as a test target.
pub const REFERENCE_MIOU: f64 = 0.7718;
pub const REFERENCE_MEAN_ACCURACY: f64 = 0.8572;
pub const REFERENCE_MEAN_F1: f64 = 0.6886;

/// 6x6 pixel-count matrix; `counts[gt][pred]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl Default for ConfusionMatrix {
    fn default() -> Self {
        Self::new()
    }
}

impl ConfusionMatrix {
    pub fn new() -> ConfusionMatrix {
        ConfusionMatrix { counts: [[0; NUM_CLASSES]; NUM_CLASSES] }
    }

    pub fn counts(&self) -> &[[u64; NUM_CLASSES]; NUM_CLASSES] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Adds one prediction/ground-truth pair, pixel by pixel.
    pub fn accumulate(&mut self, pred: &LabelMap, gt: &LabelMap) -> Result<()> {
        if pred.height() != gt.height() || pred.width() != gt.width() {
            return Err(Error::DimMismatch {
                context: "confusion_accumulate",
                want_h: gt.height(),
                want_w: gt.width(),
                got_h: pred.height(),
                got_w: pred.width(),
            });
        }
        for (p, g) in pred.labels().iter().zip(gt.labels()) {
            self.counts[*g as usize][*p as usize] += 1;
        }
        Ok(())
    }

    /// Merges another matrix into this one (accumulation is associative).
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for g in 0..NUM_CLASSES {
            for p in 0..NUM_CLASSES {
                self.counts[g][p] += other.counts[g][p];
            }
        }
    }

    fn row_sum(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    fn col_sum(&self, c: usize) -> u64 {
        (0..NUM_CLASSES).map(|g| self.counts[g][c]).sum()
    }

    /// Per-class intersection-over-union; `None` when the class is absent
    /// from both prediction and ground truth.
    pub fn per_class_iou(&self) -> [Option<f64>; NUM_CLASSES] {
        let mut out = [None; NUM_CLASSES];
        for (c, slot) in out.iter_mut().enumerate() {
            let tp = self.counts[c][c];
            let denom = self.row_sum(c) + self.col_sum(c) - tp;
            if denom > 0 {
                *slot = Some(tp as f64 / denom as f64);
            }
        }
        out
    }

    /// Per-class recall (`None` when the class has no ground-truth pixels).
    pub fn per_class_accuracy(&self) -> [Option<f64>; NUM_CLASSES] {
        let mut out = [None; NUM_CLASSES];
        for (c, slot) in out.iter_mut().enumerate() {
            let row = self.row_sum(c);
            if row > 0 {
                *slot = Some(self.counts[c][c] as f64 / row as f64);
            }
        }
        out
    }

    /// Per-class F1 = 2*TP / (row + col); `None` when both are empty.
    pub fn per_class_f1(&self) -> [Option<f64>; NUM_CLASSES] {
        let mut out = [None; NUM_CLASSES];
        for (c, slot) in out.iter_mut().enumerate() {
            let denom = self.row_sum(c) + self.col_sum(c);
            if denom > 0 {
                *slot = Some(2.0 * self.counts[c][c] as f64 / denom as f64);
            }
        }
        out
    }

    /// Micro-averaged F1 over all pixels (equals overall pixel accuracy for
    /// a single-label confusion matrix); behind a flag in the report path.
    pub fn micro_f1(&self) -> Option<f64> {
        let total = self.total();
        if total == 0 {
            return None;
        }
        let tp: u64 = (0..NUM_CLASSES).map(|c| self.counts[c][c]).sum();
        Some(tp as f64 / total as f64)
    }

    pub fn summarize(&self) -> Result<SegmentationReport> {
        if self.total() == 0 {
            return Err(Error::EmptyDataset("confusion matrix holds no pixels"));
        }
        let iou = self.per_class_iou();
        let acc = self.per_class_accuracy();
        let f1 = self.per_class_f1();
        let mean = |vals: &[Option<f64>]| {
            let defined: Vec<f64> = vals.iter().flatten().copied().collect();
            defined.iter().sum::<f64>() / defined.len() as f64
        };
        let excluded: Vec<String> = (0..NUM_CLASSES)
            .filter(|c| iou[*c].is_none())
            .map(|c| Class::from_index(c as u8).unwrap().name().to_string())
            .collect();
        Ok(SegmentationReport {
            per_class_iou: iou.to_vec(),
            mean_iou: mean(&iou),
            mean_accuracy: mean(&acc),
            mean_f1: mean(&f1),
            excluded_classes: excluded,
            total_pixels: self.total(),
        })
    }
}

/// Aggregate scores over defined classes; macro averages throughout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentationReport {
    pub per_class_iou: Vec<Option<f64>>,
    pub mean_iou: f64,
    pub mean_accuracy: f64,
    pub mean_f1: f64,
    pub excluded_classes: Vec<String>,
    pub total_pixels: u64,
}

impl SegmentationReport {
    pub fn save_json(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }

    /// One row per class: name, iou (empty when undefined).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,iou\n");
        for (c, iou) in self.per_class_iou.iter().enumerate() {
            let name = Class::from_index(c as u8).unwrap().name();
            match iou {
                Some(v) => out.push_str(&format!("{name},{v}\n")),
                None => out.push_str(&format!("{name},\n")),
            }
        }
        out.push_str(&format!("mean_iou,{}\n", self.mean_iou));
        out.push_str(&format!("mean_accuracy,{}\n", self.mean_accuracy));
        out.push_str(&format!("mean_f1,{}\n", self.mean_f1));
        out
    }
}

/// Dice similarity for one class between two same-sized label maps.
///
/// Both masks empty reads 1.0, exactly one empty reads 0.0; either way the
/// `empty` flag is set so downstream reports stay auditable.
pub fn dice_class(a: &LabelMap, b: &LabelMap, cls: u8) -> Result<(f64, bool)> {
    if a.height() != b.height() || a.width() != b.width() {
        return Err(Error::DimMismatch {
            context: "dice_class",
            want_h: a.height(),
            want_w: a.width(),
            got_h: b.height(),
            got_w: b.width(),
        });
    }
    let ma = class_mask(a, cls)?;
    let mb = class_mask(b, cls)?;
    let (na, nb) = (ma.popcount(), mb.popcount());
    if na == 0 && nb == 0 {
        return Ok((1.0, true));
    }
    if na == 0 || nb == 0 {
        return Ok((0.0, true));
    }
    let inter = mask_intersection(&ma, &mb)?.popcount();
    Ok((2.0 * inter as f64 / (na + nb) as f64, false))
}

/// Dice for one image over one ROI class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiceEntry {
    pub id: String,
    pub class: String,
    pub dice: f64,
    pub empty_mask: bool,
}

/// Per-image, per-ROI-class Dice values for a batch of label pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiceReport {
    pub roi: Vec<String>,
    pub entries: Vec<DiceEntry>,
}

impl DiceReport {
    pub fn save_json(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<DiceReport> {
        let bytes = std::fs::read(path)?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    /// One row per image per ROI class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,class,dice,empty_mask\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{},{}\n", e.id, e.class, e.dice, e.empty_mask));
        }
        out
    }

    /// Median Dice per ROI class (even count: mean of the middle two).
    pub fn median(&self, class: Class) -> Option<f64> {
        let mut vals: Vec<f64> = self
            .entries
            .iter()
            .filter(|e| e.class == class.name())
            .map(|e| e.dice)
            .collect();
        if vals.is_empty() {
            return None;
        }
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = vals.len();
        Some(if n % 2 == 1 { vals[n / 2] } else { 0.5 * (vals[n / 2 - 1] + vals[n / 2]) })
    }
}

/// Dice between one real/fake label pair over the ROI classes.
pub fn dice_report(real: &LabelMap, fake: &LabelMap, roi: &[Class], id: &str) -> Result<Vec<DiceEntry>> {
    if roi.is_empty() {
        return Err(Error::InvalidParam("ROI class set must not be empty".into()));
    }
    let mut entries = Vec::with_capacity(roi.len());
    for cls in roi {
        let (dice, empty) = dice_class(real, fake, cls.index())?;
        entries.push(DiceEntry {
            id: id.to_string(),
            class: cls.name().to_string(),
            dice,
            empty_mask: empty,
        });
    }
    Ok(entries)
}

/// Batch variant over aligned (id, real, fake) triples.
pub fn dice_report_batch(
    pairs: &[(String, LabelMap, LabelMap)],
    roi: &[Class],
) -> Result<DiceReport> {
    if roi.is_empty() {
        return Err(Error::InvalidParam("ROI class set must not be empty".into()));
    }
    let mut entries = Vec::new();
    for (id, real, fake) in pairs {
        entries.extend(dice_report(real, fake, roi, id)?);
    }
    Ok(DiceReport { roi: roi.iter().map(|c| c.name().to_string()).collect(), entries })
}
