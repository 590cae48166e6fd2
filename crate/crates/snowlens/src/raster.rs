//! Image and label rasters plus the mask algebra used by the hazard
//! arithmetic: per-class masks, intersections, and color overlays.

use std::path::Path;

use crate::error::{Error, Result};
use crate::taxonomy::{ClassTaxonomy, NUM_CLASSES};

/// Value convention of an [`RgbImage`].
///
/// `Byte` rasters hold values in [0,255] (not necessarily integral after
/// resampling); `SignedUnit` rasters hold values in [-1,1] and are the
/// translator's working space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelRange {
    Byte,
    SignedUnit,
}

impl PixelRange {
    pub fn bounds(self) -> (f32, f32) {
        match self {
            PixelRange::Byte => (0.0, 255.0),
            PixelRange::SignedUnit => (-1.0, 1.0),
        }
    }
}

/// H×W×3 raster, interleaved row-major (y, x, channel).
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    height: usize,
    width: usize,
    data: Vec<f32>,
    range: PixelRange,
}

impl RgbImage {
    pub fn new(height: usize, width: usize, data: Vec<f32>, range: PixelRange) -> Result<RgbImage> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParam("image dimensions must be >= 1".into()));
        }
        if data.len() != height * width * 3 {
            return Err(Error::InvalidParam(format!(
                "pixel buffer length {} does not match {height}x{width}x3",
                data.len()
            )));
        }
        let (lo, hi) = range.bounds();
        if data.iter().any(|v| !v.is_finite() || *v < lo || *v > hi) {
            return Err(Error::InvalidParam(format!(
                "pixel values outside declared range [{lo},{hi}]"
            )));
        }
        Ok(RgbImage { height, width, data, range })
    }

    /// Constant-color byte image.
    pub fn filled(height: usize, width: usize, rgb: [u8; 3]) -> RgbImage {
        let mut data = Vec::with_capacity(height * width * 3);
        for _ in 0..height * width {
            data.extend_from_slice(&[rgb[0] as f32, rgb[1] as f32, rgb[2] as f32]);
        }
        RgbImage { height, width, data, range: PixelRange::Byte }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn range(&self) -> PixelRange {
        self.range
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn pixel(&self, y: usize, x: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, y: usize, x: usize, rgb: [f32; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Byte value [0,255] -> signed unit [-1,1] via x/127.5 - 1.
    pub fn to_signed_unit(&self) -> RgbImage {
        match self.range {
            PixelRange::SignedUnit => self.clone(),
            PixelRange::Byte => RgbImage {
                height: self.height,
                width: self.width,
                data: self.data.iter().map(|v| v / 127.5 - 1.0).collect(),
                range: PixelRange::SignedUnit,
            },
        }
    }

    /// Signed unit [-1,1] -> byte [0,255], round half up with clamp.
    pub fn to_byte(&self) -> RgbImage {
        match self.range {
            PixelRange::Byte => self.clone(),
            PixelRange::SignedUnit => RgbImage {
                height: self.height,
                width: self.width,
                data: self
                    .data
                    .iter()
                    .map(|v| round_half_up_byte((v + 1.0) * 127.5) as f32)
                    .collect(),
                range: PixelRange::Byte,
            },
        }
    }

    /// Quantizes a byte-range raster to integral byte values (round half up).
    pub fn quantized_bytes(&self) -> Result<Vec<u8>> {
        if self.range != PixelRange::Byte {
            return Err(Error::InvalidParam("byte-range image required".into()));
        }
        Ok(self.data.iter().map(|v| round_half_up_byte(*v)).collect())
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let bytes = self.quantized_bytes()?;
        let img: image::RgbImage =
            image::ImageBuffer::from_raw(self.width as u32, self.height as u32, bytes)
                .expect("buffer length checked at construction");
        img.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| Error::ImageDecode { path: path.to_path_buf(), message: e.to_string() })
    }

    /// Loads a PNG or JPEG file as a byte-range raster.
    pub fn load(path: &Path) -> Result<RgbImage> {
        let img = image::open(path)
            .map_err(|e| Error::ImageDecode { path: path.to_path_buf(), message: e.to_string() })?
            .to_rgb8();
        let (w, h) = img.dimensions();
        let data = img.into_raw().into_iter().map(|b| b as f32).collect();
        RgbImage::new(h as usize, w as usize, data, PixelRange::Byte)
    }
}

pub(crate) fn round_half_up_byte(v: f32) -> u8 {
    let clamped = v.clamp(0.0, 255.0);
    (clamped + 0.5).floor() as u8
}

/// H×W per-pixel class indices over the fixed six-class taxonomy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    height: usize,
    width: usize,
    labels: Vec<u8>,
}

impl LabelMap {
    pub fn new(height: usize, width: usize, labels: Vec<u8>) -> Result<LabelMap> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParam("label dimensions must be >= 1".into()));
        }
        if labels.len() != height * width {
            return Err(Error::InvalidParam(format!(
                "label buffer length {} does not match {height}x{width}",
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|v| **v as usize >= NUM_CLASSES) {
            return Err(Error::InvalidClass(*bad));
        }
        Ok(LabelMap { height, width, labels })
    }

    pub fn filled(height: usize, width: usize, cls: u8) -> Result<LabelMap> {
        LabelMap::new(height, width, vec![cls; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, y: usize, x: usize) -> u8 {
        self.labels[y * self.width + x]
    }

    pub fn set(&mut self, y: usize, x: usize, cls: u8) {
        debug_assert!((cls as usize) < NUM_CLASSES);
        self.labels[y * self.width + x] = cls;
    }

    /// Count of pixels carrying class `cls`.
    pub fn class_count(&self, cls: u8) -> usize {
        self.labels.iter().filter(|v| **v == cls).count()
    }
}

/// H×W boolean region, same grid as the label map it was derived from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl PixelMask {
    pub fn empty(height: usize, width: usize) -> PixelMask {
        PixelMask { height, width, bits: vec![false; height * width] }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, y: usize, x: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, y: usize, x: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of set bits.
    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Bit set iff the label equals `cls`.
pub fn class_mask(label: &LabelMap, cls: u8) -> Result<PixelMask> {
    if cls as usize >= NUM_CLASSES {
        return Err(Error::InvalidClass(cls));
    }
    Ok(PixelMask {
        height: label.height,
        width: label.width,
        bits: label.labels.iter().map(|v| *v == cls).collect(),
    })
}

/// Bitwise AND of two same-sized masks.
pub fn mask_intersection(a: &PixelMask, b: &PixelMask) -> Result<PixelMask> {
    if a.height != b.height || a.width != b.width {
        return Err(Error::DimMismatch {
            context: "mask_intersection",
            want_h: a.height,
            want_w: a.width,
            got_h: b.height,
            got_w: b.width,
        });
    }
    Ok(PixelMask {
        height: a.height,
        width: a.width,
        bits: a.bits.iter().zip(&b.bits).map(|(x, y)| *x && *y).collect(),
    })
}

/// Alpha-blends class colors over a byte-range image, rounding half up.
pub fn overlay(image: &RgbImage, label: &LabelMap, alpha: f32, tax: &ClassTaxonomy) -> Result<RgbImage> {
    if image.range != PixelRange::Byte {
        return Err(Error::InvalidParam("overlay requires a byte-range image".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParam(format!("alpha {alpha} outside [0,1]")));
    }
    if image.height != label.height || image.width != label.width {
        return Err(Error::DimMismatch {
            context: "overlay",
            want_h: image.height,
            want_w: image.width,
            got_h: label.height,
            got_w: label.width,
        });
    }
    let mut data = Vec::with_capacity(image.data.len());
    for (p, cls) in label.labels.iter().enumerate() {
        let color = tax.color_of(*cls)?;
        for c in 0..3 {
            let v = (1.0 - alpha) * image.data[p * 3 + c] + alpha * color[c] as f32;
            data.push(round_half_up_byte(v) as f32);
        }
    }
    RgbImage::new(image.height, image.width, data, PixelRange::Byte)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn class_mask_uniform_map() {
        let map = LabelMap::filled(2, 2, 3).unwrap();
        assert_eq!(class_mask(&map, 3).unwrap().popcount(), 4);
        assert_eq!(class_mask(&map, 0).unwrap().popcount(), 0);
    }

    #[test]
    fn class_mask_anti_diagonal() {
        let map = LabelMap::new(2, 2, vec![0, 3, 3, 5]).unwrap();
        let mask = class_mask(&map, 3).unwrap();
        assert_eq!(mask.popcount(), 2);
        assert!(!mask.get(0, 0));
        assert!(mask.get(0, 1));
        assert!(mask.get(1, 0));
        assert!(!mask.get(1, 1));
    }

    #[test]
    fn class_mask_rejects_bad_index() {
        let map = LabelMap::filled(1, 1, 0).unwrap();
        assert!(matches!(class_mask(&map, 6), Err(Error::InvalidClass(6))));
    }

    #[test]
    fn intersection_idempotent_and_disjoint() {
        let map = LabelMap::new(2, 3, vec![0, 3, 3, 5, 0, 3]).unwrap();
        let a = class_mask(&map, 3).unwrap();
        assert_eq!(mask_intersection(&a, &a).unwrap(), a);
        let b = class_mask(&map, 0).unwrap();
        assert_eq!(mask_intersection(&a, &b).unwrap().popcount(), 0);
    }

    #[test]
    fn intersection_counts_overlap() {
        // a: 6 set bits, b: 4 set bits, overlapping on 3.
        let mut a = PixelMask::empty(3, 3);
        let mut b = PixelMask::empty(3, 3);
        for i in 0..6 {
            a.set(i / 3, i % 3, true);
        }
        for i in 3..7 {
            b.set(i / 3, i % 3, true);
        }
        let both = mask_intersection(&a, &b).unwrap();
        assert_eq!(both.popcount(), 3);
        assert!(both.popcount() <= a.popcount().min(b.popcount()));
    }

    #[test]
    fn intersection_rejects_dim_mismatch() {
        let a = PixelMask::empty(2, 2);
        let b = PixelMask::empty(2, 3);
        assert!(mask_intersection(&a, &b).is_err());
    }

    #[test]
    fn overlay_alpha_extremes() {
        let tax = ClassTaxonomy::canonical();
        let img = RgbImage::filled(2, 2, [10, 20, 30]);
        let map = LabelMap::filled(2, 2, 3).unwrap();
        let same = overlay(&img, &map, 0.0, &tax).unwrap();
        assert_eq!(same, img);
        let pure = overlay(&img, &map, 1.0, &tax).unwrap();
        assert_eq!(pure.pixel(0, 0), [255.0, 255.0, 255.0]);
    }

    #[test]
    fn overlay_midpoint_rounds_half_up() {
        let tax = ClassTaxonomy::canonical();
        let img = RgbImage::filled(1, 1, [255, 255, 255]);
        let map = LabelMap::filled(1, 1, 0).unwrap(); // road = (128,64,128)
        let mixed = overlay(&img, &map, 0.5, &tax).unwrap();
        assert_eq!(mixed.pixel(0, 0), [192.0, 160.0, 192.0]);
    }

    #[test]
    fn overlay_rejects_dim_mismatch() {
        let tax = ClassTaxonomy::canonical();
        let img = RgbImage::filled(2, 2, [0, 0, 0]);
        let map = LabelMap::filled(2, 3, 0).unwrap();
        assert!(overlay(&img, &map, 0.5, &tax).is_err());
    }

    #[test]
    fn byte_signed_unit_round_trip_on_integral_bytes() {
        let img = RgbImage::filled(2, 2, [0, 128, 255]);
        let back = img.to_signed_unit().to_byte();
        assert_eq!(img, back);
    }

    proptest! {
        #[test]
        fn class_masks_partition_the_grid(labels in proptest::collection::vec(0u8..6, 36)) {
            let map = LabelMap::new(6, 6, labels).unwrap();
            let masks: Vec<PixelMask> =
                (0..6).map(|c| class_mask(&map, c).unwrap()).collect();
            let total: usize = masks.iter().map(|m| m.popcount()).sum();
            prop_assert_eq!(total, 36);
            for i in 0..6 {
                for j in (i + 1)..6 {
                    prop_assert_eq!(mask_intersection(&masks[i], &masks[j]).unwrap().popcount(), 0);
                }
            }
        }

        #[test]
        fn intersection_commutative_associative(
            a in proptest::collection::vec(any::<bool>(), 24),
            b in proptest::collection::vec(any::<bool>(), 24),
            c in proptest::collection::vec(any::<bool>(), 24),
        ) {
            let m = |bits: Vec<bool>| PixelMask { height: 4, width: 6, bits };
            let (a, b, c) = (m(a), m(b), m(c));
            let ab = mask_intersection(&a, &b).unwrap();
            let ba = mask_intersection(&b, &a).unwrap();
            prop_assert_eq!(&ab, &ba);
            let ab_c = mask_intersection(&ab, &c).unwrap();
            let bc = mask_intersection(&b, &c).unwrap();
            let a_bc = mask_intersection(&a, &bc).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let aa = mask_intersection(&a, &a).unwrap();
            prop_assert_eq!(aa, a);
        }
    }
}
