//! Raster geometry: bilinear/nearest resizing and the 2x4 crop grid used to
//! tile annotation images into training crops.

use crate::error::{Error, Result};
use crate::raster::{LabelMap, PixelMask, RgbImage};

/// Bilinear resize (half-pixel centers, edge clamped). Convex weights keep
/// values inside the source range, so the range tag carries over.
pub fn resize_bilinear(image: &RgbImage, target_h: usize, target_w: usize) -> Result<RgbImage> {
    if target_h == 0 || target_w == 0 {
        return Err(Error::InvalidParam("resize target must be >= 1 in both dimensions".into()));
    }
    let (sh, sw) = (image.height(), image.width());
    if (sh, sw) == (target_h, target_w) {
        return Ok(image.clone());
    }
    let scale_y = sh as f32 / target_h as f32;
    let scale_x = sw as f32 / target_w as f32;
    let mut data = Vec::with_capacity(target_h * target_w * 3);
    for y in 0..target_h {
        let sy = (y as f32 + 0.5) * scale_y - 0.5;
        let y0 = sy.floor();
        let fy = sy - y0;
        let y0c = (y0 as isize).clamp(0, sh as isize - 1) as usize;
        let y1c = (y0 as isize + 1).clamp(0, sh as isize - 1) as usize;
        for x in 0..target_w {
            let sx = (x as f32 + 0.5) * scale_x - 0.5;
            let x0 = sx.floor();
            let fx = sx - x0;
            let x0c = (x0 as isize).clamp(0, sw as isize - 1) as usize;
            let x1c = (x0 as isize + 1).clamp(0, sw as isize - 1) as usize;
            let p00 = image.pixel(y0c, x0c);
            let p01 = image.pixel(y0c, x1c);
            let p10 = image.pixel(y1c, x0c);
            let p11 = image.pixel(y1c, x1c);
            for c in 0..3 {
                let top = p00[c] * (1.0 - fx) + p01[c] * fx;
                let bot = p10[c] * (1.0 - fx) + p11[c] * fx;
                data.push(top * (1.0 - fy) + bot * fy);
            }
        }
    }
    RgbImage::new(target_h, target_w, data, image.range())
}

/// Nearest-neighbor resize for label rasters; class indices never blend.
pub fn resize_nearest_label(label: &LabelMap, target_h: usize, target_w: usize) -> Result<LabelMap> {
    if target_h == 0 || target_w == 0 {
        return Err(Error::InvalidParam("resize target must be >= 1 in both dimensions".into()));
    }
    let (sh, sw) = (label.height(), label.width());
    if (sh, sw) == (target_h, target_w) {
        return Ok(label.clone());
    }
    let scale_y = sh as f32 / target_h as f32;
    let scale_x = sw as f32 / target_w as f32;
    let mut labels = Vec::with_capacity(target_h * target_w);
    for y in 0..target_h {
        let sy = (((y as f32 + 0.5) * scale_y - 0.5).round() as isize).clamp(0, sh as isize - 1) as usize;
        for x in 0..target_w {
            let sx = (((x as f32 + 0.5) * scale_x - 0.5).round() as isize).clamp(0, sw as isize - 1)
                as usize;
            labels.push(label.get(sy, sx));
        }
    }
    LabelMap::new(target_h, target_w, labels)
}

/// Nearest-neighbor resize for boolean masks.
pub fn resize_nearest_mask(mask: &PixelMask, target_h: usize, target_w: usize) -> Result<PixelMask> {
    let (sh, sw) = (mask.height(), mask.width());
    if (sh, sw) == (target_h, target_w) {
        return Ok(mask.clone());
    }
    let scale_y = sh as f32 / target_h as f32;
    let scale_x = sw as f32 / target_w as f32;
    let mut out = PixelMask::empty(target_h, target_w);
    for y in 0..target_h {
        let sy = (((y as f32 + 0.5) * scale_y - 0.5).round() as isize).clamp(0, sh as isize - 1) as usize;
        for x in 0..target_w {
            let sx = (((x as f32 + 0.5) * scale_x - 0.5).round() as isize).clamp(0, sw as isize - 1)
                as usize;
            out.set(y, x, mask.get(sy, sx));
        }
    }
    Ok(out)
}

/// Resizes to the dataset's unified frame size (480x720 at paper scale).
pub fn unify_size(image: &RgbImage, target_h: usize, target_w: usize) -> Result<RgbImage> {
    resize_bilinear(image, target_h, target_w)
}

/// Resizes to a translator input size, enforcing divisibility by 2^depth so
/// the encoder/decoder ladder lands on whole pixels.
pub fn resize_for_translator(
    image: &RgbImage,
    target: (usize, usize),
    depth: usize,
) -> Result<RgbImage> {
    let multiple = 1usize << depth;
    if target.0 % multiple != 0 || target.1 % multiple != 0 {
        return Err(Error::InvalidParam(format!(
            "translator input {}x{} must be a multiple of {multiple} (2^{depth}) in both dimensions",
            target.0, target.1
        )));
    }
    resize_bilinear(image, target.0, target.1)
}

/// Extracts a copy of the `[y0, y0+h) x [x0, x0+w)` window.
pub fn crop_image(image: &RgbImage, y0: usize, x0: usize, h: usize, w: usize) -> Result<RgbImage> {
    if y0 + h > image.height() || x0 + w > image.width() {
        return Err(Error::InvalidParam("crop window out of bounds".into()));
    }
    let mut data = Vec::with_capacity(h * w * 3);
    for y in 0..h {
        for x in 0..w {
            data.extend_from_slice(&image.pixel(y0 + y, x0 + x));
        }
    }
    RgbImage::new(h, w, data, image.range())
}

fn crop_label(label: &LabelMap, y0: usize, x0: usize, h: usize, w: usize) -> Result<LabelMap> {
    if y0 + h > label.height() || x0 + w > label.width() {
        return Err(Error::InvalidParam("crop window out of bounds".into()));
    }
    let mut labels = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            labels.push(label.get(y0 + y, x0 + x));
        }
    }
    LabelMap::new(h, w, labels)
}

/// Tiles an image (and its aligned label, when given) into `rows x cols`
/// disjoint square crops in row-major order. The input must measure exactly
/// `rows*size x cols*size`; reassembling the tiles is lossless.
pub fn crop_grid(
    image: &RgbImage,
    label: Option<&LabelMap>,
    rows: usize,
    cols: usize,
    size: usize,
) -> Result<Vec<(RgbImage, Option<LabelMap>)>> {
    if rows == 0 || cols == 0 || size == 0 {
        return Err(Error::InvalidParam("crop grid needs rows, cols, size >= 1".into()));
    }
    let (want_h, want_w) = (rows * size, cols * size);
    if image.height() != want_h || image.width() != want_w {
        return Err(Error::DimMismatch {
            context: "crop_grid",
            want_h,
            want_w,
            got_h: image.height(),
            got_w: image.width(),
        });
    }
    if let Some(l) = label {
        if l.height() != want_h || l.width() != want_w {
            return Err(Error::DimMismatch {
                context: "crop_grid label",
                want_h,
                want_w,
                got_h: l.height(),
                got_w: l.width(),
            });
        }
    }
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let img = crop_image(image, r * size, c * size, size, size)?;
            let lab = match label {
                Some(l) => Some(crop_label(l, r * size, c * size, size, size)?),
                None => None,
            };
            out.push((img, lab));
        }
    }
    Ok(out)
}

/// Inverse of [`crop_grid`]: stitches row-major tiles back into one raster.
pub fn reassemble_grid(crops: &[RgbImage], rows: usize, cols: usize) -> Result<RgbImage> {
    if crops.len() != rows * cols || crops.is_empty() {
        return Err(Error::InvalidParam(format!(
            "expected {} tiles, got {}",
            rows * cols,
            crops.len()
        )));
    }
    let size_h = crops[0].height();
    let size_w = crops[0].width();
    let range = crops[0].range();
    let mut data = vec![0f32; rows * size_h * cols * size_w * 3];
    let full_w = cols * size_w;
    for (i, crop) in crops.iter().enumerate() {
        if crop.height() != size_h || crop.width() != size_w {
            return Err(Error::InvalidParam("tiles must share dimensions".into()));
        }
        let (r, c) = (i / cols, i % cols);
        for y in 0..size_h {
            for x in 0..size_w {
                let p = crop.pixel(y, x);
                let idx = ((r * size_h + y) * full_w + (c * size_w + x)) * 3;
                data[idx..idx + 3].copy_from_slice(&p);
            }
        }
    }
    RgbImage::new(rows * size_h, full_w, data, range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::PixelRange;

    #[test]
    fn identity_resize_is_exact() {
        let img = RgbImage::filled(480, 720, [13, 77, 200]);
        let out = unify_size(&img, 480, 720).unwrap();
        assert_eq!(img, out);
    }

    #[test]
    fn constant_image_stays_constant() {
        let img = RgbImage::filled(960, 1440, [99, 45, 7]);
        let out = unify_size(&img, 480, 720).unwrap();
        assert_eq!(out.height(), 480);
        assert_eq!(out.width(), 720);
        assert!(out.data().chunks(3).all(|p| p == [99.0, 45.0, 7.0]));
    }

    #[test]
    fn checkerboard_matches_hand_computed_weights() {
        // 2x2 checkerboard of 0/255 upsampled to 4x4; weights from the
        // half-pixel-center convention, worked out by hand.
        let data = vec![
            0.0, 0.0, 0.0, 255.0, 255.0, 255.0, //
            255.0, 255.0, 255.0, 0.0, 0.0, 0.0,
        ];
        let img = RgbImage::new(2, 2, data, PixelRange::Byte).unwrap();
        let out = resize_bilinear(&img, 4, 4).unwrap();
        let expected = [
            [0.0, 63.75, 191.25, 255.0],
            [63.75, 95.625, 159.375, 191.25],
            [191.25, 159.375, 95.625, 63.75],
            [255.0, 191.25, 63.75, 0.0],
        ];
        for y in 0..4 {
            for x in 0..4 {
                let got = out.pixel(y, x)[0];
                assert!(
                    (got - expected[y][x]).abs() < 1e-3,
                    "({y},{x}): got {got}, want {}",
                    expected[y][x]
                );
            }
        }
    }

    #[test]
    fn translator_resize_divisibility() {
        let img = RgbImage::filled(480, 720, [1, 2, 3]);
        let out = resize_for_translator(&img, (512, 768), 8).unwrap();
        assert_eq!((out.height(), out.width()), (512, 768));
        let desk = resize_for_translator(&img, (128, 192), 6).unwrap();
        assert_eq!((desk.height(), desk.width()), (128, 192));
        assert!(desk.data().chunks(3).all(|p| p == [1.0, 2.0, 3.0]));
        let err = resize_for_translator(&img, (500, 700), 6).unwrap_err();
        assert!(err.to_string().contains("multiple of 64"), "{err}");
    }

    #[test]
    fn crop_grid_paper_geometry_and_reassembly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let data: Vec<f32> = (0..598 * 1196 * 3).map(|_| rng.gen_range(0..=255) as f32).collect();
        let img = RgbImage::new(598, 1196, data, PixelRange::Byte).unwrap();
        let crops = crop_grid(&img, None, 2, 4, 299).unwrap();
        assert_eq!(crops.len(), 8);
        for (c, _) in &crops {
            assert_eq!((c.height(), c.width()), (299, 299));
        }
        let tiles: Vec<RgbImage> = crops.into_iter().map(|(c, _)| c).collect();
        let back = reassemble_grid(&tiles, 2, 4).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn crop_grid_single_tile_identity() {
        let img = RgbImage::filled(7, 7, [5, 5, 5]);
        let crops = crop_grid(&img, None, 1, 1, 7).unwrap();
        assert_eq!(crops.len(), 1);
        assert_eq!(crops[0].0, img);
    }

    #[test]
    fn crop_grid_rejects_inexact_dims() {
        let img = RgbImage::filled(600, 1196, [0, 0, 0]);
        assert!(crop_grid(&img, None, 2, 4, 299).is_err());
    }

    #[test]
    fn nearest_label_resize_never_blends() {
        let label = LabelMap::new(2, 2, vec![0, 3, 3, 5]).unwrap();
        let up = resize_nearest_label(&label, 4, 4).unwrap();
        for v in up.labels() {
            assert!([0u8, 3, 5].contains(v));
        }
        assert_eq!(up.get(0, 0), 0);
        assert_eq!(up.get(0, 3), 3);
        assert_eq!(up.get(3, 3), 5);
    }
}
