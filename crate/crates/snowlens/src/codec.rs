//! Lossless label-mask files: indexed-palette PNG with palette slot ==
//! class index. Decoding also accepts plain RGB/RGBA PNGs whose colors all
//! belong to the taxonomy palette.

use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::LabelMap;
use crate::taxonomy::{ClassTaxonomy, NUM_CLASSES};

/// Encodes a label map as an 8-bit indexed-palette PNG.
pub fn encode_label_mask(label: &LabelMap, tax: &ClassTaxonomy) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder =
            png::Encoder::new(&mut out, label.width() as u32, label.height() as u32);
        encoder.set_color(png::ColorType::Indexed);
        encoder.set_depth(png::BitDepth::Eight);
        let mut palette = Vec::with_capacity(NUM_CLASSES * 3);
        for entry in tax.entries() {
            palette.extend_from_slice(&entry.color);
        }
        encoder.set_palette(palette);
        let mut writer = encoder.write_header().map_err(|e| Error::Png(e.to_string()))?;
        writer
            .write_image_data(label.labels())
            .map_err(|e| Error::Png(e.to_string()))?;
    }
    Ok(out)
}

/// Decodes a mask file back into a label map.
///
/// Indexed PNGs map palette slots to classes by palette color; RGB/RGBA PNGs
/// map each pixel color. Any color outside the taxonomy fails with the
/// offending RGB and pixel coordinates.
pub fn decode_label_mask(bytes: &[u8], tax: &ClassTaxonomy) -> Result<LabelMap> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::empty());
    let mut reader = decoder.read_info().map_err(|e| Error::Png(e.to_string()))?;
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(|e| Error::Png(e.to_string()))?;
    let (w, h) = (info.width as usize, info.height as usize);
    buf.truncate(info.buffer_size());

    match info.color_type {
        png::ColorType::Indexed => {
            if info.bit_depth != png::BitDepth::Eight {
                return Err(Error::Png(format!(
                    "unsupported indexed bit depth {:?}, expected 8",
                    info.bit_depth
                )));
            }
            let palette = reader
                .info()
                .palette
                .as_ref()
                .ok_or_else(|| Error::Png("indexed PNG without palette".into()))?
                .clone();
            // Slot -> class, resolved by palette color; unknown slots only
            // fail if a pixel actually references them.
            let slots: Vec<Option<u8>> = palette
                .chunks(3)
                .map(|c| tax.class_of_color([c[0], c[1], c[2]]))
                .collect();
            let mut labels = Vec::with_capacity(w * h);
            for (p, slot) in buf.iter().take(w * h).enumerate() {
                match slots.get(*slot as usize).copied().flatten() {
                    Some(cls) => labels.push(cls),
                    None => {
                        let rgb = palette
                            .chunks(3)
                            .nth(*slot as usize)
                            .map(|c| [c[0], c[1], c[2]])
                            .unwrap_or([0, 0, 0]);
                        return Err(Error::UnknownColor {
                            r: rgb[0],
                            g: rgb[1],
                            b: rgb[2],
                            x: p % w,
                            y: p / w,
                        });
                    }
                }
            }
            LabelMap::new(h, w, labels)
        }
        png::ColorType::Rgb | png::ColorType::Rgba => {
            if info.bit_depth != png::BitDepth::Eight {
                return Err(Error::Png(format!(
                    "unsupported RGB bit depth {:?}, expected 8",
                    info.bit_depth
                )));
            }
            let step = if info.color_type == png::ColorType::Rgb { 3 } else { 4 };
            let mut labels = Vec::with_capacity(w * h);
            for p in 0..w * h {
                let i = p * step;
                let rgb = [buf[i], buf[i + 1], buf[i + 2]];
                match tax.class_of_color(rgb) {
                    Some(cls) => labels.push(cls),
                    None => {
                        return Err(Error::UnknownColor {
                            r: rgb[0],
                            g: rgb[1],
                            b: rgb[2],
                            x: p % w,
                            y: p / w,
                        })
                    }
                }
            }
            LabelMap::new(h, w, labels)
        }
        other => Err(Error::Png(format!("unsupported mask color type {other:?}"))),
    }
}

/// Convenience: encode to a file on disk.
pub fn save_label_mask(label: &LabelMap, tax: &ClassTaxonomy, path: &Path) -> Result<()> {
    let bytes = encode_label_mask(label, tax)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Convenience: decode from a file on disk.
pub fn load_label_mask(path: &Path, tax: &ClassTaxonomy) -> Result<LabelMap> {
    let bytes = std::fs::read(path)?;
    decode_label_mask(&bytes, tax)
}
