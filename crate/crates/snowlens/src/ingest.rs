//! Dataset directory loading, deterministic train/test splitting, and
//! content-hash manifests.
//!
//! Layouts:
//!   paired    — `<root>/night/<id>.{png,jpg}` + `<root>/day/<id>.{png,jpg}`
//!   annotated — `<root>/images/<id>.png` + `<root>/masks/<id>.png`

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codec;
use crate::error::{Error, Result};
use crate::raster::{LabelMap, RgbImage};
use crate::taxonomy::ClassTaxonomy;

/// One night/day (or condition/target) image pair with a fixed camera angle.
#[derive(Debug, Clone)]
pub struct PairedSample {
    pub id: String,
    pub night: RgbImage,
    pub day: RgbImage,
}

/// One image with an aligned ground-truth label raster.
#[derive(Debug, Clone)]
pub struct AnnotatedSample {
    pub id: String,
    pub image: RgbImage,
    pub label: LabelMap,
}

/// Train/test split parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<SplitSpec> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidParam(format!(
                "train_fraction {train_fraction} must lie strictly between 0 and 1"
            )));
        }
        Ok(SplitSpec { train_fraction, seed })
    }

    /// Train-side size: round-half-up of `fraction * n`.
    pub fn train_count(&self, n: usize) -> usize {
        (self.train_fraction * n as f64 + 0.5).floor() as usize
    }
}

/// Deterministic index partition: seeded shuffle, then the first
/// `train_count` positions become the train side.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if n == 0 {
        return Err(Error::EmptyDataset("cannot split an empty sample list"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    order.shuffle(&mut rng);
    let k = spec.train_count(n);
    let test = order.split_off(k);
    Ok((order, test))
}

/// Partitions samples into (train, test) per [`split_indices`].
pub fn split<T>(samples: Vec<T>, spec: &SplitSpec) -> Result<(Vec<T>, Vec<T>)> {
    let (train_idx, test_idx) = split_indices(samples.len(), spec)?;
    let mut slots: Vec<Option<T>> = samples.into_iter().map(Some).collect();
    let take = |slots: &mut Vec<Option<T>>, idx: &[usize]| {
        idx.iter().map(|i| slots[*i].take().expect("index used once")).collect::<Vec<T>>()
    };
    let train = take(&mut slots, &train_idx);
    let test = take(&mut slots, &test_idx);
    Ok((train, test))
}

fn is_image_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
        Some("png") | Some("jpg") | Some("jpeg")
    )
}

/// Maps file stem -> path for every image file directly under `dir`.
fn list_images(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_file() && is_image_file(&path) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string(), path);
            }
        }
    }
    Ok(out)
}

/// Loads image pairs from `<root>/<cond_dir>/` and `<root>/<target_dir>/`,
/// matched by file stem and sorted by id.
pub fn load_pairs(root: &Path, cond_dir: &str, target_dir: &str) -> Result<Vec<PairedSample>> {
    let cond = list_images(&root.join(cond_dir))?;
    let target = list_images(&root.join(target_dir))?;

    let only_cond: Vec<&String> = cond.keys().filter(|k| !target.contains_key(*k)).collect();
    let only_target: Vec<&String> = target.keys().filter(|k| !cond.contains_key(*k)).collect();
    if !only_cond.is_empty() || !only_target.is_empty() {
        let mut parts = Vec::new();
        if !only_cond.is_empty() {
            parts.push(format!(
                "{} without {}: {}",
                cond_dir,
                target_dir,
                only_cond.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            ));
        }
        if !only_target.is_empty() {
            parts.push(format!(
                "{} without {}: {}",
                target_dir,
                cond_dir,
                only_target.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            ));
        }
        return Err(Error::OrphanSamples { root: root.to_path_buf(), description: parts.join("; ") });
    }
    if cond.is_empty() {
        return Err(Error::EmptyDataset("no image pairs found"));
    }

    let mut samples = Vec::with_capacity(cond.len());
    for (id, cond_path) in &cond {
        let night = RgbImage::load(cond_path)?;
        let day = RgbImage::load(&target[id])?;
        if night.height() != day.height() || night.width() != day.width() {
            return Err(Error::DimMismatch {
                context: "paired sample",
                want_h: night.height(),
                want_w: night.width(),
                got_h: day.height(),
                got_w: day.width(),
            });
        }
        samples.push(PairedSample { id: id.clone(), night, day });
    }
    Ok(samples)
}

/// Loads the standard paired layout: `night/` as condition, `day/` as target.
pub fn load_paired_dataset(root: &Path) -> Result<Vec<PairedSample>> {
    load_pairs(root, "night", "day")
}

/// Loads `<root>/images/` + `<root>/masks/`, decoding masks through the
/// label codec.
pub fn load_annotated_dataset(root: &Path, tax: &ClassTaxonomy) -> Result<Vec<AnnotatedSample>> {
    let images = list_images(&root.join("images"))?;
    let masks = list_images(&root.join("masks"))?;

    let only_img: Vec<&String> = images.keys().filter(|k| !masks.contains_key(*k)).collect();
    let only_mask: Vec<&String> = masks.keys().filter(|k| !images.contains_key(*k)).collect();
    if !only_img.is_empty() || !only_mask.is_empty() {
        let mut parts = Vec::new();
        if !only_img.is_empty() {
            parts.push(format!(
                "images without masks: {}",
                only_img.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            ));
        }
        if !only_mask.is_empty() {
            parts.push(format!(
                "masks without images: {}",
                only_mask.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            ));
        }
        return Err(Error::OrphanSamples { root: root.to_path_buf(), description: parts.join("; ") });
    }
    if images.is_empty() {
        return Err(Error::EmptyDataset("no annotated samples found"));
    }

    let mut samples = Vec::with_capacity(images.len());
    for (id, img_path) in &images {
        let image = RgbImage::load(img_path)?;
        let label = codec::load_label_mask(&masks[id], tax)?;
        if image.height() != label.height() || image.width() != label.width() {
            return Err(Error::DimMismatch {
                context: "annotated sample",
                want_h: image.height(),
                want_w: image.width(),
                got_h: label.height(),
                got_w: label.width(),
            });
        }
        samples.push(AnnotatedSample { id: id.clone(), image, label });
    }
    Ok(samples)
}

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(sha256_hex(&bytes))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    pub split: String,
    /// role name (e.g. "night", "day", "image", "mask") -> path relative to
    /// the dataset root.
    pub files: BTreeMap<String, String>,
    /// role name -> hex SHA-256 of the file bytes.
    pub sha256: BTreeMap<String, String>,
}

/// Split assignments plus per-file content hashes for a dataset tree.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DatasetManifest {
    pub seed: u64,
    pub train_fraction: f64,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<DatasetManifest> {
        let bytes = std::fs::read(path)?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    /// Re-hashes every referenced file and reports mismatches.
    pub fn verify(&self, root: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for entry in &self.entries {
            for (role, rel) in &entry.files {
                let path = root.join(rel);
                let want = &entry.sha256[role];
                let got = file_sha256(&path)?;
                if &got != want {
                    bad.push(format!("{} ({role}): hash mismatch", entry.id));
                }
            }
        }
        Ok(bad)
    }
}

/// Builds a manifest for a dataset tree: every id is assigned to exactly one
/// split, and each file's content hash is recorded.
pub fn build_manifest(
    root: &Path,
    roles: &[(&str, &str)], // (role name, subdirectory)
    spec: &SplitSpec,
) -> Result<DatasetManifest> {
    let mut per_role: Vec<(String, BTreeMap<String, PathBuf>)> = Vec::new();
    for (role, sub) in roles {
        per_role.push((role.to_string(), list_images(&root.join(sub))?));
    }
    let ids: Vec<String> = per_role[0].1.keys().cloned().collect();
    for (role, files) in &per_role[1..] {
        let missing: Vec<&String> = ids.iter().filter(|id| !files.contains_key(*id)).collect();
        if !missing.is_empty() {
            return Err(Error::OrphanSamples {
                root: root.to_path_buf(),
                description: format!(
                    "ids missing under role {role}: {}",
                    missing.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
                ),
            });
        }
    }
    let (train_idx, _test_idx) = split_indices(ids.len(), spec)?;
    let mut is_train = vec![false; ids.len()];
    for i in train_idx {
        is_train[i] = true;
    }

    let mut entries = Vec::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        let mut files = BTreeMap::new();
        let mut hashes = BTreeMap::new();
        for (role, listing) in &per_role {
            let path = &listing[id];
            let rel = path
                .strip_prefix(root)
                .unwrap_or(path)
                .to_string_lossy()
                .replace('\\', "/");
            files.insert(role.clone(), rel);
            hashes.insert(role.clone(), file_sha256(path)?);
        }
        entries.push(ManifestEntry {
            id: id.clone(),
            split: if is_train[i] { "train".into() } else { "test".into() },
            files,
            sha256: hashes,
        });
    }
    Ok(DatasetManifest { seed: spec.seed, train_fraction: spec.train_fraction, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::PixelRange;
    use proptest::prelude::*;

    #[test]
    fn split_matches_paper_arithmetic() {
        let spec = SplitSpec::new(0.9, 7).unwrap();
        let (train, test) = split_indices(1130, &spec).unwrap();
        assert_eq!((train.len(), test.len()), (1017, 113));

        let spec = SplitSpec::new(0.93, 7).unwrap();
        let (train, test) = split_indices(4000, &spec).unwrap();
        assert_eq!((train.len(), test.len()), (3720, 280));
    }

    #[test]
    fn split_is_deterministic_in_seed() {
        let spec = SplitSpec::new(0.8, 1234).unwrap();
        let a = split_indices(57, &spec).unwrap();
        let b = split_indices(57, &spec).unwrap();
        assert_eq!(a, b);
        let other = SplitSpec::new(0.8, 1235).unwrap();
        let c = split_indices(57, &other).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn split_rejects_empty_input() {
        let spec = SplitSpec::new(0.9, 0).unwrap();
        assert!(split_indices(0, &spec).is_err());
        assert!(split::<u32>(Vec::new(), &spec).is_err());
    }

    #[test]
    fn split_spec_validates_fraction() {
        assert!(SplitSpec::new(0.0, 0).is_err());
        assert!(SplitSpec::new(1.0, 0).is_err());
        assert!(SplitSpec::new(0.5, 0).is_ok());
    }

    proptest! {
        #[test]
        fn split_partitions_exactly(n in 1usize..300, seed in any::<u64>()) {
            let spec = SplitSpec::new(0.9, seed).unwrap();
            let samples: Vec<usize> = (0..n).collect();
            let (train, test) = split(samples, &spec).unwrap();
            prop_assert_eq!(train.len(), spec.train_count(n));
            prop_assert_eq!(train.len() + test.len(), n);
            let mut all: Vec<usize> = train.iter().chain(test.iter()).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }

    fn write_png(path: &Path, h: usize, w: usize, rgb: [u8; 3]) {
        RgbImage::filled(h, w, rgb).save_png(path).unwrap();
    }

    #[test]
    fn paired_loader_sorts_and_matches() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("night")).unwrap();
        std::fs::create_dir_all(dir.path().join("day")).unwrap();
        for id in ["c", "a", "b"] {
            write_png(&dir.path().join("night").join(format!("{id}.png")), 4, 6, [10, 10, 10]);
            write_png(&dir.path().join("day").join(format!("{id}.png")), 4, 6, [200, 200, 200]);
        }
        let samples = load_paired_dataset(dir.path()).unwrap();
        let ids: Vec<&str> = samples.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn paired_loader_names_orphans() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("night")).unwrap();
        std::fs::create_dir_all(dir.path().join("day")).unwrap();
        write_png(&dir.path().join("night").join("x.png"), 2, 2, [0, 0, 0]);
        match load_paired_dataset(dir.path()) {
            Err(Error::OrphanSamples { description, .. }) => {
                assert!(description.contains("x"), "{description}");
            }
            other => panic!("expected orphan error, got {other:?}"),
        }
    }

    #[test]
    fn paired_loader_rejects_dim_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("night")).unwrap();
        std::fs::create_dir_all(dir.path().join("day")).unwrap();
        write_png(&dir.path().join("night").join("a.png"), 2, 2, [0, 0, 0]);
        write_png(&dir.path().join("day").join("a.png"), 2, 3, [0, 0, 0]);
        assert!(matches!(load_paired_dataset(dir.path()), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn manifest_round_trip_and_verify() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("night")).unwrap();
        std::fs::create_dir_all(dir.path().join("day")).unwrap();
        for i in 0..8 {
            write_png(&dir.path().join("night").join(format!("s{i}.png")), 3, 3, [i as u8, 0, 0]);
            write_png(&dir.path().join("day").join(format!("s{i}.png")), 3, 3, [0, i as u8, 0]);
        }
        let spec = SplitSpec::new(0.75, 11).unwrap();
        let manifest =
            build_manifest(dir.path(), &[("night", "night"), ("day", "day")], &spec).unwrap();
        assert_eq!(manifest.entries.len(), 8);
        assert_eq!(manifest.entries.iter().filter(|e| e.split == "train").count(), 6);
        assert!(manifest.verify(dir.path()).unwrap().is_empty());

        let path = dir.path().join("manifest.json");
        manifest.save(&path).unwrap();
        let loaded = DatasetManifest::load(&path).unwrap();
        assert_eq!(manifest, loaded);

        // Tamper with one file: verify must flag it.
        write_png(&dir.path().join("night").join("s0.png"), 3, 3, [99, 99, 99]);
        let bad = manifest.verify(dir.path()).unwrap();
        assert_eq!(bad.len(), 1);
        assert!(bad[0].contains("s0"));
    }

    #[test]
    fn byte_range_survives_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let data: Vec<f32> = (0..4 * 5 * 3).map(|i| (i * 7 % 256) as f32).collect();
        let img = RgbImage::new(4, 5, data, PixelRange::Byte).unwrap();
        img.save_png(&path).unwrap();
        let back = RgbImage::load(&path).unwrap();
        assert_eq!(img, back);
    }
}
