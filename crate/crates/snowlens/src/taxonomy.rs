//! The fixed six-class road-scene taxonomy shared by every pipeline stage.
//!
//! Class order and indices are canonical: road, pole-sign, green, snow, sky,
//! background. The palette is the artifact's codec convention; mask files
//! store palette index == class index.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of classes in the taxonomy.
pub const NUM_CLASSES: usize = 6;

/// One scene class, in canonical index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Class {
    Road = 0,
    PoleSign = 1,
    Green = 2,
    Snow = 3,
    Sky = 4,
    Background = 5,
}

impl Class {
    pub const ALL: [Class; NUM_CLASSES] = [
        Class::Road,
        Class::PoleSign,
        Class::Green,
        Class::Snow,
        Class::Sky,
        Class::Background,
    ];

    pub fn from_index(idx: u8) -> Result<Class> {
        match idx {
            0 => Ok(Class::Road),
            1 => Ok(Class::PoleSign),
            2 => Ok(Class::Green),
            3 => Ok(Class::Snow),
            4 => Ok(Class::Sky),
            5 => Ok(Class::Background),
            other => Err(Error::InvalidClass(other)),
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Class::Road => "road",
            Class::PoleSign => "pole-sign",
            Class::Green => "green",
            Class::Snow => "snow",
            Class::Sky => "sky",
            Class::Background => "background",
        }
    }

    /// Palette color used by the label-mask codec and overlays.
    pub fn color(self) -> [u8; 3] {
        match self {
            Class::Road => [128, 64, 128],
            Class::PoleSign => [220, 220, 0],
            Class::Green => [107, 142, 35],
            Class::Snow => [255, 255, 255],
            Class::Sky => [70, 130, 180],
            Class::Background => [0, 0, 0],
        }
    }

    pub fn from_name(name: &str) -> Option<Class> {
        Class::ALL.iter().copied().find(|c| c.name() == name)
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Serializable form of one taxonomy entry.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ClassEntry {
    pub index: u8,
    pub name: String,
    pub color: [u8; 3],
}

/// The ordered six-class taxonomy.
///
/// Constructed only through [`ClassTaxonomy::canonical`] or by loading a file
/// that matches the canonical invariants, so holders can rely on contiguous
/// indices and unique names/colors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTaxonomy {
    entries: Vec<ClassEntry>,
}

impl ClassTaxonomy {
    pub fn canonical() -> ClassTaxonomy {
        ClassTaxonomy {
            entries: Class::ALL
                .iter()
                .map(|c| ClassEntry {
                    index: c.index(),
                    name: c.name().to_string(),
                    color: c.color(),
                })
                .collect(),
        }
    }

    pub fn entries(&self) -> &[ClassEntry] {
        &self.entries
    }

    pub fn color_of(&self, idx: u8) -> Result<[u8; 3]> {
        self.entries
            .get(idx as usize)
            .map(|e| e.color)
            .ok_or(Error::InvalidClass(idx))
    }

    /// Looks up the class index of an RGB color, if it is in the palette.
    pub fn class_of_color(&self, rgb: [u8; 3]) -> Option<u8> {
        self.entries.iter().find(|e| e.color == rgb).map(|e| e.index)
    }

    fn validate(entries: &[ClassEntry]) -> Result<()> {
        if entries.len() != NUM_CLASSES {
            return Err(Error::InvalidParam(format!(
                "taxonomy must have exactly {NUM_CLASSES} classes, got {}",
                entries.len()
            )));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.index as usize != i {
                return Err(Error::InvalidParam(format!(
                    "taxonomy indices must be contiguous 0..{NUM_CLASSES}; slot {i} has index {}",
                    e.index
                )));
            }
        }
        for i in 0..entries.len() {
            for j in (i + 1)..entries.len() {
                if entries[i].name == entries[j].name {
                    return Err(Error::InvalidParam(format!(
                        "duplicate class name {:?}",
                        entries[i].name
                    )));
                }
                if entries[i].color == entries[j].color {
                    return Err(Error::InvalidParam(format!(
                        "duplicate class color {:?}",
                        entries[i].color
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_entries(entries: Vec<ClassEntry>) -> Result<ClassTaxonomy> {
        Self::validate(&entries)?;
        Ok(ClassTaxonomy { entries })
    }

    /// Writes the taxonomy as a JSON list of `{index, name, color}` records.
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.entries)?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ClassTaxonomy> {
        let bytes = std::fs::read(path)?;
        let entries: Vec<ClassEntry> = serde_json::from_slice(&bytes)?;
        ClassTaxonomy::from_entries(entries)
    }
}

impl Default for ClassTaxonomy {
    fn default() -> Self {
        ClassTaxonomy::canonical()
    }
}
