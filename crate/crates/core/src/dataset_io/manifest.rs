//! JSON dataset manifests.
//!
//! ```json
//! {"root": "data", "entries": [{"id": "p01", "image": "p01.pgm", "label": "p01_label.pgm"}]}
//! ```
//!
//! Entry paths are relative to `root`; a relative `root` is resolved
//! against the directory containing the manifest file.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::codec::{load_image, load_label_map};
use super::image::{GrayImage, LabelMap};
use crate::error::{Error, Result};
use crate::fsutil::{read_file, write_atomic};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub image: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub root: String,
    pub entries: Vec<ManifestEntry>,
}

/// One image with its ground-truth labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub id: String,
    pub image: GrayImage,
    pub labels: LabelMap,
}

impl LabeledImage {
    pub fn new(id: impl Into<String>, image: GrayImage, labels: LabelMap) -> Result<Self> {
        if image.dims() != labels.dims() {
            return Err(Error::DimensionMismatch {
                expected: image.dims(),
                found: labels.dims(),
            });
        }
        Ok(LabeledImage {
            id: id.into(),
            image,
            labels,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub items: Vec<LabeledImage>,
}

impl Dataset {
    pub fn from_items(items: Vec<LabeledImage>) -> Result<Self> {
        let entries = items
            .iter()
            .map(|it| ManifestEntry {
                id: it.id.clone(),
                image: String::new(),
                label: String::new(),
            })
            .collect();
        let manifest = DatasetManifest {
            root: String::new(),
            entries,
        };
        check_unique_ids(&manifest)?;
        Ok(Dataset { manifest, items })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl DatasetManifest {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }

    fn resolve_root(&self, manifest_path: &Path) -> PathBuf {
        let root = Path::new(&self.root);
        if root.is_absolute() {
            root.to_path_buf()
        } else {
            manifest_path
                .parent()
                .unwrap_or_else(|| Path::new(""))
                .join(root)
        }
    }
}

fn check_unique_ids(manifest: &DatasetManifest) -> Result<()> {
    let mut seen = HashSet::new();
    for e in &manifest.entries {
        if !seen.insert(e.id.as_str()) {
            return Err(Error::DuplicateId(e.id.clone()));
        }
    }
    Ok(())
}

/// Reads a manifest and loads every image/label pair it references.
pub fn load_manifest(path: &Path) -> Result<Dataset> {
    let manifest = DatasetManifest::parse(&read_file(path)?)?;
    if manifest.entries.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "manifest {} lists no entries",
            path.display()
        )));
    }
    check_unique_ids(&manifest)?;
    let root = manifest.resolve_root(path);
    let items = manifest
        .entries
        .iter()
        .map(|e| load_entry(&root, e).map_err(|err| err.in_entry(&e.id)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { manifest, items })
}

fn load_entry(root: &Path, entry: &ManifestEntry) -> Result<LabeledImage> {
    let image = load_image(&root.join(&entry.image))?;
    let labels = load_label_map(&root.join(&entry.label))?;
    LabeledImage::new(entry.id.clone(), image, labels)
}
