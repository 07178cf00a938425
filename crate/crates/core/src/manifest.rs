//! JSON dataset manifests.
//!
//! ```json
//! {
//!   "model": "vgg11",
//!   "samples": [
//!     {
//!       "id": "origa-001",
//!       "label": 1,
//!       "bundle": "bundles/origa-001.camb",
//!       "image": "image",
//!       "masks": {
//!         "optic_cup": "mask_optic_cup",
//!         "optic_disk": { "bundle": "masks/origa-001.camb", "entry": "disk" }
//!       },
//!       "precomputed": {}
//!     }
//!   ]
//! }
//! ```
//!
//! A tensor reference is either an entry name inside the sample's `bundle`
//! or an explicit `{ "bundle", "entry" }` pair. Bundle paths are relative to
//! the manifest's directory. `precomputed` marks a sample carrying exported
//! model tensors; its fields name the entries and default to `acts`, `grads`,
//! `score` and `scorecam_scores`. `grads` and `scorecam_scores` may be absent
//! from the bundle.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bundle::{read_bundle, Bundle};
use crate::cam::{LayerActivations, LayerGradients};
use crate::dataset::{Dataset, Precomputed, SampleRecord};
use crate::error::{Error, Result};
use crate::focus::AnatomyMask;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TensorRef {
    Entry(String),
    External { bundle: PathBuf, entry: String },
}

fn default_acts() -> String {
    "acts".into()
}
fn default_grads() -> String {
    "grads".into()
}
fn default_score() -> String {
    "score".into()
}
fn default_scorecam() -> String {
    "scorecam_scores".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecomputedRefs {
    #[serde(default = "default_acts")]
    pub acts: String,
    #[serde(default = "default_grads")]
    pub grads: String,
    #[serde(default = "default_score")]
    pub score: String,
    #[serde(default = "default_scorecam")]
    pub scorecam_scores: String,
}

impl Default for PrecomputedRefs {
    fn default() -> Self {
        Self {
            acts: default_acts(),
            grads: default_grads(),
            score: default_score(),
            scorecam_scores: default_scorecam(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleEntry {
    pub id: String,
    pub label: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<PathBuf>,
    pub image: TensorRef,
    #[serde(default)]
    pub masks: BTreeMap<String, TensorRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precomputed: Option<PrecomputedRefs>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub samples: Vec<SampleEntry>,
}

/// Parses manifest text, reporting the failing field path with line and column.
pub fn parse_manifest(text: &str, path: &Path) -> Result<ManifestFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        Error::Manifest {
            path: path.to_path_buf(),
            message: format!(
                "line {} column {}, field '{}': {}",
                inner.line(),
                inner.column(),
                field,
                inner
            ),
        }
    })
}

struct BundleCache {
    root: PathBuf,
    manifest: PathBuf,
    loaded: HashMap<PathBuf, Bundle>,
}

impl BundleCache {
    fn bundle(&mut self, rel: &Path) -> Result<&Bundle> {
        let full = self.root.join(rel);
        if !self.loaded.contains_key(&full) {
            let b = read_bundle(&full).map_err(|e| Error::Manifest {
                path: self.manifest.clone(),
                message: format!("bundle {}: {e}", full.display()),
            })?;
            self.loaded.insert(full.clone(), b);
        }
        Ok(&self.loaded[&full])
    }

    fn resolve(&mut self, sample: &SampleEntry, r: &TensorRef, field: &str) -> Result<Tensor> {
        let (bundle, entry) = match r {
            TensorRef::Entry(entry) => {
                let bundle = sample.bundle.as_ref().ok_or_else(|| Error::Manifest {
                    path: self.manifest.clone(),
                    message: format!(
                        "sample '{}' field '{field}' names entry '{entry}' but the sample has no bundle",
                        sample.id
                    ),
                })?;
                (bundle.clone(), entry)
            }
            TensorRef::External { bundle, entry } => (bundle.clone(), entry),
        };
        self.optional(&bundle, entry)?.ok_or_else(|| Error::Manifest {
            path: self.manifest.clone(),
            message: format!(
                "sample '{}' field '{field}': entry '{entry}' not found in {}",
                sample.id,
                bundle.display()
            ),
        })
    }

    fn optional(&mut self, bundle: &Path, entry: &str) -> Result<Option<Tensor>> {
        Ok(self.bundle(bundle)?.get(entry).cloned())
    }
}

fn resolve_precomputed(
    cache: &mut BundleCache,
    sample: &SampleEntry,
    refs: &PrecomputedRefs,
) -> Result<Precomputed> {
    let bundle = sample.bundle.clone().ok_or_else(|| Error::Manifest {
        path: cache.manifest.clone(),
        message: format!("sample '{}' has precomputed tensors but no bundle", sample.id),
    })?;
    let required = |cache: &mut BundleCache, entry: &str| -> Result<Tensor> {
        cache.optional(&bundle, entry)?.ok_or_else(|| Error::Manifest {
            path: cache.manifest.clone(),
            message: format!(
                "sample '{}': precomputed entry '{entry}' missing from {}",
                sample.id,
                bundle.display()
            ),
        })
    };
    let acts = LayerActivations::new(required(cache, &refs.acts)?)?;
    let grads = cache
        .optional(&bundle, &refs.grads)?
        .map(LayerGradients::new)
        .transpose()?;
    let score_t = required(cache, &refs.score)?;
    if score_t.len() != 1 {
        return Err(Error::Dimension(format!(
            "sample '{}': score entry must hold one value, has {:?}",
            sample.id,
            score_t.dims()
        )));
    }
    let scorecam_scores = cache
        .optional(&bundle, &refs.scorecam_scores)?
        .map(|t| t.into_data());
    Ok(Precomputed {
        acts,
        grads,
        score: score_t.data()[0],
        scorecam_scores,
    })
}

/// Reads and validates a manifest, loading every referenced tensor.
///
/// An empty sample list is accepted with a warning.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file = parse_manifest(&text, path)?;
    let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut cache = BundleCache {
        root,
        manifest: path.to_path_buf(),
        loaded: HashMap::new(),
    };
    if file.samples.is_empty() {
        log::warn!("manifest {} lists no samples", path.display());
    }
    let mut seen = HashSet::new();
    let mut records = Vec::with_capacity(file.samples.len());
    for sample in &file.samples {
        let ctx = |e: Error| e.context(format!("manifest {} sample '{}'", path.display(), sample.id));
        if !seen.insert(sample.id.clone()) {
            return Err(Error::Manifest {
                path: path.to_path_buf(),
                message: format!("duplicate sample id '{}'", sample.id),
            });
        }
        let label = match sample.label {
            0 => false,
            1 => true,
            other => {
                return Err(Error::Manifest {
                    path: path.to_path_buf(),
                    message: format!("sample '{}' has label {other}, expected 0 or 1", sample.id),
                })
            }
        };
        let image = cache.resolve(sample, &sample.image, "image")?;
        let mut masks = BTreeMap::new();
        for (name, r) in &sample.masks {
            let t = cache.resolve(sample, r, &format!("masks.{name}"))?;
            masks.insert(name.clone(), AnatomyMask::from_tensor(&t).map_err(ctx)?);
        }
        let precomputed = sample
            .precomputed
            .as_ref()
            .map(|refs| resolve_precomputed(&mut cache, sample, refs))
            .transpose()
            .map_err(ctx)?;
        let record = SampleRecord {
            id: sample.id.clone(),
            label,
            image,
            masks,
            precomputed,
        };
        record.validate().map_err(ctx)?;
        records.push(record);
    }
    Ok(Dataset {
        model: file.model,
        records,
    })
}

pub fn write_manifest(path: impl AsRef<Path>, manifest: &ManifestFile) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Config(format!("cannot serialize manifest: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
