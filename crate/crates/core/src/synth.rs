//! Seeded synthetic lesion dataset. Class 1 images carry a bright disk whose
//! pixels form the `disk` anatomy mask; class 0 images are background only.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::bundle::{write_bundle, Bundle};
use crate::dataset::{Dataset, SampleRecord};
use crate::error::{Error, Result};
use crate::focus::{AnatomyMask, BinaryMask};
use crate::manifest::{write_manifest, ManifestFile, SampleEntry, TensorRef};
use crate::rng;
use crate::tensor::Tensor;

pub const ANATOMY: &str = "disk";

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub samples: usize,
    /// Image side; must be divisible by 4 for the mini-CNN.
    pub size: usize,
    pub positive_fraction: f64,
    pub background: f32,
    /// Intensity added inside the disk.
    pub contrast: f32,
    /// Half-width of the uniform pixel noise.
    pub noise: f32,
    pub radius: (f64, f64),
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            samples: 200,
            size: 56,
            positive_fraction: 0.5,
            background: 0.2,
            contrast: 0.6,
            noise: 0.15,
            radius: (5.0, 9.0),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.size < 4 || !self.size.is_multiple_of(4) {
            return Err(Error::Config(format!(
                "image size {} must be a positive multiple of 4",
                self.size
            )));
        }
        if !(0.0..=1.0).contains(&self.positive_fraction) {
            return Err(Error::Config(format!(
                "positive fraction {} outside [0, 1]",
                self.positive_fraction
            )));
        }
        let (lo, hi) = self.radius;
        if !(lo > 0.0 && lo <= hi && 2.0 * hi < self.size as f64) {
            return Err(Error::Config(format!(
                "disk radius range {lo}..{hi} does not fit a {} image",
                self.size
            )));
        }
        if !(self.noise >= 0.0) {
            return Err(Error::Config("noise must be >= 0".into()));
        }
        Ok(())
    }
}

fn disk_mask(size: usize, cy: f64, cx: f64, r: f64) -> Result<BinaryMask> {
    let bits = (0..size * size)
        .map(|i| {
            let (y, x) = ((i / size) as f64, (i % size) as f64);
            (y - cy).powi(2) + (x - cx).powi(2) <= r * r
        })
        .collect();
    BinaryMask::new(size, size, bits)
}

/// Draws a dataset. Labels are shuffled so classes interleave in id order.
pub fn generate(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut stream = rng::seeded(cfg.seed);
    let positives = (cfg.samples as f64 * cfg.positive_fraction).round() as usize;
    let mut labels: Vec<bool> = (0..cfg.samples).map(|i| i < positives).collect();
    labels.shuffle(&mut stream);

    let n = cfg.size;
    let mut records = Vec::with_capacity(cfg.samples);
    for (i, &label) in labels.iter().enumerate() {
        let mut pixels: Vec<f32> = (0..n * n)
            .map(|_| cfg.background + cfg.noise * stream.random_range(-1.0f32..=1.0))
            .collect();
        let mut masks = BTreeMap::new();
        if label {
            let r = stream.random_range(cfg.radius.0..=cfg.radius.1);
            let cy = stream.random_range(r..=n as f64 - 1.0 - r);
            let cx = stream.random_range(r..=n as f64 - 1.0 - r);
            let mask = disk_mask(n, cy, cx, r)?;
            for (p, &inside) in pixels.iter_mut().zip(mask.bits()) {
                if inside {
                    *p += cfg.contrast;
                }
            }
            masks.insert(ANATOMY.to_string(), AnatomyMask::from_mask(mask));
        }
        records.push(SampleRecord {
            id: format!("synth-{i:04}"),
            label,
            image: Tensor::new(vec![1, n, n], pixels)?,
            masks,
            precomputed: None,
        });
    }
    let mut ds = Dataset::new(records)?;
    ds.model = Some("mini-cnn".into());
    Ok(ds)
}

/// Writes one bundle per sample under `dir/bundles` and `dir/manifest.json`;
/// returns the manifest path.
pub fn write_dataset(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let bundles = dir.join("bundles");
    fs::create_dir_all(&bundles).map_err(|e| Error::io(&bundles, e))?;
    let mut samples = Vec::with_capacity(dataset.len());
    for r in &dataset.records {
        let mut bundle = Bundle::new();
        bundle.insert("image", r.image.clone())?;
        let mut masks = BTreeMap::new();
        for (name, mask) in &r.masks {
            let entry = format!("mask_{name}");
            bundle.insert(entry.clone(), mask.mask().to_tensor())?;
            masks.insert(name.clone(), TensorRef::Entry(entry));
        }
        let rel = PathBuf::from("bundles").join(format!("{}.camb", r.id));
        write_bundle(dir.join(&rel), &bundle)?;
        samples.push(SampleEntry {
            id: r.id.clone(),
            label: u8::from(r.label),
            bundle: Some(rel),
            image: TensorRef::Entry("image".into()),
            masks,
            precomputed: None,
        });
    }
    let path = dir.join("manifest.json");
    write_manifest(
        &path,
        &ManifestFile {
            model: dataset.model.clone(),
            samples,
        },
    )?;
    Ok(path)
}
