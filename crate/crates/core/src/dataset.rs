//! In-memory samples: image, diagnostic label, anatomy masks and optionally
//! the tensors an external model exported for it.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::cam::{LayerActivations, LayerGradients};
use crate::error::{Error, Result};
use crate::focus::AnatomyMask;
use crate::tensor::Tensor;

/// Tensors captured from an external model for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Precomputed {
    pub acts: LayerActivations,
    /// Logit gradient for the class the exporter targeted.
    pub grads: Option<LayerGradients>,
    /// Probability of class 1.
    pub score: f32,
    /// One Score-CAM masked-input score per channel.
    pub scorecam_scores: Option<Vec<f32>>,
}

impl Precomputed {
    pub fn validate(&self) -> Result<()> {
        if let Some(g) = &self.grads {
            if g.maps().dims() != self.acts.maps().dims() {
                return Err(Error::Dimension(format!(
                    "gradients {:?} do not match activations {:?}",
                    g.maps().dims(),
                    self.acts.maps().dims()
                )));
            }
        }
        if let Some(s) = &self.scorecam_scores {
            if s.len() != self.acts.channels() {
                return Err(Error::Dimension(format!(
                    "{} Score-CAM scores for {} channels",
                    s.len(),
                    self.acts.channels()
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::Parameter(format!(
                "class probability {} outside [0, 1]",
                self.score
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub id: String,
    /// `true` = case (disease present).
    pub label: bool,
    pub image: Tensor,
    pub masks: BTreeMap<String, AnatomyMask>,
    pub precomputed: Option<Precomputed>,
}

impl SampleRecord {
    pub fn validate(&self) -> Result<()> {
        let (h, w) = self.image.spatial()?;
        for (name, mask) in &self.masks {
            if mask.mask().shape() != (h, w) {
                return Err(Error::Dimension(format!(
                    "sample '{}': mask '{name}' is {:?} but image is {:?}",
                    self.id,
                    mask.mask().shape(),
                    self.image.dims()
                )));
            }
        }
        if let Some(p) = &self.precomputed {
            p.validate()
                .map_err(|e| e.context(format!("sample '{}'", self.id)))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    /// Name reported for the model that produced precomputed tensors.
    pub model: Option<String>,
    pub records: Vec<SampleRecord>,
}

impl Dataset {
    pub fn new(records: Vec<SampleRecord>) -> Result<Self> {
        let ds = Self {
            model: None,
            records,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::Parameter(format!("duplicate sample id '{}'", r.id)));
            }
            r.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `(cases, controls)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let cases = self.records.iter().filter(|r| r.label).count();
        (cases, self.records.len() - cases)
    }

    pub fn anatomies(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .records
            .iter()
            .flat_map(|r| r.masks.keys().cloned())
            .collect();
        names.sort();
        names.dedup();
        names
    }

    pub fn summary(&self) -> DatasetSummary {
        let (cases, controls) = self.class_counts();
        DatasetSummary {
            samples: self.records.len(),
            cases,
            controls,
            anatomies: self.anatomies(),
            precomputed: self.records.iter().filter(|r| r.precomputed.is_some()).count(),
        }
    }

    pub fn get(&self, id: &str) -> Option<&SampleRecord> {
        self.records.iter().find(|r| r.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSummary {
    pub samples: usize,
    pub cases: usize,
    pub controls: usize,
    pub anatomies: Vec<String>,
    pub precomputed: usize,
}

impl fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} samples: {} case / {} control",
            self.samples, self.cases, self.controls
        )?;
        if !self.anatomies.is_empty() {
            write!(f, "; anatomies: {}", self.anatomies.join(", "))?;
        }
        if self.precomputed > 0 {
            write!(f, "; {} with exported model tensors", self.precomputed)?;
        }
        Ok(())
    }
}
