//! Focus regions (top-fraction saliency pixels) and their overlap with
//! anatomy masks.

use crate::cam::SaliencyMap;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Fraction of pixels kept in a focus region unless configured otherwise.
pub const DEFAULT_FRACTION: f64 = 0.05;

/// Binary pixel mask in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if height * width != bits.len() || height == 0 || width == 0 {
            return Err(Error::Dimension(format!(
                "{height}x{width} mask cannot hold {} pixels",
                bits.len()
            )));
        }
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn get(&self, h: usize, w: usize) -> bool {
        self.bits[h * self.width + w]
    }

    pub fn complement(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn intersection_count(&self, other: &BinaryMask) -> Result<usize> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension(format!(
                "mask shapes {:?} and {:?} differ",
                self.shape(),
                other.shape()
            )));
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| **a && **b)
            .count())
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::new(
            vec![self.height, self.width],
            self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )
        .expect("mask dims are valid")
    }
}

/// Expert annotation of one anatomical structure, 1 = pixel belongs to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnatomyMask(BinaryMask);

impl AnatomyMask {
    /// Accepts a 2-D tensor (or a `1 × H × W` one) whose values are all 0 or 1.
    pub fn from_tensor(t: &Tensor) -> Result<Self> {
        let (h, w) = match t.dims() {
            [h, w] | [1, h, w] => (*h, *w),
            other => {
                return Err(Error::Dimension(format!(
                    "anatomy mask must be H x W, got {other:?}"
                )))
            }
        };
        let bits = t
            .data()
            .iter()
            .map(|&v| {
                if v == 1.0 {
                    Ok(true)
                } else if v == 0.0 {
                    Ok(false)
                } else {
                    Err(Error::Parameter(format!("anatomy mask value {v} is not 0 or 1")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(BinaryMask::new(h, w, bits)?))
    }

    pub fn from_mask(mask: BinaryMask) -> Self {
        Self(mask)
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.0
    }

    pub fn complement(&self) -> Self {
        Self(self.0.complement())
    }
}

/// The `count` most salient pixels of an image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FocusRegion {
    mask: BinaryMask,
    count: usize,
}

impl FocusRegion {
    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Number of pixels a fraction `q` selects from `total`, rounded down.
pub fn pixel_budget(q: f64, total: usize) -> Result<usize> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Parameter(format!("fraction {q} outside (0, 1]")));
    }
    // The small slack keeps products like 0.29 * 100 from flooring to 28.
    let n = (q * total as f64 + 1e-9).floor() as usize;
    let n = n.min(total);
    if n == 0 {
        return Err(Error::Parameter(format!(
            "fraction {q} selects no pixels out of {total}"
        )));
    }
    Ok(n)
}

/// Selects `floor(q·H·W)` pixels in descending saliency order. Ties go to the
/// earlier pixel in row-major order.
pub fn top_fraction_region(s: &SaliencyMap, q: f64) -> Result<FocusRegion> {
    let (h, w) = s.shape();
    let values = s.values().data();
    let n = pixel_budget(q, values.len())?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    // Stable sort keeps row-major order among equal values.
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut bits = vec![false; values.len()];
    for &idx in &order[..n] {
        bits[idx] = true;
    }
    Ok(FocusRegion {
        mask: BinaryMask::new(h, w, bits)?,
        count: n,
    })
}

/// `|R ∩ A| / |R|`.
pub fn activation_ratio(r: &FocusRegion, a: &AnatomyMask) -> Result<f64> {
    if r.count == 0 {
        return Err(Error::Parameter("empty focus region".into()));
    }
    let hits = r.mask.intersection_count(a.mask())?;
    Ok(hits as f64 / r.count as f64)
}

/// `|A| / (H·W)`.
pub fn structure_ratio(a: &AnatomyMask) -> f64 {
    let (h, w) = a.mask().shape();
    a.mask().count() as f64 / (h * w) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRecord {
    pub activation_ratio: f64,
    pub structure_ratio: f64,
    pub difference: f64,
}

impl RatioRecord {
    pub fn new(activation_ratio: f64, structure_ratio: f64) -> Self {
        Self {
            activation_ratio,
            structure_ratio,
            difference: activation_ratio - structure_ratio,
        }
    }

    pub fn measure(region: &FocusRegion, anatomy: &AnatomyMask) -> Result<Self> {
        Ok(Self::new(
            activation_ratio(region, anatomy)?,
            structure_ratio(anatomy),
        ))
    }
}
