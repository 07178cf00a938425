//! Binary PPM overlays: the image in grayscale, focus-region pixels tinted
//! red and the anatomy boundary drawn in green.

use std::fs;
use std::path::Path;

use crate::cam::SaliencyMap;
use crate::error::{Error, Result};
use crate::focus::{top_fraction_region, AnatomyMask};
use crate::tensor::{minmax_normalize, Tensor};

fn gray_levels(image: &Tensor, (h, w): (usize, usize)) -> Result<Vec<u8>> {
    let plane = match image.dims() {
        [ih, iw] | [1, ih, iw] if (*ih, *iw) == (h, w) => image.clone().reshape(vec![h, w])?,
        other => {
            return Err(Error::Dimension(format!(
                "overlay image {other:?} does not match saliency {h}x{w}"
            )))
        }
    };
    Ok(minmax_normalize(&plane)
        .data()
        .iter()
        .map(|&v| (v * 255.0).round() as u8)
        .collect())
}

// A mask pixel is on the boundary when a 4-neighbour is outside the mask or
// outside the image.
fn boundary(mask: &AnatomyMask) -> Vec<bool> {
    let m = mask.mask();
    let (h, w) = m.shape();
    let inside = |y: isize, x: isize| {
        y >= 0 && x >= 0 && (y as usize) < h && (x as usize) < w && m.get(y as usize, x as usize)
    };
    (0..h * w)
        .map(|i| {
            let (y, x) = ((i / w) as isize, (i % w) as isize);
            inside(y, x)
                && !(inside(y - 1, x) && inside(y + 1, x) && inside(y, x - 1) && inside(y, x + 1))
        })
        .collect()
}

/// Encodes the overlay as P6 bytes. Only focus-region pixels with positive
/// saliency are tinted, so an all-zero map leaves the image untouched.
pub fn render_overlay(
    image: &Tensor,
    saliency: &SaliencyMap,
    mask: Option<&AnatomyMask>,
    fraction: f64,
) -> Result<Vec<u8>> {
    let (h, w) = saliency.shape();
    let gray = gray_levels(image, (h, w))?;
    let region = top_fraction_region(saliency, fraction)?;
    let edge = match mask {
        Some(m) if m.mask().shape() != (h, w) => {
            return Err(Error::Dimension(format!(
                "overlay mask {:?} does not match saliency {h}x{w}",
                m.mask().shape()
            )))
        }
        Some(m) => boundary(m),
        None => vec![false; h * w],
    };
    let header = format!("P6\n{w} {h}\n255\n");
    let mut out = Vec::with_capacity(header.len() + 3 * h * w);
    out.extend_from_slice(header.as_bytes());
    let values = saliency.values().data();
    for i in 0..h * w {
        let g = gray[i];
        let half = g / 2;
        let px = if edge[i] {
            [half, 255, half]
        } else if region.mask().bits()[i] && values[i] > 0.0 {
            [half + 128, half, half]
        } else {
            [g, g, g]
        };
        out.extend_from_slice(&px);
    }
    Ok(out)
}

pub fn write_overlay(
    path: impl AsRef<Path>,
    image: &Tensor,
    saliency: &SaliencyMap,
    mask: Option<&AnatomyMask>,
    fraction: f64,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = render_overlay(image, saliency, mask, fraction)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
