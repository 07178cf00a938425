//! Focus region, activation ratio and structure ratio for a toy map.
//!
//! cargo run --example focus_ratios

use camalign::cam::SaliencyMap;
use camalign::focus::{pixel_budget, top_fraction_region, AnatomyMask, BinaryMask, RatioRecord};
use camalign::tensor::Tensor;

fn main() -> camalign::Result<()> {
    let (h, w) = (10, 10);
    let values: Vec<f32> = (0..h * w)
        .map(|i| {
            let (y, x) = ((i / w) as f32, (i % w) as f32);
            (-((y - 3.0).powi(2) + (x - 6.0).powi(2)) / 8.0).exp()
        })
        .collect();
    let saliency = SaliencyMap::new(Tensor::new(vec![h, w], values)?)?;
    let anatomy = AnatomyMask::from_mask(BinaryMask::new(
        h,
        w,
        (0..h * w).map(|i| (i / w) < 5 && (i % w) >= 5).collect(),
    )?);

    for q in [0.05, 0.1, 0.25] {
        let region = top_fraction_region(&saliency, q)?;
        let r = RatioRecord::measure(&region, &anatomy)?;
        println!(
            "q {q:<4} pixels {:>2} (budget {:>2})  activation {:.3}  structure {:.3}  difference {:+.3}",
            region.count(),
            pixel_budget(q, h * w)?,
            r.activation_ratio,
            r.structure_ratio,
            r.difference
        );
    }
    Ok(())
}
