//! Renders a Grad-CAM overlay for one synthetic sample as a PPM image.
//!
//! cargo run --release --example overlay -- [out.ppm]

use camalign::cam::grad_cam;
use camalign::minicnn::{train, Example, TrainConfig};
use camalign::overlay::write_overlay;
use camalign::synth::{generate, SynthConfig, ANATOMY};

fn main() -> camalign::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/overlay.ppm".into());
    let ds = generate(&SynthConfig { samples: 60, size: 28, radius: (3.0, 5.0), seed: 5, ..SynthConfig::default() })?;
    let ex: Vec<Example> = ds.records.iter().map(|r| Example { image: &r.image, label: r.label }).collect();
    let model = train(&ex[..30], &ex[30..], &TrainConfig { epochs: 20, ..TrainConfig::default() })?.model;

    let sample = ds.records.iter().rev().find(|r| r.label).expect("a positive sample");
    let (_, acts) = model.forward(&sample.image)?;
    let grads = model.backward_to_activations(&sample.image, 1)?;
    let saliency = grad_cam(&acts, &grads, sample.image.spatial()?)?;
    write_overlay(&out, &sample.image, &saliency, sample.masks.get(ANATOMY), 0.05)?;
    println!("{} -> {out}", sample.id);
    Ok(())
}
