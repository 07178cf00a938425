//! All five saliency methods on one image and an untrained mini-CNN.
//!
//! cargo run --release --example cam_methods

use camalign::cam::{compute, CamInputs, CamMethod, ScoreSource};
use camalign::minicnn::MiniCnnModel;
use camalign::synth::{generate, SynthConfig};

fn main() -> camalign::Result<()> {
    let ds = generate(&SynthConfig { samples: 4, seed: 1, ..SynthConfig::default() })?;
    let sample = ds.records.iter().find(|r| r.label).expect("a positive sample");
    let model = MiniCnnModel::init(0);
    let (_, acts) = model.forward(&sample.image)?;
    let class_idx = model.predicted_class(&sample.image)?;
    let grads = model.backward_to_activations(&sample.image, class_idx)?;
    println!("explanation layer {:?}, class {class_idx}", acts.maps().dims());

    for method in CamMethod::ALL {
        let map = compute(
            method,
            CamInputs {
                acts: &acts,
                grads: Some(&grads),
                input: &sample.image,
                class_idx,
                scores: Some(ScoreSource::Oracle(&model)),
            },
        )?;
        let v = map.values();
        let mean = v.data().iter().sum::<f32>() / v.len() as f32;
        let argmax = (0..v.len()).max_by(|&a, &b| v.data()[a].total_cmp(&v.data()[b])).unwrap();
        let (h, w) = map.shape();
        println!(
            "{method:<10} {h}x{w} mean {mean:.3} peak at ({}, {})",
            argmax / w,
            argmax % w
        );
    }
    Ok(())
}
