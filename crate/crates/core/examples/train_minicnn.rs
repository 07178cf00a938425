//! Trains the mini-CNN on a small synthetic set and saves a checkpoint.
//!
//! cargo run --release --example train_minicnn -- [checkpoint.camb]

use camalign::bundle::{read_bundle, write_bundle};
use camalign::minicnn::{train, Example, MiniCnnModel, TrainConfig};
use camalign::stats::auroc;
use camalign::synth::{generate, SynthConfig};

fn main() -> camalign::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/minicnn.camb".into());
    let ds = generate(&SynthConfig { samples: 90, size: 28, radius: (3.0, 5.0), seed: 3, ..SynthConfig::default() })?;
    let ex: Vec<Example> = ds.records.iter().map(|r| Example { image: &r.image, label: r.label }).collect();
    let (tr, rest) = ex.split_at(30);
    let (val, test) = rest.split_at(30);

    let cfg = TrainConfig { epochs: 30, seed: 3, ..TrainConfig::default() };
    let outcome = train(tr, val, &cfg)?;
    for (i, e) in outcome.history.iter().enumerate().step_by(5) {
        println!("epoch {:>3} train {:.4} val {:.4} lr {:.2e}", i + 1, e.train_loss, e.val_loss, e.lr);
    }
    println!("best epoch {}", outcome.best_epoch);

    let scores: Vec<f64> = test
        .iter()
        .map(|e| outcome.model.predict_proba(e.image).map(f64::from))
        .collect::<camalign::Result<_>>()?;
    let labels: Vec<bool> = test.iter().map(|e| e.label).collect();
    println!("test auroc {:.3}", auroc(&scores, &labels)?);

    write_bundle(&out, &outcome.model.to_bundle()?)?;
    let back = MiniCnnModel::from_bundle(&read_bundle(&out)?)?;
    println!("checkpoint {out}, reloaded p(class 1) {:.4}", back.predict_proba(test[0].image)?);
    Ok(())
}
