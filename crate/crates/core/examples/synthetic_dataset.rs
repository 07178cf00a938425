//! Generates the synthetic lesion dataset, writes bundles plus a manifest and
//! loads it back.
//!
//! cargo run --release --example synthetic_dataset -- [out_dir]

use camalign::manifest::load_manifest;
use camalign::synth::{generate, write_dataset, SynthConfig};

fn main() -> camalign::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "target/synthetic".into());
    let ds = generate(&SynthConfig { samples: 40, seed: 9, ..SynthConfig::default() })?;
    let manifest = write_dataset(&ds, &out)?;
    let back = load_manifest(&manifest)?;
    println!("{}", back.summary());
    println!("manifest {}", manifest.display());
    for r in back.records.iter().take(4) {
        let area: usize = r.masks.values().map(|m| m.mask().count()).sum();
        println!("  {} label {} mask pixels {area}", r.id, u8::from(r.label));
    }
    Ok(())
}
