//! Corner-aligned bilinear upsampling, ReLU and min-max normalization.
//!
//! cargo run --example tensor_ops

use camalign::tensor::{bilinear_resize, minmax_normalize, relu, Tensor};

fn print(name: &str, t: &Tensor) {
    let (h, w) = t.shape2().unwrap();
    println!("{name} ({h}x{w})");
    for row in t.data().chunks(w) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:6.3}")).collect();
        println!("  {}", cells.join(" "));
    }
}

fn main() -> camalign::Result<()> {
    let t = Tensor::from_rows(&[[-1.0, 2.0], [0.5, 4.0]])?;
    print("input", &t);
    print("relu", &relu(&t));
    let up = bilinear_resize(&t, 4, 5)?;
    print("bilinear 4x5", &up);
    print("minmax", &minmax_normalize(&up));
    Ok(())
}
