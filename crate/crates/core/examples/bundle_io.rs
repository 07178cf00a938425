//! Writes a tensor bundle, reads it back and lists its entries.
//!
//! cargo run --example bundle_io

use camalign::bundle::{decode, encode, Bundle};
use camalign::tensor::Tensor;

fn main() -> camalign::Result<()> {
    let bundle = Bundle::new()
        .with("image", Tensor::filled(&[1, 8, 8], 0.5)?)?
        .with("acts", Tensor::zeros(&[16, 2, 2])?)?
        .with("score", Tensor::new(vec![1], vec![0.87])?)?;
    let bytes = encode(&bundle)?;
    println!("{} bytes, magic {:?}", bytes.len(), std::str::from_utf8(&bytes[..4]).unwrap());
    let back = decode(&bytes)?;
    for (name, t) in back.entries() {
        println!("  {name:<6} {:?}", t.dims());
    }
    assert_eq!(back, bundle);
    match decode(&bytes[..bytes.len() - 3]) {
        Err(e) => println!("truncated copy: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
