//! Writes the built-in fixture models as `.model` files, for use with
//! `tiomut run --model ...`. Usage: `cargo run --example emit_models [dir]`.

use tiomut::fixtures::{car_alarm, pacer, retailer};
use tiomut::tioa::serialize_model;

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "models".to_string());
    std::fs::create_dir_all(&dir)?;
    for (name, model) in [
        ("retailer", retailer()),
        ("car_alarm", car_alarm()),
        ("pacer", pacer()),
    ] {
        let path = format!("{dir}/{name}.model");
        std::fs::write(&path, serialize_model(&model))?;
        println!("wrote {path}");
    }
    Ok(())
}
