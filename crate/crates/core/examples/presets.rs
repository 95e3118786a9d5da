//! Lists the named configurations and applies overrides to one of them.
//!
//! Run with `cargo run --example presets`.

use cacut::presets::preset_names;
use cacut::get_preset;

pub fn run_example() -> cacut::Result<()> {
    for name in preset_names() {
        let c = get_preset(name)?;
        println!(
            "{name:<16} n={:<3} k={:<3} sigma={:<5} mask={}x{}",
            c.n, c.k, c.sigma, c.mask.width, c.mask.height
        );
    }

    let mut cfg = get_preset("cutout")?;
    cfg.apply_toml("[photometric]\nblur_prob = 0.0\n")?;
    cfg.apply_override("mask_size=40")?;
    cfg.apply_override("master_seed=7")?;
    println!("customized: {}", serde_json::to_string(&cfg)?);

    if let Err(e) = get_preset("ca-cut-k99") {
        println!("{e}");
    }
    Ok(())
}

fn main() -> cacut::Result<()> {
    run_example()
}
