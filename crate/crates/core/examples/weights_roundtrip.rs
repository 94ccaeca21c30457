//! Saves freshly built weights, reloads them and shows that a flipped byte
//! is rejected.

use rangesr::model::{build, decode_weights, load_weights, save_weights, NetworkConfig};

fn main() -> rangesr::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| rangesr::Error::Input(e.to_string()))?;
    let path = dir.path().join("desk.rsrw");

    let cfg = NetworkConfig::desk(16, 1024);
    let weights = build(&cfg, 11)?;
    save_weights(&weights, &cfg, &path)?;
    let size = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    println!("saved {} tensors, {size} bytes", weights.tensors().count());

    let (back, back_cfg) = load_weights(&path)?;
    println!("config preserved: {}", back_cfg == cfg);
    println!("checksum {} -> {}", weights.checksum(), back.checksum());

    let mut bytes = std::fs::read(&path).map_err(|e| rangesr::Error::Input(e.to_string()))?;
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x40;
    match decode_weights(&bytes) {
        Ok(_) => println!("corruption went unnoticed"),
        Err(e) => println!("flipped byte {mid}: {e} (exit code {})", e.exit_code()),
    }

    let mut other = cfg.clone();
    other.depths[2] = 9;
    match back.check_config(&other) {
        Ok(()) => println!("unexpectedly compatible"),
        Err(e) => println!("deeper config: {e}"),
    }
    Ok(())
}
