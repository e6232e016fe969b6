//! Writes the synthetic fixtures to a directory (default `fixtures/`).

use marlow_core::{fixtures, save_image};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into());
    std::fs::create_dir_all(&dir)?;
    save_image(&fixtures::periodic_texture(64), format!("{dir}/texture64.png"))?;
    save_image(&fixtures::line_scene(64), format!("{dir}/lines64.png"))?;
    save_image(&fixtures::color_scene(64), format!("{dir}/color64.png"))?;
    Ok(())
}
