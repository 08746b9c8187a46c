//! Write a synthetic multi-scene annotation dataset so the CLI can be tried
//! without any external data.
//!
//!     cargo run --example make_demo_dataset -- demo_data
//!     trajspace fit --data-root demo_data --out-dir out --scenes a,b,c,d,e

use std::path::PathBuf;
use trajspace::synthetic::write_scene_files;

fn main() -> trajspace::Result<()> {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| PathBuf::from("demo_data"));
    let scenes = ["a", "b", "c", "d", "e"];
    // 40 pedestrians per scene, 40 samples each: 21 windows per track.
    write_scene_files(&dir, &scenes, 40, 40, 20260810)?;
    println!("wrote scenes {} under {}", scenes.join(","), dir.display());
    Ok(())
}
