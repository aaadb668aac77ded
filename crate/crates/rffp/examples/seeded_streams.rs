//! Demonstrate the deterministic seeding model: a master seed plus a
//! hierarchy of domain tags and child indices yields independent,
//! reproducible random streams, and the same seed regenerates a dataset
//! byte for byte.
//!
//! ```bash
//! cargo run --release -p rffp --example seeded_streams
//! ```

use rand::RngCore;
use rffp::dataset::{generate_session, write_frames, Pipeline};
use rffp::harness::channel_cfg;
use rffp::impairments::{DeviceProfile, IntensityLabel};
use rffp::numerics::RandomStream;

fn main() -> rffp::Result<()> {
    // Same (seed, path) -> same stream; any change anywhere -> different.
    let a = RandomStream::new(1, "demo").domain("noise").child(3);
    let b = RandomStream::new(1, "demo").domain("noise").child(3);
    let c = RandomStream::new(1, "demo").domain("noise").child(4);
    let d = RandomStream::new(2, "demo").domain("noise").child(3);
    println!("stream words:");
    println!("  seed 1, noise/3: {:#018x}", a.rng().next_u64());
    println!("  seed 1, noise/3: {:#018x}  (identical)", b.rng().next_u64());
    println!("  seed 1, noise/4: {:#018x}  (different child)", c.rng().next_u64());
    println!("  seed 2, noise/3: {:#018x}  (different master)", d.rng().next_u64());

    // End-to-end: regenerate a session twice and compare the files.
    let profile = DeviceProfile::identity(1);
    let cfg = channel_cfg(Pipeline::Fbe, -10.0, 0.0, 0.01);
    let dir = std::env::temp_dir();
    let mut paths = Vec::new();
    for run in 0..2 {
        let s = generate_session(&profile, Pipeline::Fbe, &cfg, IntensityLabel::Low, 20, 77)?;
        let p = dir.join(format!("rffp_seed_demo_{run}.rffp"));
        write_frames(&p, &s.frames, 77)?;
        paths.push(p);
    }
    let x = std::fs::read(&paths[0])?;
    let y = std::fs::read(&paths[1])?;
    assert_eq!(x, y);
    println!("\ntwo generation runs with seed 77: {} bytes each, byte-identical", x.len());
    Ok(())
}
