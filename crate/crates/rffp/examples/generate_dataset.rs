//! Generate a small labeled dataset for two devices and one pipeline, write
//! it to disk in the native frame format, read it back byte-identically, and
//! turn a frame into the 2x160 normalized tensor the classifier consumes.
//!
//! ```bash
//! cargo run --release -p rffp --example generate_dataset
//! ```

use rffp::dataset::{
    generate_session, read_frames, split, to_tensor, write_frames, Pipeline, FRAME_LEN,
};
use rffp::harness::channel_cfg;
use rffp::impairments::{sample_profiles, ImpairmentIntensity, IntensityLabel};
use rffp::numerics::RandomStream;

fn main() -> rffp::Result<()> {
    let seed = 42;
    let intensity = IntensityLabel::Low;
    let profiles = sample_profiles(
        ImpairmentIntensity::from_label(intensity),
        2,
        &RandomStream::new(seed, "profiles"),
    );
    let cfg = channel_cfg(Pipeline::Fbe, -10.0, 0.0, 0.01);

    let dir = std::env::temp_dir().join("rffp_example_dataset");
    std::fs::create_dir_all(&dir)?;
    for p in &profiles {
        let session = generate_session(p, Pipeline::Fbe, &cfg, intensity, 50, seed)?;
        println!(
            "device {}: {} frames of {} samples, {}/{} windows dropped",
            p.device_id,
            session.frames.len(),
            FRAME_LEN,
            session.windows_dropped,
            session.windows_total
        );
        let path = dir.join(format!("device{:03}_fbe.rffp", p.device_id));
        write_frames(&path, &session.frames, seed)?;
        let (back, master) = read_frames(&path)?;
        assert_eq!(back.len(), session.frames.len());
        assert_eq!(master, seed);
        println!("  wrote and re-read {}", path.display());

        // Tensor view of the first frame: 2 rows (I, Q), RMS-1 normalized.
        let t = to_tensor(&back[0])?;
        let rms = (t.data.iter().map(|v| v * v).sum::<f64>() / 320.0).sqrt();
        println!(
            "  tensor {}x{}, rms = {rms:.6}, first I/Q = {:+.3}/{:+.3}",
            t.data.nrows(),
            t.data.ncols(),
            t.data[(0, 0)],
            t.data[(1, 0)]
        );

        // Deterministic per-device split.
        let sp = split(&back, seed)?;
        println!(
            "  split: {} train / {} val / {} test",
            sp.train.len(),
            sp.val.len(),
            sp.test.len()
        );
    }
    Ok(())
}
