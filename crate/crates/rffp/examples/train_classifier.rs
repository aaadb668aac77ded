//! Train the from-scratch CNN on a miniature fingerprinting problem:
//! four devices, full-blind-estimation pipeline, a few hundred frames, a
//! handful of epochs. Prints the training history, test accuracy, and the
//! confusion matrix, then round-trips the model through its file format.
//!
//! ```bash
//! cargo run --release -p rffp --example train_classifier
//! ```

use rffp::cnn::{evaluate, load_model, save_model, train, ClassifierModel, TrainConfig};
use rffp::dataset::Pipeline;
use rffp::harness::{channel_cfg, generate_condition};
use rffp::impairments::{sample_profiles, ImpairmentIntensity, IntensityLabel};
use rffp::numerics::RandomStream;

fn main() -> rffp::Result<()> {
    let seed = 9;
    let n_devices = 4;
    let frames_per_device = 150;
    let profiles = sample_profiles(
        ImpairmentIntensity::from_label(IntensityLabel::High),
        n_devices,
        &RandomStream::new(seed, "profiles"),
    );
    let cfg = channel_cfg(Pipeline::Fbe, -10.0, 0.0, 0.01);

    println!("generating {n_devices} devices x {frames_per_device} frames (fbe pipeline)...");
    let (xs, ys, dropped) = generate_condition(
        &profiles,
        Pipeline::Fbe,
        &cfg,
        IntensityLabel::High,
        frames_per_device,
        seed,
    )?;
    println!("  {} frames, {dropped} windows dropped", xs.len());

    // Per-device 80/10/10 split on contiguous index ranges (frames arrive
    // grouped by device).
    let per = xs.len() / n_devices;
    let mut train_i = Vec::new();
    let mut val_i = Vec::new();
    let mut test_i = Vec::new();
    for d in 0..n_devices {
        let base = d * per;
        train_i.extend(base..base + per * 8 / 10);
        val_i.extend(base + per * 8 / 10..base + per * 9 / 10);
        test_i.extend(base + per * 9 / 10..base + per);
    }
    let pick = |idx: &[usize]| -> (Vec<_>, Vec<_>) {
        (
            idx.iter().map(|&i| xs[i].clone()).collect(),
            idx.iter().map(|&i| ys[i]).collect(),
        )
    };
    let (tx, ty) = pick(&train_i);
    let (vx, vy) = pick(&val_i);
    let (ex, ey) = pick(&test_i);

    let cfg_train = TrainConfig {
        max_epochs: 8,
        patience: 3,
        seed,
        ..TrainConfig::default()
    };
    let model = ClassifierModel::new(n_devices, seed);
    let (model, history) = train(&model, &tx, &ty, &vx, &vy, &cfg_train)?;
    for rec in &history {
        println!(
            "epoch {:2}: train loss {:.4}, val accuracy {:5.1}%",
            rec.epoch, rec.train_loss, rec.val_accuracy
        );
    }

    let (acc, confusion) = evaluate(&model, &ex, &ey)?;
    println!("test accuracy: {acc:.1}%");
    println!("confusion matrix (rows = truth):");
    for r in 0..n_devices {
        let line: Vec<String> = (0..n_devices).map(|c| format!("{:4}", confusion[r][c])).collect();
        println!("  {}", line.join(" "));
    }

    let path = std::env::temp_dir().join("rffp_example_model.rffpnn");
    save_model(&path, &model)?;
    let back = load_model(&path)?;
    let (acc2, _) = evaluate(&back, &ex, &ey)?;
    assert_eq!(acc, acc2);
    println!("model round-tripped through {}", path.display());
    Ok(())
}
