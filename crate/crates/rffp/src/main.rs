//! Command-line driver: dataset generation, training, evaluation, the
//! three experiment sweeps, and a quick self-test.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use rffp::channel::ChannelConfig;
use rffp::cnn::{evaluate, load_model, save_model, write_history};
use rffp::dataset::{
    generate_session, read_frames, split, to_tensor, write_frames, write_manifest,
    Frame, Pipeline,
};
use rffp::harness::{
    apg_trend_checks, channel_cfg, intensity_trend_checks, mds_trend_checks, render_report,
    run_apg_sweep, run_intensity_sweep, run_mds_matrix, scalability_trend_checks,
    scenario_profiles, write_csv, Scenario, DEFAULT_NOISE_POWER,
};
use rffp::impairments::IntensityLabel;

#[derive(Parser)]
#[command(name = "rffp", about = "RF-fingerprinting simulation and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Master seed for all derived randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of devices.
    #[arg(long, default_value_t = 10)]
    devices: usize,
    /// Frames per device.
    #[arg(long, default_value_t = 1000)]
    frames: usize,
    /// Identification pipeline: siso, fbe, or pbe.
    #[arg(long, default_value = "fbe")]
    pipeline: String,
    /// Average path gain in dB.
    #[arg(long, default_value_t = -10.0)]
    apg_db: f64,
    /// Maximum Doppler shift in Hz.
    #[arg(long, default_value_t = 0.0)]
    mds_hz: f64,
    /// Receiver noise power in dB (per complex sample).
    #[arg(long, default_value_t = -20.0)]
    noise_power_db: f64,
    /// Impairment intensity: low, moderate, or high.
    #[arg(long, default_value = "low")]
    intensity: String,
    /// STBC blocks per estimation window (200 = five frames).
    #[arg(long, default_value_t = 200)]
    window_blocks: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Full-scale settings: 20 devices, 5000 frames per device.
    #[arg(long, default_value_t = false)]
    full_scale: bool,
}

impl CommonOpts {
    fn pipeline(&self) -> rffp::Result<Pipeline> {
        Pipeline::parse(&self.pipeline)
    }

    fn intensity(&self) -> rffp::Result<IntensityLabel> {
        IntensityLabel::parse(&self.intensity)
    }

    fn devices(&self) -> usize {
        if self.full_scale { 20 } else { self.devices }
    }

    fn frames(&self) -> usize {
        if self.full_scale { 5000 } else { self.frames }
    }

    fn noise_power(&self) -> f64 {
        10f64.powf(self.noise_power_db / 10.0)
    }

    fn scenario(&self, pipeline: Pipeline) -> rffp::Result<Scenario> {
        Ok(Scenario {
            pipeline,
            n_devices: self.devices(),
            intensity: self.intensity()?,
            train_apg_db: self.apg_db,
            train_mds_hz: self.mds_hz,
            test_apg_db: self.apg_db,
            test_mds_hz: self.mds_hz,
            frames_per_device: self.frames(),
            noise_power: self.noise_power(),
            seed: self.seed,
            window_blocks: self.window_blocks,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset (one file per device) plus a sidecar manifest.
    Generate(CommonOpts),
    /// Train a classifier on a generated dataset directory.
    Train {
        #[command(flatten)]
        opts: CommonOpts,
        /// Directory produced by `generate`.
        #[arg(long)]
        data: PathBuf,
    },
    /// Evaluate a saved model on a generated dataset directory.
    Eval {
        #[command(flatten)]
        opts: CommonOpts,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// APG-sweep experiment: accuracy across testing APG values.
    ExpApg(CommonOpts),
    /// Doppler-mismatch experiment: Doppler mismatch matrix.
    ExpMds(CommonOpts),
    /// Intensity-sweep experiment: accuracy across impairment intensities.
    ExpIntensity(CommonOpts),
    /// Run the fast property suite.
    Selftest,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn ensure_out(dir: &Path) -> rffp::Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn dataset_cfg(opts: &CommonOpts, pipeline: Pipeline) -> ChannelConfig {
    let mut cfg = channel_cfg(pipeline, opts.apg_db, opts.mds_hz, opts.noise_power());
    cfg.coherence_slots = (opts.window_blocks * 8) as u64;
    cfg
}

fn load_dir(data: &Path) -> rffp::Result<Vec<Frame>> {
    let mut frames = Vec::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(data)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "rffp"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(rffp::Error::EmptyDataset(format!(
            "no .rffp files under {}",
            data.display()
        )));
    }
    for p in paths {
        let (f, _) = read_frames(&p)?;
        frames.extend(f);
    }
    Ok(frames)
}

/// Project device ids onto contiguous labels 0..N in ascending id order.
fn labels_of(frames: &[Frame]) -> (Vec<usize>, usize) {
    let mut ids: Vec<u32> = frames.iter().map(|f| f.device_id).collect();
    ids.sort_unstable();
    ids.dedup();
    let labels = frames
        .iter()
        .map(|f| ids.binary_search(&f.device_id).unwrap())
        .collect();
    (labels, ids.len())
}

fn run(cli: Cli) -> rffp::Result<()> {
    match cli.command {
        Command::Generate(opts) => {
            let pipeline = opts.pipeline()?;
            let intensity = opts.intensity()?;
            ensure_out(&opts.out)?;
            let scenario = opts.scenario(pipeline)?;
            let profiles = scenario_profiles(&scenario);
            let cfg = dataset_cfg(&opts, pipeline);
            let mut dropped = 0;
            let mut windows = 0;
            for profile in &profiles {
                let session = generate_session(
                    profile, pipeline, &cfg, intensity, opts.frames(), opts.seed,
                )?;
                dropped += session.windows_dropped;
                windows += session.windows_total;
                let path = opts
                    .out
                    .join(format!("device{:03}_{}.rffp", profile.device_id, pipeline.label()));
                write_frames(&path, &session.frames, opts.seed)?;
            }
            rffp::dataset::check_drop_limit(dropped, windows)?;
            let manifest = vec![
                ("pipeline".into(), pipeline.label().to_string()),
                ("devices".into(), opts.devices().to_string()),
                ("frames_per_device".into(), opts.frames().to_string()),
                ("apg_db".into(), opts.apg_db.to_string()),
                ("mds_hz".into(), opts.mds_hz.to_string()),
                ("noise_power".into(), opts.noise_power().to_string()),
                ("intensity".into(), intensity.to_string()),
                ("window_blocks".into(), opts.window_blocks.to_string()),
                ("master_seed".into(), opts.seed.to_string()),
                ("windows_dropped".into(), dropped.to_string()),
                ("windows_total".into(), windows.to_string()),
            ];
            write_manifest(&opts.out.join("dataset.manifest"), &manifest)?;
            println!(
                "wrote {} devices x {} frames to {} ({dropped}/{windows} windows dropped)",
                opts.devices(),
                opts.frames(),
                opts.out.display()
            );
        }
        Command::Train { opts, data } => {
            ensure_out(&opts.out)?;
            let frames = load_dir(&data)?;
            let (labels, n_classes) = labels_of(&frames);
            let sp = split(&frames, opts.seed)?;
            let tensors: Vec<_> = frames.iter().map(to_tensor).collect::<rffp::Result<_>>()?;
            let pick = |idxs: &[usize]| {
                (
                    idxs.iter().map(|&i| tensors[i].clone()).collect::<Vec<_>>(),
                    idxs.iter().map(|&i| labels[i]).collect::<Vec<_>>(),
                )
            };
            let (tx, ty) = pick(&sp.train);
            let (vx, vy) = pick(&sp.val);
            let cfg = rffp::cnn::TrainConfig {
                seed: opts.seed,
                ..rffp::cnn::TrainConfig::default()
            };
            let model = rffp::cnn::ClassifierModel::new(n_classes, opts.seed);
            let (model, history) = rffp::cnn::train(&model, &tx, &ty, &vx, &vy, &cfg)?;
            save_model(&opts.out.join("model.rffpnn"), &model)?;
            write_history(&opts.out.join("history.csv"), &history)?;
            let best = history.iter().map(|r| r.val_accuracy).fold(0.0, f64::max);
            println!(
                "trained {} epochs; best validation accuracy {best:.2}%; model + history in {}",
                history.len(),
                opts.out.display()
            );
        }
        Command::Eval { opts, data, model } => {
            let frames = load_dir(&data)?;
            let (labels, _) = labels_of(&frames);
            let sp = split(&frames, opts.seed)?;
            let tensors: Vec<_> = frames.iter().map(to_tensor).collect::<rffp::Result<_>>()?;
            let tx: Vec<_> = sp.test.iter().map(|&i| tensors[i].clone()).collect();
            let ty: Vec<_> = sp.test.iter().map(|&i| labels[i]).collect();
            let model = load_model(&model)?;
            let (acc, confusion) = evaluate(&model, &tx, &ty)?;
            println!("test accuracy: {acc:.2}% over {} frames", tx.len());
            println!("confusion matrix (rows = true class):");
            for row in confusion {
                let cells: Vec<String> = row.iter().map(|c| format!("{c:4}")).collect();
                println!("  {}", cells.join(" "));
            }
        }
        Command::ExpApg(opts) => {
            ensure_out(&opts.out)?;
            let base = opts.scenario(Pipeline::Fbe)?;
            let pipelines = [Pipeline::Fbe, Pipeline::Pbe, Pipeline::Siso];
            let apgs = [-20.0, -10.0, 0.0, 10.0, 20.0];
            let rows = run_apg_sweep(&base, &pipelines, &apgs)?;
            write_csv(&opts.out.join("apg.csv"), &rows)?;
            let report = render_report("APG sweep", &apg_trend_checks(&rows));
            std::fs::write(opts.out.join("apg_report.txt"), &report)?;
            print!("{report}");
        }
        Command::ExpMds(opts) => {
            ensure_out(&opts.out)?;
            let mut base = opts.scenario(Pipeline::Fbe)?;
            base.train_apg_db = -20.0;
            let pipelines = [Pipeline::Fbe, Pipeline::Pbe, Pipeline::Siso];
            let counts: &[usize] = if opts.full_scale { &[10, 20] } else { &[opts.devices()] };
            let rows = run_mds_matrix(&base, &pipelines, counts, &[0.0, 1.0])?;
            write_csv(&opts.out.join("mds.csv"), &rows)?;
            let report = render_report("MDS matrix", &mds_trend_checks(&rows));
            std::fs::write(opts.out.join("mds_report.txt"), &report)?;
            print!("{report}");
        }
        Command::ExpIntensity(opts) => {
            ensure_out(&opts.out)?;
            let mut base = opts.scenario(Pipeline::Fbe)?;
            base.train_apg_db = -20.0;
            let pipelines = [Pipeline::Fbe, Pipeline::Pbe, Pipeline::Siso];
            let counts: &[usize] = if opts.full_scale { &[10, 20] } else { &[opts.devices()] };
            let intensities = [IntensityLabel::Low, IntensityLabel::Moderate, IntensityLabel::High];
            let rows = run_intensity_sweep(&base, &pipelines, counts, &intensities)?;
            write_csv(&opts.out.join("intensity.csv"), &rows)?;
            let mut checks = Vec::new();
            for &n in counts {
                checks.extend(intensity_trend_checks(&rows, n));
            }
            if counts.len() == 2 {
                checks.extend(scalability_trend_checks(&rows, counts[0], counts[1]));
            }
            let report = render_report("Intensity sweep", &checks);
            std::fs::write(opts.out.join("intensity_report.txt"), &report)?;
            print!("{report}");
        }
        Command::Selftest => {
            selftest()?;
        }
    }
    Ok(())
}

fn selftest() -> rffp::Result<()> {
    use num_complex::Complex64;
    use rffp::estimation::{estimate_fbe, nmse, Ambiguity, EstimationWindow};
    use rffp::numerics::{gaussian_complex, RandomStream};
    use rffp::stbc::{build_code_matrices, encode_g3, h_tilde, random_qpsk, y_stack};

    let mut failures = 0;
    let mut check = |name: &str, pass: bool, detail: String| {
        println!("[{}] {name} — {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failures += 1;
        }
    };

    // OSTBC orthogonality over 1000 random quads
    let stream = RandomStream::new(1, "selftest.orth");
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let s = random_qpsk(&stream.child(i), 4);
        let q = [s[0], s[1], s[2], s[3]];
        let x = encode_g3(&q).x;
        let e: f64 = q.iter().map(|v| v.norm_sqr()).sum();
        let gram = x.adjoint() * &x;
        let err = (gram - rffp::numerics::CMat::identity(3, 3) * Complex64::new(2.0 * e, 0.0)).norm();
        worst = worst.max(err);
    }
    check("OSTBC orthogonality (1000 quads)", worst < 1e-12, format!("worst {worst:.2e}"));

    // noiseless round trip
    let code = build_code_matrices(3);
    let hs = gaussian_complex(&RandomStream::new(2, "selftest.h"), 9, 1.0)?;
    let h = rffp::numerics::CMat::from_fn(3, 3, |i, j| hs[j * 3 + i]);
    let s = random_qpsk(&RandomStream::new(3, "selftest.s"), 4);
    let q = [s[0], s[1], s[2], s[3]];
    let y = y_stack(&(&encode_g3(&q).x * &h));
    let dec = rffp::stbc::decode_coherent(&y, &h_tilde(&h), &code)?;
    let err: f64 = dec.iter().zip(&q).map(|(a, b)| (a - b).norm()).sum();
    check("noiseless decode round trip", err < 1e-10, format!("error {err:.2e}"));

    // FBE Monte-Carlo at window 1000
    let stream = RandomStream::new(4, "selftest.fbe");
    let ht = h_tilde(&h);
    let noise_var = ht.norm_squared() / 3.0 * 1e-3;
    let syms = random_qpsk(&stream.domain("s"), 4000);
    let noise = gaussian_complex(&stream.domain("n"), 24_000, noise_var)?;
    let blocks: Vec<_> = (0..1000)
        .map(|b| {
            let quad = [syms[4 * b], syms[4 * b + 1], syms[4 * b + 2], syms[4 * b + 3]];
            let mut yb = &encode_g3(&quad).x * &h;
            for (k, z) in yb.iter_mut().enumerate() {
                *z += noise[24 * b + k];
            }
            y_stack(&yb)
        })
        .collect();
    let est = estimate_fbe(&EstimationWindow::new(blocks), &code)?;
    let e = nmse(&est.h_tilde, &ht, Ambiguity::Sign);
    check("FBE sign-NMSE at W=1000, 30 dB", e < 1e-3, format!("NMSE {e:.2e}"));

    // dataset determinism
    let profile = rffp::impairments::load_table1_profiles()[0].clone();
    let cfg = channel_cfg(Pipeline::Fbe, -10.0, 0.0, DEFAULT_NOISE_POWER);
    let s1 = generate_session(&profile, Pipeline::Fbe, &cfg, IntensityLabel::Low, 10, 5)?;
    let s2 = generate_session(&profile, Pipeline::Fbe, &cfg, IntensityLabel::Low, 10, 5)?;
    let identical = s1
        .frames
        .iter()
        .zip(&s2.frames)
        .all(|(a, b)| a.samples == b.samples);
    check("generation determinism", identical, format!("{} frames", s1.frames.len()));

    // CNN uniform loss
    let zero = rffp::cnn::ClassifierModel::zeroed(10);
    let frame = &s1.frames[0];
    let t = to_tensor(frame)?;
    let (loss, _) = rffp::cnn::loss_and_gradients(&zero, &[&t], &[3])?;
    check(
        "uniform-model loss = ln N",
        (loss - 10f64.ln()).abs() < 1e-6,
        format!("loss {loss:.6} vs {:.6}", 10f64.ln()),
    );

    if failures > 0 {
        return Err(rffp::Error::BadFormat(format!("{failures} self-test failures")));
    }
    println!("all self-tests passed");
    Ok(())
}
