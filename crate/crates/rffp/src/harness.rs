//! Experiment orchestration: scenario definitions, the three sweep
//! families (path gain, Doppler mismatch, impairment intensity), metrics,
//! CSV emission, and plain-text trend reports.

use std::path::Path;

use rand::RngCore;

use crate::channel::ChannelConfig;
use crate::cnn::{evaluate, train, ClassifierModel, EpochRecord, TrainConfig};
use crate::dataset::{check_drop_limit, generate_session, split, to_tensor, FrameTensor, Pipeline};
use crate::impairments::{sample_profiles, DeviceProfile, ImpairmentIntensity, IntensityLabel};
use crate::numerics::RandomStream;
use crate::stbc::N_TX;
use crate::{Error, Result};

/// Default per-complex-sample receiver noise power.
pub const DEFAULT_NOISE_POWER: f64 = 0.01;

/// One training-and-testing configuration.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub pipeline: Pipeline,
    pub n_devices: usize,
    pub intensity: IntensityLabel,
    pub train_apg_db: f64,
    pub train_mds_hz: f64,
    pub test_apg_db: f64,
    pub test_mds_hz: f64,
    pub frames_per_device: usize,
    pub noise_power: f64,
    pub seed: u64,
    /// STBC blocks per estimation window (and channel coherence window).
    pub window_blocks: usize,
}

impl Scenario {
    /// APG-sweep baseline: train/test APG -10 dB, static, N devices at Low.
    pub fn baseline(pipeline: Pipeline, n_devices: usize, frames_per_device: usize, seed: u64) -> Self {
        Self {
            pipeline,
            n_devices,
            intensity: IntensityLabel::Low,
            train_apg_db: -10.0,
            train_mds_hz: 0.0,
            test_apg_db: -10.0,
            test_mds_hz: 0.0,
            frames_per_device,
            noise_power: DEFAULT_NOISE_POWER,
            seed,
            window_blocks: crate::dataset::BLOCKS_PER_WINDOW,
        }
    }
}

/// One emitted measurement.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub experiment: String,
    pub pipeline: Pipeline,
    pub n_devices: usize,
    pub intensity: IntensityLabel,
    pub train_apg_db: f64,
    pub test_apg_db: f64,
    pub train_mds_hz: f64,
    pub test_mds_hz: f64,
    pub frames_per_device: usize,
    pub seed: u64,
    pub test_accuracy_pct: f64,
    pub accuracy_gap_pct: f64,
}

/// Relative accuracy loss against a sweep's reference condition, percent.
pub fn accuracy_gap(acc_ref: f64, acc_x: f64) -> Result<f64> {
    if acc_ref <= 0.0 {
        return Err(Error::BadFormat(format!(
            "reference accuracy must be positive, got {acc_ref}"
        )));
    }
    Ok(100.0 * (acc_ref - acc_x) / acc_ref)
}

/// Channel configuration for a pipeline at a given condition.
pub fn channel_cfg(pipeline: Pipeline, apg_db: f64, mds_hz: f64, noise_power: f64) -> ChannelConfig {
    let mut cfg = match pipeline {
        Pipeline::Siso => ChannelConfig::new(1, 1, apg_db, mds_hz),
        Pipeline::Fbe | Pipeline::Pbe => ChannelConfig::new(N_TX, 3, apg_db, mds_hz),
    };
    cfg.noise_power = noise_power;
    cfg
}

fn derived_seed(seed: u64, tag: &str) -> u64 {
    RandomStream::new(seed, tag).rng().next_u64()
}

/// The device population of a scenario (shared between train and test).
pub fn scenario_profiles(s: &Scenario) -> Vec<DeviceProfile> {
    sample_profiles(
        ImpairmentIntensity::from_label(s.intensity),
        s.n_devices,
        &RandomStream::new(derived_seed(s.seed, "harness.profiles"), "profiles"),
    )
}

/// Generate labeled tensors for every device of a population at one
/// condition. Labels are device indices (0-based).
pub fn generate_condition(
    profiles: &[DeviceProfile],
    pipeline: Pipeline,
    cfg: &ChannelConfig,
    intensity: IntensityLabel,
    frames_per_device: usize,
    master_seed: u64,
) -> Result<(Vec<FrameTensor>, Vec<usize>, usize)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut dropped = 0;
    let mut total = 0;
    for (label, profile) in profiles.iter().enumerate() {
        let session =
            generate_session(profile, pipeline, cfg, intensity, frames_per_device, master_seed)?;
        dropped += session.windows_dropped;
        total += session.windows_total;
        for frame in &session.frames {
            xs.push(to_tensor(frame)?);
            ys.push(label);
        }
    }
    check_drop_limit(dropped, total)?;
    Ok((xs, ys, dropped))
}

/// A model trained at a scenario's training condition.
#[derive(Debug, Clone)]
pub struct TrainedScenario {
    pub scenario: Scenario,
    pub model: ClassifierModel,
    pub history: Vec<EpochRecord>,
    pub windows_dropped: usize,
}

/// Train one classifier at the scenario's training condition: generate
/// frames, split 80/10/10 per device, fit with Adam and early stopping.
pub fn train_scenario(s: &Scenario) -> Result<TrainedScenario> {
    let profiles = scenario_profiles(s);
    let mut cfg = channel_cfg(s.pipeline, s.train_apg_db, s.train_mds_hz, s.noise_power);
    cfg.coherence_slots = (s.window_blocks * crate::stbc::SLOTS) as u64;
    let data_seed = derived_seed(s.seed, "harness.train-data");
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut frames_all = Vec::new();
    let mut dropped = 0;
    let mut total = 0;
    for (label, profile) in profiles.iter().enumerate() {
        let session =
            generate_session(profile, s.pipeline, &cfg, s.intensity, s.frames_per_device, data_seed)?;
        dropped += session.windows_dropped;
        total += session.windows_total;
        for frame in &session.frames {
            xs.push(to_tensor(frame)?);
            ys.push(label);
            frames_all.push(frame.clone());
        }
    }
    check_drop_limit(dropped, total)?;
    let sp = split(&frames_all, derived_seed(s.seed, "harness.split"))?;
    let pick = |idxs: &[usize]| -> (Vec<FrameTensor>, Vec<usize>) {
        (
            idxs.iter().map(|&i| xs[i].clone()).collect(),
            idxs.iter().map(|&i| ys[i]).collect(),
        )
    };
    let (train_x, train_y) = pick(&sp.train);
    let (val_x, val_y) = pick(&sp.val);
    let cfg_train = TrainConfig {
        seed: derived_seed(s.seed, "harness.cnn"),
        ..TrainConfig::default()
    };
    let model = ClassifierModel::new(s.n_devices, derived_seed(s.seed, "harness.init"));
    let (model, history) = train(&model, &train_x, &train_y, &val_x, &val_y, &cfg_train)?;
    Ok(TrainedScenario {
        scenario: s.clone(),
        model,
        history,
        windows_dropped: dropped,
    })
}

/// Evaluate a trained scenario at a testing condition with independent
/// channel/noise streams; returns accuracy in percent.
pub fn test_scenario(trained: &TrainedScenario, test_apg_db: f64, test_mds_hz: f64) -> Result<f64> {
    let s = &trained.scenario;
    let profiles = scenario_profiles(s);
    let mut cfg = channel_cfg(s.pipeline, test_apg_db, test_mds_hz, s.noise_power);
    cfg.coherence_slots = (s.window_blocks * crate::stbc::SLOTS) as u64;
    let n_test = (s.frames_per_device / 10).max(10);
    let seed = derived_seed(
        s.seed,
        &format!("harness.test-data:{test_apg_db}:{test_mds_hz}"),
    );
    let (xs, ys, _) =
        generate_condition(&profiles, s.pipeline, &cfg, s.intensity, n_test, seed)?;
    let (acc, _) = evaluate(&trained.model, &xs, &ys)?;
    Ok(acc)
}

fn row_from(
    experiment: &str,
    s: &Scenario,
    test_apg_db: f64,
    test_mds_hz: f64,
    accuracy: f64,
) -> ResultRow {
    ResultRow {
        experiment: experiment.to_string(),
        pipeline: s.pipeline,
        n_devices: s.n_devices,
        intensity: s.intensity,
        train_apg_db: s.train_apg_db,
        test_apg_db,
        train_mds_hz: s.train_mds_hz,
        test_mds_hz,
        frames_per_device: s.frames_per_device,
        seed: s.seed,
        test_accuracy_pct: accuracy,
        accuracy_gap_pct: 0.0,
    }
}

/// APG sweep (APG-sweep experiment): one training per pipeline at the base train
/// condition, tested across `testing_apgs`; gaps relative to the training
/// APG test point.
pub fn run_apg_sweep(
    base: &Scenario,
    pipelines: &[Pipeline],
    testing_apgs: &[f64],
) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for &pipeline in pipelines {
        let mut s = base.clone();
        s.pipeline = pipeline;
        let trained = train_scenario(&s)?;
        let mut group = Vec::new();
        for &apg in testing_apgs {
            let acc = test_scenario(&trained, apg, s.train_mds_hz)?;
            group.push(row_from("apg", &s, apg, s.train_mds_hz, acc));
        }
        apply_gaps(&mut group, |r| r.test_apg_db == base.train_apg_db)?;
        rows.extend(group);
    }
    Ok(rows)
}

/// MDS mismatch matrix (Doppler-mismatch experiment): per pipeline, device count, and
/// training MDS, test across `mds_values`; gaps relative to matched MDS.
pub fn run_mds_matrix(
    base: &Scenario,
    pipelines: &[Pipeline],
    device_counts: &[usize],
    mds_values: &[f64],
) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for &n in device_counts {
        for &train_mds in mds_values {
            for &pipeline in pipelines {
                let mut s = base.clone();
                s.pipeline = pipeline;
                s.n_devices = n;
                s.train_mds_hz = train_mds;
                s.test_apg_db = s.train_apg_db;
                let trained = train_scenario(&s)?;
                let mut group = Vec::new();
                for &test_mds in mds_values {
                    let acc = test_scenario(&trained, s.train_apg_db, test_mds)?;
                    group.push(row_from("mds", &s, s.train_apg_db, test_mds, acc));
                }
                apply_gaps(&mut group, |r| r.test_mds_hz == r.train_mds_hz)?;
                rows.extend(group);
            }
        }
    }
    Ok(rows)
}

/// Impairment-intensity sweep (intensity-sweep experiment): matched channel conditions,
/// device populations redrawn per intensity; gaps relative to Low.
pub fn run_intensity_sweep(
    base: &Scenario,
    pipelines: &[Pipeline],
    device_counts: &[usize],
    intensities: &[IntensityLabel],
) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for &n in device_counts {
        for &pipeline in pipelines {
            let mut group = Vec::new();
            for &intensity in intensities {
                let mut s = base.clone();
                s.pipeline = pipeline;
                s.n_devices = n;
                s.intensity = intensity;
                s.test_apg_db = s.train_apg_db;
                s.test_mds_hz = s.train_mds_hz;
                let trained = train_scenario(&s)?;
                let acc = test_scenario(&trained, s.train_apg_db, s.train_mds_hz)?;
                group.push(row_from("intensity", &s, s.train_apg_db, s.train_mds_hz, acc));
            }
            apply_gaps(&mut group, |r| r.intensity == intensities[0])?;
            rows.extend(group);
        }
    }
    Ok(rows)
}

fn apply_gaps<F: Fn(&ResultRow) -> bool>(rows: &mut [ResultRow], is_ref: F) -> Result<()> {
    let reference = rows
        .iter()
        .find(|r| is_ref(r))
        .ok_or_else(|| Error::BadFormat("sweep contains no reference condition".into()))?
        .test_accuracy_pct;
    for r in rows.iter_mut() {
        r.accuracy_gap_pct = accuracy_gap(reference, r.test_accuracy_pct)?;
    }
    Ok(())
}

/// Exact CSV header, in the contract's column order.
pub const CSV_HEADER: &str = "experiment,pipeline,n_devices,intensity,train_apg_db,test_apg_db,train_mds_hz,test_mds_hz,frames_per_device,seed,test_accuracy_pct,accuracy_gap_pct";

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{:.4},{:.4}\n",
            r.experiment,
            r.pipeline.label(),
            r.n_devices,
            r.intensity,
            r.train_apg_db,
            r.test_apg_db,
            r.train_mds_hz,
            r.test_mds_hz,
            r.frames_per_device,
            r.seed,
            r.test_accuracy_pct,
            r.accuracy_gap_pct
        ));
    }
    out
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    std::fs::write(path, to_csv(rows))?;
    Ok(())
}

/// One named trend assertion against the reference behaviour.
#[derive(Debug, Clone)]
pub struct TrendCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn find_row<'a>(
    rows: &'a [ResultRow],
    pipeline: Pipeline,
    pred: impl Fn(&ResultRow) -> bool,
) -> Option<&'a ResultRow> {
    rows.iter().find(|r| r.pipeline == pipeline && pred(r))
}

/// Trend checks for an APG sweep: matched ordering (reference 92/81/56)
/// and cross-APG resilience (FBE gap small, SISO gap large).
pub fn apg_trend_checks(rows: &[ResultRow]) -> Vec<TrendCheck> {
    let mut checks = Vec::new();
    let train_apg = rows.first().map(|r| r.train_apg_db).unwrap_or(-10.0);
    let matched = |p| {
        find_row(rows, p, |r| r.test_apg_db == train_apg).map(|r| r.test_accuracy_pct)
    };
    if let (Some(fbe), Some(pbe), Some(siso)) =
        (matched(Pipeline::Fbe), matched(Pipeline::Pbe), matched(Pipeline::Siso))
    {
        checks.push(TrendCheck {
            name: "matched ordering FBE > PBE > SISO (margins >= 5)".into(),
            pass: fbe >= pbe + 5.0 && pbe >= siso + 5.0,
            detail: format!("FBE {fbe:.1}% PBE {pbe:.1}% SISO {siso:.1}% (reference 92/81/56)"),
        });
        checks.push(TrendCheck {
            name: "matched FBE - SISO >= 20 points".into(),
            pass: fbe - siso >= 20.0,
            detail: format!("margin {:.1} points (reference ~36)", fbe - siso),
        });
    }
    let gap_at = |p, apg: f64| {
        find_row(rows, p, |r| r.test_apg_db == apg).map(|r| r.accuracy_gap_pct)
    };
    if let (Some(fbe_gap), Some(siso_gap)) = (gap_at(Pipeline::Fbe, 20.0), gap_at(Pipeline::Siso, 20.0)) {
        checks.push(TrendCheck {
            name: "+20 dB: gap(FBE) <= gap(SISO) - 20 and gap(FBE) <= 20%".into(),
            pass: fbe_gap <= siso_gap - 20.0 && fbe_gap <= 20.0,
            detail: format!("FBE gap {fbe_gap:.1}% SISO gap {siso_gap:.1}% (reference ~0 vs 61)"),
        });
    }
    checks
}

/// Trend checks for an MDS run at one device count: the 0 -> 1 Hz mismatch
/// must cost every pipeline at least 20 points.
pub fn mds_trend_checks(rows: &[ResultRow]) -> Vec<TrendCheck> {
    let mut checks = Vec::new();
    for pipeline in [Pipeline::Fbe, Pipeline::Pbe, Pipeline::Siso] {
        let matched = find_row(rows, pipeline, |r| {
            r.train_mds_hz == 0.0 && r.test_mds_hz == 0.0
        });
        let mismatched = find_row(rows, pipeline, |r| {
            r.train_mds_hz == 0.0 && r.test_mds_hz > 0.0
        });
        if let (Some(m), Some(x)) = (matched, mismatched) {
            let drop = m.test_accuracy_pct - x.test_accuracy_pct;
            checks.push(TrendCheck {
                name: format!("MDS 0->1 Hz drops {} by >= 20 points", pipeline.label()),
                pass: drop >= 20.0,
                detail: format!(
                    "{:.1}% -> {:.1}% (drop {:.1})",
                    m.test_accuracy_pct, x.test_accuracy_pct, drop
                ),
            });
        }
    }
    checks
}

/// Trend checks for an intensity sweep at one device count: FBE accuracy
/// non-decreasing with intensity (3-point band) and Low -> High >= 10.
pub fn intensity_trend_checks(rows: &[ResultRow], n_devices: usize) -> Vec<TrendCheck> {
    let mut checks = Vec::new();
    let acc = |label| {
        rows.iter()
            .find(|r| r.pipeline == Pipeline::Fbe && r.n_devices == n_devices && r.intensity == label)
            .map(|r| r.test_accuracy_pct)
    };
    if let (Some(low), Some(moderate), Some(high)) = (
        acc(IntensityLabel::Low),
        acc(IntensityLabel::Moderate),
        acc(IntensityLabel::High),
    ) {
        checks.push(TrendCheck {
            name: format!("FBE non-decreasing with intensity at N={n_devices}"),
            pass: moderate >= low - 3.0 && high >= moderate - 3.0,
            detail: format!("{low:.1} / {moderate:.1} / {high:.1}%"),
        });
        checks.push(TrendCheck {
            name: format!("FBE Low -> High improves >= 10 points at N={n_devices}"),
            pass: high - low >= 10.0,
            detail: format!("gain {:.1} points (reference 64 -> 90)", high - low),
        });
    }
    checks
}

/// Scalability checks: at Low intensity every pipeline does worse with
/// more devices.
pub fn scalability_trend_checks(rows: &[ResultRow], n_small: usize, n_large: usize) -> Vec<TrendCheck> {
    let mut checks = Vec::new();
    for pipeline in [Pipeline::Fbe, Pipeline::Pbe, Pipeline::Siso] {
        let acc = |n: usize| {
            rows.iter()
                .find(|r| {
                    r.pipeline == pipeline
                        && r.n_devices == n
                        && r.intensity == IntensityLabel::Low
                })
                .map(|r| r.test_accuracy_pct)
        };
        if let (Some(small), Some(large)) = (acc(n_small), acc(n_large)) {
            checks.push(TrendCheck {
                name: format!("{} accuracy N={n_large} < N={n_small} at Low", pipeline.label()),
                pass: large < small,
                detail: format!("{small:.1}% at N={n_small} vs {large:.1}% at N={n_large}"),
            });
        }
    }
    checks
}

/// Render trend checks as a plain-text table.
pub fn render_report(title: &str, checks: &[TrendCheck]) -> String {
    let mut out = format!("== {title} ==\n");
    for c in checks {
        out.push_str(&format!(
            "[{}] {} — {}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        ));
    }
    out
}
