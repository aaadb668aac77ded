//! End-to-end frame generation for the three identification pipelines,
//! train/validation/test splitting, and the on-disk dataset format.
//!
//! A frame is 160 complex baseband samples. The SISO pipeline stores the
//! raw received samples of a 1x1 link; the MIMO pipelines (FBE/PBE) group
//! five frames into one estimation window of 200 STBC blocks, blindly
//! estimate the 3x3 channel over the window, decode every block with the
//! estimate, and store the soft recovered symbols.

use std::collections::BTreeMap;
use std::io::{Read as _, Write as _};
use std::path::Path;

use num_complex::Complex64;
use rand::seq::SliceRandom;

use crate::channel::{transmit, ChannelConfig, ChannelState};
use crate::estimation::{estimate_fbe, estimate_pbe, EstimationWindow};
use crate::impairments::{apply_chain, lo_phase_trajectory, DeviceProfile, IntensityLabel, TxChainState};
use crate::numerics::{CMat, RMat, RVec, RandomStream};
use crate::stbc::{build_code_matrices, decode_coherent, encode_g3, random_qpsk, y_stack, N_TX, SLOTS};
use crate::{Error, Result};

/// Complex samples per frame.
pub const FRAME_LEN: usize = 160;
/// STBC blocks per MIMO frame (each block yields four soft symbols).
pub const BLOCKS_PER_FRAME: usize = FRAME_LEN / 4;
/// Frames jointly covered by one channel-estimation window.
pub const FRAMES_PER_WINDOW: usize = 5;
/// STBC blocks per estimation window.
pub const BLOCKS_PER_WINDOW: usize = BLOCKS_PER_FRAME * FRAMES_PER_WINDOW;
/// Time slots per estimation window.
pub const SLOTS_PER_WINDOW: usize = BLOCKS_PER_WINDOW * SLOTS;
/// Fraction of dropped estimation windows above which a generation run
/// aborts. The limit applies to the run as a whole (all devices pooled), so
/// callers aggregate per-session counters and invoke [`check_drop_limit`].
pub const MAX_DROP_FRACTION: f64 = 0.05;

/// Abort a generation run whose pooled window-drop fraction exceeds
/// [`MAX_DROP_FRACTION`]. `total` of zero (pure-SISO runs) always passes.
pub fn check_drop_limit(dropped: usize, total: usize) -> crate::Result<()> {
    if (dropped as f64) > MAX_DROP_FRACTION * total as f64 {
        return Err(crate::Error::TooManyDrops {
            dropped,
            total,
            limit_pct: MAX_DROP_FRACTION * 100.0,
        });
    }
    Ok(())
}
/// Dataset file magic.
pub const DATASET_MAGIC: &[u8; 8] = b"RFFPDS01";
/// Dataset format version written into the header.
pub const DATASET_VERSION: u32 = 1;

/// Identification pipeline a frame belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pipeline {
    Siso,
    Fbe,
    Pbe,
}

impl Pipeline {
    /// Stable on-disk code.
    pub fn code(self) -> u32 {
        match self {
            Pipeline::Siso => 0,
            Pipeline::Fbe => 1,
            Pipeline::Pbe => 2,
        }
    }

    pub fn from_code(code: u32) -> Result<Self> {
        match code {
            0 => Ok(Pipeline::Siso),
            1 => Ok(Pipeline::Fbe),
            2 => Ok(Pipeline::Pbe),
            other => Err(Error::BadFormat(format!("unknown pipeline code {other}"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Pipeline::Siso => "siso",
            Pipeline::Fbe => "fbe",
            Pipeline::Pbe => "pbe",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "siso" => Ok(Pipeline::Siso),
            "fbe" => Ok(Pipeline::Fbe),
            "pbe" => Ok(Pipeline::Pbe),
            other => Err(Error::BadFormat(format!("unknown pipeline '{other}'"))),
        }
    }
}

/// One labeled frame plus the condition it was generated under.
#[derive(Debug, Clone)]
pub struct Frame {
    pub samples: Vec<Complex64>,
    pub device_id: u32,
    pub frame_index: u32,
    pub pipeline: Pipeline,
    pub apg_db: f64,
    pub mds_hz: f64,
    pub intensity: IntensityLabel,
}

impl Frame {
    fn check(&self) -> Result<()> {
        if self.samples.len() != FRAME_LEN {
            return Err(Error::LengthMismatch {
                expected: FRAME_LEN,
                got: self.samples.len(),
            });
        }
        if self.samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::BadFormat("non-finite sample in frame".into()));
        }
        Ok(())
    }
}

/// 2x160 real classifier input: row 0 real parts, row 1 imaginary parts,
/// normalized so the RMS of all 320 entries is 1.
#[derive(Debug, Clone)]
pub struct FrameTensor {
    pub data: RMat,
}

/// Frames produced by one device session plus generation accounting.
#[derive(Debug, Clone)]
pub struct Session {
    pub frames: Vec<Frame>,
    pub windows_dropped: usize,
    pub windows_total: usize,
}

/// Per-device-stratified 80/10/10 partition; entries index into the frame
/// list the split was computed from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Generate one device's frames for a pipeline. All randomness descends
/// from `master_seed` through domain-tagged streams keyed by the device id
/// (channel, noise, symbols, LO).
pub fn generate_session(
    profile: &DeviceProfile,
    pipeline: Pipeline,
    cfg: &ChannelConfig,
    intensity: IntensityLabel,
    n_frames: usize,
    master_seed: u64,
) -> Result<Session> {
    generate_session_with(profile, pipeline, cfg, intensity, n_frames, master_seed, None)
}

/// [`generate_session`] with an optional pinned (static) channel matrix,
/// used by the pipeline-integrity regression tests and examples.
pub fn generate_session_with(
    profile: &DeviceProfile,
    pipeline: Pipeline,
    cfg: &ChannelConfig,
    intensity: IntensityLabel,
    n_frames: usize,
    master_seed: u64,
    fixed_channel: Option<&CMat>,
) -> Result<Session> {
    if n_frames == 0 {
        return Err(Error::EmptyDataset("requested zero frames".into()));
    }
    let base = RandomStream::new(master_seed, "dataset.session").child(u64::from(profile.device_id));
    let mut chan = match fixed_channel {
        Some(h) => ChannelState::fixed(cfg.clone(), h.clone()),
        None => ChannelState::new(cfg.clone(), base.domain("channel")),
    };
    match pipeline {
        Pipeline::Siso => {
            assert_eq!((cfg.n_tx, cfg.n_rx), (1, 1), "SISO runs over a 1x1 link");
            generate_siso(profile, cfg, intensity, n_frames, &base, &mut chan)
        }
        Pipeline::Fbe | Pipeline::Pbe => {
            assert_eq!((cfg.n_tx, cfg.n_rx), (N_TX, 3), "MIMO pipelines run over a 3x3 link");
            generate_mimo(profile, pipeline, cfg, intensity, n_frames, &base, &mut chan)
        }
    }
}

fn condition_frame(
    samples: Vec<Complex64>,
    profile: &DeviceProfile,
    pipeline: Pipeline,
    cfg: &ChannelConfig,
    intensity: IntensityLabel,
    frame_index: u32,
) -> Frame {
    Frame {
        samples,
        device_id: profile.device_id,
        frame_index,
        pipeline,
        apg_db: cfg.apg_db,
        mds_hz: cfg.mds_hz,
        intensity,
    }
}

fn generate_siso(
    profile: &DeviceProfile,
    cfg: &ChannelConfig,
    intensity: IntensityLabel,
    n_frames: usize,
    base: &RandomStream,
    chan: &mut ChannelState,
) -> Result<Session> {
    let mut state = TxChainState::default();
    let mut frames = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        let idx = i as u64;
        let syms = random_qpsk(&base.domain("symbols").child(idx), FRAME_LEN);
        let lo = lo_phase_trajectory(
            profile,
            FRAME_LEN,
            cfg.symbol_rate,
            &base.domain("lo").child(idx),
        );
        let tx = apply_chain(&syms, profile, &mut state, &lo)?;
        let rows = CMat::from_fn(FRAME_LEN, 1, |r, _| tx[r]);
        let y = transmit(&rows, chan, (i * FRAME_LEN) as u64, &base.domain("noise").child(idx))?;
        let samples: Vec<Complex64> = y.column(0).iter().copied().collect();
        frames.push(condition_frame(samples, profile, Pipeline::Siso, cfg, intensity, i as u32));
    }
    Ok(Session {
        frames,
        windows_dropped: 0,
        windows_total: 0,
    })
}

fn generate_mimo(
    profile: &DeviceProfile,
    pipeline: Pipeline,
    cfg: &ChannelConfig,
    intensity: IntensityLabel,
    n_frames: usize,
    base: &RandomStream,
    chan: &mut ChannelState,
) -> Result<Session> {
    let code = build_code_matrices(cfg.n_rx);
    // The estimation window tracks the channel coherence window, so a
    // non-default `coherence_slots` reshapes generation. It must cover a
    // whole number of STBC blocks and of 160-symbol frames.
    let window_blocks = (cfg.coherence_slots / SLOTS as u64) as usize;
    if cfg.coherence_slots % SLOTS as u64 != 0
        || window_blocks == 0
        || (4 * window_blocks) % FRAME_LEN != 0
    {
        return Err(Error::BadFormat(format!(
            "coherence window of {} slots is not a whole number of {}-symbol frames \
             (need a positive multiple of {} STBC blocks)",
            cfg.coherence_slots,
            FRAME_LEN,
            FRAME_LEN / 4
        )));
    }
    let slots_per_window = window_blocks * SLOTS;
    let frames_per_window = 4 * window_blocks / FRAME_LEN;
    let n_windows = n_frames.div_ceil(frames_per_window);
    let mut states: Vec<TxChainState> = (0..cfg.n_tx).map(|_| TxChainState::default()).collect();
    let mut frames = Vec::with_capacity(n_frames);
    let mut dropped = 0usize;
    for w in 0..n_windows {
        let widx = w as u64;
        let syms = random_qpsk(&base.domain("symbols").child(widx), 4 * window_blocks);
        let mut rows = CMat::zeros(slots_per_window, cfg.n_tx);
        for b in 0..window_blocks {
            let quad = [syms[4 * b], syms[4 * b + 1], syms[4 * b + 2], syms[4 * b + 3]];
            let x = encode_g3(&quad).x;
            rows.view_mut((b * SLOTS, 0), (SLOTS, cfg.n_tx)).copy_from(&x);
        }
        // one RF chain per antenna, all fed by the device's single LO
        let lo = lo_phase_trajectory(
            profile,
            slots_per_window,
            cfg.symbol_rate,
            &base.domain("lo").child(widx),
        );
        for tx in 0..cfg.n_tx {
            let col: Vec<Complex64> = rows.column(tx).iter().copied().collect();
            let out = apply_chain(&col, profile, &mut states[tx], &lo)?;
            for (r, v) in out.into_iter().enumerate() {
                rows[(r, tx)] = v;
            }
        }
        let t0 = (w * slots_per_window) as u64;
        let y = transmit(&rows, chan, t0, &base.domain("noise").child(widx))?;
        let blocks: Vec<RVec> = (0..window_blocks)
            .map(|b| y_stack(&y.rows(b * SLOTS, SLOTS).into_owned()))
            .collect();
        let win = EstimationWindow::new(blocks);
        let est = match pipeline {
            Pipeline::Fbe => estimate_fbe(&win, &code),
            Pipeline::Pbe => estimate_pbe(&win, &code),
            Pipeline::Siso => unreachable!(),
        };
        let est = match est {
            Ok(e) => e,
            Err(Error::AmbiguousEstimate { .. }) | Err(Error::IllConditionedSubspace { .. }) => {
                dropped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut recovered = Vec::with_capacity(4 * window_blocks);
        for block in &win.blocks {
            recovered.extend(decode_coherent(block, &est.h_tilde, &code)?);
        }
        for f in 0..frames_per_window {
            if frames.len() == n_frames {
                break;
            }
            let samples = recovered[f * FRAME_LEN..(f + 1) * FRAME_LEN].to_vec();
            let idx = frames.len() as u32;
            frames.push(condition_frame(samples, profile, pipeline, cfg, intensity, idx));
        }
    }
    Ok(Session {
        frames,
        windows_dropped: dropped,
        windows_total: n_windows,
    })
}

/// Row-stack real and imaginary parts and scale so the RMS of the 320 real
/// entries is exactly 1.
pub fn to_tensor(f: &Frame) -> Result<FrameTensor> {
    f.check()?;
    let energy: f64 = f.samples.iter().map(|s| s.norm_sqr()).sum();
    if energy == 0.0 {
        return Err(Error::ZeroFrame);
    }
    let rms = (energy / (2 * FRAME_LEN) as f64).sqrt();
    let data = RMat::from_fn(2, FRAME_LEN, |r, c| {
        let s = f.samples[c];
        (if r == 0 { s.re } else { s.im }) / rms
    });
    Ok(FrameTensor { data })
}

/// Deterministic per-device 80/10/10 split of `frames` (indices refer to
/// positions in the input slice).
pub fn split(frames: &[Frame], seed: u64) -> Result<DatasetSplit> {
    if frames.is_empty() {
        return Err(Error::EmptyDataset("no frames to split".into()));
    }
    let mut by_device: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, f) in frames.iter().enumerate() {
        by_device.entry(f.device_id).or_default().push(i);
    }
    let mut out = DatasetSplit {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for (&device, idxs) in &by_device {
        let n = idxs.len();
        if n < 10 {
            return Err(Error::TooFewFrames { got: n, min: 10 });
        }
        let mut shuffled = idxs.clone();
        let mut rng = RandomStream::new(seed, "dataset.split").child(u64::from(device)).rng();
        shuffled.shuffle(&mut rng);
        let n_train = n * 8 / 10;
        let n_val = n / 10;
        out.train.extend(&shuffled[..n_train]);
        out.val.extend(&shuffled[n_train..n_train + n_val]);
        out.test.extend(&shuffled[n_train + n_val..]);
    }
    Ok(out)
}

/// Write one device/pipeline's frames in the versioned binary format:
/// magic, five u32 LE header fields, 320 f32 LE per frame (interleaved
/// I, Q), and the trailing u64 LE master seed.
pub fn write_frames(path: &Path, frames: &[Frame], master_seed: u64) -> Result<()> {
    if frames.is_empty() {
        return Err(Error::EmptyDataset("refusing to write an empty dataset file".into()));
    }
    let device_id = frames[0].device_id;
    let pipeline = frames[0].pipeline;
    for f in frames {
        f.check()?;
        if f.device_id != device_id || f.pipeline != pipeline {
            return Err(Error::BadFormat(
                "one dataset file holds a single device and pipeline".into(),
            ));
        }
    }
    let mut buf: Vec<u8> = Vec::with_capacity(8 + 20 + frames.len() * FRAME_LEN * 8 + 8);
    buf.extend_from_slice(DATASET_MAGIC);
    for field in [
        DATASET_VERSION,
        device_id,
        pipeline.code(),
        frames.len() as u32,
        FRAME_LEN as u32,
    ] {
        buf.extend_from_slice(&field.to_le_bytes());
    }
    for f in frames {
        for s in &f.samples {
            buf.extend_from_slice(&(s.re as f32).to_le_bytes());
            buf.extend_from_slice(&(s.im as f32).to_le_bytes());
        }
    }
    buf.extend_from_slice(&master_seed.to_le_bytes());
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

/// Read a dataset file back; condition-fingerprint fields are not part of
/// the binary format and come back at their defaults (the sidecar manifest
/// carries them).
pub fn read_frames(path: &Path) -> Result<(Vec<Frame>, u64)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let need = |n: usize, at: usize| -> Result<()> {
        if bytes.len() < at + n {
            Err(Error::BadFormat("truncated dataset file".into()))
        } else {
            Ok(())
        }
    };
    need(8 + 20, 0)?;
    if &bytes[..8] != DATASET_MAGIC {
        return Err(Error::BadFormat("bad dataset magic".into()));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap());
    let version = u32_at(0);
    if version != DATASET_VERSION {
        return Err(Error::BadFormat(format!("unsupported dataset version {version}")));
    }
    let device_id = u32_at(1);
    let pipeline = Pipeline::from_code(u32_at(2))?;
    let frame_count = u32_at(3) as usize;
    let frame_len = u32_at(4) as usize;
    if frame_len != FRAME_LEN {
        return Err(Error::BadFormat(format!("unsupported frame length {frame_len}")));
    }
    let payload = 28;
    need(frame_count * FRAME_LEN * 8 + 8, payload)?;
    let mut frames = Vec::with_capacity(frame_count);
    let mut off = payload;
    for i in 0..frame_count {
        let mut samples = Vec::with_capacity(FRAME_LEN);
        for _ in 0..FRAME_LEN {
            let re = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
            let im = f32::from_le_bytes(bytes[off + 4..off + 8].try_into().unwrap());
            samples.push(Complex64::new(f64::from(re), f64::from(im)));
            off += 8;
        }
        frames.push(Frame {
            samples,
            device_id,
            frame_index: i as u32,
            pipeline,
            apg_db: 0.0,
            mds_hz: 0.0,
            intensity: IntensityLabel::Low,
        });
    }
    let master_seed = u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    Ok((frames, master_seed))
}

/// Plain-text `key=value` sidecar manifest, one entry per line, written in
/// the given order.
pub fn write_manifest(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut out = String::new();
    for (k, v) in entries {
        out.push_str(k);
        out.push('=');
        out.push_str(v);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::BadFormat(format!("manifest line without '=': {line}")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stbc::qpsk_map;
    use approx::assert_relative_eq;

    fn mimo_cfg(apg_db: f64, mds_hz: f64) -> ChannelConfig {
        ChannelConfig::new(N_TX, 3, apg_db, mds_hz)
    }

    fn frame_of(samples: Vec<Complex64>) -> Frame {
        Frame {
            samples,
            device_id: 1,
            frame_index: 0,
            pipeline: Pipeline::Fbe,
            apg_db: 0.0,
            mds_hz: 0.0,
            intensity: IntensityLabel::Low,
        }
    }

    #[test]
    fn lossless_fbe_pipeline_recovers_symbols() {
        // identity impairments, identity static channel, zero noise
        let profile = DeviceProfile::identity(1);
        let mut cfg = mimo_cfg(0.0, 0.0);
        cfg.noise_power = 0.0;
        let h = CMat::identity(3, 3);
        let seed = 77;
        let s = generate_session_with(
            &profile,
            Pipeline::Fbe,
            &cfg,
            IntensityLabel::Low,
            10,
            seed,
            Some(&h),
        )
        .unwrap();
        assert_eq!(s.frames.len(), 10);
        assert_eq!(s.windows_dropped, 0);
        // regenerate the transmitted symbols from the same streams
        let base = RandomStream::new(seed, "dataset.session").child(1);
        for w in 0..2u64 {
            let syms = random_qpsk(&base.domain("symbols").child(w), 4 * BLOCKS_PER_WINDOW);
            for f in 0..FRAMES_PER_WINDOW {
                let frame = &s.frames[w as usize * FRAMES_PER_WINDOW + f];
                for k in 0..FRAME_LEN {
                    let err = (frame.samples[k] - syms[f * FRAME_LEN + k]).norm();
                    assert!(err < 1e-8, "frame {f} sample {k} err {err}");
                }
            }
        }
    }

    #[test]
    fn siso_generation_counts_and_shape() {
        let profile = crate::impairments::load_table1_profiles()[0].clone();
        let cfg = ChannelConfig::new(1, 1, -10.0, 0.0);
        let s = generate_session(&profile, Pipeline::Siso, &cfg, IntensityLabel::Low, 7, 3).unwrap();
        assert_eq!(s.frames.len(), 7);
        assert_eq!(s.windows_dropped, 0);
        assert_eq!(s.windows_total, 0);
        for (i, f) in s.frames.iter().enumerate() {
            assert_eq!(f.samples.len(), FRAME_LEN);
            assert_eq!(f.frame_index, i as u32);
            assert_eq!(f.pipeline, Pipeline::Siso);
            assert_eq!(f.apg_db, -10.0);
        }
    }

    #[test]
    fn custom_window_size_respected() {
        let profile = crate::impairments::load_table1_profiles()[2].clone();
        // 80-block windows: two frames per window, coherence follows suit
        let mut cfg = mimo_cfg(0.0, 0.0);
        cfg.coherence_slots = 640;
        let s = generate_session(&profile, Pipeline::Fbe, &cfg, IntensityLabel::Low, 6, 9).unwrap();
        assert_eq!(s.windows_total, 3);
        assert_eq!(s.frames.len(), 6 - 2 * s.windows_dropped);
        for f in &s.frames {
            assert_eq!(f.samples.len(), FRAME_LEN);
        }
        // windows that do not tile into whole frames are rejected
        for bad in [60, 120, 1604] {
            let mut cfg = mimo_cfg(0.0, 0.0);
            cfg.coherence_slots = bad;
            let r = generate_session(&profile, Pipeline::Fbe, &cfg, IntensityLabel::Low, 5, 9);
            assert!(matches!(r, Err(Error::BadFormat(_))), "slots {bad} accepted");
        }
    }

    #[test]
    fn mimo_generation_counts() {
        let profile = crate::impairments::load_table1_profiles()[1].clone();
        let cfg = mimo_cfg(-10.0, 0.0);
        for pipeline in [Pipeline::Fbe, Pipeline::Pbe] {
            let s =
                generate_session(&profile, pipeline, &cfg, IntensityLabel::Low, 13, 5).unwrap();
            // 13 requested -> 3 windows, truncated to 13 frames (minus drops)
            assert_eq!(s.windows_total, 3);
            assert_eq!(
                s.frames.len(),
                13usize.saturating_sub(s.windows_dropped * FRAMES_PER_WINDOW)
            );
            for f in &s.frames {
                assert_eq!(f.samples.len(), FRAME_LEN);
                assert!(f.samples.iter().all(|z| z.norm().is_finite()));
            }
        }
    }

    #[test]
    fn different_profiles_give_different_frames() {
        // same master seed and device id => identical channel/noise/symbol
        // streams; only the impairments differ
        let table = crate::impairments::load_table1_profiles();
        let mut a = table[0].clone();
        let mut b = table[1].clone();
        a.device_id = 9;
        b.device_id = 9;
        let cfg = mimo_cfg(-10.0, 0.0);
        let fa = generate_session(&a, Pipeline::Fbe, &cfg, IntensityLabel::Low, 5, 11).unwrap();
        let fb = generate_session(&b, Pipeline::Fbe, &cfg, IntensityLabel::Low, 5, 11).unwrap();
        let diff: f64 = fa.frames[0]
            .samples
            .iter()
            .zip(&fb.frames[0].samples)
            .map(|(x, y)| (x - y).norm())
            .sum();
        assert!(diff > 1e-3, "distinct devices produced identical frames");
    }

    #[test]
    fn tensor_layout_and_normalization() {
        // constant frame: rows constant, overall RMS 1
        let c = qpsk_map(0, 0);
        let t = to_tensor(&frame_of(vec![c; FRAME_LEN])).unwrap();
        assert_eq!(t.data.nrows(), 2);
        assert_eq!(t.data.ncols(), FRAME_LEN);
        let rms = (t.data.iter().map(|v| v * v).sum::<f64>() / 320.0).sqrt();
        assert_relative_eq!(rms, 1.0, epsilon = 1e-6);
        assert!(t.data.row(0).iter().all(|&v| (v - t.data[(0, 0)]).abs() < 1e-12));

        // scale invariance
        let mut samples = vec![Complex64::new(0.3, -0.7); FRAME_LEN];
        samples[17] = Complex64::new(-1.0, 2.0);
        let t1 = to_tensor(&frame_of(samples.clone())).unwrap();
        let scaled: Vec<Complex64> = samples.iter().map(|s| s * 7.0).collect();
        let t7 = to_tensor(&frame_of(scaled)).unwrap();
        assert!((&t1.data - &t7.data).norm() < 1e-12);

        // Re/Im placement 3:4
        let mut samples = vec![Complex64::new(0.0, 0.0); FRAME_LEN];
        samples[0] = Complex64::new(3.0, 4.0);
        let t = to_tensor(&frame_of(samples)).unwrap();
        assert_relative_eq!(t.data[(0, 0)] / t.data[(1, 0)], 3.0 / 4.0, epsilon = 1e-12);

        // zero frame rejected
        assert!(matches!(
            to_tensor(&frame_of(vec![Complex64::new(0.0, 0.0); FRAME_LEN])),
            Err(Error::ZeroFrame)
        ));
    }

    fn dummy_frames(n_per_device: usize, devices: &[u32]) -> Vec<Frame> {
        let mut out = Vec::new();
        for &d in devices {
            for i in 0..n_per_device {
                let mut f = frame_of(vec![Complex64::new(1.0, 0.0); FRAME_LEN]);
                f.device_id = d;
                f.frame_index = i as u32;
                out.push(f);
            }
        }
        out
    }

    #[test]
    fn split_proportions_and_determinism() {
        let frames = dummy_frames(5000, &[1]);
        let s = split(&frames, 4).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (4000, 500, 500));

        let frames = dummy_frames(10, &[1, 2, 3]);
        let s = split(&frames, 4).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (24, 3, 3));
        assert_eq!(s, split(&frames, 4).unwrap());
        assert_ne!(s, split(&frames, 5).unwrap());

        // disjoint and covering
        let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..30).collect::<Vec<_>>());

        assert!(matches!(
            split(&dummy_frames(9, &[1]), 4),
            Err(Error::TooFewFrames { .. })
        ));
    }

    #[test]
    fn file_round_trip_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let profile = crate::impairments::load_table1_profiles()[2].clone();
        let cfg = mimo_cfg(-10.0, 0.0);
        let s = generate_session(&profile, Pipeline::Pbe, &cfg, IntensityLabel::Low, 5, 21).unwrap();
        let p1 = dir.path().join("a.rffp");
        let p2 = dir.path().join("b.rffp");
        write_frames(&p1, &s.frames, 21).unwrap();
        let s2 = generate_session(&profile, Pipeline::Pbe, &cfg, IntensityLabel::Low, 5, 21).unwrap();
        write_frames(&p2, &s2.frames, 21).unwrap();
        // byte-identical regeneration
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());

        let (frames, seed) = read_frames(&p1).unwrap();
        assert_eq!(seed, 21);
        assert_eq!(frames.len(), 5);
        assert_eq!(frames[0].device_id, profile.device_id);
        assert_eq!(frames[0].pipeline, Pipeline::Pbe);
        // f32 storage round-trips within single precision
        for (a, b) in frames[0].samples.iter().zip(&s.frames[0].samples) {
            assert!((a - b).norm() < 1e-6 * (1.0 + b.norm()));
        }

        // corrupted magic is rejected
        let mut bytes = std::fs::read(&p1).unwrap();
        bytes[0] ^= 0xFF;
        let bad = dir.path().join("bad.rffp");
        std::fs::write(&bad, bytes).unwrap();
        assert!(matches!(read_frames(&bad), Err(Error::BadFormat(_))));
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.manifest");
        let entries = vec![
            ("apg_db".to_string(), "-10".to_string()),
            ("mds_hz".to_string(), "0".to_string()),
            ("master_seed".to_string(), "42".to_string()),
        ];
        write_manifest(&path, &entries).unwrap();
        let m = read_manifest(&path).unwrap();
        assert_eq!(m.get("apg_db").unwrap(), "-10");
        assert_eq!(m.get("master_seed").unwrap(), "42");
        assert_eq!(m.len(), 3);
    }
}
