//! Per-device transmitter impairment models: IQ imbalance, DC offset,
//! local-oscillator phase (CFO + Wiener phase noise), and a Saleh
//! power-amplifier nonlinearity, plus the 20-device parameter table.

use num_complex::Complex64;

use crate::numerics::{gaussian_real, RandomStream};
use crate::{Error, Result};

/// Reference offset at which the phase-noise level is calibrated.
pub const PHASE_NOISE_REF_HZ: f64 = 1_000.0;

/// One device's impairment parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceProfile {
    pub device_id: u32,
    /// Single-sideband phase-noise level in dBc/Hz at the 1 kHz reference.
    pub phase_noise_dbc_hz: f64,
    /// Carrier frequency offset in Hz.
    pub freq_offset_hz: f64,
    /// IQ gain imbalance in dB.
    pub iq_gain_db: f64,
    /// IQ phase imbalance in degrees.
    pub iq_phase_deg: f64,
    /// Saleh AM/AM parameters (alpha, beta).
    pub amam: (f64, f64),
    /// Saleh AM/PM parameters (alpha, beta), phase output in radians.
    pub ampm: (f64, f64),
    /// Additive baseband DC offset (re, im).
    pub dc_offset: Complex64,
}

impl DeviceProfile {
    /// A profile whose whole chain is the identity map.
    pub fn identity(device_id: u32) -> Self {
        Self {
            device_id,
            phase_noise_dbc_hz: f64::NEG_INFINITY,
            freq_offset_hz: 0.0,
            iq_gain_db: 0.0,
            iq_phase_deg: 0.0,
            amam: (1.0, 0.0),
            ampm: (0.0, 0.0),
            dc_offset: Complex64::new(0.0, 0.0),
        }
    }
}

/// Population-level impairment spread (standard deviations of the IQ
/// gain/phase imbalances across devices).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpairmentIntensity {
    pub label: IntensityLabel,
    pub gain_std: f64,
    pub phase_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntensityLabel {
    Low,
    Moderate,
    High,
}

impl std::fmt::Display for IntensityLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IntensityLabel::Low => write!(f, "low"),
            IntensityLabel::Moderate => write!(f, "moderate"),
            IntensityLabel::High => write!(f, "high"),
        }
    }
}

impl IntensityLabel {
    pub fn parse(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(IntensityLabel::Low),
            "moderate" => Ok(IntensityLabel::Moderate),
            "high" => Ok(IntensityLabel::High),
            other => Err(crate::Error::BadFormat(format!(
                "unknown intensity '{other}'"
            ))),
        }
    }
}

/// Mean IQ gain imbalance shared by all intensity sets.
pub const IQ_GAIN_MEAN: f64 = 0.1;
/// Mean IQ phase imbalance shared by all intensity sets.
pub const IQ_PHASE_MEAN: f64 = 0.09;

impl ImpairmentIntensity {
    pub const LOW: Self = Self {
        label: IntensityLabel::Low,
        gain_std: 0.01,
        phase_std: 0.02,
    };
    /// The moderate phase std is 0.011 as printed in the source data,
    /// smaller than the low set's 0.02.
    pub const MODERATE: Self = Self {
        label: IntensityLabel::Moderate,
        gain_std: 0.055,
        phase_std: 0.011,
    };
    pub const HIGH: Self = Self {
        label: IntensityLabel::High,
        gain_std: 0.1,
        phase_std: 0.2,
    };

    pub fn from_label(label: IntensityLabel) -> Self {
        match label {
            IntensityLabel::Low => Self::LOW,
            IntensityLabel::Moderate => Self::MODERATE,
            IntensityLabel::High => Self::HIGH,
        }
    }
}

/// Running state of one transmit chain (the phase-noise walk is stateful).
#[derive(Debug, Clone, Default)]
pub struct TxChainState {
    pub sample_index: u64,
}

const TABLE1: &str = include_str!("../data/table1.txt");

/// The 20 checked-in device profiles.
pub fn load_table1_profiles() -> Vec<DeviceProfile> {
    let profiles: Vec<DeviceProfile> = TABLE1
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| {
            let f: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().expect("malformed table1 field"))
                .collect();
            assert_eq!(f.len(), 11, "table1 row must have 11 columns");
            DeviceProfile {
                device_id: f[0] as u32,
                phase_noise_dbc_hz: f[1],
                freq_offset_hz: f[2],
                iq_gain_db: f[3],
                iq_phase_deg: f[4],
                amam: (f[5], f[6]),
                ampm: (f[7], f[8]),
                dc_offset: Complex64::new(f[9], f[10]),
            }
        })
        .collect();
    assert_eq!(profiles.len(), 20);
    profiles
}

/// Draw a population of `n` device profiles: IQ gain/phase imbalances are
/// sampled from the intensity's normal distributions, every other field is
/// copied from the corresponding table row (cycling past 20).
pub fn sample_profiles(
    intensity: ImpairmentIntensity,
    n: usize,
    stream: &RandomStream,
) -> Vec<DeviceProfile> {
    assert!(n >= 2, "need at least two devices");
    let table = load_table1_profiles();
    let gains = gaussian_real(&stream.domain("iq_gain"), n, IQ_GAIN_MEAN, intensity.gain_std);
    let phases = gaussian_real(
        &stream.domain("iq_phase"),
        n,
        IQ_PHASE_MEAN,
        intensity.phase_std,
    );
    (0..n)
        .map(|i| {
            let mut p = table[i % table.len()].clone();
            p.device_id = i as u32 + 1;
            p.iq_gain_db = gains[i];
            p.iq_phase_deg = phases[i];
            p
        })
        .collect()
}

/// IQ modulator gain/phase mismatch:
/// `Re(x)·10^{g/40}·e^{+jπφ/360} + j·Im(x)·10^{−g/40}·e^{−jπφ/360}`.
pub fn apply_iq_imbalance(x: Complex64, g_db: f64, phi_deg: f64) -> Complex64 {
    let gain_i = 10f64.powf(g_db / 40.0);
    let gain_q = 10f64.powf(-g_db / 40.0);
    let half = std::f64::consts::PI * phi_deg / 360.0;
    let rot_i = Complex64::from_polar(1.0, half);
    let rot_q = Complex64::from_polar(1.0, -half);
    x.re * gain_i * rot_i + Complex64::i() * x.im * gain_q * rot_q
}

/// Memoryless Saleh PA: `A(r) = α_a r / (1 + β_a r²)`,
/// `Φ(r) = α_φ r² / (1 + β_φ r²)` radians added to the input phase.
pub fn apply_saleh_pa(x: Complex64, amam: (f64, f64), ampm: (f64, f64)) -> Complex64 {
    let r = x.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let r2 = r * r;
    // applied as a complex gain on x so identity parameters are bit-exact
    let scale = amam.0 / (1.0 + amam.1 * r2);
    let phase = ampm.0 * r2 / (1.0 + ampm.1 * r2);
    x * scale * Complex64::from_polar(1.0, phase)
}

/// Local-oscillator phase trajectory: CFO ramp plus a Wiener phase-noise
/// walk whose per-step variance is calibrated so the single-sideband level
/// at [`PHASE_NOISE_REF_HZ`] equals the profile's dBc/Hz figure.
pub fn lo_phase_trajectory(
    profile: &DeviceProfile,
    n: usize,
    sample_rate: f64,
    stream: &RandomStream,
) -> Vec<f64> {
    assert!(sample_rate > 0.0);
    let step_std = phase_noise_step_std(profile.phase_noise_dbc_hz, sample_rate);
    let slope = 2.0 * std::f64::consts::PI * profile.freq_offset_hz / sample_rate;
    let steps = if step_std > 0.0 {
        gaussian_real(stream, n, 0.0, step_std)
    } else {
        vec![0.0; n]
    };
    let mut theta = 0.0;
    (0..n)
        .map(|i| {
            let phase = slope * i as f64 + theta;
            theta += steps[i];
            phase
        })
        .collect()
}

/// Wiener-step standard deviation for a given dBc/Hz level:
/// `σ_w = 2π·f_ref·10^{L/20}/√fs`.
pub fn phase_noise_step_std(level_dbc_hz: f64, sample_rate: f64) -> f64 {
    if level_dbc_hz == f64::NEG_INFINITY {
        return 0.0;
    }
    let var =
        (2.0 * std::f64::consts::PI * PHASE_NOISE_REF_HZ).powi(2) * 10f64.powf(level_dbc_hz / 10.0)
            / sample_rate;
    var.sqrt()
}

/// Run one antenna's transmit chain over a symbol sequence:
/// `y[n] = Saleh((IQ(x[n]) + dc) · e^{j·lo_phase[n]})`.
///
/// `shared_lo_phase` is the device's single-oscillator trajectory for these
/// sample positions; antennas of one device pass the same trajectory.
pub fn apply_chain(
    symbols: &[Complex64],
    profile: &DeviceProfile,
    state: &mut TxChainState,
    shared_lo_phase: &[f64],
) -> Result<Vec<Complex64>> {
    if symbols.len() != shared_lo_phase.len() {
        return Err(Error::LengthMismatch {
            expected: symbols.len(),
            got: shared_lo_phase.len(),
        });
    }
    let out = symbols
        .iter()
        .zip(shared_lo_phase)
        .map(|(&x, &phase)| {
            let iq = apply_iq_imbalance(x, profile.iq_gain_db, profile.iq_phase_deg);
            let up = (iq + profile.dc_offset) * Complex64::from_polar(1.0, phase);
            apply_saleh_pa(up, profile.amam, profile.ampm)
        })
        .collect();
    state.sample_index += symbols.len() as u64;
    Ok(out)
}
