//! Rayleigh flat-fading MIMO channel: block fading for a static link
//! (maximum Doppler shift 0) and a Clarke sum-of-sinusoids process for a
//! moving one, plus additive white Gaussian noise.

use num_complex::Complex64;

use crate::numerics::{gaussian_complex, CMat, RandomStream};
use crate::{Error, Result};

/// Rays per coefficient in the Clarke sum-of-sinusoids model.
pub const CLARKE_RAYS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    /// Average path gain in dB: each coefficient has `E|h|² = 10^{apg_db/10}`.
    pub apg_db: f64,
    /// Maximum Doppler shift in Hz (0 selects block fading).
    pub mds_hz: f64,
    /// Per-complex-sample noise variance at each receive antenna.
    pub noise_power: f64,
    /// Symbol (slot) rate in Hz.
    pub symbol_rate: f64,
    /// Block-fading coherence window in slots (ignored when `mds_hz > 0`).
    pub coherence_slots: u64,
}

impl ChannelConfig {
    pub fn new(n_tx: usize, n_rx: usize, apg_db: f64, mds_hz: f64) -> Self {
        Self {
            n_tx,
            n_rx,
            apg_db,
            mds_hz,
            noise_power: 0.01,
            symbol_rate: 100_000.0,
            coherence_slots: 1600,
        }
    }

    /// Linear per-coefficient power.
    pub fn apg_linear(&self) -> f64 {
        10f64.powf(self.apg_db / 10.0)
    }
}

/// One realization of the fading process for a session.
#[derive(Debug, Clone)]
pub struct ChannelState {
    cfg: ChannelConfig,
    stream: RandomStream,
    last_t: u64,
    mode: Mode,
}

#[derive(Debug, Clone)]
enum Mode {
    /// Independent redraw every `coherence_slots`; holds the draw in force.
    Block { window: Option<u64>, h: CMat },
    /// Clarke oscillator bank: per coefficient, fixed ray angles and phases.
    Clarke {
        cos_angles: Vec<f64>,
        phases: Vec<f64>,
    },
    /// Time-invariant user-supplied channel matrix.
    Fixed { h: CMat },
}

impl ChannelState {
    pub fn new(cfg: ChannelConfig, stream: RandomStream) -> Self {
        let mode = if cfg.mds_hz > 0.0 {
            let n = cfg.n_rx * cfg.n_tx * CLARKE_RAYS;
            let mut rng = stream.domain("clarke").rng();
            use rand::Rng;
            let cos_angles = (0..n)
                .map(|_| (rng.gen::<f64>() * std::f64::consts::TAU).cos())
                .collect();
            let phases = (0..n).map(|_| rng.gen::<f64>() * std::f64::consts::TAU).collect();
            Mode::Clarke { cos_angles, phases }
        } else {
            Mode::Block {
                window: None,
                h: CMat::zeros(cfg.n_rx, cfg.n_tx),
            }
        };
        Self {
            cfg,
            stream,
            last_t: 0,
            mode,
        }
    }

    /// A static channel pinned to a given matrix (n_rx x n_tx); useful for
    /// loss-free pipeline regression tests and controlled demos.
    pub fn fixed(cfg: ChannelConfig, h: CMat) -> Self {
        assert_eq!((h.nrows(), h.ncols()), (cfg.n_rx, cfg.n_tx));
        let stream = RandomStream::new(0, "channel.fixed");
        Self {
            cfg,
            stream,
            last_t: 0,
            mode: Mode::Fixed { h },
        }
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }

    /// Channel matrix (n_rx x n_tx) at slot `t`. `t` must be non-decreasing.
    pub fn evolve(&mut self, t: u64) -> Result<CMat> {
        if t < self.last_t {
            return Err(Error::TimeRegression {
                t,
                last: self.last_t,
            });
        }
        self.last_t = t;
        let cfg = self.cfg.clone();
        match &mut self.mode {
            Mode::Block { window, h } => {
                let w = t / cfg.coherence_slots;
                if *window != Some(w) {
                    *h = draw_block_fading(&cfg, &self.stream.domain("block").child(w))?;
                    *window = Some(w);
                }
                Ok(h.clone())
            }
            Mode::Clarke {
                cos_angles,
                phases,
            } => {
                let scale = (cfg.apg_linear() / CLARKE_RAYS as f64).sqrt();
                let tau = t as f64 / cfg.symbol_rate;
                let omega = std::f64::consts::TAU * cfg.mds_hz * tau;
                Ok(CMat::from_fn(cfg.n_rx, cfg.n_tx, |i, j| {
                    let base = (i * cfg.n_tx + j) * CLARKE_RAYS;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for r in 0..CLARKE_RAYS {
                        let (s, c) = (omega * cos_angles[base + r] + phases[base + r]).sin_cos();
                        acc += Complex64::new(c, s);
                    }
                    acc * scale
                }))
            }
            Mode::Fixed { h } => Ok(h.clone()),
        }
    }
}

/// One i.i.d. Rayleigh draw: circularly symmetric complex Gaussian entries
/// with per-coefficient variance `10^{apg_db/10}`.
pub fn draw_block_fading(cfg: &ChannelConfig, stream: &RandomStream) -> Result<CMat> {
    let entries = gaussian_complex(stream, cfg.n_rx * cfg.n_tx, cfg.apg_linear())?;
    Ok(CMat::from_fn(cfg.n_rx, cfg.n_tx, |i, j| {
        entries[i * cfg.n_tx + j]
    }))
}

/// Push a block of transmit rows (T x n_tx, one row per slot starting at
/// `t0`) through the fading channel and add receiver noise. Row τ of the
/// output is `x_τ · H(t0+τ)ᵀ + n_τ`.
pub fn transmit(
    block_rows: &CMat,
    state: &mut ChannelState,
    t0: u64,
    noise_stream: &RandomStream,
) -> Result<CMat> {
    let cfg = state.cfg.clone();
    assert_eq!(block_rows.ncols(), cfg.n_tx, "input must have n_tx columns");
    let t_len = block_rows.nrows();
    let noise = gaussian_complex(noise_stream, t_len * cfg.n_rx, cfg.noise_power)?;
    let mut out = CMat::zeros(t_len, cfg.n_rx);
    for tau in 0..t_len {
        let h = state.evolve(t0 + tau as u64)?;
        for rx in 0..cfg.n_rx {
            let mut acc = Complex64::new(0.0, 0.0);
            for tx in 0..cfg.n_tx {
                acc += block_rows[(tau, tx)] * h[(rx, tx)];
            }
            out[(tau, rx)] = acc + noise[tau * cfg.n_rx + rx];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(apg_db: f64, mds_hz: f64) -> ChannelConfig {
        ChannelConfig::new(3, 3, apg_db, mds_hz)
    }

    #[test]
    fn block_fading_moments() {
        let stream = RandomStream::new(4, "chan.mom");
        // APG 0 dB
        let c = cfg(0.0, 0.0);
        let mut acc = 0.0;
        let n_draws = 12_000; // 9 coefficients each -> >1e5 samples
        for i in 0..n_draws {
            acc += draw_block_fading(&c, &stream.child(i)).unwrap().norm_squared();
        }
        let mean = acc / (9 * n_draws) as f64;
        assert!((0.98..=1.02).contains(&mean), "E|h|^2 = {mean}");

        let c = cfg(-10.0, 0.0);
        let mut acc = 0.0;
        for i in 0..n_draws {
            acc += draw_block_fading(&c, &stream.domain("b").child(i)).unwrap().norm_squared();
        }
        let mean = acc / (9 * n_draws) as f64;
        assert!((mean - 0.1).abs() / 0.1 < 0.02, "E|h|^2 = {mean}");

        // degenerate zero gain
        let c = cfg(f64::NEG_INFINITY, 0.0);
        assert_eq!(draw_block_fading(&c, &stream).unwrap().norm_squared(), 0.0);
    }

    #[test]
    fn block_fading_coherence_and_regression() {
        let mut state = ChannelState::new(cfg(0.0, 0.0), RandomStream::new(5, "chan.coh"));
        let h0 = state.evolve(0).unwrap();
        let h1 = state.evolve(1599).unwrap();
        assert_eq!(h0, h1);
        let h2 = state.evolve(1600).unwrap();
        assert_ne!(h0, h2);
        assert!(matches!(
            state.evolve(10),
            Err(Error::TimeRegression { .. })
        ));
    }

    #[test]
    fn clarke_power_and_autocorrelation() {
        // J0(2π) ≈ 0.2239 at τ·f_d = 1
        let n_states = 4_000;
        let mut corr = 0.0;
        let mut power = 0.0;
        for k in 0..n_states {
            let mut state = ChannelState::new(
                cfg(0.0, 1.0),
                RandomStream::new(1000, "chan.clarke").child(k),
            );
            let h0 = state.evolve(0).unwrap();
            let h1 = state.evolve(100_000).unwrap(); // 1 second at 100 kHz
            corr += (h0[(0, 0)].conj() * h1[(0, 0)]).re;
            power += h0[(0, 0)].norm_sqr();
        }
        let corr = corr / n_states as f64;
        let power = power / n_states as f64;
        assert!((power - 1.0).abs() < 0.05, "E|h|^2 = {power}");
        assert!((corr - 0.2239).abs() < 0.05, "autocorrelation {corr}");
    }

    #[test]
    fn clarke_long_run_power() {
        let mut state = ChannelState::new(cfg(-10.0, 1.0), RandomStream::new(2, "chan.power"));
        let mut acc = 0.0;
        let n = 20_000u64;
        for i in 0..n {
            // large strides so the process decorrelates across samples
            acc += state.evolve(i * 50_000).unwrap()[(1, 2)].norm_sqr();
        }
        let mean = acc / n as f64;
        assert!((mean - 0.1).abs() / 0.1 < 0.05, "E|h|^2 = {mean}");
    }

    #[test]
    fn transmit_identity_and_linearity() {
        // known H: zero noise, static draw
        let c = ChannelConfig {
            noise_power: 0.0,
            ..cfg(0.0, 0.0)
        };
        let stream = RandomStream::new(7, "chan.tx");
        let mut state = ChannelState::new(c.clone(), stream.clone());
        let h = state.evolve(0).unwrap();
        let x = CMat::from_fn(8, 3, |i, j| Complex64::new(i as f64, j as f64 + 0.5));
        let y = transmit(&x, &mut state, 0, &stream.domain("noise")).unwrap();
        let expect = &x * h.transpose();
        assert!((y - &expect).norm() < 1e-12);

        // linearity in the input for a fixed state and zero noise
        let mut state2 = ChannelState::new(c, stream.clone());
        let y2 = transmit(&(&x * Complex64::new(2.0, 0.0)), &mut state2, 0, &stream.domain("noise")).unwrap();
        assert!((y2 - expect * Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn transmit_noise_variance() {
        let c = ChannelConfig {
            noise_power: 0.01,
            ..cfg(f64::NEG_INFINITY, 0.0)
        };
        let stream = RandomStream::new(8, "chan.noise");
        let mut state = ChannelState::new(c, stream.clone());
        let x = CMat::zeros(10_000, 3);
        let y = transmit(&x, &mut state, 0, &stream.domain("noise")).unwrap();
        let var = y.norm_squared() / (10_000.0 * 3.0);
        assert_relative_eq!(var, 0.01, epsilon = 0.001);
    }

    #[test]
    fn rayleigh_magnitude_ks() {
        // KS statistic of |h| against Rayleigh(σ² = APG/2) below 0.01 at n = 1e5
        let c = cfg(0.0, 0.0);
        let stream = RandomStream::new(9, "chan.ks");
        let n = 100_000;
        let mut mags: Vec<f64> = Vec::with_capacity(n);
        let mut i = 0u64;
        while mags.len() < n {
            let h = draw_block_fading(&c, &stream.child(i)).unwrap();
            mags.extend(h.iter().map(|z| z.norm()));
            i += 1;
        }
        mags.truncate(n);
        mags.sort_by(f64::total_cmp);
        let sigma_sq = 0.5;
        let mut ks: f64 = 0.0;
        for (k, m) in mags.iter().enumerate() {
            let cdf = 1.0 - (-m * m / (2.0 * sigma_sq)).exp();
            let lo = k as f64 / n as f64;
            let hi = (k + 1) as f64 / n as f64;
            ks = ks.max((cdf - lo).abs()).max((cdf - hi).abs());
        }
        assert!(ks < 0.01, "KS statistic {ks}");
    }

    #[test]
    fn spatial_independence() {
        let c = cfg(0.0, 0.0);
        let stream = RandomStream::new(10, "chan.ind");
        let n = 10_000;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let h = draw_block_fading(&c, &stream.child(i)).unwrap();
            acc += h[(0, 0)].conj() * h[(2, 1)];
        }
        let corr = (acc / n as f64).norm();
        assert!(corr < 0.05, "spatial correlation {corr}");
    }
}
