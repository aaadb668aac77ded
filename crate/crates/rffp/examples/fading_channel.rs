//! Sample the Rayleigh flat-fading channel and measure its statistics:
//! envelope distribution of block-fading draws and the temporal
//! autocorrelation of the sum-of-sinusoids Doppler process, which should
//! track the Clarke model J₀(2π f_d τ).
//!
//! ```bash
//! cargo run --release -p rffp --example fading_channel
//! ```

use rffp::channel::{draw_block_fading, ChannelConfig, ChannelState};
use rffp::numerics::RandomStream;

fn main() -> rffp::Result<()> {
    let stream = RandomStream::new(3, "example.fading");

    // Block fading: E|h|² should equal the linear average path gain.
    let cfg = ChannelConfig::new(3, 3, -10.0, 0.0);
    let n = 2000;
    let mut power = 0.0;
    for i in 0..n {
        let h = draw_block_fading(&cfg, &stream.domain("block").child(i))?;
        power += h.norm_squared() / 9.0;
    }
    println!(
        "block fading at APG -10 dB: mean |h|^2 = {:.4} (expect {:.4})",
        power / n as f64,
        cfg.apg_linear()
    );

    // Doppler: empirical autocorrelation of one tap vs Clarke's J0(2 pi fd t).
    let mds_hz = 100.0;
    let cfg = ChannelConfig {
        symbol_rate: 1.0e5,
        ..ChannelConfig::new(1, 1, 0.0, mds_hz)
    };
    let n_real = 400;
    let lags = [0u64, 50, 100, 159]; // in symbols
    let mut acc = [num_complex::Complex64::new(0.0, 0.0); 4];
    let mut p0 = 0.0;
    for r in 0..n_real {
        let mut st = ChannelState::new(cfg.clone(), stream.domain("doppler").child(r));
        let h0 = st.evolve(0)?[(0, 0)];
        p0 += h0.norm_sqr();
        for (k, &lag) in lags.iter().enumerate() {
            let ht = st.evolve(lag)?[(0, 0)];
            acc[k] += h0.conj() * ht;
        }
    }
    println!("\nDoppler autocorrelation, fd = {mds_hz} Hz @ {} sym/s:", cfg.symbol_rate);
    println!("{:>10} {:>12} {:>12}", "lag (sym)", "measured", "J0(2 pi fd t)");
    for (k, &lag) in lags.iter().enumerate() {
        let tau = lag as f64 / cfg.symbol_rate;
        let measured = acc[k].re / p0;
        let clarke = bessel_j0(2.0 * std::f64::consts::PI * mds_hz * tau);
        println!("{lag:>10} {measured:>12.4} {clarke:>12.4}");
    }
    Ok(())
}

/// Series + asymptotic evaluation of the Bessel function J0.
fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        let mut term = 1.0;
        let mut sum = 1.0;
        let q = 0.25 * x * x;
        for k in 1..40 {
            term *= -q / ((k * k) as f64);
            sum += term;
        }
        sum
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let p0 = 1.0 + y * (-0.1098628627e-2 + y * 0.2734510407e-4);
        let q0 = -0.1562499995e-1 + y * 0.1430488765e-3;
        let xx = ax - 0.785398164;
        (0.636619772 / ax).sqrt() * (xx.cos() * p0 - z * xx.sin() * q0)
    }
}
