//! Show what the transmitter impairment chain does to clean QPSK symbols:
//! IQ imbalance, DC offset, oscillator phase drift (CFO + phase noise), and
//! Saleh power-amplifier compression, at the three population intensities.
//!
//! ```bash
//! cargo run --release -p rffp --example impairment_chain
//! ```

use num_complex::Complex64;
use rffp::impairments::{
    apply_chain, apply_saleh_pa, load_table1_profiles, lo_phase_trajectory, sample_profiles,
    ImpairmentIntensity, IntensityLabel, TxChainState,
};
use rffp::numerics::RandomStream;
use rffp::stbc::random_qpsk;

fn main() -> rffp::Result<()> {
    // Saleh AM/AM compression curve of the first catalogue device.
    let profiles = load_table1_profiles();
    let dev = &profiles[0];
    println!("device {} AM/AM response (input r -> output |y|):", dev.device_id);
    for r in [0.1f64, 0.25, 0.5, 1.0, 2.0] {
        let y = apply_saleh_pa(Complex64::new(r, 0.0), dev.amam, dev.ampm);
        println!("  r = {r:4.2}  ->  |y| = {:6.4}, arg = {:+6.2} deg", y.norm(), y.arg().to_degrees());
    }

    // Full chain on a short QPSK burst.
    let stream = RandomStream::new(11, "example.chain");
    let syms = random_qpsk(&stream.domain("symbols"), 8);
    let lo = lo_phase_trajectory(dev, syms.len(), 1.0e6, &stream.domain("lo"));
    let mut state = TxChainState::default();
    let out = apply_chain(&syms, dev, &mut state, &lo)?;
    println!("\nchain on a QPSK burst (first 4 samples):");
    for i in 0..4 {
        println!("  {:+.3}{:+.3}i  ->  {:+.3}{:+.3}i", syms[i].re, syms[i].im, out[i].re, out[i].im);
    }

    // Population spread at each intensity: per-device IQ imbalance draws.
    println!("\nsampled populations (5 devices each):");
    for label in [IntensityLabel::Low, IntensityLabel::Moderate, IntensityLabel::High] {
        let intensity = ImpairmentIntensity::from_label(label);
        let pop = sample_profiles(intensity, 5, &stream.domain(&format!("pop.{label}")));
        let gains: Vec<String> = pop.iter().map(|p| format!("{:+.4}", p.iq_gain_db)).collect();
        println!("  {label:<8} iq gain dB: {}", gains.join("  "));
    }
    Ok(())
}
