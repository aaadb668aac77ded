//! Run a miniature path-gain mismatch experiment end to end: train the SISO
//! and FBE pipelines at one average path gain, test at others, and print the
//! result rows, accuracy gaps, and trend report. Scaled down (few devices,
//! few frames) so it finishes in a couple of minutes; the `exp-apg` CLI
//! subcommand runs the full-size version.
//!
//! ```bash
//! cargo run --release -p rffp --example experiment_sweep
//! ```

use rffp::dataset::Pipeline;
use rffp::harness::{run_apg_sweep, to_csv, Scenario};

fn main() -> rffp::Result<()> {
    let base = Scenario::baseline(Pipeline::Fbe, 4, 150, 17);
    let pipelines = [Pipeline::Siso, Pipeline::Fbe];
    let test_apgs = [-10.0, 0.0]; // train APG is -10 dB
    println!(
        "training {} pipelines at APG {} dB, testing at {:?} dB...",
        pipelines.len(),
        base.train_apg_db,
        test_apgs
    );
    let rows = run_apg_sweep(&base, &pipelines, &test_apgs)?;
    print!("{}", to_csv(&rows));
    println!();
    for r in &rows {
        println!(
            "{:<5} test APG {:>5.1} dB: accuracy {:5.1}%, gap {:5.1}%",
            r.pipeline.label(),
            r.test_apg_db,
            r.test_accuracy_pct,
            r.accuracy_gap_pct
        );
    }
    println!("\n(at this toy scale the numbers are noisy; the shape to look for");
    println!("is the SISO accuracy collapsing under mismatch while FBE holds up)");
    Ok(())
}
