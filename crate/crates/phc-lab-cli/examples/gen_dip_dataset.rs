//! Regenerates assets/dip_q84k.csv: a noiseless reflection dip on a
//! frequency axis with Q = 8.4e4 and floor R0 = 0.046, matching the
//! loaded-cavity reflection measurement the `fit` command targets.
//!
//! Run from the workspace root:
//!   cargo run -p phc-lab-cli --example gen_dip_dataset

use phc_lab::fit::{AxisKind, Spectrum};
use phc_lab::io::write_spectrum_csv;
use phc_lab::units::C_NM_THZ;

fn main() {
    let lambda_nm = 737.0;
    let q = 8.4e4;
    let floor = 0.046;
    let scale = 1000.0; // counts at the baseline

    let nu0 = C_NM_THZ / lambda_nm * 1e3; // GHz
    let kappa = nu0 / q;
    let half = kappa / 2.0;

    let n = 2001;
    let span = 10.0 * kappa;
    let axis: Vec<f64> = (0..n)
        .map(|i| nu0 - span + 2.0 * span * i as f64 / (n - 1) as f64)
        .collect();
    let counts: Vec<f64> = axis
        .iter()
        .map(|&nu| {
            let d = (nu - nu0).powi(2) + half * half;
            scale * (1.0 - (1.0 - floor) * half * half / d)
        })
        .collect();

    let s = Spectrum::new(axis, counts, AxisKind::FrequencyGhz).unwrap();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/assets/dip_q84k.csv");
    let mut file = std::fs::File::create(path).unwrap();
    write_spectrum_csv(&mut file, &s).unwrap();
    println!("wrote {path} (nu0 = {nu0:.1} GHz, kappa = {kappa:.4} GHz)");
}
