//! Ringdown harmonic inversion by the matrix-pencil method: extracts
//! resonance frequencies and quality factors from real time signals, the
//! time-domain complement to the Lorentzian spectrum fits.

use nalgebra::{Complex, DMatrix, DVector};

use super::{FitError, TimeTrace};

/// Documented cap for quality factors of effectively undamped modes.
pub const Q_CAP: f64 = 1e9;

/// One extracted resonance. Field-decay convention: Q = π·f·τ_field.
#[derive(Debug, Clone)]
pub struct ExtractedMode {
    pub f_thz: f64,
    pub q: f64,
    pub amplitude: f64,
    pub phase: f64,
    /// Set when no decay was resolvable (Q at or above [`Q_CAP`]).
    pub lossless: bool,
}

#[derive(Debug, Clone)]
pub struct HarmonicResult {
    pub modes: Vec<ExtractedMode>,
    /// Present when the pencil was rank deficient and fewer modes than
    /// requested could be resolved.
    pub warning: Option<String>,
}

/// Extract damped sinusoids from a post-source ringdown record.
///
/// `band_thz` restricts the reported modes; conjugate twins and out-of-band
/// eigenvalues are discarded. Modes are sorted by amplitude, strongest first,
/// and truncated to `max_modes`.
pub fn harmonic_inversion(
    trace: &TimeTrace,
    band_thz: (f64, f64),
    max_modes: usize,
) -> Result<HarmonicResult, FitError> {
    if trace.values.len() < 200 {
        return Err(FitError::TooFewSamples {
            need: 200,
            got: trace.values.len(),
        });
    }
    if !(band_thz.1 > band_thz.0 && band_thz.0 >= 0.0) || max_modes == 0 {
        return Err(FitError::Degenerate(format!(
            "band {band_thz:?}, max_modes {max_modes}"
        )));
    }

    // Decimate long records, keeping the band below 0.4 cycles/sample.
    let f_hi_cpns = band_thz.1 * 1e3; // THz -> cycles/ns
    let stride_nyquist = (0.4 / (f_hi_cpns * trace.dt_ns)).floor().max(1.0) as usize;
    let stride = trace.values.len().div_ceil(600).min(stride_nyquist).max(1);
    let y: Vec<f64> = trace.values.iter().step_by(stride).cloned().collect();
    let dt = trace.dt_ns * stride as f64;

    let n = y.len();
    let l = n / 3;
    let rows = n - l;
    let y1 = DMatrix::from_fn(rows, l, |i, j| y[i + j]);
    let y2 = DMatrix::from_fn(rows, l, |i, j| y[i + j + 1]);

    let svd = y1.svd(true, true);
    let s = &svd.singular_values;
    let s0 = s[0].max(1e-300);
    let numerical_rank = s.iter().filter(|&&v| v > 1e-10 * s0).count();
    let k = numerical_rank.min(2 * max_modes).max(1);
    let warning = if numerical_rank < 2 * max_modes {
        Some(format!(
            "pencil rank {numerical_rank} below 2*max_modes = {}",
            2 * max_modes
        ))
    } else {
        None
    };

    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let uk = u.columns(0, k);
    let vk = vt.rows(0, k).transpose();
    let mut reduced = uk.transpose() * &y2 * vk;
    for i in 0..k {
        for j in 0..k {
            reduced[(i, j)] /= s[i];
        }
    }
    let eigs = reduced.complex_eigenvalues();

    // Positive-frequency eigenvalues inside the band.
    let band_cpns = (band_thz.0 * 1e3, band_thz.1 * 1e3);
    let mut zs: Vec<Complex<f64>> = Vec::new();
    for z in eigs.iter() {
        if z.im <= 0.0 || z.norm() < 1e-12 {
            continue;
        }
        let f_cpns = z.arg() / (2.0 * std::f64::consts::PI * dt);
        if f_cpns >= band_cpns.0 && f_cpns <= band_cpns.1 {
            zs.push(*z);
        }
    }
    if zs.is_empty() {
        return Ok(HarmonicResult {
            modes: Vec::new(),
            warning,
        });
    }

    // Least-squares amplitudes over the conjugate-pair basis.
    let m = zs.len();
    let basis = DMatrix::from_fn(n, 2 * m, |i, j| {
        let z = zs[j / 2];
        let z = if j % 2 == 0 { z } else { z.conj() };
        z.powu(i as u32)
    });
    let rhs = DVector::from_fn(n, |i, _| Complex::new(y[i], 0.0));
    let coeffs = basis
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| FitError::Degenerate(format!("amplitude solve failed: {e}")))?;

    let mut modes: Vec<ExtractedMode> = zs
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let f_cpns = z.arg() / (2.0 * std::f64::consts::PI * dt);
            let alpha = -z.norm().ln() / dt; // field decay rate, 1/ns
            let q_raw = std::f64::consts::PI * f_cpns / alpha;
            let (q, lossless) = if alpha <= 0.0 || !q_raw.is_finite() {
                (Q_CAP, true)
            } else {
                (q_raw, q_raw >= Q_CAP)
            };
            let c = coeffs[2 * i];
            ExtractedMode {
                f_thz: f_cpns / 1e3,
                q,
                amplitude: 2.0 * c.norm(),
                phase: c.arg(),
                lossless,
            }
        })
        .collect();
    modes.sort_by(|a, b| b.amplitude.partial_cmp(&a.amplitude).unwrap());
    modes.truncate(max_modes);
    Ok(HarmonicResult { modes, warning })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ringdown(modes: &[(f64, f64, f64, f64)], dt_ns: f64, n: usize) -> TimeTrace {
        // (f_thz, q, amplitude, phase)
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 * dt_ns;
                modes
                    .iter()
                    .map(|&(f_thz, q, a, ph)| {
                        let f = f_thz * 1e3; // cycles/ns
                        let omega = 2.0 * std::f64::consts::PI * f;
                        let alpha = std::f64::consts::PI * f / q;
                        a * (-alpha * t).exp() * (omega * t + ph).cos()
                    })
                    .sum()
            })
            .collect();
        TimeTrace::new(0.0, dt_ns, values).unwrap()
    }

    #[test]
    fn single_mode_recovery() {
        let f0 = 406.8;
        let dt = 0.15 / (f0 * 1e3); // 0.15 cycles per sample
        let t = ringdown(&[(f0, 1e5, 1.0, 0.3)], dt, 500);
        let r = harmonic_inversion(&t, (300.0, 500.0), 2).unwrap();
        assert_eq!(r.modes.len(), 1);
        let m = &r.modes[0];
        assert!((m.f_thz / f0 - 1.0).abs() < 1e-4, "f = {}", m.f_thz);
        assert!((m.q / 1e5 - 1.0).abs() < 0.01, "q = {}", m.q);
        assert!((m.amplitude - 1.0).abs() < 0.05, "a = {}", m.amplitude);
    }

    #[test]
    fn very_high_q_within_one_percent() {
        let f0 = 406.8;
        let dt = 0.2 / (f0 * 1e3);
        let t = ringdown(&[(f0, 1e6, 1.0, 0.0)], dt, 600);
        let r = harmonic_inversion(&t, (300.0, 500.0), 2).unwrap();
        assert!(
            (r.modes[0].q / 1e6 - 1.0).abs() < 0.01,
            "q = {}",
            r.modes[0].q
        );
    }

    #[test]
    fn undamped_sinusoid_flagged_lossless() {
        let f0 = 406.8;
        let dt = 0.2 / (f0 * 1e3);
        let t = ringdown(&[(f0, f64::INFINITY, 1.0, 0.0)], dt, 500);
        let r = harmonic_inversion(&t, (300.0, 500.0), 2).unwrap();
        assert!(r.modes[0].lossless);
        assert!(r.modes[0].q >= Q_CAP);
    }

    #[test]
    fn two_modes_ten_linewidths_apart() {
        let f0 = 400.0;
        let q = 1e4;
        let df = 10.0 * f0 / q; // 10 linewidths
        let dt = 0.15 / ((f0 + df) * 1e3);
        let t = ringdown(&[(f0, q, 1.0, 0.0), (f0 + df, q, 0.7, 1.1)], dt, 600);
        let r = harmonic_inversion(&t, (300.0, 500.0), 4).unwrap();
        assert_eq!(r.modes.len(), 2);
        let mut fs: Vec<f64> = r.modes.iter().map(|m| m.f_thz).collect();
        fs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((fs[0] / f0 - 1.0).abs() < 1e-4);
        assert!((fs[1] / (f0 + df) - 1.0).abs() < 1e-4);
        for m in &r.modes {
            assert!((m.q / q - 1.0).abs() < 0.01, "q = {}", m.q);
        }
    }

    #[test]
    fn out_of_band_mode_discarded() {
        let dt = 0.1 / (450.0 * 1e3);
        let t = ringdown(&[(406.8, 1e4, 1.0, 0.0), (150.0, 1e4, 2.0, 0.0)], dt, 600);
        let r = harmonic_inversion(&t, (350.0, 450.0), 4).unwrap();
        assert_eq!(r.modes.len(), 1);
        assert!((r.modes[0].f_thz / 406.8 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn agrees_with_lorentzian_fit() {
        // Same mode rendered as ringdown and as spectrum.
        let f0 = 406.8;
        let q = 5e4;
        let dt = 0.15 / (f0 * 1e3);
        let t = ringdown(&[(f0, q, 1.0, 0.0)], dt, 600);
        let rd = harmonic_inversion(&t, (300.0, 500.0), 2).unwrap();
        let s = super::super::tests::synth_lorentzian(737.0, q, 1.0, 0.0, 300, 5.0);
        let sp = super::super::fit_lorentzian_peak(&s, None).unwrap();
        let q_ratio = rd.modes[0].q / sp.derived["q"];
        assert!((q_ratio - 1.0).abs() < 0.01, "ratio {q_ratio}");
    }

    #[test]
    fn short_trace_rejected() {
        let t = TimeTrace::new(0.0, 0.001, vec![0.0; 100]).unwrap();
        assert!(harmonic_inversion(&t, (300.0, 500.0), 2).is_err());
    }
}
