//! Multi-scan analyses: PLE stability over time and forward/backward scan
//! hysteresis checks for thermo-optic distortion.

use serde::{Deserialize, Serialize};

use super::{fit_lorentzian_peak, AxisKind, FitError, Spectrum};

/// Stability summary of a repeated-scan PLE series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PleStability {
    pub mean_linewidth_mhz: f64,
    pub max_drift_mhz: f64,
    pub drift_per_linewidth: f64,
    /// Scans excluded because their Lorentzian fit did not converge.
    pub excluded_scans: usize,
}

/// Fit each scan, then report mean FWHM, the peak-center drift range, and
/// drift in units of the mean linewidth. Each scan is normalized to its own
/// peak before fitting. Frequency-axis scans expected (GHz).
pub fn ple_stability(scans: &[Spectrum]) -> Result<PleStability, FitError> {
    if scans.len() < 2 {
        return Err(FitError::TooFewSamples {
            need: 2,
            got: scans.len(),
        });
    }
    let mut centers = Vec::new();
    let mut widths = Vec::new();
    let mut excluded = 0;
    for scan in scans {
        let peak = scan
            .counts()
            .iter()
            .cloned()
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let normalized = Spectrum::new(
            scan.axis().to_vec(),
            scan.counts().iter().map(|c| c / peak).collect(),
            scan.axis_kind(),
        )?;
        match fit_lorentzian_peak(&normalized, None) {
            Ok(fit) if fit.converged => {
                centers.push(fit.param("center"));
                widths.push(fit.param("fwhm"));
            }
            _ => excluded += 1,
        }
    }
    if centers.len() < 2 {
        return Err(FitError::Degenerate(format!(
            "only {} of {} scans converged",
            centers.len(),
            scans.len()
        )));
    }
    let to_mhz = match scans[0].axis_kind() {
        AxisKind::FrequencyGhz => 1e3,
        AxisKind::WavelengthNm => {
            return Err(FitError::BadSpectrum(
                "PLE stability expects frequency-axis scans".into(),
            ))
        }
    };
    let mean_linewidth_mhz = widths.iter().sum::<f64>() / widths.len() as f64 * to_mhz;
    let max_c = centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_c = centers.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_drift_mhz = (max_c - min_c) * to_mhz;
    Ok(PleStability {
        mean_linewidth_mhz,
        max_drift_mhz,
        drift_per_linewidth: max_drift_mhz / mean_linewidth_mhz.max(1e-300),
        excluded_scans: excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThermoOpticFlag {
    Clean,
    Distorted,
    /// At least one scan's fit did not converge.
    Indeterminate,
}

/// Forward/backward scan comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HysteresisReport {
    pub q_fwd: f64,
    pub q_bwd: f64,
    pub center_shift: f64,
    pub flag: ThermoOpticFlag,
}

/// Relative Q spread beyond which the scan pair is flagged as distorted.
pub const HYSTERESIS_Q_THRESHOLD: f64 = 0.2;

/// Fit both scan directions; flag thermo-optic distortion when the Q values
/// disagree by more than the threshold or the centers shift by more than a
/// fitted linewidth.
pub fn hysteresis_check(
    forward: &Spectrum,
    backward: &Spectrum,
) -> Result<HysteresisReport, FitError> {
    let fit_f = fit_lorentzian_peak(forward, None)?;
    let fit_b = fit_lorentzian_peak(backward, None)?;
    if !fit_f.converged || !fit_b.converged {
        return Ok(HysteresisReport {
            q_fwd: fit_f.derived.get("q").copied().unwrap_or(f64::NAN),
            q_bwd: fit_b.derived.get("q").copied().unwrap_or(f64::NAN),
            center_shift: f64::NAN,
            flag: ThermoOpticFlag::Indeterminate,
        });
    }
    let q_fwd = fit_f.derived["q"];
    let q_bwd = fit_b.derived["q"];
    let mean_q = 0.5 * (q_fwd + q_bwd);
    let center_shift = fit_b.param("center") - fit_f.param("center");
    let mean_fwhm = 0.5 * (fit_f.param("fwhm") + fit_b.param("fwhm"));
    let distorted =
        (q_fwd - q_bwd).abs() / mean_q > HYSTERESIS_Q_THRESHOLD || center_shift.abs() > mean_fwhm;
    Ok(HysteresisReport {
        q_fwd,
        q_bwd,
        center_shift,
        flag: if distorted {
            ThermoOpticFlag::Distorted
        } else {
            ThermoOpticFlag::Clean
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::tests::synth_lorentzian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn ple_scan(center_ghz: f64, fwhm_ghz: f64) -> Spectrum {
        let axis: Vec<f64> = (0..150)
            .map(|i| center_ghz + fwhm_ghz * 4.0 * (2.0 * i as f64 / 149.0 - 1.0))
            .collect();
        let counts: Vec<f64> = axis
            .iter()
            .map(|&x| {
                let h = fwhm_ghz / 2.0;
                1000.0 * h * h / ((x - center_ghz).powi(2) + h * h)
            })
            .collect();
        Spectrum::new(axis, counts, AxisKind::FrequencyGhz).unwrap()
    }

    #[test]
    fn identical_scans_have_zero_drift() {
        let scans = vec![ple_scan(406_770.0, 0.605); 5];
        let r = ple_stability(&scans).unwrap();
        assert!(r.max_drift_mhz.abs() < 1e-6);
        assert!((r.mean_linewidth_mhz - 605.0).abs() < 1.0);
        assert_eq!(r.excluded_scans, 0);
    }

    #[test]
    fn jittered_centers_stay_within_linewidth() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let jitter = Normal::new(0.0, 0.050).unwrap(); // 50 MHz
        let scans: Vec<Spectrum> = (0..12)
            .map(|_| ple_scan(406_770.0 + jitter.sample(&mut rng), 0.605))
            .collect();
        let r = ple_stability(&scans).unwrap();
        assert!(r.drift_per_linewidth < 1.0, "{}", r.drift_per_linewidth);
    }

    #[test]
    fn one_ghz_separation_reported() {
        let scans = vec![ple_scan(406_770.0, 0.605), ple_scan(406_771.0, 0.605)];
        let r = ple_stability(&scans).unwrap();
        assert!(
            (r.max_drift_mhz - 1000.0).abs() < 5.0,
            "{}",
            r.max_drift_mhz
        );
    }

    #[test]
    fn identical_scans_not_flagged() {
        let s = synth_lorentzian(737.0, 8.4e4, 1.0, 0.02, 200, 4.0);
        let r = hysteresis_check(&s, &s).unwrap();
        assert_eq!(r.flag, ThermoOpticFlag::Clean);
        assert_eq!(r.q_fwd, r.q_bwd);
    }

    #[test]
    fn measured_q_spread_accepted() {
        let fwd = synth_lorentzian(737.0, 7.8e4, 1.0, 0.0, 200, 4.0);
        let bwd = synth_lorentzian(737.0, 9.1e4, 1.0, 0.0, 200, 4.0);
        let r = hysteresis_check(&fwd, &bwd).unwrap();
        assert_eq!(r.flag, ThermoOpticFlag::Clean);
        assert!((r.q_fwd / 7.8e4 - 1.0).abs() < 1e-3);
        assert!((r.q_bwd / 9.1e4 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn distorted_backward_scan_flagged() {
        let fwd = synth_lorentzian(737.0, 9.0e4, 1.0, 0.0, 200, 4.0);
        let bwd = synth_lorentzian(737.0, 3.0e4, 1.0, 0.0, 200, 4.0);
        let r = hysteresis_check(&fwd, &bwd).unwrap();
        assert_eq!(r.flag, ThermoOpticFlag::Distorted);
    }

    #[test]
    fn flat_scan_indeterminate() {
        let fwd = synth_lorentzian(737.0, 9.0e4, 1.0, 0.0, 200, 4.0);
        let axis = fwd.axis().to_vec();
        let flat = Spectrum::new(axis, vec![1.0; fwd.len()], AxisKind::WavelengthNm).unwrap();
        let r = hysteresis_check(&fwd, &flat).unwrap();
        assert_eq!(r.flag, ThermoOpticFlag::Indeterminate);
    }
}
