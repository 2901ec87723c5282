//! Spectroscopic and time-domain fitting: Lorentzian peaks, reflection dips,
//! exponential lifetimes, g² antibunching, plus ringdown harmonic inversion
//! and multi-scan analyses.

pub mod analysis;
pub mod harmonic;
pub mod lm;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use lm::{levenberg_marquardt, FitModel, LmConfig, LmOutcome};

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("spectrum invalid: {0}")]
    BadSpectrum(String),
    #[error("time trace invalid: {0}")]
    BadTrace(String),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisKind {
    WavelengthNm,
    FrequencyGhz,
}

/// Sampled intensity versus wavelength or frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    axis: Vec<f64>,
    counts: Vec<f64>,
    axis_kind: AxisKind,
}

impl Spectrum {
    pub fn new(axis: Vec<f64>, counts: Vec<f64>, axis_kind: AxisKind) -> Result<Self, FitError> {
        if axis.len() != counts.len() {
            return Err(FitError::BadSpectrum(format!(
                "axis length {} != counts length {}",
                axis.len(),
                counts.len()
            )));
        }
        if !axis.windows(2).all(|w| w[1] > w[0]) {
            return Err(FitError::BadSpectrum("axis not strictly increasing".into()));
        }
        if counts.iter().any(|&c| c < 0.0 || !c.is_finite()) {
            return Err(FitError::BadSpectrum(
                "counts must be finite and >= 0".into(),
            ));
        }
        Ok(Self {
            axis,
            counts,
            axis_kind,
        })
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn axis_kind(&self) -> AxisKind {
        self.axis_kind
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }
}

/// Uniformly sampled real signal versus time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTrace {
    pub t0_ns: f64,
    pub dt_ns: f64,
    pub values: Vec<f64>,
}

impl TimeTrace {
    pub fn new(t0_ns: f64, dt_ns: f64, values: Vec<f64>) -> Result<Self, FitError> {
        if !(dt_ns > 0.0) {
            return Err(FitError::BadTrace(format!(
                "dt must be positive, got {dt_ns}"
            )));
        }
        Ok(Self {
            t0_ns,
            dt_ns,
            values,
        })
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.t0_ns + i as f64 * self.dt_ns
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.time_at(i)).collect()
    }
}

/// Named fit parameters with 1σ uncertainties and convergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: BTreeMap<String, f64>,
    pub uncertainties: BTreeMap<String, f64>,
    /// Quantities computed from the fitted parameters (Q, contrast, ...).
    pub derived: BTreeMap<String, f64>,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    fn from_outcome(outcome: &LmOutcome, names: &[&str]) -> Self {
        let params = names
            .iter()
            .zip(&outcome.params)
            .map(|(n, v)| (n.to_string(), *v))
            .collect();
        let uncertainties = names
            .iter()
            .zip(&outcome.uncertainties)
            .map(|(n, v)| (n.to_string(), *v))
            .collect();
        Self {
            params,
            uncertainties,
            derived: BTreeMap::new(),
            residual_rms: outcome.residual_rms,
            converged: outcome.converged,
            iterations: outcome.iterations,
        }
    }

    pub fn param(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn uncertainty(&self, name: &str) -> f64 {
        self.uncertainties[name]
    }
}

struct LorentzianPeak;

impl FitModel for LorentzianPeak {
    fn n_params(&self) -> usize {
        4 // center, fwhm, amplitude, offset
    }
    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        let h = p[1] / 2.0;
        let d = (x - p[0]).powi(2) + h * h;
        p[3] + p[2] * h * h / d
    }
    fn grad(&self, x: f64, p: &[f64], out: &mut [f64]) {
        let h = p[1] / 2.0;
        let dx = x - p[0];
        let d = dx * dx + h * h;
        let d2 = d * d;
        out[0] = p[2] * h * h * 2.0 * dx / d2;
        out[1] = p[2] * h * dx * dx / d2;
        out[2] = h * h / d;
        out[3] = 1.0;
    }
    fn clamp(&self, p: &mut [f64]) {
        p[1] = p[1].abs().max(1e-300);
    }
}

struct ReflectionDip;

impl FitModel for ReflectionDip {
    fn n_params(&self) -> usize {
        4 // center, kappa, floor, scale
    }
    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        let h = p[1] / 2.0;
        let d = (x - p[0]).powi(2) + h * h;
        p[3] * (1.0 - (1.0 - p[2]) * h * h / d)
    }
    fn grad(&self, x: f64, p: &[f64], out: &mut [f64]) {
        let h = p[1] / 2.0;
        let dx = x - p[0];
        let d = dx * dx + h * h;
        let d2 = d * d;
        out[0] = -p[3] * (1.0 - p[2]) * h * h * 2.0 * dx / d2;
        out[1] = -p[3] * (1.0 - p[2]) * h * dx * dx / d2;
        out[2] = p[3] * h * h / d;
        out[3] = 1.0 - (1.0 - p[2]) * h * h / d;
    }
    fn clamp(&self, p: &mut [f64]) {
        p[1] = p[1].abs().max(1e-300);
        p[2] = p[2].clamp(0.0, 1.0);
        p[3] = p[3].abs().max(1e-300);
    }
}

struct ExpDecay;

impl FitModel for ExpDecay {
    fn n_params(&self) -> usize {
        3 // tau, amplitude, offset
    }
    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        p[1] * (-x / p[0]).exp() + p[2]
    }
    fn grad(&self, x: f64, p: &[f64], out: &mut [f64]) {
        let e = (-x / p[0]).exp();
        out[0] = p[1] * e * x / (p[0] * p[0]);
        out[1] = e;
        out[2] = 1.0;
    }
    fn clamp(&self, p: &mut [f64]) {
        p[0] = p[0].abs().max(1e-300);
    }
}

struct AntibunchingDip;

impl FitModel for AntibunchingDip {
    fn n_params(&self) -> usize {
        3 // g2_0, tau_c, norm
    }
    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        let e = (-x.abs() / p[1]).exp();
        p[2] * (1.0 - (1.0 - p[0]) * e)
    }
    fn grad(&self, x: f64, p: &[f64], out: &mut [f64]) {
        let e = (-x.abs() / p[1]).exp();
        out[0] = p[2] * e;
        out[1] = -p[2] * (1.0 - p[0]) * e * x.abs() / (p[1] * p[1]);
        out[2] = 1.0 - (1.0 - p[0]) * e;
    }
    fn clamp(&self, p: &mut [f64]) {
        p[0] = p[0].max(0.0);
        p[1] = p[1].abs().max(1e-300);
        p[2] = p[2].abs().max(1e-300);
    }
}

/// Poisson weights for count data: 1/max(count, 1).
fn poisson_weights(counts: &[f64]) -> Vec<f64> {
    counts.iter().map(|&c| 1.0 / c.max(1.0)).collect()
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap()
}

fn argmin(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap()
}

/// Half-maximum crossing width around the peak, interpolated; falls back to a
/// quarter of the axis span when no crossing exists.
fn estimate_fwhm(axis: &[f64], counts: &[f64], peak: usize, base: f64) -> f64 {
    let half = base + (counts[peak] - base) / 2.0;
    let mut left = None;
    for i in (0..peak).rev() {
        if counts[i] <= half {
            let frac = (half - counts[i]) / (counts[i + 1] - counts[i]).max(1e-300);
            left = Some(axis[i] + frac * (axis[i + 1] - axis[i]));
            break;
        }
    }
    let mut right = None;
    for i in peak + 1..counts.len() {
        if counts[i] <= half {
            let frac = (counts[i - 1] - half) / (counts[i - 1] - counts[i]).max(1e-300);
            right = Some(axis[i - 1] + frac * (axis[i] - axis[i - 1]));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) if r > l => r - l,
        _ => (axis[axis.len() - 1] - axis[0]) / 4.0,
    }
}

/// Initial guess for a Lorentzian peak fit: [center, fwhm, amplitude, offset].
pub fn lorentzian_guess(s: &Spectrum) -> [f64; 4] {
    let peak = argmax(s.counts());
    let offset = s.counts().iter().cloned().fold(f64::INFINITY, f64::min);
    let amplitude = s.counts()[peak] - offset;
    let fwhm = estimate_fwhm(s.axis(), s.counts(), peak, offset);
    [s.axis()[peak], fwhm, amplitude, offset]
}

/// Fit L(x) = B + A·(Γ/2)²/((x−x₀)² + (Γ/2)²). Derived key "q" = x₀/Γ.
///
/// The converged flag is false when the optimizer fails to descend or when
/// the fitted amplitude is indistinguishable from zero (flat spectrum).
pub fn fit_lorentzian_peak(s: &Spectrum, guess: Option<[f64; 4]>) -> Result<FitResult, FitError> {
    if s.len() < 8 {
        return Err(FitError::TooFewSamples {
            need: 8,
            got: s.len(),
        });
    }
    let p0 = guess.unwrap_or_else(|| lorentzian_guess(s));
    let w = poisson_weights(s.counts());
    let outcome = levenberg_marquardt(
        &LorentzianPeak,
        s.axis(),
        s.counts(),
        &w,
        &p0,
        &LmConfig::default(),
    );
    let mut result = FitResult::from_outcome(&outcome, &["center", "fwhm", "amplitude", "offset"]);
    let a = result.param("amplitude");
    let scale = s
        .counts()
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
        .max(1e-300);
    if a.abs() < 1e-9 * scale || a.abs() <= result.uncertainty("amplitude") * 1e-3 {
        result.converged = false;
    }
    if result.converged {
        result
            .derived
            .insert("q".into(), result.param("center") / result.param("fwhm"));
    }
    Ok(result)
}

/// Fit s·[1 − (1−R₀)·(κ/2)²/((ν−ν₀)² + (κ/2)²)], where s absorbs the raw
/// count baseline (the spectrum is pre-normalized by its median, so s stays
/// near 1). Derived keys: "q" = ν₀/κ, "contrast" = 1 − R₀.
pub fn fit_reflection_dip(s: &Spectrum, guess: Option<[f64; 4]>) -> Result<FitResult, FitError> {
    if s.len() < 8 {
        return Err(FitError::TooFewSamples {
            need: 8,
            got: s.len(),
        });
    }
    let mut sorted = s.counts().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let baseline = sorted[sorted.len() / 2].max(1e-300);
    let norm: Vec<f64> = s.counts().iter().map(|c| c / baseline).collect();

    let p0 = guess.unwrap_or_else(|| {
        let dip = argmin(&norm);
        let floor = norm[dip].clamp(0.0, 1.0);
        // Width from the inverted dip.
        let inverted: Vec<f64> = norm.iter().map(|&v| 1.0 - v).collect();
        let kappa = estimate_fwhm(s.axis(), &inverted, dip, 0.0);
        [s.axis()[dip], kappa, floor, 1.0]
    });
    let w = vec![1.0; s.len()];
    let outcome = levenberg_marquardt(
        &ReflectionDip,
        s.axis(),
        &norm,
        &w,
        &p0,
        &LmConfig::default(),
    );
    let mut result = FitResult::from_outcome(&outcome, &["center", "kappa", "floor", "scale"]);
    let contrast = 1.0 - result.param("floor");
    if contrast < 1e-9 {
        result.converged = false; // no dip to fit
    }
    result.derived.insert("contrast".into(), contrast);
    if result.converged {
        result
            .derived
            .insert("q".into(), result.param("center") / result.param("kappa"));
    }
    Ok(result)
}

/// Fit A·exp(−t/τ) + B on t ≥ t_start_ns. Times are re-origined to t_start so
/// the amplitude refers to the fit window start.
pub fn fit_exponential_lifetime(h: &TimeTrace, t_start_ns: f64) -> Result<FitResult, FitError> {
    let pairs: Vec<(f64, f64)> = (0..h.values.len())
        .map(|i| (h.time_at(i), h.values[i]))
        .filter(|&(t, _)| t >= t_start_ns)
        .map(|(t, v)| (t - t_start_ns, v))
        .collect();
    if pairs.len() < 8 {
        return Err(FitError::TooFewSamples {
            need: 8,
            got: pairs.len(),
        });
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();

    let tail = ys.len() - (ys.len() / 10).max(1);
    let offset = ys[tail..].iter().sum::<f64>() / (ys.len() - tail) as f64;
    let amplitude = (ys[0] - offset).max(1e-300);
    // Time to decay to 1/e of the start value above offset.
    let target = offset + amplitude / std::f64::consts::E;
    let tau_guess = xs
        .iter()
        .zip(&ys)
        .find(|&(_, &y)| y <= target)
        .map(|(&t, _)| t)
        .unwrap_or(xs[xs.len() - 1] / 2.0)
        .max(h.dt_ns);

    let w = poisson_weights(&ys);
    let outcome = levenberg_marquardt(
        &ExpDecay,
        &xs,
        &ys,
        &w,
        &[tau_guess, amplitude, offset],
        &LmConfig::default(),
    );
    let mut result = FitResult::from_outcome(&outcome, &["tau", "amplitude", "offset"]);
    let scale = ys.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
    if result.param("amplitude").abs() < 1e-9 * scale {
        result.converged = false; // constant histogram: tau unidentifiable
    }
    Ok(result)
}

/// Default lifetime-fit start: the histogram peak plus two bins, skipping the
/// instrument-response region.
pub fn default_lifetime_start(h: &TimeTrace) -> f64 {
    let peak = argmax(&h.values);
    h.time_at(peak) + 2.0 * h.dt_ns
}

/// Fit g²(τ) = norm·(1 − (1−g2_0)·exp(−|τ|/τ_c)). Derived key
/// "single_emitter" is 1.0 when g2_0 + σ(g2_0) < 0.5.
pub fn fit_g2(h: &TimeTrace) -> Result<FitResult, FitError> {
    if h.values.len() < 8 {
        return Err(FitError::TooFewSamples {
            need: 8,
            got: h.values.len(),
        });
    }
    let xs = h.times();
    let ys = &h.values;

    // Normalization window: outer 20% of bins on both sides.
    let edge = (ys.len() / 10).max(1);
    let norm0 = (ys[..edge].iter().sum::<f64>() + ys[ys.len() - edge..].iter().sum::<f64>())
        / (2 * edge) as f64;
    let norm0 = norm0.max(1e-300);
    // Bin closest to zero delay.
    let zero_bin = xs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let g0 = (ys[zero_bin] / norm0).clamp(0.0, 1.5);
    let span = xs[xs.len() - 1] - xs[0];
    let tau_c0 = (span / 10.0).max(h.dt_ns);

    let w = poisson_weights(ys);
    let outcome = levenberg_marquardt(
        &AntibunchingDip,
        &xs,
        ys,
        &w,
        &[g0, tau_c0, norm0],
        &LmConfig::default(),
    );
    let mut result = FitResult::from_outcome(&outcome, &["g2_0", "tau_c", "norm"]);
    let verdict = result.param("g2_0") + result.uncertainty("g2_0") < 0.5;
    result
        .derived
        .insert("single_emitter".into(), if verdict { 1.0 } else { 0.0 });
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal, Poisson};

    pub(crate) fn synth_lorentzian(
        center: f64,
        q: f64,
        amplitude: f64,
        offset: f64,
        n: usize,
        halfwidths: f64,
    ) -> Spectrum {
        let fwhm = center / q;
        let axis: Vec<f64> = (0..n)
            .map(|i| center + fwhm * halfwidths * (2.0 * i as f64 / (n - 1) as f64 - 1.0))
            .collect();
        let counts: Vec<f64> = axis
            .iter()
            .map(|&x| {
                let h = fwhm / 2.0;
                offset + amplitude * h * h / ((x - center).powi(2) + h * h)
            })
            .collect();
        Spectrum::new(axis, counts, AxisKind::WavelengthNm).unwrap()
    }

    #[test]
    fn noiseless_lorentzian_recovery() {
        let s = synth_lorentzian(737.0, 1.83e5, 1.0, 0.0, 200, 5.0);
        let fit = fit_lorentzian_peak(&s, None).unwrap();
        assert!(fit.converged);
        assert!((fit.param("center") / 737.0 - 1.0).abs() < 1e-9);
        assert!((fit.derived["q"] / 1.83e5 - 1.0).abs() < 1e-6);
        assert!((fit.param("amplitude") - 1.0).abs() < 1e-6);
        assert!(fit.param("offset").abs() < 1e-6);
    }

    #[test]
    fn noisy_lorentzian_q_within_two_percent() {
        let mut worst: f64 = 0.0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noise = Normal::new(0.0, 0.05).unwrap();
            let clean = synth_lorentzian(737.0, 1.83e5, 1.0, 0.0, 3000, 2.0);
            let counts: Vec<f64> = clean
                .counts()
                .iter()
                .map(|&c| (c + noise.sample(&mut rng)).max(0.0))
                .collect();
            let s = Spectrum::new(clean.axis().to_vec(), counts, AxisKind::WavelengthNm).unwrap();
            let fit = fit_lorentzian_peak(&s, None).unwrap();
            assert!(fit.converged, "seed {seed}");
            worst = worst.max((fit.derived["q"] / 1.83e5 - 1.0).abs());
        }
        assert!(worst < 0.02, "worst Q error {worst}");
    }

    #[test]
    fn flat_spectrum_flagged() {
        let axis: Vec<f64> = (0..50).map(|i| 736.0 + 0.01 * i as f64).collect();
        let s = Spectrum::new(axis, vec![3.0; 50], AxisKind::WavelengthNm).unwrap();
        let fit = fit_lorentzian_peak(&s, None).unwrap();
        assert!(!fit.converged || fit.param("amplitude").abs() < 1e-9);
    }

    pub(crate) fn synth_dip(center_ghz: f64, q: f64, floor: f64, n: usize) -> Spectrum {
        let kappa = center_ghz / q;
        let axis: Vec<f64> = (0..n)
            .map(|i| center_ghz + kappa * 5.0 * (2.0 * i as f64 / (n - 1) as f64 - 1.0))
            .collect();
        let counts: Vec<f64> = axis
            .iter()
            .map(|&x| {
                let h = kappa / 2.0;
                1.0 - (1.0 - floor) * h * h / ((x - center_ghz).powi(2) + h * h)
            })
            .collect();
        Spectrum::new(axis, counts, AxisKind::FrequencyGhz).unwrap()
    }

    #[test]
    fn dip_recovery_at_measured_values() {
        let nu0 = crate::units::C_NM_THZ / 737.0 * 1e3; // GHz
        let s = synth_dip(nu0, 8.4e4, 0.046, 300);
        let fit = fit_reflection_dip(&s, None).unwrap();
        assert!(fit.converged);
        assert!((fit.param("floor") - 0.046).abs() < 1e-4);
        assert!((fit.derived["q"] / 8.4e4 - 1.0).abs() < 1e-3);
        assert!((fit.derived["contrast"] - 0.954).abs() < 1e-4);
    }

    #[test]
    fn full_contrast_dip() {
        let s = synth_dip(4.0677e5, 8.4e4, 0.0, 300);
        let fit = fit_reflection_dip(&s, None).unwrap();
        assert!(fit.converged);
        assert!((fit.derived["contrast"] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn no_dip_flagged() {
        let s = synth_dip(4.0677e5, 8.4e4, 1.0, 300);
        let fit = fit_reflection_dip(&s, None).unwrap();
        assert!(!fit.converged);
    }

    fn synth_lifetime(tau_ns: f64, peak_counts: f64, seed: u64) -> TimeTrace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dt = 0.016;
        let n = 800;
        let rise_bin = 20;
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let mean = if i < rise_bin {
                    peak_counts * i as f64 / rise_bin as f64
                } else {
                    peak_counts * (-(i - rise_bin) as f64 * dt / tau_ns).exp()
                } + 2.0;
                Poisson::new(mean.max(1e-9)).unwrap().sample(&mut rng)
            })
            .collect();
        TimeTrace::new(0.0, dt, values).unwrap()
    }

    #[test]
    fn lifetime_recovery_on_resonance() {
        let h = synth_lifetime(0.47, 1e4, 7);
        let fit = fit_exponential_lifetime(&h, default_lifetime_start(&h)).unwrap();
        assert!(fit.converged);
        assert!(
            (fit.param("tau") / 0.47 - 1.0).abs() < 0.03,
            "{}",
            fit.param("tau")
        );
    }

    #[test]
    fn lifetime_recovery_off_resonance() {
        let h = synth_lifetime(1.3, 1e4, 11);
        let fit = fit_exponential_lifetime(&h, default_lifetime_start(&h)).unwrap();
        assert!(fit.converged);
        assert!(
            (fit.param("tau") / 1.3 - 1.0).abs() < 0.03,
            "{}",
            fit.param("tau")
        );
    }

    #[test]
    fn constant_histogram_unidentifiable() {
        let h = TimeTrace::new(0.0, 0.016, vec![100.0; 400]).unwrap();
        let fit = fit_exponential_lifetime(&h, 0.1).unwrap();
        assert!(!fit.converged);
    }

    fn synth_g2(g2_0: f64, tau_c: f64, norm: f64, seed: u64) -> TimeTrace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dt = 0.256;
        let n = 401;
        let t0 = -(n as f64 - 1.0) / 2.0 * dt;
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let t: f64 = t0 + i as f64 * dt;
                let mean = norm * (1.0 - (1.0 - g2_0) * (-t.abs() / tau_c).exp());
                Poisson::new(mean.max(1e-9)).unwrap().sample(&mut rng)
            })
            .collect();
        TimeTrace::new(t0, dt, values).unwrap()
    }

    #[test]
    fn g2_recovery_at_measured_value() {
        let h = synth_g2(0.31, 2.0, 500.0, 3);
        let fit = fit_g2(&h).unwrap();
        assert!(fit.converged);
        assert!(
            (fit.param("g2_0") - 0.31).abs() < 0.05,
            "{}",
            fit.param("g2_0")
        );
        assert_eq!(fit.derived["single_emitter"], 1.0);
    }

    #[test]
    fn flat_g2_is_poissonian() {
        let h = TimeTrace::new(-50.0, 0.25, vec![400.0; 401]).unwrap();
        let fit = fit_g2(&h).unwrap();
        assert!(
            (fit.param("g2_0") - 1.0).abs() < 0.05,
            "{}",
            fit.param("g2_0")
        );
        assert_eq!(fit.derived["single_emitter"], 0.0);
    }

    #[test]
    fn perfect_antibunching_verdict() {
        let h = synth_g2(0.0, 2.0, 800.0, 5);
        let fit = fit_g2(&h).unwrap();
        assert!(fit.param("g2_0") < 0.1);
        assert_eq!(fit.derived["single_emitter"], 1.0);
    }

    #[test]
    fn axis_offset_and_scale_invariance() {
        let base = synth_lorentzian(737.0, 1e5, 1.0, 0.1, 200, 4.0);
        let fit0 = fit_lorentzian_peak(&base, None).unwrap();
        let offset = 5.0;
        let gain = 37.5;
        let shifted = Spectrum::new(
            base.axis().iter().map(|x| x + offset).collect(),
            base.counts().iter().map(|c| c * gain).collect(),
            AxisKind::WavelengthNm,
        )
        .unwrap();
        let fit1 = fit_lorentzian_peak(&shifted, None).unwrap();
        assert!((fit1.param("center") - fit0.param("center") - offset).abs() < 1e-7);
        assert!((fit1.param("fwhm") / fit0.param("fwhm") - 1.0).abs() < 1e-9);
        assert!((fit1.param("amplitude") / (gain * fit0.param("amplitude")) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uncertainty_shrinks_like_sqrt_n() {
        // Monte Carlo spread of the fitted center vs sample count.
        let spread = |n: usize| {
            let mut centers = Vec::new();
            for seed in 0..60u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed * 131 + n as u64);
                let noise = Normal::new(0.0, 0.05).unwrap();
                let clean = synth_lorentzian(737.0, 1e5, 1.0, 0.0, n, 4.0);
                let counts: Vec<f64> = clean
                    .counts()
                    .iter()
                    .map(|&c| (c + noise.sample(&mut rng)).max(0.0))
                    .collect();
                let s =
                    Spectrum::new(clean.axis().to_vec(), counts, AxisKind::WavelengthNm).unwrap();
                let fit = fit_lorentzian_peak(&s, None).unwrap();
                centers.push(fit.param("center"));
            }
            let mean = centers.iter().sum::<f64>() / centers.len() as f64;
            (centers.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / centers.len() as f64).sqrt()
        };
        let s1 = spread(100);
        let s4 = spread(400);
        let ratio = s1 / s4;
        // Expect 2.0 from 1/sqrt(N); allow 20% slope error.
        assert!((ratio - 2.0).abs() < 0.4 * 2.0, "ratio {ratio}");
    }
}
