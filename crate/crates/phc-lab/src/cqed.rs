//! Cavity-QED figures of merit: Purcell factors, cooperativity, the
//! intrinsic/extrinsic coupling split from the reflection-dip floor, the
//! fiber-coupling efficiency budget, and the Lorentzian detuning rolloff.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{ModeVolume, QualityFactor, RateGhz};

#[derive(Debug, Error, PartialEq)]
pub enum CqedError {
    #[error("tau_on = {tau_on} ns exceeds tau_off = {tau_off} ns (anti-Purcell out of scope)")]
    LifetimeOrder { tau_on: f64, tau_off: f64 },
    #[error("emitter parameter out of range: {name} = {value}")]
    BadEmitterParam { name: &'static str, value: f64 },
    #[error("eta_tot = {eta_tot} exceeds eta_s = {eta_s}: inconsistent calibration")]
    InconsistentCalibration { eta_tot: f64, eta_s: f64 },
    #[error("reflection floor must lie in [0, 1], got {0}")]
    BadReflectionFloor(f64),
}

/// Emitter parameters for the SiV zero-phonon line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterParams {
    /// Natural linewidth γ, GHz.
    pub gamma_ghz: f64,
    /// Fraction of total emission in the ZPL.
    pub debye_waller: f64,
    /// Branching ratio into the D line at 4 K.
    pub branching_d: f64,
    /// Emitter-cavity coupling rate g, GHz.
    pub g_ghz: f64,
}

/// Measured coupling rate g ~ 8 GHz.
pub const G_MEASURED_GHZ: f64 = 8.0;
/// Field-maximum (theoretical) coupling rate g ~ 15.2 GHz.
pub const G_THEORY_GHZ: f64 = 15.2;

impl Default for EmitterParams {
    fn default() -> Self {
        Self {
            gamma_ghz: 0.12,
            debye_waller: 0.70,
            branching_d: 0.193,
            g_ghz: G_MEASURED_GHZ,
        }
    }
}

impl EmitterParams {
    pub fn validate(&self) -> Result<(), CqedError> {
        for (name, value, upper) in [
            ("debye_waller", self.debye_waller, 1.0),
            ("branching_d", self.branching_d, 1.0),
            ("gamma_ghz", self.gamma_ghz, f64::INFINITY),
            ("g_ghz", self.g_ghz, f64::INFINITY),
        ] {
            if !(value > 0.0 && value <= upper) {
                return Err(CqedError::BadEmitterParam { name, value });
            }
        }
        Ok(())
    }

    /// ϵ_ZPL: fraction of total emission in the investigated ZPL transition.
    pub fn zpl_fraction(&self) -> f64 {
        self.debye_waller * self.branching_d
    }
}

/// Ideal Purcell factor F = (3/4π²)·Q/V with V in (λ/n)³ units.
pub fn purcell_ideal(q: QualityFactor, v: ModeVolume) -> f64 {
    3.0 / (4.0 * PI * PI) * q.value() / v.value()
}

/// Lifetime-derived ZPL Purcell factor F_ZPL = (τ_off/τ_on − 1)/ϵ_ZPL.
pub fn purcell_from_lifetimes(
    tau_on_ns: f64,
    tau_off_ns: f64,
    emitter: &EmitterParams,
) -> Result<f64, CqedError> {
    emitter.validate()?;
    if !(tau_on_ns > 0.0 && tau_on_ns <= tau_off_ns) {
        return Err(CqedError::LifetimeOrder {
            tau_on: tau_on_ns,
            tau_off: tau_off_ns,
        });
    }
    Ok((tau_off_ns / tau_on_ns - 1.0) / emitter.zpl_fraction())
}

/// Cooperativity C = 4g²/(κγ).
pub fn cooperativity(g: RateGhz, kappa: RateGhz, gamma: RateGhz) -> f64 {
    4.0 * g.ghz() * g.ghz() / (kappa.ghz() * gamma.ghz())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CouplingRegime {
    Over,
    Under,
    /// The dip alone cannot distinguish over- from under-coupling; both
    /// branch assignments are reported as interchangeable.
    Both,
}

/// Intrinsic/extrinsic decay budget from the loaded Q and the on-resonance
/// reflection floor R₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingBudget {
    pub q_loaded: f64,
    pub r0: f64,
    pub regime: CouplingRegime,
    /// Intrinsic Q; for `Both` this is the smaller branch value and
    /// interchangeable with `q_e`.
    pub q_i: f64,
    pub q_e: f64,
    pub kappa_i_over_kappa: f64,
    pub kappa_e_over_kappa: f64,
}

/// Split κ into κᵢ = κ(1 ± √R₀)/2 and κₑ = κ − κᵢ. Under-coupling means the
/// intrinsic loss dominates (plus branch for κᵢ); over-coupling the reverse.
/// For `Both`, the interchangeable pair {2Q/(1+√R₀), 2Q/(1−√R₀)} is returned
/// as (q_i, q_e).
pub fn split_intrinsic_extrinsic(
    q_loaded: QualityFactor,
    r0: f64,
    regime: CouplingRegime,
) -> Result<CouplingBudget, CqedError> {
    if !(0.0..=1.0).contains(&r0) {
        return Err(CqedError::BadReflectionFloor(r0));
    }
    let q = q_loaded.value();
    let root = r0.sqrt();
    // Fractions of the loaded κ.
    let plus = (1.0 + root) / 2.0;
    let minus = (1.0 - root) / 2.0;
    let (frac_i, frac_e) = match regime {
        CouplingRegime::Over => (minus, plus),
        CouplingRegime::Under => (plus, minus),
        // Report the smaller-Q branch first; the labels are interchangeable.
        CouplingRegime::Both => (plus, minus),
    };
    let q_i = if frac_i > 0.0 {
        q / frac_i
    } else {
        f64::INFINITY
    };
    let q_e = if frac_e > 0.0 {
        q / frac_e
    } else {
        f64::INFINITY
    };
    Ok(CouplingBudget {
        q_loaded: q,
        r0,
        regime,
        q_i,
        q_e,
        kappa_i_over_kappa: frac_i,
        kappa_e_over_kappa: frac_e,
    })
}

/// Fiber-device coupling efficiency from the total-loss budget
/// η_tot = η_s·η_c².
pub fn coupling_efficiency(eta_tot: f64, eta_s: f64) -> Result<f64, CqedError> {
    if !(eta_s > 0.0 && eta_s <= 1.0) || !(0.0..=1.0).contains(&eta_tot) {
        return Err(CqedError::InconsistentCalibration { eta_tot, eta_s });
    }
    if eta_tot > eta_s {
        return Err(CqedError::InconsistentCalibration { eta_tot, eta_s });
    }
    Ok((eta_tot / eta_s).sqrt())
}

/// Lorentzian detuning rolloff F(Δ) = F₀/(1 + (2Δ/κ)²).
pub fn detuning_enhancement(f0: f64, detuning: RateGhz, kappa: RateGhz) -> f64 {
    f0 / (1.0 + (2.0 * detuning.ghz() / kappa.ghz()).powi(2))
}

/// A value plus a note about where it came from (library default, user
/// measurement, derived quantity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenanced {
    pub value: f64,
    pub source: String,
}

impl Provenanced {
    pub fn new(value: f64, source: impl Into<String>) -> Self {
        Self {
            value,
            source: source.into(),
        }
    }
}

/// All cavity-QED figures of merit with full input provenance. The report
/// echoes every input; nothing is silently defaulted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqedReport {
    pub lambda_nm: Provenanced,
    pub q: Provenanced,
    pub mode_volume: Provenanced,
    pub g_ghz: Provenanced,
    pub gamma_ghz: Provenanced,
    pub kappa_ghz: Provenanced,
    pub tau_on_ns: Option<Provenanced>,
    pub tau_off_ns: Option<Provenanced>,
    pub zpl_fraction: Provenanced,
    pub f_ideal: f64,
    pub f_zpl: Option<f64>,
    pub cooperativity: f64,
    pub coupling_budget: Option<CouplingBudget>,
    pub eta_c: Option<Provenanced>,
}

impl CqedReport {
    /// Plain-text rendering with provenance per line.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let mut line = |label: &str, p: &Provenanced| {
            out.push_str(&format!("{label}: {} [{}]\n", p.value, p.source));
        };
        line("wavelength (nm)", &self.lambda_nm);
        line("quality factor", &self.q);
        line("mode volume (lambda/n)^3", &self.mode_volume);
        line("g (GHz)", &self.g_ghz);
        line("gamma (GHz)", &self.gamma_ghz);
        line("kappa (GHz)", &self.kappa_ghz);
        if let Some(t) = &self.tau_on_ns {
            line("tau_on (ns)", t);
        }
        if let Some(t) = &self.tau_off_ns {
            line("tau_off (ns)", t);
        }
        line("ZPL fraction", &self.zpl_fraction);
        out.push_str(&format!("F_ideal: {:.4}\n", self.f_ideal));
        if let Some(f) = self.f_zpl {
            out.push_str(&format!("F_ZPL: {f:.4}\n"));
        }
        out.push_str(&format!("C: {:.4}\n", self.cooperativity));
        if let Some(b) = &self.coupling_budget {
            out.push_str(&format!(
                "Q_i: {:.4e}  Q_e: {:.4e}  (R0 = {}, {:?})\n",
                b.q_i, b.q_e, b.r0, b.regime
            ));
        }
        if let Some(e) = &self.eta_c {
            out.push_str(&format!("eta_c: {} [{}]\n", e.value, e.source));
        }
        out
    }
}
