//! Physical quantities and exact unit conversions shared by every module.
//!
//! All public interfaces carry unit-bearing newtypes; raw numbers never cross
//! module boundaries. The speed of light is fixed to the exact SI value.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light, exact SI value, m/s.
pub const C_M_PER_S: f64 = 299_792_458.0;
/// Speed of light in nm·THz (numerically identical to nm/ps).
pub const C_NM_THZ: f64 = 299_792.458;
/// Speed of light in nm/fs.
pub const C_NM_PER_FS: f64 = 299.792458;

#[derive(Debug, Error, PartialEq)]
pub enum UnitsError {
    #[error("wavelength must be positive, got {0} nm")]
    NonPositiveWavelength(f64),
    #[error("frequency must be positive, got {0} THz")]
    NonPositiveFrequency(f64),
    #[error("rate must be nonnegative, got {0} GHz")]
    NegativeRate(f64),
    #[error("quality factor must be positive, got {0}")]
    NonPositiveQ(f64),
    #[error("mode volume must be positive, got {0}")]
    NonPositiveModeVolume(f64),
    #[error("linewidth {fwhm_nm} nm must lie in (0, {lambda_nm} nm)")]
    InvalidFwhm { lambda_nm: f64, fwhm_nm: f64 },
}

/// Vacuum wavelength in nanometres.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Wavelength(f64);

impl Wavelength {
    pub fn new(nm: f64) -> Result<Self, UnitsError> {
        if nm > 0.0 && nm.is_finite() {
            Ok(Self(nm))
        } else {
            Err(UnitsError::NonPositiveWavelength(nm))
        }
    }

    pub fn nm(self) -> f64 {
        self.0
    }

    pub fn to_frequency(self) -> Frequency {
        Frequency(C_NM_THZ / self.0)
    }
}

/// Optical frequency in terahertz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Frequency(f64);

impl Frequency {
    pub fn new(thz: f64) -> Result<Self, UnitsError> {
        if thz > 0.0 && thz.is_finite() {
            Ok(Self(thz))
        } else {
            Err(UnitsError::NonPositiveFrequency(thz))
        }
    }

    pub fn thz(self) -> f64 {
        self.0
    }

    pub fn ghz(self) -> f64 {
        self.0 * 1e3
    }

    pub fn to_wavelength(self) -> Wavelength {
        Wavelength(C_NM_THZ / self.0)
    }
}

/// Decay rate or linewidth (κ, γ, g) in gigahertz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct RateGhz(f64);

impl RateGhz {
    pub fn new(ghz: f64) -> Result<Self, UnitsError> {
        if ghz >= 0.0 && ghz.is_finite() {
            Ok(Self(ghz))
        } else {
            Err(UnitsError::NegativeRate(ghz))
        }
    }

    pub fn ghz(self) -> f64 {
        self.0
    }
}

/// Dimensionless resonance quality factor, Q = ν₀/κ = λ₀/Δλ.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct QualityFactor(f64);

impl QualityFactor {
    pub fn new(q: f64) -> Result<Self, UnitsError> {
        if q > 0.0 && q.is_finite() {
            Ok(Self(q))
        } else {
            Err(UnitsError::NonPositiveQ(q))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Refractive index of diamond used for mode-volume normalization.
pub const DIAMOND_INDEX: f64 = 2.41;

/// Mode volume in units of (λ/n_ref)³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeVolume {
    v: f64,
    n_ref: f64,
}

impl ModeVolume {
    pub fn new(v: f64, n_ref: f64) -> Result<Self, UnitsError> {
        if v > 0.0 && v.is_finite() && n_ref >= 1.0 {
            Ok(Self { v, n_ref })
        } else {
            Err(UnitsError::NonPositiveModeVolume(v))
        }
    }

    /// Mode volume with the default diamond normalization index.
    pub fn in_diamond(v: f64) -> Result<Self, UnitsError> {
        Self::new(v, DIAMOND_INDEX)
    }

    pub fn value(self) -> f64 {
        self.v
    }

    pub fn n_ref(self) -> f64 {
        self.n_ref
    }
}

/// ν = c/λ with c exact.
pub fn wavelength_to_frequency(lambda: Wavelength) -> Frequency {
    lambda.to_frequency()
}

/// Cavity decay rate κ = ν₀/Q in GHz.
pub fn q_to_kappa(q: QualityFactor, lambda: Wavelength) -> RateGhz {
    RateGhz(lambda.to_frequency().ghz() / q.value())
}

/// Q = λ₀/Δλ_FWHM.
pub fn fwhm_to_q(lambda: Wavelength, fwhm_nm: f64) -> Result<QualityFactor, UnitsError> {
    if !(fwhm_nm > 0.0 && fwhm_nm < lambda.nm()) {
        return Err(UnitsError::InvalidFwhm {
            lambda_nm: lambda.nm(),
            fwhm_nm,
        });
    }
    QualityFactor::new(lambda.nm() / fwhm_nm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nm(v: f64) -> Wavelength {
        Wavelength::new(v).unwrap()
    }

    #[test]
    fn frequency_at_siv_line() {
        let f = wavelength_to_frequency(nm(737.0));
        assert!((f.thz() - 406.77).abs() < 0.005, "{}", f.thz());
    }

    #[test]
    fn c_expressed_in_nm_thz() {
        let f = wavelength_to_frequency(nm(299.792458));
        assert!((f.thz() - 1000.0).abs() < 1e-9, "{}", f.thz());
    }

    #[test]
    fn telecom_row_frequency() {
        let f = wavelength_to_frequency(nm(1529.0));
        assert!((f.thz() - 196.07).abs() < 0.005, "{}", f.thz());
    }

    #[test]
    fn rejects_non_positive_wavelength() {
        assert!(Wavelength::new(0.0).is_err());
        assert!(Wavelength::new(-5.0).is_err());
        assert!(Wavelength::new(f64::NAN).is_err());
    }

    #[test]
    fn kappa_at_measured_qs() {
        let k = q_to_kappa(QualityFactor::new(1.8e5).unwrap(), nm(737.0));
        assert!((k.ghz() - 2.26).abs() < 0.01, "{}", k.ghz());
        let k = q_to_kappa(QualityFactor::new(8.4e4).unwrap(), nm(737.0));
        assert!((k.ghz() - 4.84).abs() < 0.01, "{}", k.ghz());
        let k = q_to_kappa(QualityFactor::new(4.0677e5).unwrap(), nm(737.0));
        assert!((k.ghz() - 1.000).abs() < 1e-3, "{}", k.ghz());
    }

    #[test]
    fn q_from_fwhm() {
        assert_eq!(fwhm_to_q(nm(737.0), 0.00737).unwrap().value(), 1.0e5);
        let q = fwhm_to_q(nm(737.0), 0.004027).unwrap();
        assert!((q.value() / 1.83e5 - 1.0).abs() < 1e-3);
        let q = fwhm_to_q(nm(746.0), 0.0046625).unwrap();
        assert!((q.value() / 1.6e5 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn fwhm_wider_than_line_rejected() {
        assert!(fwhm_to_q(nm(737.0), 737.0).is_err());
        assert!(fwhm_to_q(nm(737.0), 800.0).is_err());
        assert!(fwhm_to_q(nm(737.0), 0.0).is_err());
    }

    #[test]
    fn kappa_times_q_is_frequency() {
        for &q in &[1.0, 1e3, 8.4e4, 1.8e5, 1e7] {
            let lambda = nm(737.0);
            let kappa = q_to_kappa(QualityFactor::new(q).unwrap(), lambda);
            let nu_ghz = lambda.to_frequency().ghz();
            assert!((kappa.ghz() * q / nu_ghz - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn round_trip_within_one_ulp(lambda_nm in 200.0f64..2000.0) {
            let back = nm(lambda_nm).to_frequency().to_wavelength().nm();
            let ulp = f64::EPSILON * lambda_nm;
            prop_assert!((back - lambda_nm).abs() <= ulp);
        }

        // First-order equivalence of the two Q definitions.
        #[test]
        fn q_definitions_agree_to_first_order(
            lambda_nm in 400.0f64..1600.0,
            rel_fwhm in 1e-7f64..1e-3,
        ) {
            let fwhm = lambda_nm * rel_fwhm;
            let q_lambda = fwhm_to_q(nm(lambda_nm), fwhm).unwrap().value();
            let nu0 = nm(lambda_nm).to_frequency().thz();
            let dnu = C_NM_THZ * fwhm / (lambda_nm * lambda_nm);
            let q_nu = nu0 / dnu;
            prop_assert!(((q_lambda - q_nu) / q_lambda).abs() < 10.0 * rel_fwhm);
        }
    }
}
