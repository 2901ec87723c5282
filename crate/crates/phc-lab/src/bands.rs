//! Plane-wave expansion for TE bands of a triangular lattice of circular
//! air holes in an effective-index slab. Frequencies are reported in
//! normalized units a/lambda; only the hole-radius-to-pitch ratio and the
//! background permittivity enter the eigenproblem.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BandsError {
    #[error("invalid band config: {0}")]
    BadConfig(String),
}

/// Triangular-lattice band calculation inputs. `n_pw` is the hexagonal
/// truncation order: reciprocal vectors m b1 + n b2 with
/// |m|, |n|, |m - n| <= n_pw, a set closed under 60 degree rotation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BandsConfig {
    pub r_over_a: f64,
    /// Background (slab effective) permittivity; holes are air.
    pub eps_bg: f64,
    pub n_pw: usize,
    pub n_bands: usize,
}

impl BandsConfig {
    pub fn new(r_over_a: f64, eps_bg: f64) -> Self {
        Self {
            r_over_a,
            eps_bg,
            n_pw: 7,
            n_bands: 6,
        }
    }

    fn validate(&self) -> Result<(), BandsError> {
        if !(self.r_over_a >= 0.0 && self.r_over_a < 0.5) {
            return Err(BandsError::BadConfig(format!(
                "r/a = {} outside [0, 0.5)",
                self.r_over_a
            )));
        }
        if !(self.eps_bg >= 1.0) {
            return Err(BandsError::BadConfig(format!(
                "eps_bg = {} below 1",
                self.eps_bg
            )));
        }
        if self.n_pw < 2 || self.n_bands == 0 {
            return Err(BandsError::BadConfig(format!(
                "n_pw = {}, n_bands = {}",
                self.n_pw, self.n_bands
            )));
        }
        Ok(())
    }
}

/// High-symmetry points of the triangular lattice, fractional in (b1, b2).
pub const GAMMA: (f64, f64) = (0.0, 0.0);
pub const M_POINT: (f64, f64) = (0.5, 0.0);
pub const K_POINT: (f64, f64) = (2.0 / 3.0, 1.0 / 3.0);

/// Reciprocal basis in units of 2 pi / a, for a1 = a(1, 0),
/// a2 = a(1/2, sqrt(3)/2).
const B1: (f64, f64) = (1.0, -0.577_350_269_189_625_8);
const B2: (f64, f64) = (0.0, 1.154_700_538_379_251_5);

fn hex_g_set(n: usize) -> Vec<(i32, i32)> {
    let n = n as i32;
    let mut g = Vec::new();
    for m in -n..=n {
        for k in -n..=n {
            if (m - k).abs() <= n {
                g.push((m, k));
            }
        }
    }
    g
}

fn g_cartesian(m: i32, n: i32) -> (f64, f64) {
    let tau = 2.0 * std::f64::consts::PI;
    (
        tau * (m as f64 * B1.0 + n as f64 * B2.0),
        tau * (m as f64 * B1.1 + n as f64 * B2.1),
    )
}

/// Fourier coefficient of 1/eps for a circular air hole of radius r in a
/// unit cell of filling fraction f = (2 pi / sqrt(3)) (r/a)^2.
fn inv_eps_coefficient(g_norm: f64, r_over_a: f64, eps_bg: f64) -> f64 {
    let f = 2.0 * std::f64::consts::PI / 3.0f64.sqrt() * r_over_a * r_over_a;
    let contrast = 1.0 - 1.0 / eps_bg; // 1/eps_hole - 1/eps_bg with air holes
    if g_norm < 1e-9 {
        // G = 0: unit-cell average of 1/eps.
        return 1.0 / eps_bg + contrast * f;
    }
    let x = g_norm * r_over_a;
    // 2 J1(x)/x -> 1 - x^2/8 as x -> 0 (r -> 0 included).
    let shape = if x < 1e-6 {
        1.0 - x * x / 8.0
    } else {
        2.0 * bessel_j1(x) / x
    };
    contrast * f * shape
}

/// TE-band frequencies a/lambda at one Bloch vector (fractional in b1, b2),
/// sorted ascending.
pub fn te_bands(cfg: &BandsConfig, k_frac: (f64, f64)) -> Result<Vec<f64>, BandsError> {
    cfg.validate()?;
    let gs = hex_g_set(cfg.n_pw);
    let n = gs.len();
    if cfg.n_bands > n {
        return Err(BandsError::BadConfig(format!(
            "{} bands requested from a {} plane-wave basis",
            cfg.n_bands, n
        )));
    }
    let tau = 2.0 * std::f64::consts::PI;
    let kx = tau * (k_frac.0 * B1.0 + k_frac.1 * B2.0);
    let ky = tau * (k_frac.0 * B1.1 + k_frac.1 * B2.1);

    let kg: Vec<(f64, f64)> = gs
        .iter()
        .map(|&(m, nn)| {
            let (gx, gy) = g_cartesian(m, nn);
            (kx + gx, ky + gy)
        })
        .collect();

    let mut theta = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let dm = gs[i].0 - gs[j].0;
            let dn = gs[i].1 - gs[j].1;
            let (dgx, dgy) = g_cartesian(dm, dn);
            let eta = inv_eps_coefficient(dgx.hypot(dgy), cfg.r_over_a, cfg.eps_bg);
            let dot = kg[i].0 * kg[j].0 + kg[i].1 * kg[j].1;
            let v = eta * dot;
            theta[(i, j)] = v;
            theta[(j, i)] = v;
        }
    }

    let mut eigs: Vec<f64> = theta
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt() / tau)
        .collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs.truncate(cfg.n_bands);
    Ok(eigs)
}

/// One row of a band structure: the k-point and its band frequencies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandPoint {
    pub k_frac: (f64, f64),
    /// Path label when the point is a high-symmetry vertex.
    pub label: Option<String>,
    pub freqs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandStructure {
    pub points: Vec<BandPoint>,
    /// First TE gap (lower edge, upper edge) in a/lambda, if open.
    pub gap: Option<(f64, f64)>,
    /// Set when the gap edges move by more than 0.5% between truncation
    /// orders n_pw and n_pw + 2.
    pub convergence_warning: Option<String>,
}

/// Gamma - M - K - Gamma path with `n_seg` intervals per segment.
pub fn gamma_m_k_path(n_seg: usize) -> Vec<((f64, f64), Option<String>)> {
    let verts = [
        (GAMMA, "Gamma"),
        (M_POINT, "M"),
        (K_POINT, "K"),
        (GAMMA, "Gamma"),
    ];
    let mut path = Vec::new();
    for w in 0..verts.len() - 1 {
        let (a, la) = verts[w];
        let (b, _) = verts[w + 1];
        for s in 0..n_seg {
            let t = s as f64 / n_seg as f64;
            let k = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
            path.push((k, (s == 0).then(|| la.to_string())));
        }
    }
    path.push((GAMMA, Some("Gamma".to_string())));
    path
}

fn gap_edges(points: &[BandPoint]) -> Option<(f64, f64)> {
    let lower = points
        .iter()
        .map(|p| p.freqs[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let upper = points
        .iter()
        .filter(|p| p.freqs.len() > 1)
        .map(|p| p.freqs[1])
        .fold(f64::INFINITY, f64::min);
    (upper > lower).then_some((lower, upper))
}

/// Bands along Gamma - M - K - Gamma, with the first-gap edges and a
/// convergence check against a finer truncation.
pub fn band_structure(cfg: &BandsConfig, n_seg: usize) -> Result<BandStructure, BandsError> {
    cfg.validate()?;
    if n_seg < 2 {
        return Err(BandsError::BadConfig("n_seg below 2".into()));
    }
    let path = gamma_m_k_path(n_seg);
    let mut points = Vec::with_capacity(path.len());
    for (k, label) in &path {
        points.push(BandPoint {
            k_frac: *k,
            label: label.clone(),
            freqs: te_bands(cfg, *k)?,
        });
    }
    let gap = gap_edges(&points);

    let convergence_warning = if let Some((lo, hi)) = gap {
        let finer = BandsConfig {
            n_pw: cfg.n_pw + 2,
            ..*cfg
        };
        // Gap edges are extremized at M and K for this lattice; checking
        // the vertices keeps the refinement cheap.
        let m_f = te_bands(&finer, M_POINT)?;
        let k_f = te_bands(&finer, K_POINT)?;
        let lo_f = m_f[0].max(k_f[0]);
        let hi_f = m_f[1].min(k_f[1]);
        let drift = ((lo_f - lo).abs() / lo).max((hi_f - hi).abs() / hi);
        (drift > 5e-3).then(|| {
            format!(
                "gap edges moved {:.2}% between n_pw {} and {}",
                drift * 100.0,
                cfg.n_pw,
                cfg.n_pw + 2
            )
        })
    } else {
        None
    };

    Ok(BandStructure {
        points,
        gap,
        convergence_warning,
    })
}

/// Bessel function of the first kind, order one. Power series below x = 16,
/// Hankel asymptotic expansion above; |J1| error under 1e-9 on both sides
/// of the split.
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    if ax < 16.0 {
        let half = ax / 2.0;
        let h2 = half * half;
        let mut term = half;
        let mut sum = term;
        for k in 1..60 {
            term *= -h2 / (k as f64 * (k + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-30) {
                break;
            }
        }
        sign * sum
    } else {
        // Hankel series coefficients for order one (mu = 4).
        let i2 = 1.0 / (8.0 * ax * (8.0 * ax));
        let p = 1.0 + i2 * (7.5 - i2 * (590.625 - i2 * 177_364.687_5));
        let q = (3.0 - i2 * (52.5 - i2 * (9_095.625 - i2 * 4_180_739.062_5))) / (8.0 * ax);
        let chi = ax - 0.75 * std::f64::consts::PI;
        sign * (2.0 / (std::f64::consts::PI * ax)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}
