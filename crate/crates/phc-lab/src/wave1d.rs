//! Analytic/semi-analytic 1D electromagnetics: thin-film transfer matrices,
//! Bragg band edges via the Bloch trace condition, and the symmetric-slab
//! TE0 effective index. This layer serves as the oracle for the 2D solver.
//!
//! Normal incidence, scalar polarization, lossless real indices only.

use num_complex::Complex;
use thiserror::Error;

type C64 = Complex<f64>;

#[derive(Debug, Error, PartialEq)]
pub enum Wave1dError {
    #[error("wavelength range is degenerate: [{0}, {1}] nm")]
    DegenerateRange(f64, f64),
    #[error("layer stack invalid: {0}")]
    BadStack(String),
    #[error("slab parameters invalid: {0}")]
    BadSlab(String),
}

/// A homogeneous lossless layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub n: f64,
    pub t_nm: f64,
}

/// An ordered stack of layers between two semi-infinite ambient media.
/// Light enters from the `ambient_in` side through `layers[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub ambient_in: f64,
    pub ambient_out: f64,
}

impl LayerStack {
    pub fn in_vacuum(layers: Vec<Layer>) -> Self {
        Self {
            layers,
            ambient_in: 1.0,
            ambient_out: 1.0,
        }
    }

    /// N quarter-wave (n_high, n_low) pairs at design wavelength λ₀,
    /// high-index layer first.
    pub fn quarter_wave_pairs(n_high: f64, n_low: f64, pairs: usize, lambda0_nm: f64) -> Self {
        let mut layers = Vec::with_capacity(2 * pairs);
        for _ in 0..pairs {
            layers.push(Layer {
                n: n_high,
                t_nm: lambda0_nm / (4.0 * n_high),
            });
            layers.push(Layer {
                n: n_low,
                t_nm: lambda0_nm / (4.0 * n_low),
            });
        }
        Self::in_vacuum(layers)
    }

    fn validate(&self) -> Result<(), Wave1dError> {
        if self.ambient_in < 1.0 || self.ambient_out < 1.0 {
            return Err(Wave1dError::BadStack("ambient index must be >= 1".into()));
        }
        for l in &self.layers {
            if l.n < 1.0 || !(l.t_nm > 0.0) {
                return Err(Wave1dError::BadStack(format!(
                    "layer n={} t={} nm",
                    l.n, l.t_nm
                )));
            }
        }
        Ok(())
    }
}

/// Result of a normal-incidence transfer-matrix evaluation.
#[derive(Debug, Clone)]
pub struct TransferResult {
    /// Characteristic (field transfer) matrix of the stack.
    pub m: [[C64; 2]; 2],
    /// Power reflectance.
    pub reflectance: f64,
    /// Power transmittance.
    pub transmittance: f64,
    /// Complex amplitude reflection coefficient.
    pub r_amp: C64,
}

/// Characteristic matrix of the layers only (no ambient interfaces).
fn characteristic_matrix(layers: &[Layer], lambda_nm: f64) -> [[C64; 2]; 2] {
    let mut m = [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    ];
    for layer in layers {
        let delta = 2.0 * std::f64::consts::PI * layer.n * layer.t_nm / lambda_nm;
        let (s, c) = delta.sin_cos();
        let ml = [
            [C64::new(c, 0.0), C64::new(0.0, s / layer.n)],
            [C64::new(0.0, s * layer.n), C64::new(c, 0.0)],
        ];
        m = mat_mul(&m, &ml);
    }
    m
}

fn mat_mul(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Normal-incidence transfer matrix with power reflectance/transmittance.
pub fn transfer_matrix(stack: &LayerStack, lambda_nm: f64) -> Result<TransferResult, Wave1dError> {
    if !(lambda_nm > 0.0) {
        return Err(Wave1dError::DegenerateRange(lambda_nm, lambda_nm));
    }
    stack.validate()?;
    let m = characteristic_matrix(&stack.layers, lambda_nm);
    let y_in = C64::new(stack.ambient_in, 0.0);
    let y_out = C64::new(stack.ambient_out, 0.0);
    let b = m[0][0] + m[0][1] * y_out;
    let c = m[1][0] + m[1][1] * y_out;
    let r = (y_in * b - c) / (y_in * b + c);
    let t = 2.0 * y_in / (y_in * b + c);
    let reflectance = r.norm_sqr();
    let transmittance = (stack.ambient_out / stack.ambient_in) * t.norm_sqr();
    Ok(TransferResult {
        m,
        reflectance,
        transmittance,
        r_amp: r,
    })
}

/// A passband/stopband boundary found by the Bloch trace condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEdge {
    pub lambda_nm: f64,
    /// True when the stopband lies on the longer-wavelength side of the edge.
    pub gap_above: bool,
}

/// Half-trace of the unit-cell characteristic matrix; |value| > 1 in a gap.
pub fn bloch_half_trace(unit_cell: &LayerStack, lambda_nm: f64) -> Result<f64, Wave1dError> {
    if !(lambda_nm > 0.0) {
        return Err(Wave1dError::DegenerateRange(lambda_nm, lambda_nm));
    }
    unit_cell.validate()?;
    let m = characteristic_matrix(&unit_cell.layers, lambda_nm);
    Ok(0.5 * (m[0][0] + m[1][1]).re)
}

/// Scan the Bloch condition across a wavelength range and bisect each
/// |trace|/2 = 1 crossing. Returns edges sorted by wavelength.
pub fn bragg_band_edges(
    unit_cell: &LayerStack,
    lambda_range_nm: (f64, f64),
    n_samples: usize,
) -> Result<Vec<BandEdge>, Wave1dError> {
    let (lo, hi) = lambda_range_nm;
    if !(lo > 0.0 && hi > lo) || n_samples < 2 {
        return Err(Wave1dError::DegenerateRange(lo, hi));
    }
    unit_cell.validate()?;
    let g = |lambda: f64| bloch_half_trace(unit_cell, lambda).map(|t| t.abs() - 1.0);
    let step = (hi - lo) / (n_samples - 1) as f64;
    let mut edges = Vec::new();
    let mut prev = g(lo)?;
    for i in 1..n_samples {
        let lambda = lo + i as f64 * step;
        let cur = g(lambda)?;
        if prev * cur < 0.0 {
            let mut a = lambda - step;
            let mut b = lambda;
            let mut fa = prev;
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let fm = g(mid)?;
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
                if b - a < 1e-12 * lambda {
                    break;
                }
            }
            edges.push(BandEdge {
                lambda_nm: 0.5 * (a + b),
                gap_above: cur > 0.0,
            });
        }
        prev = cur;
    }
    Ok(edges)
}

/// Stopband intervals (λ_lo, λ_hi) inside the scanned range.
pub fn band_gaps(
    unit_cell: &LayerStack,
    lambda_range_nm: (f64, f64),
    n_samples: usize,
) -> Result<Vec<(f64, f64)>, Wave1dError> {
    let edges = bragg_band_edges(unit_cell, lambda_range_nm, n_samples)?;
    let mut gaps = Vec::new();
    let mut open: Option<f64> = None;
    for e in &edges {
        if e.gap_above {
            open = Some(e.lambda_nm);
        } else if let Some(start) = open.take() {
            gaps.push((start, e.lambda_nm));
        }
    }
    Ok(gaps)
}

/// TE0 effective index of a symmetric slab, solving tan(κd/2) = γ/κ by
/// bisection to machine-level residual. The TE0 mode of a symmetric slab
/// always exists, so this cannot hit cutoff.
pub fn slab_neff(n_core: f64, n_clad: f64, d_nm: f64, lambda_nm: f64) -> Result<f64, Wave1dError> {
    if !(n_core > n_clad && n_clad >= 1.0) {
        return Err(Wave1dError::BadSlab(format!(
            "need n_core > n_clad >= 1, got {n_core}, {n_clad}"
        )));
    }
    if !(d_nm > 0.0 && lambda_nm > 0.0) {
        return Err(Wave1dError::BadSlab(format!(
            "need positive d and lambda, got {d_nm} nm, {lambda_nm} nm"
        )));
    }
    let k0 = 2.0 * std::f64::consts::PI / lambda_nm;
    // TE0 root lies where κd/2 < π/2; restrict the bracket accordingly so the
    // residual is monotone inside it.
    let kappa_bound = std::f64::consts::PI / d_nm; // κ at κd/2 = π/2
    let neff_floor = if k0 * n_core > kappa_bound {
        ((n_core * n_core) - (kappa_bound / k0).powi(2)).sqrt()
    } else {
        0.0
    };
    let mut lo = neff_floor.max(n_clad) + 1e-15;
    let mut hi = n_core - 1e-15;
    let residual = |neff: f64| {
        let kappa = k0 * (n_core * n_core - neff * neff).max(0.0).sqrt();
        let gamma = k0 * (neff * neff - n_clad * n_clad).max(0.0).sqrt();
        (kappa * d_nm / 2.0).tan() * kappa - gamma
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stack_is_transparent() {
        let r = transfer_matrix(&LayerStack::in_vacuum(vec![]), 737.0).unwrap();
        assert!(r.reflectance.abs() < 1e-15);
        assert!((r.transmittance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fresnel_single_interface() {
        // Half-space step 1 -> 2: R = ((1-2)/(1+2))^2 = 1/9.
        let stack = LayerStack {
            layers: vec![],
            ambient_in: 1.0,
            ambient_out: 2.0,
        };
        let r = transfer_matrix(&stack, 737.0).unwrap();
        assert!((r.reflectance - 1.0 / 9.0).abs() < 1e-14);
        assert!((r.transmittance - 8.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn dbr_matches_closed_form() {
        let n_h = 2.41;
        let pairs = 5;
        let stack = LayerStack::quarter_wave_pairs(n_h, 1.0, pairs, 737.0);
        let r = transfer_matrix(&stack, 737.0).unwrap();
        let rho = n_h.powi(2 * pairs as i32);
        let expect = ((rho - 1.0) / (rho + 1.0)).powi(2);
        assert!((r.reflectance - expect).abs() < 1e-10, "{}", r.reflectance);
    }

    #[test]
    fn energy_conservation_random_stacks() {
        let stacks = [
            LayerStack::in_vacuum(vec![
                Layer {
                    n: 1.5,
                    t_nm: 113.0,
                },
                Layer {
                    n: 2.41,
                    t_nm: 77.0,
                },
                Layer {
                    n: 1.9,
                    t_nm: 201.0,
                },
            ]),
            LayerStack {
                layers: vec![
                    Layer { n: 3.5, t_nm: 50.0 },
                    Layer {
                        n: 1.2,
                        t_nm: 500.0,
                    },
                ],
                ambient_in: 1.0,
                ambient_out: 1.45,
            },
        ];
        for stack in &stacks {
            for lambda in [400.0, 737.0, 1529.0] {
                let r = transfer_matrix(stack, lambda).unwrap();
                assert!(
                    (r.reflectance + r.transmittance - 1.0).abs() < 1e-12,
                    "R+T at {lambda}"
                );
            }
        }
    }

    #[test]
    fn unimodular_characteristic_matrix() {
        let stack = LayerStack::quarter_wave_pairs(2.41, 1.0, 4, 737.0);
        let r = transfer_matrix(&stack, 651.3).unwrap();
        let det = r.m[0][0] * r.m[1][1] - r.m[0][1] * r.m[1][0];
        assert!((det - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    fn quarter_wave_cell() -> LayerStack {
        LayerStack::in_vacuum(vec![
            Layer {
                n: 2.41,
                t_nm: 737.0 / (4.0 * 2.41),
            },
            Layer {
                n: 1.0,
                t_nm: 737.0 / 4.0,
            },
        ])
    }

    #[test]
    fn homogeneous_cell_has_no_gap() {
        let cell = LayerStack::in_vacuum(vec![
            Layer {
                n: 2.0,
                t_nm: 100.0,
            },
            Layer { n: 2.0, t_nm: 60.0 },
        ]);
        let gaps = band_gaps(&cell, (400.0, 1200.0), 2000).unwrap();
        assert!(gaps.is_empty());
        // |half trace| <= 1 everywhere in a uniform medium.
        for i in 0..100 {
            let lambda = 400.0 + 8.0 * i as f64;
            assert!(bloch_half_trace(&cell, lambda).unwrap().abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn quarter_wave_cell_gap_contains_design_wavelength() {
        let gaps = band_gaps(&quarter_wave_cell(), (500.0, 1100.0), 4000).unwrap();
        assert!(
            gaps.iter().any(|&(lo, hi)| lo < 737.0 && 737.0 < hi),
            "{gaps:?}"
        );
    }

    #[test]
    fn edges_bracket_sign_changes() {
        let cell = quarter_wave_cell();
        let edges = bragg_band_edges(&cell, (500.0, 1100.0), 4000).unwrap();
        assert!(!edges.is_empty());
        for e in &edges {
            let lo = bloch_half_trace(&cell, e.lambda_nm - 0.01).unwrap().abs() - 1.0;
            let hi = bloch_half_trace(&cell, e.lambda_nm + 0.01).unwrap().abs() - 1.0;
            assert!(lo * hi < 0.0, "edge at {} not bracketed", e.lambda_nm);
        }
    }

    #[test]
    fn band_edges_scale_with_geometry() {
        let s = 1.17;
        let cell = quarter_wave_cell();
        let scaled = LayerStack::in_vacuum(
            cell.layers
                .iter()
                .map(|l| Layer {
                    n: l.n,
                    t_nm: l.t_nm * s,
                })
                .collect(),
        );
        let e1 = bragg_band_edges(&cell, (500.0, 1100.0), 4000).unwrap();
        let e2 = bragg_band_edges(&scaled, (500.0 * s, 1100.0 * s), 4000).unwrap();
        assert_eq!(e1.len(), e2.len());
        for (a, b) in e1.iter().zip(&e2) {
            assert!((b.lambda_nm / a.lambda_nm - s).abs() < 1e-6);
        }
    }

    #[test]
    fn trace_invariant_under_cyclic_rotation() {
        let cell = LayerStack::in_vacuum(vec![
            Layer {
                n: 2.41,
                t_nm: 76.0,
            },
            Layer {
                n: 1.0,
                t_nm: 184.0,
            },
            Layer { n: 1.7, t_nm: 60.0 },
        ]);
        let mut rotated_layers = cell.layers.clone();
        rotated_layers.rotate_left(1);
        let rotated = LayerStack::in_vacuum(rotated_layers);
        for lambda in [520.0, 737.0, 990.0] {
            let a = bloch_half_trace(&cell, lambda).unwrap();
            let b = bloch_half_trace(&rotated, lambda).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_range_rejected() {
        let cell = quarter_wave_cell();
        assert!(bragg_band_edges(&cell, (737.0, 737.0), 100).is_err());
        assert!(bragg_band_edges(&cell, (800.0, 700.0), 100).is_err());
    }

    /// Independent coarse grid-search oracle for the TE0 dispersion root.
    fn slab_neff_grid_oracle(n_core: f64, n_clad: f64, d_nm: f64, lambda_nm: f64) -> (f64, f64) {
        let k0 = 2.0 * std::f64::consts::PI / lambda_nm;
        let f = |neff: f64| {
            let kappa = k0 * (n_core * n_core - neff * neff).max(0.0).sqrt();
            let gamma = k0 * (neff * neff - n_clad * n_clad).max(0.0).sqrt();
            (kappa * d_nm / 2.0).tan() * kappa - gamma
        };
        let n_grid = 4_000_000;
        let lo = n_clad + 1e-9;
        let hi = n_core - 1e-9;
        let mut prev = f(lo);
        for i in 1..=n_grid {
            let x = lo + (hi - lo) * i as f64 / n_grid as f64;
            let cur = f(x);
            // Skip tan branch jumps (both huge, opposite sign).
            if prev > 0.0 && cur < 0.0 && prev.abs() < 1e6 {
                return (x - (hi - lo) / n_grid as f64, x);
            }
            prev = cur;
        }
        panic!("oracle found no root");
    }

    #[test]
    fn slab_neff_matches_grid_oracle() {
        let neff = slab_neff(2.41, 1.0, 160.0, 737.0).unwrap();
        assert!((neff - 2.00).abs() < 0.02, "{neff}");
        let (lo, hi) = slab_neff_grid_oracle(2.41, 1.0, 160.0, 737.0);
        assert!(
            neff >= lo - 1e-6 && neff <= hi + 1e-6,
            "{neff} not in [{lo}, {hi}]"
        );
        // Residual at the returned root is tiny.
        let k0 = 2.0 * std::f64::consts::PI / 737.0;
        let kappa = k0 * (2.41f64.powi(2) - neff * neff).sqrt();
        let gamma = k0 * (neff * neff - 1.0).sqrt();
        assert!(((kappa * 80.0).tan() - gamma / kappa).abs() < 1e-9);
    }

    #[test]
    fn thick_slab_approaches_core_index() {
        let neff = slab_neff(2.41, 1.0, 1e6, 737.0).unwrap();
        assert!(2.41 - neff < 1e-6, "{neff}");
    }

    #[test]
    fn neff_monotone_in_thickness_and_wavelength() {
        let mut prev = 0.0;
        for d in [60.0, 100.0, 160.0, 240.0, 400.0, 800.0] {
            let neff = slab_neff(2.41, 1.0, d, 737.0).unwrap();
            assert!(neff > prev, "d={d}");
            prev = neff;
        }
        let mut prev = f64::INFINITY;
        for lambda in [500.0, 737.0, 1000.0, 1529.0, 2000.0] {
            let neff = slab_neff(2.41, 1.0, 160.0, lambda).unwrap();
            assert!(neff < prev, "lambda={lambda}");
            prev = neff;
        }
    }

    #[test]
    fn telecom_neff_below_visible() {
        let visible = slab_neff(2.41, 1.0, 160.0, 737.0).unwrap();
        let telecom = slab_neff(2.41, 1.0, 160.0, 1529.0).unwrap();
        assert!(telecom < visible);
    }

    #[test]
    fn invalid_slab_rejected() {
        assert!(slab_neff(1.0, 1.0, 160.0, 737.0).is_err());
        assert!(slab_neff(2.41, 1.0, 0.0, 737.0).is_err());
        assert!(slab_neff(2.41, 1.0, 160.0, -5.0).is_err());
    }
}
