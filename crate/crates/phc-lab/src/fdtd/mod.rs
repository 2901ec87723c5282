//! 2D finite-difference time-domain solver in the effective-index
//! approximation of the thin diamond film: TE set with out-of-plane
//! magnetic field, PML boundaries, ringdown monitors, and field snapshots
//! for mode volume and perturbation theory.

mod sim;

pub use sim::{
    run_fdtd, Boundaries, FdtdOutput, Monitor, MonitorComponent, SimConfig, SourceConfig,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::HoleList;
use crate::units::{ModeVolume, UnitsError};

#[derive(Debug, Error)]
pub enum FdtdError {
    #[error("resolution too coarse: dx = {dx} nm > r_min/4 = {limit} nm")]
    ResolutionGuard { dx: f64, limit: f64 },
    #[error("grid too small: {nx} x {ny} cells (minimum 16 x 16)")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
    #[error("field divergence at step {step}: |field| exceeded {threshold:e}")]
    Divergence { step: usize, threshold: f64 },
    #[error("degenerate field: all samples zero")]
    DegenerateField,
    #[error(transparent)]
    Units(#[from] UnitsError),
}

/// Uniform square-cell permittivity raster. Cell (i, j) is centered at
/// (x0 + i·dx, y0 + j·dx); `eps` is row-major with i fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub dx_nm: f64,
    pub nx: usize,
    pub ny: usize,
    pub x0_nm: f64,
    pub y0_nm: f64,
    pub eps: Vec<f64>,
}

impl Grid2D {
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x0_nm + i as f64 * self.dx_nm
    }

    pub fn y_at(&self, j: usize) -> f64 {
        self.y0_nm + j as f64 * self.dx_nm
    }

    /// Nearest cell to a physical position, clamped to the grid.
    pub fn nearest_cell(&self, x_nm: f64, y_nm: f64) -> (usize, usize) {
        let i = ((x_nm - self.x0_nm) / self.dx_nm).round().max(0.0) as usize;
        let j = ((y_nm - self.y0_nm) / self.dx_nm).round().max(0.0) as usize;
        (i.min(self.nx - 1), j.min(self.ny - 1))
    }

    /// Uniform grid with ε = 1 everywhere (vacuum test domains).
    pub fn vacuum(dx_nm: f64, nx: usize, ny: usize) -> Result<Self, FdtdError> {
        if nx < 16 || ny < 16 {
            return Err(FdtdError::GridTooSmall { nx, ny });
        }
        Ok(Self {
            dx_nm,
            nx,
            ny,
            x0_nm: 0.0,
            y0_nm: 0.0,
            eps: vec![1.0; nx * ny],
        })
    }
}

/// Subpixel sampling density for the ε raster (per axis).
const SUBSAMPLES: usize = 4;

/// Rasterize a hole layout onto a permittivity grid: ε = n_eff² in material,
/// 1 in holes and outside the outline, with area-weighted subpixel smoothing
/// on a 4×4 subgrid per cell.
pub fn rasterize(
    h: &HoleList,
    n_eff: f64,
    dx_nm: f64,
    padding_nm: f64,
) -> Result<Grid2D, FdtdError> {
    let r_min = h
        .holes
        .iter()
        .filter(|hole| hole.r > 0.0)
        .map(|hole| hole.r)
        .fold(f64::INFINITY, f64::min);
    if r_min.is_finite() && dx_nm > r_min / 4.0 {
        return Err(FdtdError::ResolutionGuard {
            dx: dx_nm,
            limit: r_min / 4.0,
        });
    }

    let x_min = h.outline.x_min - padding_nm;
    let y_min = h.outline.y_min - padding_nm;
    let nx = ((h.outline.width() + 2.0 * padding_nm) / dx_nm).ceil() as usize;
    let ny = ((h.outline.height() + 2.0 * padding_nm) / dx_nm).ceil() as usize;
    if nx < 16 || ny < 16 {
        return Err(FdtdError::GridTooSmall { nx, ny });
    }

    let eps_mat = n_eff * n_eff;
    // Candidate holes per cell, from bounding boxes.
    let mut candidates: Vec<Vec<usize>> = vec![Vec::new(); nx * ny];
    for (hi, hole) in h.holes.iter().enumerate() {
        if hole.r <= 0.0 {
            continue;
        }
        let i_lo = (((hole.x - hole.r - x_min) / dx_nm).floor() - 1.0).max(0.0) as usize;
        let i_hi = ((((hole.x + hole.r - x_min) / dx_nm).ceil() + 1.0) as usize).min(nx);
        let j_lo = (((hole.y - hole.r - y_min) / dx_nm).floor() - 1.0).max(0.0) as usize;
        let j_hi = ((((hole.y + hole.r - y_min) / dx_nm).ceil() + 1.0) as usize).min(ny);
        for j in j_lo..j_hi {
            for i in i_lo..i_hi {
                candidates[j * nx + i].push(hi);
            }
        }
    }

    let mut eps = vec![1.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let cx = x_min + (i as f64 + 0.5) * dx_nm;
            let cy = y_min + (j as f64 + 0.5) * dx_nm;
            let cands = &candidates[j * nx + i];
            let mut material = 0usize;
            for sj in 0..SUBSAMPLES {
                for si in 0..SUBSAMPLES {
                    let px = cx + ((si as f64 + 0.5) / SUBSAMPLES as f64 - 0.5) * dx_nm;
                    let py = cy + ((sj as f64 + 0.5) / SUBSAMPLES as f64 - 0.5) * dx_nm;
                    if !h.outline.contains(px, py) {
                        continue;
                    }
                    let in_hole = cands.iter().any(|&hi| {
                        let hole = &h.holes[hi];
                        (px - hole.x).powi(2) + (py - hole.y).powi(2) <= hole.r * hole.r
                    });
                    if !in_hole {
                        material += 1;
                    }
                }
            }
            let frac = material as f64 / (SUBSAMPLES * SUBSAMPLES) as f64;
            eps[j * nx + i] = 1.0 + frac * (eps_mat - 1.0);
        }
    }

    Ok(Grid2D {
        dx_nm,
        nx,
        ny,
        x0_nm: x_min + 0.5 * dx_nm,
        y0_nm: y_min + 0.5 * dx_nm,
        eps,
    })
}

/// Field component identifiers used in snapshots and the binary container.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[repr(u32)]
pub enum FieldComponent {
    Eps = 0,
    Hz = 1,
    Ex = 2,
    Ey = 3,
}

impl FieldComponent {
    pub fn id(self) -> u32 {
        self as u32
    }

    pub fn from_id(id: u32) -> Option<Self> {
        match id {
            0 => Some(Self::Eps),
            1 => Some(Self::Hz),
            2 => Some(Self::Ex),
            3 => Some(Self::Ey),
            _ => None,
        }
    }
}

/// A 2D raster of one field component, aligned with the simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub component: FieldComponent,
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<f64>,
    pub step: usize,
}

/// Effective mode volume V = h_eff·Σ ε|E|² dA / max(ε|E|²), reported in
/// (λ/n_ref)³ units.
pub fn compute_mode_volume(
    snapshot: &FieldSnapshot,
    grid: &Grid2D,
    h_eff_nm: f64,
    lambda_nm: f64,
    n_ref: f64,
) -> Result<ModeVolume, FdtdError> {
    assert_eq!(snapshot.nx, grid.nx, "snapshot not aligned with grid");
    assert_eq!(snapshot.ny, grid.ny, "snapshot not aligned with grid");
    let mut sum = 0.0;
    let mut peak = 0.0f64;
    for (e, &eps) in snapshot.data.iter().zip(&grid.eps) {
        let u = eps * e * e;
        sum += u;
        peak = peak.max(u);
    }
    if peak == 0.0 {
        return Err(FdtdError::DegenerateField);
    }
    let v_abs_nm3 = h_eff_nm * sum * grid.dx_nm * grid.dx_nm / peak;
    let unit = (lambda_nm / n_ref).powi(3);
    Ok(ModeVolume::new(v_abs_nm3 / unit, n_ref)?)
}
