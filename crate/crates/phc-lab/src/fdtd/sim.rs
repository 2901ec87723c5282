//! Leapfrog TE update (Hz, Ex, Ey) on the Yee grid with split-field PML,
//! soft Gaussian-sinusoid source, point monitors, field snapshots, and an
//! optional discrete energy record.
//!
//! Units: lengths in nm, time in fs. Monitor traces are emitted with the
//! time axis in ns to match the fitting layer.

use super::{FdtdError, FieldComponent, FieldSnapshot, Grid2D};
use crate::fit::TimeTrace;
use crate::units::C_NM_PER_FS;

/// Boundary treatment on all four walls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundaries {
    /// Absorbing layer of the given thickness in cells, backed by PEC.
    Pml { cells: usize },
    /// Absorbing layers on the two x walls only; the y walls stay PEC.
    /// Gives a quasi-1D channel: open along x, closed along y.
    PmlX { cells: usize },
    /// Perfect electric conductor walls (closed, lossless box).
    Pec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorComponent {
    Hz,
    Ex,
    Ey,
}

/// Point probe recording one field component every step.
#[derive(Debug, Clone, Copy)]
pub struct Monitor {
    pub x_nm: f64,
    pub y_nm: f64,
    pub component: MonitorComponent,
}

/// Gaussian-modulated sinusoid added softly to Hz at one cell.
/// The envelope peaks at 5 sigma and the source is switched off at
/// 11 sigma, after which the record is source free.
#[derive(Debug, Clone, Copy)]
pub struct SourceConfig {
    pub x_nm: f64,
    pub y_nm: f64,
    pub f_thz: f64,
    /// Gaussian spectral width (standard deviation) in THz.
    pub bandwidth_thz: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub steps: usize,
    /// Time step as a fraction of the 2D stability limit dx/(c*sqrt(2)).
    pub courant: f64,
    pub boundaries: Boundaries,
    pub source: Option<SourceConfig>,
    pub monitors: Vec<Monitor>,
    /// Record a snapshot of this component after the given step.
    pub snapshot_at: Option<(usize, FieldComponent)>,
    pub track_energy: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            steps: 2000,
            courant: 0.95,
            boundaries: Boundaries::Pml { cells: 10 },
            source: None,
            monitors: Vec::new(),
            snapshot_at: None,
            track_energy: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FdtdOutput {
    pub dt_fs: f64,
    /// One trace per monitor, in config order.
    pub traces: Vec<TimeTrace>,
    pub snapshot: Option<FieldSnapshot>,
    /// Total discrete field energy per step (arbitrary units), when tracked.
    pub energy: Option<Vec<f64>>,
    /// First step index at which the source term is identically zero.
    pub source_off_step: usize,
}

/// Field amplitude beyond which the run is aborted as diverged, relative to
/// the source amplitude (or 1 for source-free runs).
const DIVERGENCE_FACTOR: f64 = 1e12;
const DIVERGENCE_CHECK_INTERVAL: usize = 64;

/// PML grading exponent and target reflection.
const PML_ORDER: f64 = 3.0;
const PML_R0: f64 = 1e-8;

struct Pml {
    da_x_h: Vec<f64>,
    db_x_h: Vec<f64>,
    da_y_h: Vec<f64>,
    db_y_h: Vec<f64>,
    da_x_e: Vec<f64>,
    db_x_e: Vec<f64>,
    da_y_e: Vec<f64>,
    db_y_e: Vec<f64>,
}

fn pml_coeffs(
    n_nodes: usize,
    half_offset: bool,
    cells: usize,
    dx_nm: f64,
    dt_fs: f64,
) -> (Vec<f64>, Vec<f64>) {
    let d_nm = cells as f64 * dx_nm;
    let sigma_max = if cells == 0 {
        0.0
    } else {
        (PML_ORDER + 1.0) * (1.0 / PML_R0).ln() * C_NM_PER_FS / (2.0 * d_nm)
    };
    // Node i sits at coordinate i (+0.5 for staggered components), in cell
    // units; the domain spans [0, n] where n is the cell count along the axis.
    let span = if half_offset { n_nodes } else { n_nodes - 1 } as f64;
    let mut da = vec![1.0; n_nodes];
    let mut db = vec![1.0; n_nodes];
    for i in 0..n_nodes {
        let x = i as f64 + if half_offset { 0.5 } else { 0.0 };
        let depth = (cells as f64 - x).max(x - (span - cells as f64)).max(0.0);
        if depth > 0.0 {
            let sigma = sigma_max * (depth / cells as f64).powf(PML_ORDER);
            let a = (-sigma * dt_fs).exp();
            da[i] = a;
            db[i] = (1.0 - a) / (sigma * dt_fs);
        }
    }
    (da, db)
}

impl Pml {
    fn build(grid: &Grid2D, cells_x: usize, cells_y: usize, dt_fs: f64) -> Self {
        let (da_x_h, db_x_h) = pml_coeffs(grid.nx, true, cells_x, grid.dx_nm, dt_fs);
        let (da_y_h, db_y_h) = pml_coeffs(grid.ny, true, cells_y, grid.dx_nm, dt_fs);
        let (da_x_e, db_x_e) = pml_coeffs(grid.nx + 1, false, cells_x, grid.dx_nm, dt_fs);
        let (da_y_e, db_y_e) = pml_coeffs(grid.ny + 1, false, cells_y, grid.dx_nm, dt_fs);
        Self {
            da_x_h,
            db_x_h,
            da_y_h,
            db_y_h,
            da_x_e,
            db_x_e,
            da_y_e,
            db_y_e,
        }
    }
}

/// Run the time loop. Deterministic: identical inputs give bitwise-identical
/// outputs (sequential sums, no threading in the update itself).
pub fn run_fdtd(grid: &Grid2D, cfg: &SimConfig) -> Result<FdtdOutput, FdtdError> {
    if cfg.steps == 0 {
        return Err(FdtdError::BadConfig("steps must be positive".into()));
    }
    if !(cfg.courant > 0.0 && cfg.courant <= 1.0) {
        return Err(FdtdError::BadConfig(format!(
            "courant factor {} outside (0, 1]",
            cfg.courant
        )));
    }
    let (pml_cells_x, pml_cells_y) = match cfg.boundaries {
        Boundaries::Pml { cells } => {
            if cells < 4 {
                return Err(FdtdError::BadConfig(format!(
                    "PML of {cells} cells is too thin"
                )));
            }
            if 2 * cells + 8 > grid.nx.min(grid.ny) {
                return Err(FdtdError::BadConfig(format!(
                    "PML of {cells} cells does not fit a {} x {} grid",
                    grid.nx, grid.ny
                )));
            }
            (cells, cells)
        }
        Boundaries::PmlX { cells } => {
            if cells < 4 {
                return Err(FdtdError::BadConfig(format!(
                    "PML of {cells} cells is too thin"
                )));
            }
            if 2 * cells + 8 > grid.nx {
                return Err(FdtdError::BadConfig(format!(
                    "PML of {cells} cells does not fit a {} x {} grid",
                    grid.nx, grid.ny
                )));
            }
            (cells, 0)
        }
        Boundaries::Pec => (0, 0),
    };

    let nx = grid.nx;
    let ny = grid.ny;
    let dx = grid.dx_nm;
    let dt_fs = cfg.courant * dx / (C_NM_PER_FS * std::f64::consts::SQRT_2);
    let ch = C_NM_PER_FS * dt_fs / dx;

    let pml = Pml::build(grid, pml_cells_x, pml_cells_y, dt_fs);

    // eps at E node positions (arithmetic mean of adjacent cells).
    let mut inv_eps_ex = vec![0.0; nx * (ny + 1)];
    for j in 1..ny {
        for i in 0..nx {
            let e = 0.5 * (grid.eps[j * nx + i] + grid.eps[(j - 1) * nx + i]);
            inv_eps_ex[j * nx + i] = 1.0 / e;
        }
    }
    let mut inv_eps_ey = vec![0.0; (nx + 1) * ny];
    for j in 0..ny {
        for i in 1..nx {
            let e = 0.5 * (grid.eps[j * nx + i] + grid.eps[j * nx + i - 1]);
            inv_eps_ey[j * (nx + 1) + i] = 1.0 / e;
        }
    }

    let mut hzx = vec![0.0f64; nx * ny];
    let mut hzy = vec![0.0f64; nx * ny];
    let mut hz = vec![0.0f64; nx * ny];
    let mut hz_old = if cfg.track_energy {
        vec![0.0f64; nx * ny]
    } else {
        Vec::new()
    };
    let mut ex = vec![0.0f64; nx * (ny + 1)];
    let mut ey = vec![0.0f64; (nx + 1) * ny];

    let source = cfg.source.as_ref().map(|s| {
        let (i, j) = grid.nearest_cell(s.x_nm, s.y_nm);
        let sigma_fs = 1.0 / (2.0 * std::f64::consts::PI * s.bandwidth_thz * 1e-3);
        let t0_fs = 5.0 * sigma_fs;
        let off_fs = t0_fs + 6.0 * sigma_fs;
        (
            j * nx + i,
            s.f_thz * 1e-3,
            sigma_fs,
            t0_fs,
            off_fs,
            s.amplitude,
        )
    });
    let source_off_step = source
        .as_ref()
        .map(|&(_, _, _, _, off_fs, _)| (off_fs / dt_fs).ceil() as usize)
        .unwrap_or(0);
    let amp_scale = source
        .as_ref()
        .map(|s| s.5.abs())
        .unwrap_or(1.0)
        .max(1e-300);
    let divergence_threshold = DIVERGENCE_FACTOR * amp_scale;

    let monitor_cells: Vec<(usize, MonitorComponent)> = cfg
        .monitors
        .iter()
        .map(|m| {
            let (i, j) = grid.nearest_cell(m.x_nm, m.y_nm);
            let idx = match m.component {
                MonitorComponent::Hz => j * nx + i,
                MonitorComponent::Ex => j * nx + i,
                MonitorComponent::Ey => j * (nx + 1) + i,
            };
            (idx, m.component)
        })
        .collect();
    let mut records: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.steps); monitor_cells.len()];
    let mut energy = cfg.track_energy.then(|| Vec::with_capacity(cfg.steps));
    let mut snapshot = None;

    for step in 0..cfg.steps {
        if cfg.track_energy {
            hz_old.copy_from_slice(&hz);
        }

        // H update: time n-1/2 -> n+1/2.
        for j in 0..ny {
            let day = pml.da_y_h[j];
            let dby = pml.db_y_h[j];
            for i in 0..nx {
                let c = j * nx + i;
                let curl_x = ey[j * (nx + 1) + i + 1] - ey[j * (nx + 1) + i];
                let curl_y = ex[(j + 1) * nx + i] - ex[j * nx + i];
                hzx[c] = pml.da_x_h[i] * hzx[c] - pml.db_x_h[i] * ch * curl_x;
                hzy[c] = day * hzy[c] + dby * ch * curl_y;
                hz[c] = hzx[c] + hzy[c];
            }
        }

        if let Some((idx, f_cpfs, sigma_fs, t0_fs, off_fs, amp)) = source {
            let t = (step as f64 + 0.5) * dt_fs;
            if t <= off_fs {
                let env = (-((t - t0_fs) / sigma_fs).powi(2) / 2.0).exp();
                let s = amp * env * (2.0 * std::f64::consts::PI * f_cpfs * (t - t0_fs)).sin();
                hzx[idx] += s;
                hz[idx] += s;
            }
        }

        // Discrete energy at time n: E fields at n, Hz product across n.
        if let Some(energy) = energy.as_mut() {
            let mut u = 0.0;
            for j in 1..ny {
                for i in 0..nx {
                    let c = j * nx + i;
                    let iv = inv_eps_ex[c];
                    if iv > 0.0 {
                        u += 0.5 * ex[c] * ex[c] / iv;
                    }
                }
            }
            for j in 0..ny {
                for i in 1..nx {
                    let c = j * (nx + 1) + i;
                    let iv = inv_eps_ey[c];
                    if iv > 0.0 {
                        u += 0.5 * ey[c] * ey[c] / iv;
                    }
                }
            }
            for c in 0..nx * ny {
                u += 0.5 * hz_old[c] * hz[c];
            }
            energy.push(u);
        }

        // E update: time n -> n+1. Boundary nodes stay zero (PEC backing).
        for j in 1..ny {
            let day = pml.da_y_e[j];
            let dby = pml.db_y_e[j];
            for i in 0..nx {
                let c = j * nx + i;
                ex[c] = day * ex[c] + dby * ch * inv_eps_ex[c] * (hz[c] - hz[c - nx]);
            }
        }
        for j in 0..ny {
            for i in 1..nx {
                let c = j * (nx + 1) + i;
                ey[c] = pml.da_x_e[i] * ey[c]
                    - pml.db_x_e[i] * ch * inv_eps_ey[c] * (hz[j * nx + i] - hz[j * nx + i - 1]);
            }
        }

        for (rec, &(idx, comp)) in records.iter_mut().zip(&monitor_cells) {
            rec.push(match comp {
                MonitorComponent::Hz => hz[idx],
                MonitorComponent::Ex => 0.5 * (ex[idx] + ex[idx + nx]),
                MonitorComponent::Ey => 0.5 * (ey[idx] + ey[idx + 1]),
            });
        }

        if let Some((snap_step, comp)) = cfg.snapshot_at {
            if step == snap_step {
                snapshot = Some(take_snapshot(grid, comp, step, &hz, &ex, &ey));
            }
        }

        if step % DIVERGENCE_CHECK_INTERVAL == 0 {
            let peak = hz.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            if !peak.is_finite() || peak > divergence_threshold {
                return Err(FdtdError::Divergence {
                    step,
                    threshold: divergence_threshold,
                });
            }
        }
    }

    let dt_ns = dt_fs * 1e-6;
    let traces = records
        .into_iter()
        .map(|values| TimeTrace::new(0.0, dt_ns, values).expect("positive dt"))
        .collect();
    Ok(FdtdOutput {
        dt_fs,
        traces,
        snapshot,
        energy,
        source_off_step,
    })
}

fn take_snapshot(
    grid: &Grid2D,
    comp: FieldComponent,
    step: usize,
    hz: &[f64],
    ex: &[f64],
    ey: &[f64],
) -> FieldSnapshot {
    let nx = grid.nx;
    let ny = grid.ny;
    let data = match comp {
        FieldComponent::Eps => grid.eps.clone(),
        FieldComponent::Hz => hz.to_vec(),
        FieldComponent::Ex => {
            let mut d = vec![0.0; nx * ny];
            for j in 0..ny {
                for i in 0..nx {
                    d[j * nx + i] = 0.5 * (ex[j * nx + i] + ex[(j + 1) * nx + i]);
                }
            }
            d
        }
        FieldComponent::Ey => {
            let mut d = vec![0.0; nx * ny];
            for j in 0..ny {
                for i in 0..nx {
                    d[j * nx + i] = 0.5 * (ey[j * (nx + 1) + i] + ey[j * (nx + 1) + i + 1]);
                }
            }
            d
        }
    };
    FieldSnapshot {
        component: comp,
        nx,
        ny,
        data,
        step,
    }
}
