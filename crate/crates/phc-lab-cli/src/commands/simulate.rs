//! `simulate`: run the 2D effective-index FDTD solver on a layout (or a raw
//! permittivity map), extract the resonance by ringdown harmonic inversion,
//! and write traces, snapshots, and a JSON summary. A vacuum mode measures
//! the numerical pulse speed against c.

use serde::{Deserialize, Serialize};

use phc_lab::fdtd::{
    compute_mode_volume, rasterize, run_fdtd, Boundaries, FdtdError, FieldComponent, Grid2D,
    Monitor, MonitorComponent, SimConfig, SourceConfig,
};
use phc_lab::fit::harmonic::harmonic_inversion;
use phc_lab::fit::TimeTrace;
use phc_lab::geometry::import_layout;
use phc_lab::io::{eps_snapshot, read_snapshot, write_snapshot, write_trace_csv};
use phc_lab::units::{C_NM_PER_FS, C_NM_THZ, DIAMOND_INDEX};
use phc_lab::wave1d::slab_neff;

use super::{ensure_schema, resolve, CmdResult, Ctx, Failure};

pub const CONFIG_HELP: &str = "\
Config fields (JSON):
  schema_version      u32, must be 1
  mode                \"cavity\" | \"vacuum_check\"
  steps               time steps to run
  source              { x_nm, y_nm, f_thz, bandwidth_thz, amplitude? }
                      (positions nm, carrier THz, Gaussian width THz)
  courant             time step fraction of the 2D stability limit
                      (default 0.95, range (0, 1])
  pml_cells           absorber thickness in cells (default 12)

Cavity mode only:
  layout              path to a layout.json from `design`
                      (relative paths resolve against the config file)
  eps_map             alternative to layout: FSNP permittivity raster
  n_bulk              film bulk refractive index (default 2.41)
  thickness_nm        film thickness for n_eff and mode volume (default 160)
  dx_nm               grid cell size, nm (default 10; layout runs must keep
                      dx <= r_min/4)
  padding_nm          vacuum margin around the outline, nm (default 250)
  monitors            [{ x_nm, y_nm, component: \"Hz\"|\"Ex\"|\"Ey\" }]
                      (default: one Hz probe at the source)
  band_thz            [lo, hi] window for mode extraction, THz
                      (default f_thz +/- 3 bandwidth_thz)
  snapshot_step       step for the field snapshot (default steps - 1)
  snapshot_component  \"Hz\"|\"Ex\"|\"Ey\" (default \"Ey\")
  n_ref               index for (lambda/n)^3 units (default 2.41)

Vacuum-check mode only (source positions are ignored; the pulse is
launched near the left wall and timed across two fixed probes):
  grid_cells           [nx, ny] (default [400, 60])
  cells_per_wavelength grid resolution at the carrier (default 20)

Outputs: summary.json, eps.fsnp, snapshot.fsnp (cavity), trace<k>.csv.
Exit 3 when the solver diverges (summary names the step).";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    schema_version: u32,
    mode: String,
    steps: usize,
    source: SourceJson,
    #[serde(default)]
    courant: Option<f64>,
    #[serde(default)]
    pml_cells: Option<usize>,
    #[serde(default)]
    layout: Option<String>,
    #[serde(default)]
    eps_map: Option<String>,
    #[serde(default)]
    n_bulk: Option<f64>,
    #[serde(default)]
    thickness_nm: Option<f64>,
    #[serde(default)]
    dx_nm: Option<f64>,
    #[serde(default)]
    padding_nm: Option<f64>,
    #[serde(default)]
    monitors: Option<Vec<MonitorJson>>,
    #[serde(default)]
    band_thz: Option<(f64, f64)>,
    #[serde(default)]
    snapshot_step: Option<usize>,
    #[serde(default)]
    snapshot_component: Option<String>,
    #[serde(default)]
    n_ref: Option<f64>,
    #[serde(default)]
    grid_cells: Option<(usize, usize)>,
    #[serde(default)]
    cells_per_wavelength: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceJson {
    x_nm: f64,
    y_nm: f64,
    f_thz: f64,
    bandwidth_thz: f64,
    #[serde(default)]
    amplitude: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonitorJson {
    x_nm: f64,
    y_nm: f64,
    component: String,
}

#[derive(Debug, Serialize)]
struct Convergence {
    steps: usize,
    dt_fs: f64,
    dx_nm: f64,
    courant: f64,
    pml_cells: usize,
    source_off_step: usize,
    n_eff: Option<f64>,
    warning: Option<String>,
}

#[derive(Debug, Serialize)]
struct CavitySummary {
    schema_version: u32,
    mode: &'static str,
    lambda_res_nm: f64,
    f_res_thz: f64,
    q: f64,
    lossless: bool,
    v_lambda_n3: Option<f64>,
    n_ref: f64,
    convergence: Convergence,
}

#[derive(Debug, Serialize)]
struct VacuumSummary {
    schema_version: u32,
    mode: &'static str,
    speed_nm_per_fs: f64,
    c_nm_per_fs: f64,
    relative_error: f64,
    within_1_percent: bool,
    cells_per_wavelength: f64,
    convergence: Convergence,
}

fn parse_component(name: &str) -> CmdResult<MonitorComponent> {
    match name {
        "Hz" => Ok(MonitorComponent::Hz),
        "Ex" => Ok(MonitorComponent::Ex),
        "Ey" => Ok(MonitorComponent::Ey),
        other => Err(Failure::config(format!(
            "field component must be \"Hz\", \"Ex\", or \"Ey\", got {other:?}"
        ))),
    }
}

fn parse_snapshot_component(name: &str) -> CmdResult<FieldComponent> {
    match name {
        "Hz" => Ok(FieldComponent::Hz),
        "Ex" => Ok(FieldComponent::Ex),
        "Ey" => Ok(FieldComponent::Ey),
        other => Err(Failure::config(format!(
            "field snapshot_component must be \"Hz\", \"Ex\", or \"Ey\", got {other:?}"
        ))),
    }
}

fn map_fdtd_error(e: FdtdError) -> Failure {
    match e {
        FdtdError::Divergence { step, .. } => {
            Failure::divergence(format!("solver diverged at step {step}"))
        }
        other => Failure::config(format!("simulation setup failed: {other}")),
    }
}

/// Energy-centroid arrival time of a pulse in a monitor trace, in ns.
fn arrival_time_ns(trace: &TimeTrace) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &v) in trace.values.iter().enumerate() {
        let w = v * v;
        num += trace.time_at(i) * w;
        den += w;
    }
    num / den.max(1e-300)
}

pub fn run(ctx: &Ctx) -> CmdResult {
    let (cfg, dir) = ctx.load_config::<SimulateConfig>()?;
    ensure_schema(cfg.schema_version)?;
    match cfg.mode.as_str() {
        "cavity" => run_cavity(ctx, &cfg, &dir),
        "vacuum_check" => run_vacuum_check(ctx, &cfg),
        other => Err(Failure::config(format!(
            "field mode must be \"cavity\" or \"vacuum_check\", got {other:?}"
        ))),
    }
}

fn run_cavity(ctx: &Ctx, cfg: &SimulateConfig, dir: &std::path::Path) -> CmdResult {
    let n_bulk = cfg.n_bulk.unwrap_or(DIAMOND_INDEX);
    let thickness_nm = cfg.thickness_nm.unwrap_or(160.0);
    let lambda_source = C_NM_THZ / cfg.source.f_thz;

    let (grid, n_eff) = match (&cfg.layout, &cfg.eps_map) {
        (Some(layout), None) => {
            let path = resolve(dir, layout);
            let bytes = std::fs::read(&path).map_err(|e| {
                Failure::config(format!("cannot read layout {}: {e}", path.display()))
            })?;
            let holes = import_layout(&bytes)
                .map_err(|e| Failure::config(format!("invalid layout {}: {e}", path.display())))?;
            let n_eff = slab_neff(n_bulk, 1.0, thickness_nm, lambda_source)
                .map_err(|e| Failure::config(format!("effective-index solve failed: {e}")))?;
            let grid = rasterize(
                &holes,
                n_eff,
                cfg.dx_nm.unwrap_or(10.0),
                cfg.padding_nm.unwrap_or(250.0),
            )
            .map_err(map_fdtd_error)?;
            (grid, Some(n_eff))
        }
        (None, Some(eps_map)) => {
            let path = resolve(dir, eps_map);
            let mut file = std::fs::File::open(&path).map_err(|e| {
                Failure::config(format!("cannot read eps map {}: {e}", path.display()))
            })?;
            let snap = read_snapshot(&mut file)
                .map_err(|e| Failure::config(format!("invalid eps map {}: {e}", path.display())))?;
            if snap.component != FieldComponent::Eps {
                return Err(Failure::config(format!(
                    "eps map {} holds component {:?}, expected Eps",
                    path.display(),
                    snap.component
                )));
            }
            let dx = cfg
                .dx_nm
                .ok_or_else(|| Failure::config("field dx_nm is required when using eps_map"))?;
            let grid = Grid2D {
                dx_nm: dx,
                nx: snap.nx,
                ny: snap.ny,
                x0_nm: 0.5 * dx,
                y0_nm: 0.5 * dx,
                eps: snap.data,
            };
            (grid, None)
        }
        _ => {
            return Err(Failure::config(
                "cavity mode needs exactly one of the fields layout or eps_map",
            ))
        }
    };

    let monitors: Vec<Monitor> = match &cfg.monitors {
        Some(list) if !list.is_empty() => list
            .iter()
            .map(|m| {
                Ok(Monitor {
                    x_nm: m.x_nm,
                    y_nm: m.y_nm,
                    component: parse_component(&m.component)?,
                })
            })
            .collect::<CmdResult<_>>()?,
        _ => vec![Monitor {
            x_nm: cfg.source.x_nm,
            y_nm: cfg.source.y_nm,
            component: MonitorComponent::Hz,
        }],
    };

    let snapshot_step = cfg.snapshot_step.unwrap_or(cfg.steps.saturating_sub(1));
    let snapshot_component =
        parse_snapshot_component(cfg.snapshot_component.as_deref().unwrap_or("Ey"))?;
    let pml_cells = cfg.pml_cells.unwrap_or(12);
    let sim = SimConfig {
        steps: cfg.steps,
        courant: cfg.courant.unwrap_or(0.95),
        boundaries: Boundaries::Pml { cells: pml_cells },
        source: Some(SourceConfig {
            x_nm: cfg.source.x_nm,
            y_nm: cfg.source.y_nm,
            f_thz: cfg.source.f_thz,
            bandwidth_thz: cfg.source.bandwidth_thz,
            amplitude: cfg.source.amplitude.unwrap_or(1.0),
        }),
        monitors,
        snapshot_at: Some((snapshot_step, snapshot_component)),
        track_energy: false,
    };
    let out = run_fdtd(&grid, &sim).map_err(map_fdtd_error)?;

    // Ringdown analysis on the first monitor, source-free segment only.
    let trace = &out.traces[0];
    if out.source_off_step + 200 > trace.values.len() {
        return Err(Failure::config(format!(
            "steps = {} leaves fewer than 200 source-free samples for mode extraction",
            cfg.steps
        )));
    }
    let ring = TimeTrace::new(
        0.0,
        trace.dt_ns,
        trace.values[out.source_off_step..].to_vec(),
    )
    .map_err(|e| Failure::config(format!("ringdown trace: {e}")))?;
    let band = cfg.band_thz.unwrap_or((
        (cfg.source.f_thz - 3.0 * cfg.source.bandwidth_thz).max(1.0),
        cfg.source.f_thz + 3.0 * cfg.source.bandwidth_thz,
    ));
    let modes = harmonic_inversion(&ring, band, 5)
        .map_err(|e| Failure::fit(format!("mode extraction failed: {e}")))?;
    let best = modes.modes.first().ok_or_else(|| {
        Failure::fit(format!(
            "no resonant mode found in the band {:.1}..{:.1} THz",
            band.0, band.1
        ))
    })?;
    let lambda_res = C_NM_THZ / best.f_thz;

    let n_ref = cfg.n_ref.unwrap_or(DIAMOND_INDEX);
    let v = match &out.snapshot {
        Some(snap) => Some(
            compute_mode_volume(snap, &grid, thickness_nm, lambda_res, n_ref)
                .map_err(|e| Failure::config(format!("mode-volume integral failed: {e}")))?
                .value(),
        ),
        None => None,
    };

    for (k, t) in out.traces.iter().enumerate() {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, t)
            .map_err(|e| Failure::config(format!("trace serialization failed: {e}")))?;
        ctx.write_output(&format!("trace{k}.csv"), &buf)?;
    }
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &eps_snapshot(&grid))
        .map_err(|e| Failure::config(format!("eps snapshot failed: {e}")))?;
    ctx.write_output("eps.fsnp", &buf)?;
    if let Some(snap) = &out.snapshot {
        let mut buf = Vec::new();
        write_snapshot(&mut buf, snap)
            .map_err(|e| Failure::config(format!("snapshot serialization failed: {e}")))?;
        ctx.write_output("snapshot.fsnp", &buf)?;
    }

    let summary = CavitySummary {
        schema_version: 1,
        mode: "cavity",
        lambda_res_nm: lambda_res,
        f_res_thz: best.f_thz,
        q: best.q,
        lossless: best.lossless,
        v_lambda_n3: v,
        n_ref,
        convergence: Convergence {
            steps: cfg.steps,
            dt_fs: out.dt_fs,
            dx_nm: grid.dx_nm,
            courant: sim.courant,
            pml_cells,
            source_off_step: out.source_off_step,
            n_eff,
            warning: modes.warning,
        },
    };
    ctx.write_output("summary.json", &super::to_json_bytes(&summary)?)?;
    println!(
        "simulate: lambda_res = {:.3} nm, Q = {:.4e}{}",
        lambda_res,
        best.q,
        v.map(|v| format!(", V = {v:.3} (lambda/n)^3"))
            .unwrap_or_default()
    );
    Ok(())
}

fn run_vacuum_check(ctx: &Ctx, cfg: &SimulateConfig) -> CmdResult {
    for (name, set) in [
        ("layout", cfg.layout.is_some()),
        ("eps_map", cfg.eps_map.is_some()),
        ("band_thz", cfg.band_thz.is_some()),
    ] {
        if set {
            return Err(Failure::config(format!(
                "field {name} does not apply to mode \"vacuum_check\""
            )));
        }
    }
    let (nx, ny) = cfg.grid_cells.unwrap_or((400, 60));
    let cpw = cfg.cells_per_wavelength.unwrap_or(20.0);
    if cpw.is_nan() || cpw <= 4.0 {
        return Err(Failure::config(format!(
            "field cells_per_wavelength must exceed 4, got {cpw}"
        )));
    }
    let lambda0 = C_NM_THZ / cfg.source.f_thz;
    let dx = lambda0 / cpw;
    let grid = Grid2D::vacuum(dx, nx, ny).map_err(map_fdtd_error)?;

    // Source near the left wall; two probes downstream measure transit time.
    let lx = nx as f64 * dx;
    let y_mid = 0.5 * ny as f64 * dx;
    let x_src = 0.15 * lx;
    let x_a = 0.35 * lx;
    let x_b = 0.75 * lx;
    let pml_cells = cfg.pml_cells.unwrap_or(12);
    let sim = SimConfig {
        steps: cfg.steps,
        courant: cfg.courant.unwrap_or(0.95),
        boundaries: Boundaries::Pml { cells: pml_cells },
        source: Some(SourceConfig {
            x_nm: x_src,
            y_nm: y_mid,
            f_thz: cfg.source.f_thz,
            bandwidth_thz: cfg.source.bandwidth_thz,
            amplitude: cfg.source.amplitude.unwrap_or(1.0),
        }),
        monitors: vec![
            Monitor {
                x_nm: x_a,
                y_nm: y_mid,
                component: MonitorComponent::Hz,
            },
            Monitor {
                x_nm: x_b,
                y_nm: y_mid,
                component: MonitorComponent::Hz,
            },
        ],
        snapshot_at: None,
        track_energy: false,
    };
    let out = run_fdtd(&grid, &sim).map_err(map_fdtd_error)?;

    // Probe positions snap to cells; measure the realized separation.
    let (ia, _) = grid.nearest_cell(x_a, y_mid);
    let (ib, _) = grid.nearest_cell(x_b, y_mid);
    let distance_nm = (ib - ia) as f64 * dx;
    let t_a_ns = arrival_time_ns(&out.traces[0]);
    let t_b_ns = arrival_time_ns(&out.traces[1]);
    let speed = distance_nm / ((t_b_ns - t_a_ns) * 1e6); // nm per fs
    let rel = speed / C_NM_PER_FS - 1.0;

    for (k, t) in out.traces.iter().enumerate() {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, t)
            .map_err(|e| Failure::config(format!("trace serialization failed: {e}")))?;
        ctx.write_output(&format!("trace{k}.csv"), &buf)?;
    }
    let summary = VacuumSummary {
        schema_version: 1,
        mode: "vacuum_check",
        speed_nm_per_fs: speed,
        c_nm_per_fs: C_NM_PER_FS,
        relative_error: rel,
        within_1_percent: rel.abs() < 0.01,
        cells_per_wavelength: cpw,
        convergence: Convergence {
            steps: cfg.steps,
            dt_fs: out.dt_fs,
            dx_nm: dx,
            courant: sim.courant,
            pml_cells,
            source_off_step: out.source_off_step,
            n_eff: None,
            warning: None,
        },
    };
    ctx.write_output("summary.json", &super::to_json_bytes(&summary)?)?;
    println!(
        "simulate: vacuum pulse speed {speed:.4} nm/fs vs c = {C_NM_PER_FS} ({:+.3}%)",
        rel * 100.0
    );
    Ok(())
}
