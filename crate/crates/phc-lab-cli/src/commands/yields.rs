//! `yield`: Monte Carlo fabrication-tolerance study. Perturbs a baseline
//! layout with hole-size/position and thickness disorder, scores each
//! sample's wavelength shift and Q, and reports pass fractions with
//! Wilson confidence intervals.

use serde::Deserialize;

use phc_lab::disorder::{yield_study_threads, Baseline, DisorderModel, YieldCriteria};
use phc_lab::fdtd::{rasterize, FieldComponent};
use phc_lab::geometry::import_layout;
use phc_lab::io::{read_snapshot, write_yield_csv};
use phc_lab::units::DIAMOND_INDEX;
use phc_lab::wave1d::slab_neff;

use super::{ensure_schema, resolve, worker_count, CmdResult, Ctx, Failure};

pub const CONFIG_HELP: &str = "\
Config fields (JSON):
  schema_version      u32, must be 1
  layout              baseline layout.json from `design` (relative paths
                      resolve against the config file)
  snapshot            baseline field snapshot.fsnp from `simulate`, taken
                      on the same layout with the same dx_nm/padding_nm
  dx_nm               raster cell size used for the baseline, nm (default 10)
  padding_nm          raster margin used for the baseline, nm (default 250)
  lambda_nm           baseline resonance wavelength, nm
  q_base              baseline (disorder-free) quality factor
  a_nm                lattice constant for the Q disorder model, nm
  thickness_nm        film thickness, nm (default 160)
  n_bulk              film bulk index (default 2.41)
  sigma_r_nm          1-sigma hole-radius disorder, nm
  sigma_xy_nm         1-sigma hole-position disorder per axis, nm
  sigma_d_nm          1-sigma thickness disorder, nm (default 0)
  seed                RNG seed (the global --seed flag overrides this)
  n_samples           Monte Carlo sample count
  q_threshold         pass criterion: Q_est >= q_threshold
  lambda_tol_percent  pass criterion: |shift| <= this percent of lambda

Worker threads: available cores, capped by PHC_LAB_THREADS. Results are
byte-identical for any thread count.

Outputs: yield.json (pass fractions, confidence intervals, per-sample
records), yield.csv (per-sample shift and Q).";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YieldCmdConfig {
    schema_version: u32,
    layout: String,
    snapshot: String,
    #[serde(default)]
    dx_nm: Option<f64>,
    #[serde(default)]
    padding_nm: Option<f64>,
    lambda_nm: f64,
    q_base: f64,
    a_nm: f64,
    #[serde(default)]
    thickness_nm: Option<f64>,
    #[serde(default)]
    n_bulk: Option<f64>,
    sigma_r_nm: f64,
    sigma_xy_nm: f64,
    #[serde(default)]
    sigma_d_nm: Option<f64>,
    seed: u64,
    n_samples: usize,
    q_threshold: f64,
    lambda_tol_percent: f64,
}

pub fn run(ctx: &Ctx) -> CmdResult {
    let (cfg, dir) = ctx.load_config::<YieldCmdConfig>()?;
    ensure_schema(cfg.schema_version)?;

    let layout_path = resolve(&dir, &cfg.layout);
    let bytes = std::fs::read(&layout_path).map_err(|e| {
        Failure::config(format!("cannot read layout {}: {e}", layout_path.display()))
    })?;
    let holes = import_layout(&bytes)
        .map_err(|e| Failure::config(format!("invalid layout {}: {e}", layout_path.display())))?;

    let snap_path = resolve(&dir, &cfg.snapshot);
    let mut file = std::fs::File::open(&snap_path).map_err(|e| {
        Failure::config(format!("cannot read snapshot {}: {e}", snap_path.display()))
    })?;
    let snapshot = read_snapshot(&mut file)
        .map_err(|e| Failure::config(format!("invalid snapshot {}: {e}", snap_path.display())))?;
    if snapshot.component == FieldComponent::Eps {
        return Err(Failure::config(format!(
            "snapshot {} is a permittivity map, expected a field snapshot",
            snap_path.display()
        )));
    }

    let n_bulk = cfg.n_bulk.unwrap_or(DIAMOND_INDEX);
    let thickness_nm = cfg.thickness_nm.unwrap_or(160.0);
    let dx_nm = cfg.dx_nm.unwrap_or(10.0);
    let padding_nm = cfg.padding_nm.unwrap_or(250.0);
    let n_eff = slab_neff(n_bulk, 1.0, thickness_nm, cfg.lambda_nm)
        .map_err(|e| Failure::config(format!("effective-index solve failed: {e}")))?;
    let grid = rasterize(&holes, n_eff, dx_nm, padding_nm)
        .map_err(|e| Failure::config(format!("baseline raster failed: {e}")))?;
    if snapshot.nx != grid.nx || snapshot.ny != grid.ny {
        return Err(Failure::config(format!(
            "snapshot is {}x{} but the layout rasters to {}x{}; \
             re-run `simulate` with the same layout, dx_nm, and padding_nm",
            snapshot.nx, snapshot.ny, grid.nx, grid.ny
        )));
    }

    let mut model = DisorderModel::new(
        cfg.sigma_r_nm,
        cfg.sigma_xy_nm,
        ctx.seed.unwrap_or(cfg.seed),
    );
    model.sigma_d_nm = cfg.sigma_d_nm.unwrap_or(0.0);
    model
        .validate()
        .map_err(|e| Failure::config(format!("invalid disorder model: {e}")))?;

    let base = Baseline {
        holes,
        grid,
        snapshot,
        lambda_nm: cfg.lambda_nm,
        q_base: cfg.q_base,
        a_nm: cfg.a_nm,
        thickness_nm,
        n_bulk,
        padding_nm,
    };
    let criteria = YieldCriteria {
        q_threshold: cfg.q_threshold,
        lambda_tol_percent: cfg.lambda_tol_percent,
    };
    let threads = worker_count()?;
    let report = yield_study_threads(&base, &model, cfg.n_samples, &criteria, threads)
        .map_err(|e| Failure::config(format!("yield study failed: {e}")))?;

    let mut csv = Vec::new();
    write_yield_csv(&mut csv, &report.records)
        .map_err(|e| Failure::config(format!("record serialization failed: {e}")))?;
    ctx.write_output("yield.csv", &csv)?;
    ctx.write_output("yield.json", &super::to_json_bytes(&report)?)?;

    println!(
        "yield: {} samples on {} thread(s): Q pass {:.1}% [{:.1}%, {:.1}%], \
         wavelength pass {:.1}% [{:.1}%, {:.1}%]",
        report.n_samples,
        threads,
        report.fraction_q_above * 100.0,
        report.ci_q.lo * 100.0,
        report.ci_q.hi * 100.0,
        report.fraction_wavelength_within * 100.0,
        report.ci_wavelength.lo * 100.0,
        report.ci_wavelength.hi * 100.0
    );
    if report.truncation_warnings > 0 {
        eprintln!(
            "warning: {} sample(s) hit the disorder truncation bound",
            report.truncation_warnings
        );
    }
    Ok(())
}
