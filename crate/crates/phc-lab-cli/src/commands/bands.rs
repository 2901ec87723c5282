//! `bands`: TE band structure of a triangular air-hole lattice by
//! plane-wave expansion, with the first-gap edges in a/lambda and (when a
//! lattice constant is given) in wavelength.

use serde::{Deserialize, Serialize};

use phc_lab::bands::{band_structure, BandsConfig};
use phc_lab::io::write_bands_csv;
use phc_lab::units::DIAMOND_INDEX;
use phc_lab::wave1d::slab_neff;

use super::{ensure_schema, CmdResult, Ctx, Failure};

pub const CONFIG_HELP: &str = "\
Config fields (JSON):
  schema_version  u32, must be 1
  r_over_a        hole radius over lattice constant (or give r_nm + a_nm)
  a_nm            lattice constant, nm (optional; enables nm gap edges)
  r_nm            hole radius, nm (requires a_nm; alternative to r_over_a)
  eps_bg          background permittivity (default: slab effective index
                  squared from n_bulk/thickness_nm/lambda_nm)
  n_bulk          film bulk index for the effective-index default (2.41)
  thickness_nm    film thickness for the effective-index default (160)
  lambda_nm       wavelength for the effective-index default (737)
  n_pw            plane-wave truncation order (default 7)
  n_bands         bands per k-point (default 6)
  n_seg           k-path intervals per segment of Gamma-M-K-Gamma
                  (default 12)

Outputs: bands.csv (k-path and frequencies in a/lambda), bands.json
(gap edges, convergence warning, nm gap edges when a_nm is given).";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsCmdConfig {
    schema_version: u32,
    #[serde(default)]
    r_over_a: Option<f64>,
    #[serde(default)]
    a_nm: Option<f64>,
    #[serde(default)]
    r_nm: Option<f64>,
    #[serde(default)]
    eps_bg: Option<f64>,
    #[serde(default)]
    n_bulk: Option<f64>,
    #[serde(default)]
    thickness_nm: Option<f64>,
    #[serde(default)]
    lambda_nm: Option<f64>,
    #[serde(default)]
    n_pw: Option<usize>,
    #[serde(default)]
    n_bands: Option<usize>,
    #[serde(default)]
    n_seg: Option<usize>,
}

#[derive(Debug, Serialize)]
struct BandsSummary {
    schema_version: u32,
    r_over_a: f64,
    eps_bg: f64,
    n_eff: f64,
    n_pw: usize,
    n_bands: usize,
    /// First TE gap edges in normalized frequency a/lambda, if open.
    gap_a_over_lambda: Option<(f64, f64)>,
    /// Same gap as wavelengths in nm (upper edge first), when a_nm given.
    gap_nm: Option<(f64, f64)>,
    a_nm: Option<f64>,
    convergence_warning: Option<String>,
}

pub fn run(ctx: &Ctx) -> CmdResult {
    let (cfg, _dir) = ctx.load_config::<BandsCmdConfig>()?;
    ensure_schema(cfg.schema_version)?;

    let r_over_a = match (cfg.r_over_a, cfg.r_nm, cfg.a_nm) {
        (Some(v), None, _) => v,
        (None, Some(r), Some(a)) => r / a,
        (Some(_), Some(_), _) => {
            return Err(Failure::config(
                "give either r_over_a or r_nm (with a_nm), not both",
            ))
        }
        _ => {
            return Err(Failure::config(
                "missing hole size: give r_over_a, or r_nm together with a_nm",
            ))
        }
    };

    let n_bulk = cfg.n_bulk.unwrap_or(DIAMOND_INDEX);
    let thickness = cfg.thickness_nm.unwrap_or(160.0);
    let lambda = cfg.lambda_nm.unwrap_or(737.0);
    let n_eff = slab_neff(n_bulk, 1.0, thickness, lambda)
        .map_err(|e| Failure::config(format!("effective-index solve failed: {e}")))?;
    let eps_bg = cfg.eps_bg.unwrap_or(n_eff * n_eff);

    let mut bc = BandsConfig::new(r_over_a, eps_bg);
    if let Some(v) = cfg.n_pw {
        bc.n_pw = v;
    }
    if let Some(v) = cfg.n_bands {
        bc.n_bands = v;
    }
    let bs = band_structure(&bc, cfg.n_seg.unwrap_or(12))
        .map_err(|e| Failure::config(format!("band calculation failed: {e}")))?;

    let gap_nm = match (bs.gap, cfg.a_nm) {
        // a/lambda edges invert to wavelengths: upper frequency edge is
        // the shorter wavelength.
        (Some((lo, hi)), Some(a)) => Some((a / hi, a / lo)),
        _ => None,
    };

    let mut csv = Vec::new();
    write_bands_csv(&mut csv, &bs)
        .map_err(|e| Failure::config(format!("band serialization failed: {e}")))?;
    ctx.write_output("bands.csv", &csv)?;

    let summary = BandsSummary {
        schema_version: 1,
        r_over_a,
        eps_bg,
        n_eff,
        n_pw: bc.n_pw,
        n_bands: bc.n_bands,
        gap_a_over_lambda: bs.gap,
        gap_nm,
        a_nm: cfg.a_nm,
        convergence_warning: bs.convergence_warning,
    };
    ctx.write_output("bands.json", &super::to_json_bytes(&summary)?)?;

    match summary.gap_a_over_lambda {
        Some((lo, hi)) => println!(
            "bands: first TE gap a/lambda = {lo:.4} .. {hi:.4}{}",
            summary
                .gap_nm
                .map(|(a, b)| format!(" ({a:.1} .. {b:.1} nm)"))
                .unwrap_or_default()
        ),
        None => println!("bands: no TE gap between bands 1 and 2"),
    }
    Ok(())
}
