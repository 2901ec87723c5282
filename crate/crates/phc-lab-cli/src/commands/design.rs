//! `design`: generate a cavity hole layout from a JSON spec, run the
//! design-rule check, and write layout.json / layout.csv / drc.json.

use serde::{Deserialize, Serialize};

use phc_lab::geometry::{
    design_rule_check, export_layout, generate_1d_holes, generate_2d_holes, DesignError,
    DrcViolation, HoleList, LayoutFormat, Nanobeam1DSpec, Phc2DSpec,
};

use super::{ensure_schema, CmdResult, Ctx, Failure};

pub const CONFIG_HELP: &str = "\
Config fields (JSON):
  schema_version     u32, must be 1
  kind               \"nanobeam_1d\" | \"phc_2d\"
  a_nm               lattice constant, nm
  r_nm               hole radius, nm (default 65)
  d_nm               film thickness, nm (default 160)
  w_nm               [1D] beam width, nm (default 370)
  taper_coeffs       [1D] lattice-constant taper fractions, innermost first
                     (default [0.84, 0.844, 0.858, 0.88, 0.911, 0.951])
  n_mirror           [1D] mirror periods per side (default 10)
  waveguide_coupled  [1D] remove mirror holes on one side (default false)
  holes_removed      [1D] holes removed when waveguide_coupled (default 9)
  b1_nm              [2D] innermost outward shift, nm (default 10.1)
  shift_ratios       [2D] shift fractions (default [1.0, 0.75, 0.5, 0.25])
  n_rows             [2D] lattice rows per side (default 8)
  n_cols             [2D] lattice columns per side (default 10)
  drc                { min_gap_nm, min_clearance_nm } (default 20 / 20)

Outputs: layout.json, layout.csv, drc.json.
Exit 0 when the design-rule check passes, 2 when it fails.";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    schema_version: u32,
    kind: String,
    a_nm: f64,
    #[serde(default)]
    r_nm: Option<f64>,
    #[serde(default)]
    d_nm: Option<f64>,
    #[serde(default)]
    w_nm: Option<f64>,
    #[serde(default)]
    taper_coeffs: Option<Vec<f64>>,
    #[serde(default)]
    n_mirror: Option<usize>,
    #[serde(default)]
    waveguide_coupled: Option<bool>,
    #[serde(default)]
    holes_removed: Option<usize>,
    #[serde(default)]
    b1_nm: Option<f64>,
    #[serde(default)]
    shift_ratios: Option<Vec<f64>>,
    #[serde(default)]
    n_rows: Option<usize>,
    #[serde(default)]
    n_cols: Option<usize>,
    #[serde(default)]
    drc: Option<DrcLimits>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DrcLimits {
    pub min_gap_nm: f64,
    pub min_clearance_nm: f64,
}

impl Default for DrcLimits {
    fn default() -> Self {
        Self {
            min_gap_nm: 20.0,
            min_clearance_nm: 20.0,
        }
    }
}

#[derive(Debug, Serialize)]
struct DrcReport {
    schema_version: u32,
    limits: DrcLimits,
    pass: bool,
    violations: Vec<DrcViolation>,
    /// Geometry-generation failures that preclude a layout (treated as
    /// design-rule failures, not config errors).
    generation_errors: Vec<String>,
}

fn reject_fields(kind: &str, fields: &[(&str, bool)]) -> CmdResult {
    for (name, set) in fields {
        if *set {
            return Err(Failure::config(format!(
                "field {name} does not apply to kind {kind:?}"
            )));
        }
    }
    Ok(())
}

/// Overlap-style generation failures are design-rule failures (exit 2);
/// everything else about the spec is a config error (exit 1).
fn is_geometric_overlap(e: &DesignError) -> bool {
    matches!(
        e,
        DesignError::TaperedHolesOverlap { .. }
            | DesignError::HoleWiderThanBeam { .. }
            | DesignError::LatticeHolesOverlap { .. }
    )
}

fn build_layout(cfg: &DesignConfig) -> CmdResult<Result<HoleList, DesignError>> {
    match cfg.kind.as_str() {
        "nanobeam_1d" => {
            reject_fields(
                "nanobeam_1d",
                &[
                    ("b1_nm", cfg.b1_nm.is_some()),
                    ("shift_ratios", cfg.shift_ratios.is_some()),
                    ("n_rows", cfg.n_rows.is_some()),
                    ("n_cols", cfg.n_cols.is_some()),
                ],
            )?;
            let mut spec = Nanobeam1DSpec::new(cfg.a_nm);
            if let Some(v) = cfg.r_nm {
                spec.r = v;
            }
            if let Some(v) = cfg.w_nm {
                spec.w = v;
            }
            if let Some(v) = cfg.d_nm {
                spec.d = v;
            }
            if let Some(v) = &cfg.taper_coeffs {
                spec.taper_coeffs = v.clone();
            }
            if let Some(v) = cfg.n_mirror {
                spec.n_mirror = v;
            }
            if let Some(v) = cfg.waveguide_coupled {
                spec.waveguide_coupled = v;
            }
            if let Some(v) = cfg.holes_removed {
                spec.holes_removed = v;
            }
            Ok(generate_1d_holes(&spec))
        }
        "phc_2d" => {
            reject_fields(
                "phc_2d",
                &[
                    ("w_nm", cfg.w_nm.is_some()),
                    ("taper_coeffs", cfg.taper_coeffs.is_some()),
                    ("n_mirror", cfg.n_mirror.is_some()),
                    ("waveguide_coupled", cfg.waveguide_coupled.is_some()),
                    ("holes_removed", cfg.holes_removed.is_some()),
                ],
            )?;
            let mut spec = Phc2DSpec::new(cfg.a_nm);
            if let Some(v) = cfg.r_nm {
                spec.r = v;
            }
            if let Some(v) = cfg.d_nm {
                spec.d = v;
            }
            if let Some(v) = cfg.b1_nm {
                spec.b1 = v;
            }
            if let Some(v) = &cfg.shift_ratios {
                spec.shift_ratios = v.clone();
            }
            if let Some(v) = cfg.n_rows {
                spec.n_rows = v;
            }
            if let Some(v) = cfg.n_cols {
                spec.n_cols = v;
            }
            Ok(generate_2d_holes(&spec))
        }
        other => Err(Failure::config(format!(
            "field kind must be \"nanobeam_1d\" or \"phc_2d\", got {other:?}"
        ))),
    }
}

pub fn run(ctx: &Ctx) -> CmdResult {
    let (cfg, _dir) = ctx.load_config::<DesignConfig>()?;
    ensure_schema(cfg.schema_version)?;
    let limits = cfg.drc.unwrap_or_default();

    let holes = match build_layout(&cfg)? {
        Ok(holes) => holes,
        Err(e) if is_geometric_overlap(&e) => {
            let report = DrcReport {
                schema_version: 1,
                limits,
                pass: false,
                violations: vec![],
                generation_errors: vec![e.to_string()],
            };
            ctx.write_output("drc.json", &super::to_json_bytes(&report)?)?;
            return Err(Failure::drc(format!("design-rule failure: {e}")));
        }
        Err(e) => return Err(Failure::config(format!("invalid design: {e}"))),
    };

    let violations = design_rule_check(&holes, limits.min_gap_nm, limits.min_clearance_nm);
    let pass = violations.is_empty();
    let report = DrcReport {
        schema_version: 1,
        limits,
        pass,
        violations,
        generation_errors: vec![],
    };

    let json = export_layout(&holes, LayoutFormat::Json)
        .map_err(|e| Failure::config(format!("layout export failed: {e}")))?;
    let csv = export_layout(&holes, LayoutFormat::Csv)
        .map_err(|e| Failure::config(format!("layout export failed: {e}")))?;
    ctx.write_output("layout.json", &json)?;
    ctx.write_output("layout.csv", &csv)?;
    ctx.write_output("drc.json", &super::to_json_bytes(&report)?)?;

    if !pass {
        return Err(Failure::drc(format!(
            "design-rule check failed with {} violation(s); see drc.json",
            report.violations.len()
        )));
    }
    println!(
        "design: {} holes, DRC pass (min gap {} nm, min clearance {} nm)",
        holes.holes.len(),
        limits.min_gap_nm,
        limits.min_clearance_nm
    );
    Ok(())
}
