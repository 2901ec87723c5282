//! `cqed`: cavity-QED figures of merit for an emitter-cavity pair —
//! Purcell factors, cooperativity, the intrinsic/extrinsic coupling split,
//! and the fiber-coupling budget — with per-input provenance.

use serde::Deserialize;

use phc_lab::cqed::{
    cooperativity, coupling_efficiency, purcell_from_lifetimes, purcell_ideal,
    split_intrinsic_extrinsic, CouplingRegime, CqedReport, EmitterParams, Provenanced,
    G_MEASURED_GHZ,
};
use phc_lab::units::{q_to_kappa, ModeVolume, QualityFactor, RateGhz, Wavelength, DIAMOND_INDEX};

use super::{ensure_schema, CmdResult, Ctx, Failure};

pub const CONFIG_HELP: &str = "\
Config fields (JSON):
  schema_version  u32, must be 1
  lambda_nm       resonance wavelength, nm
  q               loaded quality factor
  v               mode volume in (lambda/n)^3 units
  n_ref           index defining the mode-volume unit (default 2.41)
  g_ghz           emitter-cavity coupling rate, GHz (default 8.0)
  gamma_ghz       emitter natural linewidth, GHz (default 0.12)
  debye_waller    zero-phonon-line fraction of emission (default 0.70)
  branching_d     branching ratio into the fitted line (default 0.193)
  tau_on_ns       on-resonance lifetime, ns (optional, enables F_ZPL)
  tau_off_ns      off-resonance lifetime, ns (optional, enables F_ZPL)
  r0              on-resonance reflection floor in [0, 1] (optional,
                  enables the intrinsic/extrinsic Q split)
  regime          \"over\" | \"under\" | \"both\" (default \"both\")
  eta_tot         total fiber-to-fiber efficiency (optional, with eta_s)
  eta_s           setup efficiency excluding the device (optional)

Outputs: cqed.json (full report with provenance), cqed.txt (readable).";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CqedCmdConfig {
    schema_version: u32,
    lambda_nm: f64,
    q: f64,
    v: f64,
    #[serde(default)]
    n_ref: Option<f64>,
    #[serde(default)]
    g_ghz: Option<f64>,
    #[serde(default)]
    gamma_ghz: Option<f64>,
    #[serde(default)]
    debye_waller: Option<f64>,
    #[serde(default)]
    branching_d: Option<f64>,
    #[serde(default)]
    tau_on_ns: Option<f64>,
    #[serde(default)]
    tau_off_ns: Option<f64>,
    #[serde(default)]
    r0: Option<f64>,
    #[serde(default)]
    regime: Option<String>,
    #[serde(default)]
    eta_tot: Option<f64>,
    #[serde(default)]
    eta_s: Option<f64>,
}

/// Tag a value with whether the config set it or a default filled it in.
fn prov(value: f64, set: bool) -> Provenanced {
    Provenanced::new(value, if set { "config" } else { "default" })
}

pub fn run(ctx: &Ctx) -> CmdResult {
    let (cfg, _dir) = ctx.load_config::<CqedCmdConfig>()?;
    ensure_schema(cfg.schema_version)?;

    let lambda = Wavelength::new(cfg.lambda_nm)
        .map_err(|e| Failure::config(format!("invalid lambda_nm: {e}")))?;
    let q = QualityFactor::new(cfg.q).map_err(|e| Failure::config(format!("invalid q: {e}")))?;
    let n_ref = cfg.n_ref.unwrap_or(DIAMOND_INDEX);
    let v =
        ModeVolume::new(cfg.v, n_ref).map_err(|e| Failure::config(format!("invalid v: {e}")))?;

    let emitter = EmitterParams {
        gamma_ghz: cfg.gamma_ghz.unwrap_or(EmitterParams::default().gamma_ghz),
        debye_waller: cfg
            .debye_waller
            .unwrap_or(EmitterParams::default().debye_waller),
        branching_d: cfg
            .branching_d
            .unwrap_or(EmitterParams::default().branching_d),
        g_ghz: cfg.g_ghz.unwrap_or(G_MEASURED_GHZ),
    };
    emitter
        .validate()
        .map_err(|e| Failure::config(format!("invalid emitter parameters: {e}")))?;

    let kappa = q_to_kappa(q, lambda);
    let g =
        RateGhz::new(emitter.g_ghz).map_err(|e| Failure::config(format!("invalid g_ghz: {e}")))?;
    let gamma = RateGhz::new(emitter.gamma_ghz)
        .map_err(|e| Failure::config(format!("invalid gamma_ghz: {e}")))?;

    let f_zpl = match (cfg.tau_on_ns, cfg.tau_off_ns) {
        (Some(on), Some(off)) => Some(
            purcell_from_lifetimes(on, off, &emitter)
                .map_err(|e| Failure::config(format!("invalid lifetimes: {e}")))?,
        ),
        (None, None) => None,
        _ => {
            return Err(Failure::config(
                "fields tau_on_ns and tau_off_ns must be given together",
            ))
        }
    };

    let coupling_budget = match cfg.r0 {
        Some(r0) => {
            let regime = match cfg.regime.as_deref().unwrap_or("both") {
                "over" => CouplingRegime::Over,
                "under" => CouplingRegime::Under,
                "both" => CouplingRegime::Both,
                other => {
                    return Err(Failure::config(format!(
                        "field regime must be \"over\", \"under\", or \"both\", got {other:?}"
                    )))
                }
            };
            Some(
                split_intrinsic_extrinsic(q, r0, regime)
                    .map_err(|e| Failure::config(format!("invalid r0: {e}")))?,
            )
        }
        None => {
            if cfg.regime.is_some() {
                return Err(Failure::config("field regime needs r0 to act on"));
            }
            None
        }
    };

    let eta_c = match (cfg.eta_tot, cfg.eta_s) {
        (Some(tot), Some(s)) => Some(Provenanced::new(
            coupling_efficiency(tot, s)
                .map_err(|e| Failure::config(format!("invalid efficiency budget: {e}")))?,
            "derived from eta_tot / eta_s",
        )),
        (None, None) => None,
        _ => {
            return Err(Failure::config(
                "fields eta_tot and eta_s must be given together",
            ))
        }
    };

    let report = CqedReport {
        lambda_nm: prov(cfg.lambda_nm, true),
        q: prov(cfg.q, true),
        mode_volume: prov(cfg.v, true),
        g_ghz: prov(emitter.g_ghz, cfg.g_ghz.is_some()),
        gamma_ghz: prov(emitter.gamma_ghz, cfg.gamma_ghz.is_some()),
        kappa_ghz: Provenanced::new(kappa.ghz(), "derived from q and lambda_nm"),
        tau_on_ns: cfg.tau_on_ns.map(|t| prov(t, true)),
        tau_off_ns: cfg.tau_off_ns.map(|t| prov(t, true)),
        zpl_fraction: Provenanced::new(
            emitter.zpl_fraction(),
            "derived from debye_waller and branching_d",
        ),
        f_ideal: purcell_ideal(q, v),
        f_zpl,
        cooperativity: cooperativity(g, kappa, gamma),
        coupling_budget,
        eta_c,
    };

    ctx.write_output("cqed.json", &super::to_json_bytes(&report)?)?;
    ctx.write_output("cqed.txt", report.render_text().as_bytes())?;

    println!(
        "cqed: kappa = {:.3} GHz, F_ideal = {:.4e}, C = {:.1}{}",
        report.kappa_ghz.value,
        report.f_ideal,
        report.cooperativity,
        report
            .f_zpl
            .map(|f| format!(", F_ZPL = {f:.2}"))
            .unwrap_or_default()
    );
    Ok(())
}
