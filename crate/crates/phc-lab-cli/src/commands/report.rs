//! `report`: rank measured cavity results against the embedded literature
//! comparison table and write a readable summary plus machine-readable
//! rankings.

use serde::{Deserialize, Serialize};

use crate::table::{table_csv, TableRow, LITERATURE_TABLE};

use super::{ensure_schema, CmdResult, Ctx, Failure};

pub const CONFIG_HELP: &str = "\
Config fields (JSON):
  schema_version  u32, must be 1
  entries         results to rank (default: the embedded this-work rows):
                  [{ label, cavity_type: \"1D\"|\"2D\", wavelength_nm,
                     q, v_lambda_n3? }]

Each entry is ranked by Q against the previously published rows of the
same cavity type at visible wavelengths (telecom rows are listed for
context but excluded from the ranking), and its Q ratio over each prior
row is reported.

Outputs: report.json, report.txt, comparison.csv (the embedded table).";

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ReportEntry {
    pub label: String,
    pub cavity_type: String,
    pub wavelength_nm: f64,
    pub q: f64,
    #[serde(default)]
    pub v_lambda_n3: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportCmdConfig {
    schema_version: u32,
    #[serde(default)]
    entries: Option<Vec<ReportEntry>>,
}

#[derive(Debug, Serialize)]
struct PriorComparison {
    reference: String,
    material: String,
    wavelength_nm: f64,
    q: f64,
    q_ratio: f64,
}

#[derive(Debug, Serialize)]
struct Ranking {
    entry: ReportEntry,
    /// 1 = highest Q among the visible-wavelength rows of this cavity type.
    rank: usize,
    field_size: usize,
    priors: Vec<PriorComparison>,
    telecom_excluded: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ReportSummary {
    schema_version: u32,
    rankings: Vec<Ranking>,
}

fn default_entries() -> Vec<ReportEntry> {
    LITERATURE_TABLE
        .iter()
        .filter(|r| r.this_work)
        .map(|r| ReportEntry {
            label: format!("{} {} cavity", r.cavity_type, r.material),
            cavity_type: r.cavity_type.to_string(),
            wavelength_nm: r.wavelength_nm,
            q: r.best_q(),
            v_lambda_n3: r.v_lambda_n3,
        })
        .collect()
}

fn prior_rows(cavity_type: &str) -> (Vec<&'static TableRow>, Vec<String>) {
    let mut visible = Vec::new();
    let mut telecom = Vec::new();
    for r in LITERATURE_TABLE.iter() {
        if r.this_work || r.cavity_type != cavity_type {
            continue;
        }
        if r.telecom {
            telecom.push(format!("{} ({} nm)", r.reference, r.wavelength_nm));
        } else {
            visible.push(r);
        }
    }
    (visible, telecom)
}

pub fn run(ctx: &Ctx) -> CmdResult {
    let (cfg, _dir) = ctx.load_config::<ReportCmdConfig>()?;
    ensure_schema(cfg.schema_version)?;
    let entries = cfg.entries.unwrap_or_else(default_entries);
    if entries.is_empty() {
        return Err(Failure::config("field entries must not be empty"));
    }

    let mut rankings = Vec::new();
    for entry in entries {
        if entry.cavity_type != "1D" && entry.cavity_type != "2D" {
            return Err(Failure::config(format!(
                "field cavity_type must be \"1D\" or \"2D\", got {:?}",
                entry.cavity_type
            )));
        }
        if !(entry.q > 0.0 && entry.wavelength_nm > 0.0) {
            return Err(Failure::config(format!(
                "entry {:?} needs positive q and wavelength_nm",
                entry.label
            )));
        }
        let (visible, telecom_excluded) = prior_rows(&entry.cavity_type);
        let beaten_by = visible.iter().filter(|r| r.best_q() > entry.q).count();
        let priors = visible
            .iter()
            .map(|r| PriorComparison {
                reference: r.reference.to_string(),
                material: r.material.to_string(),
                wavelength_nm: r.wavelength_nm,
                q: r.best_q(),
                q_ratio: entry.q / r.best_q(),
            })
            .collect();
        rankings.push(Ranking {
            entry,
            rank: beaten_by + 1,
            field_size: visible.len() + 1,
            priors,
            telecom_excluded,
        });
    }

    let mut text = String::new();
    for r in &rankings {
        text.push_str(&format!(
            "{}: Q = {:.3e} at {} nm -> rank {} of {} among visible-wavelength {} cavities\n",
            r.entry.label,
            r.entry.q,
            r.entry.wavelength_nm,
            r.rank,
            r.field_size,
            r.entry.cavity_type
        ));
        for p in &r.priors {
            text.push_str(&format!(
                "  vs {} ({}, {} nm, Q = {:.2e}): {:.1}x\n",
                p.reference, p.material, p.wavelength_nm, p.q, p.q_ratio
            ));
        }
        if !r.telecom_excluded.is_empty() {
            text.push_str(&format!(
                "  telecom rows excluded from ranking: {}\n",
                r.telecom_excluded.join(", ")
            ));
        }
    }

    let summary = ReportSummary {
        schema_version: 1,
        rankings,
    };
    ctx.write_output("report.json", &super::to_json_bytes(&summary)?)?;
    ctx.write_output("report.txt", text.as_bytes())?;
    ctx.write_output("comparison.csv", table_csv().as_bytes())?;

    print!("{text}");
    Ok(())
}
