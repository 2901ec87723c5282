//! Monte Carlo fabrication-tolerance studies: jitter hole layouts with
//! seeded Gaussians, estimate resonance shifts by first-order perturbation
//! theory on a baseline field snapshot, and summarize yield with
//! Wilson-score confidence intervals.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fdtd::{rasterize, FdtdError, FieldSnapshot, Grid2D};
use crate::geometry::HoleList;
use crate::wave1d::{slab_neff, Wave1dError};

#[derive(Debug, Error)]
pub enum DisorderError {
    #[error("invalid disorder model: {0}")]
    BadModel(String),
    #[error("permittivity rasters are not aligned")]
    MisalignedRasters,
    #[error("zero-field snapshot: perturbation denominator vanishes")]
    DegenerateField,
    #[error("baseline is incomplete: {0}")]
    MissingBaseline(String),
    #[error(transparent)]
    Fdtd(#[from] FdtdError),
    #[error(transparent)]
    Slab(#[from] Wave1dError),
}

/// Fabrication disorder magnitudes, all in nm, plus the run seed.
/// Film thickness jitter defaults to 1 nm.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DisorderModel {
    pub sigma_r_nm: f64,
    pub sigma_xy_nm: f64,
    pub sigma_d_nm: f64,
    pub seed: u64,
}

impl DisorderModel {
    pub fn new(sigma_r_nm: f64, sigma_xy_nm: f64, seed: u64) -> Self {
        Self {
            sigma_r_nm,
            sigma_xy_nm,
            sigma_d_nm: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), DisorderError> {
        if self.sigma_r_nm < 0.0 || self.sigma_xy_nm < 0.0 || self.sigma_d_nm < 0.0 {
            return Err(DisorderError::BadModel(format!(
                "negative sigma in {self:?}"
            )));
        }
        Ok(())
    }
}

/// Fraction of truncated radius draws above which a warning is recorded.
const TRUNCATION_WARN_FRACTION: f64 = 0.01;

/// Stream salt separating thickness draws from hole draws.
const THICKNESS_SALT: u64 = 0x74686b6e;

fn hole_rng(seed: u64, sample_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample_index);
    rng
}

/// One disorder realization of a layout. Radii are Gaussian with the draw
/// truncated at half the nominal radius (clamped, counted); positions get
/// independent per-axis jitter. Deterministic in (seed, sample_index); the
/// outline is left untouched so rasters of all samples share a grid.
pub fn perturb(
    h: &HoleList,
    m: &DisorderModel,
    sample_index: u64,
) -> Result<HoleList, DisorderError> {
    m.validate()?;
    let mut rng = hole_rng(m.seed, sample_index);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out = h.clone();
    let mut truncated = 0usize;
    for hole in &mut out.holes {
        let dx = unit.sample(&mut rng) * m.sigma_xy_nm;
        let dy = unit.sample(&mut rng) * m.sigma_xy_nm;
        let mut dr = unit.sample(&mut rng) * m.sigma_r_nm;
        let bound = hole.r / 2.0;
        if dr.abs() > bound {
            dr = dr.clamp(-bound, bound);
            truncated += 1;
        }
        hole.x += dx;
        hole.y += dy;
        hole.r += dr;
    }
    if !h.holes.is_empty() {
        let frac = truncated as f64 / h.holes.len() as f64;
        if frac > TRUNCATION_WARN_FRACTION {
            if !out.metadata.is_empty() {
                out.metadata.push('\n');
            }
            out.metadata.push_str(&format!(
                "warning: radius truncation on {:.1}% of holes (sigma_r too large for this layout)",
                frac * 100.0
            ));
        }
    }
    Ok(out)
}

/// Per-sample film thickness draw, on its own RNG stream so hole and
/// thickness sequences never interleave.
fn sample_thickness(nominal_nm: f64, m: &DisorderModel, sample_index: u64) -> f64 {
    let mut rng = hole_rng(m.seed ^ THICKNESS_SALT, sample_index);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    (nominal_nm + unit.sample(&mut rng) * m.sigma_d_nm).max(1.0)
}

/// First-order cavity perturbation theory on a fixed mode profile:
/// frequency shift dw/w = -(1/2) sum(d_eps |E|^2) / sum(eps |E|^2), and
/// d_lambda/lambda = -dw/w to first order.
pub fn resonance_shift_perturbation(
    snapshot: &FieldSnapshot,
    eps_base: &Grid2D,
    eps_perturbed: &Grid2D,
) -> Result<f64, DisorderError> {
    if eps_base.nx != eps_perturbed.nx
        || eps_base.ny != eps_perturbed.ny
        || eps_base.dx_nm != eps_perturbed.dx_nm
        || snapshot.nx != eps_base.nx
        || snapshot.ny != eps_base.ny
    {
        return Err(DisorderError::MisalignedRasters);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&e, &eb), &ep) in snapshot
        .data
        .iter()
        .zip(&eps_base.eps)
        .zip(&eps_perturbed.eps)
    {
        let u = e * e;
        num += (ep - eb) * u;
        den += eb * u;
    }
    if den == 0.0 {
        return Err(DisorderError::DegenerateField);
    }
    Ok(0.5 * num / den)
}

/// Phenomenological disorder-scattering coefficient in the Q model
/// 1/Q = 1/Q_base + alpha (sigma_eff / a)^2. Single calibration constant,
/// set so that nm-scale jitter on a ~250 nm pitch accounts for the typical
/// gap between as-designed and as-fabricated Q.
pub const Q_DISORDER_ALPHA: f64 = 0.12;

/// Statistical Q estimate under combined radius and position jitter.
pub fn scattering_q(q_base: f64, sigma_r_nm: f64, sigma_xy_nm: f64, a_nm: f64) -> f64 {
    let sigma_eff_sq = sigma_r_nm * sigma_r_nm + sigma_xy_nm * sigma_xy_nm;
    if sigma_eff_sq == 0.0 {
        return q_base;
    }
    1.0 / (1.0 / q_base + Q_DISORDER_ALPHA * sigma_eff_sq / (a_nm * a_nm))
}

/// Wilson score interval at 95% confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilsonInterval {
    pub lo: f64,
    pub hi: f64,
}

pub fn wilson_interval(successes: usize, n: usize) -> WilsonInterval {
    assert!(n > 0 && successes <= n);
    let z = 1.959_963_984_540_054; // two-sided 95%
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2n = z * z / n_f;
    let center = (p + z2n / 2.0) / (1.0 + z2n);
    let half = z * (p * (1.0 - p) / n_f + z2n / (4.0 * n_f)).sqrt() / (1.0 + z2n);
    // At p = 0 or 1 the exact endpoints coincide with p; rounding can pull
    // them inside, so pin containment explicitly.
    WilsonInterval {
        lo: (center - half).max(0.0).min(p),
        hi: (center + half).min(1.0).max(p),
    }
}

/// Everything the yield study needs from one baseline simulation.
#[derive(Debug, Clone)]
pub struct Baseline {
    pub holes: HoleList,
    pub grid: Grid2D,
    pub snapshot: FieldSnapshot,
    pub lambda_nm: f64,
    pub q_base: f64,
    /// Lattice constant used in the Q-degradation model.
    pub a_nm: f64,
    pub thickness_nm: f64,
    /// Bulk index of the film material.
    pub n_bulk: f64,
    /// Raster padding used when the baseline grid was built; samples reuse it.
    pub padding_nm: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct YieldCriteria {
    pub q_threshold: f64,
    pub lambda_tol_percent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample: u64,
    pub dlambda_nm: f64,
    pub q_est: f64,
}

/// Published uniformity figures shown alongside computed fractions for
/// side-by-side comparison. Display only, never asserted against.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct YieldReference {
    pub yield_fraction: f64,
    pub yield_counts: (u32, u32),
    pub deviation_1d_percent: f64,
    pub deviation_2d_percent: f64,
}

pub const PUBLISHED_YIELD_REFERENCE: YieldReference = YieldReference {
    yield_fraction: 0.93,
    yield_counts: (53, 57),
    deviation_1d_percent: 2.9,
    deviation_2d_percent: 2.5,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct YieldReport {
    pub n_samples: usize,
    pub criteria: YieldCriteria,
    pub fraction_q_above: f64,
    pub ci_q: WilsonInterval,
    pub fraction_wavelength_within: f64,
    pub ci_wavelength: WilsonInterval,
    pub records: Vec<SampleRecord>,
    pub reference: YieldReference,
    /// Samples whose perturbed layout carried a truncation warning.
    pub truncation_warnings: usize,
}

/// Monte Carlo yield estimate. Each sample perturbs the layout, evaluates
/// the wavelength shift by perturbation theory (hole jitter plus a
/// thickness-driven effective-index change), and scores Q with the
/// statistical model using the sample's realized jitter. Fully
/// deterministic for fixed (baseline, model, n_samples).
pub fn yield_study(
    base: &Baseline,
    m: &DisorderModel,
    n_samples: usize,
    criteria: &YieldCriteria,
) -> Result<YieldReport, DisorderError> {
    yield_study_threads(base, m, n_samples, criteria, 1)
}

/// One Monte Carlo sample: the record plus whether truncation was flagged.
fn evaluate_sample(
    base: &Baseline,
    m: &DisorderModel,
    n_eff_base: f64,
    idx: u64,
) -> Result<(SampleRecord, bool), DisorderError> {
    let sample = perturb(&base.holes, m, idx)?;
    let truncated = sample.metadata.len() > base.holes.metadata.len();
    let eps_s = rasterize(&sample, n_eff_base, base.grid.dx_nm, base.padding_nm)?;
    let shift_holes = resonance_shift_perturbation(&base.snapshot, &base.grid, &eps_s)?;

    let d_s = sample_thickness(base.thickness_nm, m, idx);
    let n_eff_s = slab_neff(base.n_bulk, 1.0, d_s, base.lambda_nm)?;
    // Thickness enters as a uniform rescale of the dielectric part of
    // eps, applied through the same perturbation formula.
    let scale = (n_eff_s * n_eff_s - 1.0) / (n_eff_base * n_eff_base - 1.0);
    let mut num = 0.0;
    let mut den = 0.0;
    for (&e, &eb) in base.snapshot.data.iter().zip(&base.grid.eps) {
        let u = e * e;
        num += (eb - 1.0) * (scale - 1.0) * u;
        den += eb * u;
    }
    let shift_thickness = 0.5 * num / den;

    let dlambda_nm = base.lambda_nm * (shift_holes + shift_thickness);

    // Realized per-sample jitter feeds the Q model.
    let mut sr2 = 0.0;
    let mut sxy2 = 0.0;
    for (p, q) in sample.holes.iter().zip(&base.holes.holes) {
        sr2 += (p.r - q.r).powi(2);
        sxy2 += ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)) / 2.0;
    }
    let n_h = base.holes.holes.len().max(1) as f64;
    let q_est = scattering_q(
        base.q_base,
        (sr2 / n_h).sqrt(),
        (sxy2 / n_h).sqrt(),
        base.a_nm,
    );

    Ok((
        SampleRecord {
            sample: idx,
            dlambda_nm,
            q_est,
        },
        truncated,
    ))
}

/// [`yield_study`] with an explicit worker count. Samples are independent
/// and evaluated on `threads` workers; the reduction always walks records
/// in sample order, so the report is byte-identical for any thread count.
pub fn yield_study_threads(
    base: &Baseline,
    m: &DisorderModel,
    n_samples: usize,
    criteria: &YieldCriteria,
    threads: usize,
) -> Result<YieldReport, DisorderError> {
    m.validate()?;
    if n_samples == 0 {
        return Err(DisorderError::BadModel("n_samples must be positive".into()));
    }
    if base.snapshot.nx != base.grid.nx || base.snapshot.ny != base.grid.ny {
        return Err(DisorderError::MissingBaseline(
            "snapshot does not match the baseline grid".into(),
        ));
    }
    if base.snapshot.data.iter().all(|&v| v == 0.0) {
        return Err(DisorderError::MissingBaseline(
            "snapshot is all zero".into(),
        ));
    }
    let n_eff_base = slab_neff(base.n_bulk, 1.0, base.thickness_nm, base.lambda_nm)?;

    let threads = threads.max(1).min(n_samples);
    let mut results: Vec<Option<Result<(SampleRecord, bool), DisorderError>>> =
        (0..n_samples).map(|_| None).collect();
    if threads == 1 {
        for (idx, slot) in results.iter_mut().enumerate() {
            *slot = Some(evaluate_sample(base, m, n_eff_base, idx as u64));
        }
    } else {
        std::thread::scope(|scope| {
            let mut rest: &mut [Option<Result<(SampleRecord, bool), DisorderError>>] = &mut results;
            let chunk = n_samples.div_ceil(threads);
            let mut start = 0usize;
            while !rest.is_empty() {
                let take = chunk.min(rest.len());
                let (head, tail) = rest.split_at_mut(take);
                rest = tail;
                let first = start;
                scope.spawn(move || {
                    for (off, slot) in head.iter_mut().enumerate() {
                        *slot = Some(evaluate_sample(base, m, n_eff_base, (first + off) as u64));
                    }
                });
                start += take;
            }
        });
    }

    let mut records = Vec::with_capacity(n_samples);
    let mut q_pass = 0usize;
    let mut lambda_pass = 0usize;
    let mut truncation_warnings = 0usize;
    for slot in results {
        let (record, truncated) = slot.expect("all samples evaluated")?;
        if truncated {
            truncation_warnings += 1;
        }
        if record.q_est >= criteria.q_threshold {
            q_pass += 1;
        }
        if record.dlambda_nm.abs() / base.lambda_nm * 100.0 <= criteria.lambda_tol_percent {
            lambda_pass += 1;
        }
        records.push(record);
    }

    Ok(YieldReport {
        n_samples,
        criteria: *criteria,
        fraction_q_above: q_pass as f64 / n_samples as f64,
        ci_q: wilson_interval(q_pass, n_samples),
        fraction_wavelength_within: lambda_pass as f64 / n_samples as f64,
        ci_wavelength: wilson_interval(lambda_pass, n_samples),
        records,
        reference: PUBLISHED_YIELD_REFERENCE,
        truncation_warnings,
    })
}
