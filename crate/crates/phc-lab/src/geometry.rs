//! Cavity hole layouts: 1D nanobeam with a quadratic lattice-constant taper
//! and 2D width-modulated line defect in a triangular lattice.
//!
//! Coordinate convention: cavity center at the origin, defect axis along x.
//! All lengths in nanometres.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LAYOUT_SCHEMA_VERSION: u32 = 1;

/// Default lattice-constant taper fractions a₁/a … a₆/a, innermost first.
pub const DEFAULT_TAPER_COEFFS: [f64; 6] = [0.84, 0.844, 0.858, 0.88, 0.911, 0.951];
/// Default outward shifts of the defect-adjacent holes, as fractions of b₁.
pub const DEFAULT_SHIFT_RATIOS: [f64; 4] = [1.0, 0.75, 0.5, 0.25];

#[derive(Debug, Error, PartialEq)]
pub enum DesignError {
    #[error("tapered holes overlap: 2r = {two_r} nm >= a*min(taper) = {min_gap} nm")]
    TaperedHolesOverlap { two_r: f64, min_gap: f64 },
    #[error("hole does not fit in the beam: 2r = {two_r} nm >= w = {w} nm")]
    HoleWiderThanBeam { two_r: f64, w: f64 },
    #[error("taper coefficients must be strictly increasing and <= 1: {0:?}")]
    BadTaperCoeffs(Vec<f64>),
    #[error("bulk lattice holes overlap: 2r = {two_r} nm >= a = {a} nm")]
    LatticeHolesOverlap { two_r: f64, a: f64 },
    #[error("shift ratios must start at 1.0 and be strictly decreasing: {0:?}")]
    BadShiftRatios(Vec<f64>),
    #[error("dimension must be positive: {name} = {value}")]
    NonPositiveDimension { name: &'static str, value: f64 },
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("layout serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// 1D nanobeam cavity parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nanobeam1DSpec {
    /// Mirror lattice constant, nm.
    pub a: f64,
    /// Hole radius, nm.
    pub r: f64,
    /// Beam width, nm.
    pub w: f64,
    /// Film thickness, nm.
    pub d: f64,
    /// Lattice-constant taper fractions, innermost gap first.
    pub taper_coeffs: Vec<f64>,
    /// Untapered mirror periods per side.
    pub n_mirror: usize,
    /// Couple one side to a feeding waveguide by removing mirror holes.
    pub waveguide_coupled: bool,
    /// Holes removed on the +x side when waveguide_coupled.
    pub holes_removed: usize,
}

impl Nanobeam1DSpec {
    pub fn new(a: f64) -> Self {
        Self {
            a,
            r: 65.0,
            w: 370.0,
            d: 160.0,
            taper_coeffs: DEFAULT_TAPER_COEFFS.to_vec(),
            n_mirror: 10,
            waveguide_coupled: false,
            holes_removed: 9,
        }
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        for (name, value) in [("a", self.a), ("r", self.r), ("w", self.w), ("d", self.d)] {
            if !(value > 0.0) {
                return Err(DesignError::NonPositiveDimension { name, value });
            }
        }
        let increasing = self.taper_coeffs.windows(2).all(|p| p[1] > p[0]);
        if self.taper_coeffs.is_empty()
            || !increasing
            || self.taper_coeffs.iter().any(|&c| c <= 0.0 || c > 1.0)
        {
            return Err(DesignError::BadTaperCoeffs(self.taper_coeffs.clone()));
        }
        let min_gap = self.a * self.taper_coeffs[0];
        if 2.0 * self.r >= min_gap {
            return Err(DesignError::TaperedHolesOverlap {
                two_r: 2.0 * self.r,
                min_gap,
            });
        }
        if 2.0 * self.r >= self.w {
            return Err(DesignError::HoleWiderThanBeam {
                two_r: 2.0 * self.r,
                w: self.w,
            });
        }
        Ok(())
    }
}

/// 2D width-modulated line-defect cavity parameters (triangular lattice, W1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phc2DSpec {
    /// Triangular lattice constant, nm.
    pub a: f64,
    /// Hole radius, nm.
    pub r: f64,
    /// Film thickness, nm.
    pub d: f64,
    /// Innermost outward shift b₁, nm.
    pub b1: f64,
    /// Shift fractions for the holes nearest the cavity center, outermost last.
    pub shift_ratios: Vec<f64>,
    /// Lattice rows per side of the omitted defect row.
    pub n_rows: usize,
    /// Lattice columns per side of the cavity center.
    pub n_cols: usize,
}

impl Phc2DSpec {
    pub fn new(a: f64) -> Self {
        Self {
            a,
            r: 65.0,
            d: 160.0,
            b1: 10.1,
            shift_ratios: DEFAULT_SHIFT_RATIOS.to_vec(),
            n_rows: 8,
            n_cols: 10,
        }
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        for (name, value) in [("a", self.a), ("d", self.d)] {
            if !(value > 0.0) {
                return Err(DesignError::NonPositiveDimension { name, value });
            }
        }
        if self.r < 0.0 {
            return Err(DesignError::NonPositiveDimension {
                name: "r",
                value: self.r,
            });
        }
        if 2.0 * self.r >= self.a {
            return Err(DesignError::LatticeHolesOverlap {
                two_r: 2.0 * self.r,
                a: self.a,
            });
        }
        let decreasing = self.shift_ratios.windows(2).all(|p| p[1] < p[0]);
        if self.shift_ratios.is_empty() || self.shift_ratios[0] != 1.0 || !decreasing {
            return Err(DesignError::BadShiftRatios(self.shift_ratios.clone()));
        }
        Ok(())
    }
}

/// A circular air hole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

/// Material outline: an axis-aligned rectangle (beam cross-section or slab).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outline {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Outline {
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }
}

/// A cavity device: air holes plus the host slab/beam outline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleList {
    pub holes: Vec<Hole>,
    pub outline: Outline,
    pub metadata: String,
}

/// Generate the 1D nanobeam layout.
///
/// Hole x-positions are cumulative sums of segment lengths: from the center
/// outward the gaps are a₁ … a₆ (taper_coeffs·a), then n_mirror gaps of a.
/// The innermost pair sits at ±a₁/2. The layout is mirror-symmetric about
/// x = 0; when waveguide_coupled, the outermost holes on the +x side are
/// omitted so light preferentially exits into the feeding waveguide.
pub fn generate_1d_holes(spec: &Nanobeam1DSpec) -> Result<HoleList, DesignError> {
    spec.validate()?;
    let gaps: Vec<f64> = spec
        .taper_coeffs
        .iter()
        .map(|c| c * spec.a)
        .chain(std::iter::repeat_n(spec.a, spec.n_mirror))
        .collect();

    let mut xs = Vec::with_capacity(gaps.len());
    let mut x = gaps[0] / 2.0;
    xs.push(x);
    for &g in &gaps[1..] {
        x += g;
        xs.push(x);
    }
    let x_last = *xs.last().unwrap();

    let mut holes = Vec::new();
    for &x in xs.iter().rev() {
        holes.push(Hole {
            x: -x,
            y: 0.0,
            r: spec.r,
        });
    }
    let keep_pos = if spec.waveguide_coupled {
        xs.len().saturating_sub(spec.holes_removed)
    } else {
        xs.len()
    };
    for &x in &xs[..keep_pos] {
        holes.push(Hole {
            x,
            y: 0.0,
            r: spec.r,
        });
    }

    let margin = spec.a;
    let outline = Outline {
        x_min: -(x_last + margin),
        x_max: x_last + margin,
        y_min: -spec.w / 2.0,
        y_max: spec.w / 2.0,
    };
    Ok(HoleList {
        holes,
        outline,
        metadata: format!(
            "nanobeam1d a={} r={} w={} d={} n_mirror={} waveguide_coupled={}",
            spec.a, spec.r, spec.w, spec.d, spec.n_mirror, spec.waveguide_coupled
        ),
    })
}

/// Generate the 2D width-modulated line-defect layout.
///
/// Triangular lattice with row spacing a·√3/2 and alternate rows offset by
/// a/2; the center row is omitted (W1 defect). In the two rows adjacent to
/// the defect, the holes nearest the cavity center are displaced away from
/// the defect axis by b₁·shift_ratios[k].
pub fn generate_2d_holes(spec: &Phc2DSpec) -> Result<HoleList, DesignError> {
    spec.validate()?;
    let row_dy = spec.a * 3.0f64.sqrt() / 2.0;
    let mut holes = Vec::new();
    let n_rows = spec.n_rows as i64;
    let n_cols = spec.n_cols as i64;

    for j in -n_rows..=n_rows {
        if j == 0 {
            continue; // omitted defect row
        }
        let y = j as f64 * row_dy;
        let offset_row = j.rem_euclid(2) == 1;
        if offset_row {
            // Holes at ±a/2, ±3a/2, ...
            for i in 0..n_cols {
                let x = (i as f64 + 0.5) * spec.a;
                let shift = if j.abs() == 1 && (i as usize) < spec.shift_ratios.len() {
                    spec.b1 * spec.shift_ratios[i as usize] * j.signum() as f64
                } else {
                    0.0
                };
                holes.push(Hole {
                    x,
                    y: y + shift,
                    r: spec.r,
                });
                holes.push(Hole {
                    x: -x,
                    y: y + shift,
                    r: spec.r,
                });
            }
        } else {
            for i in -n_cols..=n_cols {
                let x = i as f64 * spec.a;
                holes.push(Hole { x, y, r: spec.r });
            }
        }
    }

    let margin = spec.a;
    let outline = Outline {
        x_min: -((n_cols as f64 + 0.5) * spec.a + margin),
        x_max: (n_cols as f64 + 0.5) * spec.a + margin,
        y_min: -(n_rows as f64 * row_dy + margin),
        y_max: n_rows as f64 * row_dy + margin,
    };
    Ok(HoleList {
        holes,
        outline,
        metadata: format!(
            "phc2d a={} r={} d={} b1={} n_rows={} n_cols={}",
            spec.a, spec.r, spec.d, spec.b1, spec.n_rows, spec.n_cols
        ),
    })
}

/// A single design-rule violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DrcViolation {
    /// Edge-to-edge gap between two holes below the minimum.
    Overlap { i: usize, j: usize, gap: f64 },
    /// Hole too close to (or outside) the outline.
    Clearance { i: usize, clearance: f64 },
}

/// Brute-force pairwise gap and outline clearance check. Empty result = pass.
pub fn design_rule_check(h: &HoleList, min_gap: f64, min_clearance: f64) -> Vec<DrcViolation> {
    let mut violations = Vec::new();
    for i in 0..h.holes.len() {
        for j in (i + 1)..h.holes.len() {
            let (a, b) = (&h.holes[i], &h.holes[j]);
            let dist = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
            let gap = dist - a.r - b.r;
            if gap < min_gap {
                violations.push(DrcViolation::Overlap { i, j, gap });
            }
        }
    }
    for (i, hole) in h.holes.iter().enumerate() {
        let clearance = [
            hole.x - hole.r - h.outline.x_min,
            h.outline.x_max - (hole.x + hole.r),
            hole.y - hole.r - h.outline.y_min,
            h.outline.y_max - (hole.y + hole.r),
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
        if clearance < min_clearance {
            violations.push(DrcViolation::Clearance { i, clearance });
        }
    }
    violations
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutFormat {
    Json,
    Csv,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayoutFile {
    schema_version: u32,
    metadata: String,
    outline: Outline,
    holes: Vec<Hole>,
}

/// Serialize a layout. CSV carries `x_nm,y_nm,r_nm` with shortest
/// round-trip decimals; JSON carries the full layout with schema version.
pub fn export_layout(h: &HoleList, format: LayoutFormat) -> Result<Vec<u8>, ExportError> {
    match format {
        LayoutFormat::Json => {
            let file = LayoutFile {
                schema_version: LAYOUT_SCHEMA_VERSION,
                metadata: h.metadata.clone(),
                outline: h.outline,
                holes: h.holes.clone(),
            };
            let mut bytes = serde_json::to_vec_pretty(&file)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        LayoutFormat::Csv => {
            let mut out = String::from("x_nm,y_nm,r_nm\n");
            for hole in &h.holes {
                out.push_str(&format!("{},{},{}\n", hole.x, hole.y, hole.r));
            }
            Ok(out.into_bytes())
        }
    }
}

/// Parse a JSON layout produced by [`export_layout`].
pub fn import_layout(bytes: &[u8]) -> Result<HoleList, ExportError> {
    let file: LayoutFile = serde_json::from_slice(bytes)?;
    Ok(HoleList {
        holes: file.holes,
        outline: file.outline,
        metadata: file.metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn innermost_gap_at_reference_lattice_constant() {
        let spec = Nanobeam1DSpec::new(269.0);
        let h = generate_1d_holes(&spec).unwrap();
        // Innermost pair sits at ±a₁/2 with a₁ = 0.84·269 = 225.96.
        let mut xs: Vec<f64> = h.holes.iter().map(|hole| hole.x).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let center_left = xs[xs.len() / 2 - 1];
        let center_right = xs[xs.len() / 2];
        assert!((center_right - center_left - 225.96).abs() < 1e-9);
    }

    #[test]
    fn symmetric_without_waveguide() {
        let h = generate_1d_holes(&Nanobeam1DSpec::new(255.0)).unwrap();
        for hole in &h.holes {
            assert!(h
                .holes
                .iter()
                .any(|other| (other.x + hole.x).abs() < 1e-12 && other.y == hole.y));
        }
    }

    #[test]
    fn waveguide_coupling_removes_nine_holes() {
        let mut spec = Nanobeam1DSpec::new(255.0);
        let full = generate_1d_holes(&spec).unwrap().holes.len();
        spec.waveguide_coupled = true;
        let coupled = generate_1d_holes(&spec).unwrap().holes.len();
        assert_eq!(full - coupled, 9);
    }

    #[test]
    fn taper_gap_second_differences_positive() {
        let spec = Nanobeam1DSpec::new(269.0);
        let mut gaps: Vec<f64> = spec.taper_coeffs.iter().map(|c| c * spec.a).collect();
        gaps.push(spec.a);
        for w in gaps.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] > 0.0, "{:?}", w);
        }
    }

    #[test]
    fn scaling_a_scales_coordinates_exactly() {
        let base = generate_1d_holes(&Nanobeam1DSpec::new(200.0)).unwrap();
        let scaled = generate_1d_holes(&Nanobeam1DSpec::new(250.0)).unwrap();
        let s = 250.0 / 200.0;
        for (a, b) in base.holes.iter().zip(&scaled.holes) {
            assert!((b.x - a.x * s).abs() < 1e-9);
            assert_eq!(a.r, b.r);
        }
    }

    #[test]
    fn invalid_taper_rejected() {
        let mut spec = Nanobeam1DSpec::new(269.0);
        spec.taper_coeffs = vec![0.9, 0.85, 1.0];
        assert!(matches!(
            generate_1d_holes(&spec),
            Err(DesignError::BadTaperCoeffs(_))
        ));
    }

    #[test]
    fn overlapping_taper_rejected() {
        let mut spec = Nanobeam1DSpec::new(184.0);
        spec.r = 80.0;
        assert!(matches!(
            generate_1d_holes(&spec),
            Err(DesignError::TaperedHolesOverlap { .. })
        ));
    }

    #[test]
    fn second_shift_from_b1() {
        let spec = Phc2DSpec::new(252.0);
        assert!((spec.b1 * spec.shift_ratios[1] - 7.575).abs() < 1e-12);
        let h = generate_2d_holes(&spec).unwrap();
        let row_dy = spec.a * 3.0f64.sqrt() / 2.0;
        // Second-nearest hole in the adjacent row sits at x = 1.5a shifted by b₂.
        let hole = h
            .holes
            .iter()
            .find(|hole| {
                (hole.x - 1.5 * spec.a).abs() < 1e-9 && hole.y > 0.0 && hole.y < 2.0 * row_dy
            })
            .unwrap();
        assert!((hole.y - (row_dy + 7.575)).abs() < 1e-9);
    }

    #[test]
    fn zero_radius_holes_on_pure_lattice() {
        let mut spec = Phc2DSpec::new(252.0);
        spec.r = 0.0;
        spec.b1 = 0.0;
        let h = generate_2d_holes(&spec).unwrap();
        let a = spec.a;
        // Nearest-neighbor distance exactly a (within fp rounding).
        let mut min_dist = f64::INFINITY;
        for (i, p) in h.holes.iter().enumerate() {
            for q in &h.holes[i + 1..] {
                let d = ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt();
                if d < min_dist {
                    min_dist = d;
                }
            }
        }
        assert!((min_dist - a).abs() < 1e-9, "{min_dist}");
    }

    #[test]
    fn zero_shift_matches_unshifted_lattice() {
        let mut spec = Phc2DSpec::new(252.0);
        spec.b1 = 0.0;
        let shifted = generate_2d_holes(&spec).unwrap();
        // Rebuild with the shift logic bypassed by construction: b1 = 0 must
        // give bitwise-equal positions to the raw W1 lattice.
        let mut raw = generate_2d_holes(&spec).unwrap();
        raw.metadata = shifted.metadata.clone();
        assert_eq!(shifted, raw);
        for hole in &shifted.holes {
            let row_dy = spec.a * 3.0f64.sqrt() / 2.0;
            let row = hole.y / row_dy;
            assert!((row - row.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn layout_symmetry_2d() {
        let h = generate_2d_holes(&Phc2DSpec::new(252.0)).unwrap();
        for hole in &h.holes {
            assert!(h
                .holes
                .iter()
                .any(|o| (o.x + hole.x).abs() < 1e-9 && (o.y - hole.y).abs() < 1e-9));
            assert!(h
                .holes
                .iter()
                .any(|o| (o.x - hole.x).abs() < 1e-9 && (o.y + hole.y).abs() < 1e-9));
        }
    }

    #[test]
    fn drc_passes_for_reference_ranges() {
        for a in [184.0, 226.0, 255.0, 284.0] {
            let h = generate_1d_holes(&Nanobeam1DSpec::new(a)).unwrap();
            assert!(design_rule_check(&h, 20.0, 20.0).is_empty(), "1D a={a}");
        }
        for a in [236.0, 252.0, 269.0] {
            let h = generate_2d_holes(&Phc2DSpec::new(a)).unwrap();
            assert!(design_rule_check(&h, 20.0, 20.0).is_empty(), "2D a={a}");
        }
    }

    #[test]
    fn drc_flags_coincident_holes() {
        let h = HoleList {
            holes: vec![
                Hole {
                    x: 0.0,
                    y: 0.0,
                    r: 65.0,
                },
                Hole {
                    x: 0.0,
                    y: 0.0,
                    r: 65.0,
                },
            ],
            outline: Outline {
                x_min: -500.0,
                x_max: 500.0,
                y_min: -500.0,
                y_max: 500.0,
            },
            metadata: String::new(),
        };
        let v = design_rule_check(&h, 20.0, 20.0);
        assert_eq!(
            v.iter()
                .filter(|x| matches!(x, DrcViolation::Overlap { .. }))
                .count(),
            1
        );
    }

    #[test]
    fn drc_flags_edge_hole() {
        let h = HoleList {
            holes: vec![Hole {
                x: 500.0,
                y: 0.0,
                r: 65.0,
            }],
            outline: Outline {
                x_min: -500.0,
                x_max: 500.0,
                y_min: -500.0,
                y_max: 500.0,
            },
            metadata: String::new(),
        };
        let v = design_rule_check(&h, 20.0, 20.0);
        assert_eq!(
            v.iter()
                .filter(|x| matches!(x, DrcViolation::Clearance { .. }))
                .count(),
            1
        );
    }

    #[test]
    fn csv_export_shapes() {
        let empty = HoleList {
            holes: vec![],
            outline: Outline {
                x_min: 0.0,
                x_max: 1.0,
                y_min: 0.0,
                y_max: 1.0,
            },
            metadata: String::new(),
        };
        assert_eq!(
            export_layout(&empty, LayoutFormat::Csv).unwrap(),
            b"x_nm,y_nm,r_nm\n"
        );
        let one = HoleList {
            holes: vec![Hole {
                x: 0.0,
                y: 0.0,
                r: 65.0,
            }],
            ..empty
        };
        assert_eq!(
            export_layout(&one, LayoutFormat::Csv).unwrap(),
            b"x_nm,y_nm,r_nm\n0,0,65\n"
        );
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let h = generate_1d_holes(&Nanobeam1DSpec::new(269.0)).unwrap();
        let bytes = export_layout(&h, LayoutFormat::Json).unwrap();
        let back = import_layout(&bytes).unwrap();
        let again = export_layout(&back, LayoutFormat::Json).unwrap();
        assert_eq!(bytes, again);
    }
}
