//! On-disk formats: the FSNP raw binary field container and the CSV
//! shapes used for traces, spectra, histograms, band structures, and
//! Monte Carlo sample records. All floating-point text uses the shortest
//! round-trip decimal form, so identical data gives identical bytes.

use std::io::{Read, Write};

use thiserror::Error;

use crate::bands::BandStructure;
use crate::disorder::SampleRecord;
use crate::fdtd::{FieldComponent, FieldSnapshot, Grid2D};
use crate::fit::{AxisKind, FitError, Spectrum, TimeTrace};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not an FSNP container (bad magic)")]
    BadMagic,
    #[error("malformed FSNP header: {0}")]
    BadHeader(String),
    #[error("malformed CSV at line {line}: {message}")]
    BadCsv { line: usize, message: String },
    #[error(transparent)]
    Fit(#[from] FitError),
}

const FSNP_MAGIC: &[u8; 4] = b"FSNP";

/// Write a field raster: 16-byte header (magic, nx, ny, component id,
/// little-endian u32s) followed by nx*ny little-endian f64 in row-major
/// order.
pub fn write_snapshot<W: Write>(w: &mut W, s: &FieldSnapshot) -> Result<(), IoError> {
    assert_eq!(s.data.len(), s.nx * s.ny, "snapshot shape mismatch");
    w.write_all(FSNP_MAGIC)?;
    w.write_all(&(s.nx as u32).to_le_bytes())?;
    w.write_all(&(s.ny as u32).to_le_bytes())?;
    w.write_all(&s.component.id().to_le_bytes())?;
    for v in &s.data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(r: &mut R) -> Result<FieldSnapshot, IoError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FSNP_MAGIC {
        return Err(IoError::BadMagic);
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let nx = u32::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let ny = u32::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let component = FieldComponent::from_id(u32::from_le_bytes(word)).ok_or_else(|| {
        IoError::BadHeader(format!("unknown component id {}", u32::from_le_bytes(word)))
    })?;
    if nx == 0 || ny == 0 || nx.checked_mul(ny).is_none() {
        return Err(IoError::BadHeader(format!("grid {nx} x {ny}")));
    }
    let mut data = Vec::with_capacity(nx * ny);
    let mut buf = [0u8; 8];
    for _ in 0..nx * ny {
        r.read_exact(&mut buf)?;
        data.push(f64::from_le_bytes(buf));
    }
    Ok(FieldSnapshot {
        component,
        nx,
        ny,
        data,
        step: 0,
    })
}

/// Permittivity maps travel in the same container, component id 0.
pub fn eps_snapshot(grid: &Grid2D) -> FieldSnapshot {
    FieldSnapshot {
        component: FieldComponent::Eps,
        nx: grid.nx,
        ny: grid.ny,
        data: grid.eps.clone(),
        step: 0,
    }
}

/// Time trace CSV: `step,time_fs,value`.
pub fn write_trace_csv<W: Write>(w: &mut W, t: &TimeTrace) -> Result<(), IoError> {
    writeln!(w, "step,time_fs,value")?;
    for (i, v) in t.values.iter().enumerate() {
        let time_fs = t.time_at(i) * 1e6;
        writeln!(w, "{i},{time_fs},{v}")?;
    }
    Ok(())
}

fn csv_lines(r: &mut impl Read) -> Result<Vec<String>, IoError> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    Ok(text.lines().map(str::to_owned).collect())
}

pub fn read_trace_csv<R: Read>(r: &mut R) -> Result<TimeTrace, IoError> {
    let lines = csv_lines(r)?;
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (ln, line) in lines.iter().enumerate() {
        if ln == 0 || line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let bad = |message: String| IoError::BadCsv {
            line: ln + 1,
            message,
        };
        parts.next(); // step index, redundant with row order
        let time_fs: f64 = parts
            .next()
            .ok_or_else(|| bad("missing time_fs".into()))?
            .trim()
            .parse()
            .map_err(|e| bad(format!("time_fs: {e}")))?;
        let value: f64 = parts
            .next()
            .ok_or_else(|| bad("missing value".into()))?
            .trim()
            .parse()
            .map_err(|e| bad(format!("value: {e}")))?;
        rows.push((time_fs, value));
    }
    if rows.len() < 2 {
        return Err(IoError::BadCsv {
            line: lines.len(),
            message: format!("need at least 2 data rows, found {}", rows.len()),
        });
    }
    let t0_ns = rows[0].0 * 1e-6;
    let dt_ns = (rows[1].0 - rows[0].0) * 1e-6;
    let values = rows.into_iter().map(|(_, v)| v).collect();
    Ok(TimeTrace::new(t0_ns, dt_ns, values)?)
}

/// Spectrum CSV: a `# axis_kind: nm|GHz` comment header, then `axis,value`.
pub fn write_spectrum_csv<W: Write>(w: &mut W, s: &Spectrum) -> Result<(), IoError> {
    let kind = match s.axis_kind() {
        AxisKind::WavelengthNm => "nm",
        AxisKind::FrequencyGhz => "GHz",
    };
    writeln!(w, "# axis_kind: {kind}")?;
    writeln!(w, "axis,value")?;
    for (a, v) in s.axis().iter().zip(s.counts()) {
        writeln!(w, "{a},{v}")?;
    }
    Ok(())
}

pub fn read_spectrum_csv<R: Read>(r: &mut R) -> Result<Spectrum, IoError> {
    let lines = csv_lines(r)?;
    let mut axis_kind = None;
    let mut axis = Vec::new();
    let mut counts = Vec::new();
    for (ln, line) in lines.iter().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(kind) = rest.trim().strip_prefix("axis_kind:") {
                axis_kind = Some(match kind.trim() {
                    "nm" => AxisKind::WavelengthNm,
                    "GHz" => AxisKind::FrequencyGhz,
                    other => {
                        return Err(IoError::BadCsv {
                            line: ln + 1,
                            message: format!("unknown axis_kind {other:?}"),
                        })
                    }
                });
            }
            continue;
        }
        if line == "axis,value" {
            continue;
        }
        let bad = |message: String| IoError::BadCsv {
            line: ln + 1,
            message,
        };
        let (a, v) = line
            .split_once(',')
            .ok_or_else(|| bad("expected axis,value".into()))?;
        axis.push(
            a.trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("axis: {e}")))?,
        );
        counts.push(
            v.trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("value: {e}")))?,
        );
    }
    let axis_kind = axis_kind.ok_or(IoError::BadCsv {
        line: 1,
        message: "missing '# axis_kind: nm|GHz' header".into(),
    })?;
    Ok(Spectrum::new(axis, counts, axis_kind)?)
}

/// Histogram CSV: `t_ns,counts` with uniform bins, read back as a TimeTrace.
pub fn write_histogram_csv<W: Write>(w: &mut W, h: &TimeTrace) -> Result<(), IoError> {
    writeln!(w, "t_ns,counts")?;
    for (i, v) in h.values.iter().enumerate() {
        writeln!(w, "{},{v}", h.time_at(i))?;
    }
    Ok(())
}

pub fn read_histogram_csv<R: Read>(r: &mut R) -> Result<TimeTrace, IoError> {
    let lines = csv_lines(r)?;
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (ln, line) in lines.iter().enumerate() {
        let line = line.trim();
        if line.is_empty() || line == "t_ns,counts" {
            continue;
        }
        let bad = |message: String| IoError::BadCsv {
            line: ln + 1,
            message,
        };
        let (t, v) = line
            .split_once(',')
            .ok_or_else(|| bad("expected t_ns,counts".into()))?;
        rows.push((
            t.trim().parse().map_err(|e| bad(format!("t_ns: {e}")))?,
            v.trim().parse().map_err(|e| bad(format!("counts: {e}")))?,
        ));
    }
    if rows.len() < 2 {
        return Err(IoError::BadCsv {
            line: lines.len(),
            message: format!("need at least 2 data rows, found {}", rows.len()),
        });
    }
    let t0 = rows[0].0;
    let dt = rows[1].0 - rows[0].0;
    Ok(TimeTrace::new(
        t0,
        dt,
        rows.into_iter().map(|(_, v)| v).collect(),
    )?)
}

/// Band structure CSV: `k_index,k_frac_x,k_frac_y,band0,band1,...` in a/lambda.
pub fn write_bands_csv<W: Write>(w: &mut W, bs: &BandStructure) -> Result<(), IoError> {
    let n_bands = bs.points.first().map(|p| p.freqs.len()).unwrap_or(0);
    let mut header = String::from("k_index,k_frac_x,k_frac_y");
    for b in 0..n_bands {
        header.push_str(&format!(",band{b}"));
    }
    writeln!(w, "{header}")?;
    for (i, p) in bs.points.iter().enumerate() {
        let mut row = format!("{i},{},{}", p.k_frac.0, p.k_frac.1);
        for f in &p.freqs {
            row.push_str(&format!(",{f}"));
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// Monte Carlo per-sample CSV: `sample,dlambda_nm,q_est`.
pub fn write_yield_csv<W: Write>(w: &mut W, records: &[SampleRecord]) -> Result<(), IoError> {
    writeln!(w, "sample,dlambda_nm,q_est")?;
    for r in records {
        writeln!(w, "{},{},{}", r.sample, r.dlambda_nm, r.q_est)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip_bit_exact() {
        let s = FieldSnapshot {
            component: FieldComponent::Ey,
            nx: 3,
            ny: 2,
            data: vec![0.0, -1.5, f64::MIN_POSITIVE, 3.25e300, -0.0, 42.42],
            step: 17,
        };
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &s).unwrap();
        assert_eq!(buf.len(), 16 + 6 * 8);
        assert_eq!(&buf[..4], b"FSNP");
        let back = read_snapshot(&mut buf.as_slice()).unwrap();
        assert_eq!(back.nx, 3);
        assert_eq!(back.ny, 2);
        assert_eq!(back.component, FieldComponent::Ey);
        for (a, b) in back.data.iter().zip(&s.data) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn eps_map_uses_component_zero() {
        let g = Grid2D::vacuum(10.0, 16, 16).unwrap();
        let s = eps_snapshot(&g);
        assert_eq!(s.component.id(), 0);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &s).unwrap();
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 0);
    }

    #[test]
    fn bad_magic_rejected() {
        let buf = b"NOPE\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x00\x00".to_vec();
        assert!(matches!(
            read_snapshot(&mut buf.as_slice()),
            Err(IoError::BadMagic)
        ));
    }

    #[test]
    fn truncated_snapshot_rejected() {
        let s = FieldSnapshot {
            component: FieldComponent::Hz,
            nx: 4,
            ny: 4,
            data: vec![1.0; 16],
            step: 0,
        };
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &s).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_snapshot(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn trace_csv_round_trip() {
        let t = TimeTrace::new(0.0, 0.5e-6, vec![1.0, -2.5, 0.125, 7.0]).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &t).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("step,time_fs,value\n0,0,1\n"));
        let back = read_trace_csv(&mut buf.as_slice()).unwrap();
        assert_eq!(back.values, t.values);
        assert!((back.dt_ns - t.dt_ns).abs() < 1e-18);
    }

    #[test]
    fn spectrum_csv_round_trip_both_axes() {
        for kind in [AxisKind::WavelengthNm, AxisKind::FrequencyGhz] {
            let s = Spectrum::new(vec![1.0, 2.0, 3.5], vec![10.0, 0.5, 3.0], kind).unwrap();
            let mut buf = Vec::new();
            write_spectrum_csv(&mut buf, &s).unwrap();
            let back = read_spectrum_csv(&mut buf.as_slice()).unwrap();
            assert_eq!(back.axis(), s.axis());
            assert_eq!(back.counts(), s.counts());
            assert_eq!(back.axis_kind(), kind);
        }
    }

    #[test]
    fn spectrum_csv_requires_axis_kind() {
        let text = b"axis,value\n1,2\n3,4\n".to_vec();
        assert!(read_spectrum_csv(&mut text.as_slice()).is_err());
    }

    #[test]
    fn histogram_csv_round_trip() {
        let h = TimeTrace::new(0.25, 0.125, vec![5.0, 3.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_histogram_csv(&mut buf, &h).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t_ns,counts\n0.25,5\n"));
        let back = read_histogram_csv(&mut buf.as_slice()).unwrap();
        assert_eq!(back.values, h.values);
        assert_eq!(back.t0_ns, 0.25);
        assert_eq!(back.dt_ns, 0.125);
    }

    #[test]
    fn empty_csv_rejected() {
        assert!(read_trace_csv(&mut b"".as_slice()).is_err());
        assert!(read_histogram_csv(&mut b"t_ns,counts\n".as_slice()).is_err());
    }

    #[test]
    fn bands_csv_shape() {
        let cfg = crate::bands::BandsConfig::new(0.25, 4.0);
        let bs = crate::bands::band_structure(&cfg, 2).unwrap();
        let mut buf = Vec::new();
        write_bands_csv(&mut buf, &bs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("k_index,k_frac_x,k_frac_y,band0,band1"));
        assert_eq!(lines.count(), bs.points.len());
    }

    #[test]
    fn yield_csv_golden() {
        let recs = vec![
            SampleRecord {
                sample: 0,
                dlambda_nm: 0.5,
                q_est: 100000.0,
            },
            SampleRecord {
                sample: 1,
                dlambda_nm: -0.25,
                q_est: 90000.0,
            },
        ];
        let mut buf = Vec::new();
        write_yield_csv(&mut buf, &recs).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "sample,dlambda_nm,q_est\n0,0.5,100000\n1,-0.25,90000\n"
        );
    }
}
