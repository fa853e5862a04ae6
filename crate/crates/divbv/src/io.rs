//! On-disk formats: `dbv1` for tensor and scalar fields, `flw1` for
//! flows.
//!
//! Both formats open with a text header (one `key value...` pair per
//! line) followed by a raw little-endian f64 payload in row-major cell
//! order. Floats in the header are written with shortest round-trip
//! formatting, so write -> read -> write is byte identical; fingerprints
//! hash the serialized bytes.
//!
//! Singular-point markers on tensor fields are runtime annotations and
//! are deliberately not serialized.

use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::gas::{FlowField, Snapshot};
use crate::grid::Grid;
use crate::scalar::ScalarField;
use crate::symmat::packed_len;
use std::fs;
use std::path::Path;

const DBV_MAGIC: &str = "dbv1";
const FLW_MAGIC: &str = "flw1";

fn push_floats(out: &mut String, key: &str, vals: &[f64]) {
    out.push_str(key);
    for v in vals {
        out.push(' ');
        out.push_str(&format!("{v}"));
    }
    out.push('\n');
}

fn push_counts(out: &mut String, key: &str, vals: &[usize]) {
    out.push_str(key);
    for v in vals {
        out.push(' ');
        out.push_str(&format!("{v}"));
    }
    out.push('\n');
}

fn payload_bytes(out: &mut Vec<u8>, values: &[f64]) {
    out.reserve(values.len() * 8);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn grid_header(g: &Grid) -> String {
    let mut head = String::new();
    push_counts(&mut head, "n", &[g.dim()]);
    push_floats(&mut head, "origin", g.origin());
    push_floats(&mut head, "spacing", g.spacing());
    push_counts(&mut head, "counts", g.counts());
    head
}

pub fn field_to_bytes(f: &TensorField) -> Vec<u8> {
    let mut head = String::from(DBV_MAGIC);
    head.push('\n');
    head.push_str(&grid_header(f.grid()));
    if f.time_axis() {
        head.push_str("time-axis 0\n");
    }
    if f.matrix_dim() != f.grid().dim() {
        push_counts(&mut head, "matrix-dim", &[f.matrix_dim()]);
    }
    head.push_str("layout packed-upper\n");
    let mut out = head.into_bytes();
    payload_bytes(&mut out, f.values());
    out
}

pub fn scalar_to_bytes(f: &ScalarField) -> Vec<u8> {
    let mut head = String::from(DBV_MAGIC);
    head.push('\n');
    head.push_str(&grid_header(f.grid()));
    head.push_str("layout scalar\n");
    let mut out = head.into_bytes();
    payload_bytes(&mut out, f.values());
    out
}

pub fn flow_to_bytes(w: &FlowField) -> Vec<u8> {
    let g = w.grid();
    let mut head = String::from(FLW_MAGIC);
    head.push('\n');
    push_counts(&mut head, "d", &[g.dim()]);
    push_floats(&mut head, "origin", g.origin());
    push_floats(&mut head, "spacing", g.spacing());
    push_counts(&mut head, "counts", g.counts());
    push_floats(&mut head, "times", w.times());
    head.push_str("fields rho u p e\n");
    let mut out = head.into_bytes();
    for s in w.snapshots() {
        payload_bytes(&mut out, &s.rho);
        payload_bytes(&mut out, &s.u);
        payload_bytes(&mut out, &s.p);
        payload_bytes(&mut out, &s.e);
    }
    out
}

/// Header lines split off the payload; the terminator line is included
/// as the last element.
fn split_header<'a>(bytes: &'a [u8], terminator: &str) -> Result<(Vec<&'a str>, &'a [u8])> {
    let mut lines = Vec::new();
    let mut rest = bytes;
    loop {
        let nl = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Format("truncated header".into()))?;
        let line = std::str::from_utf8(&rest[..nl])
            .map_err(|_| Error::Format("header is not valid text".into()))?;
        rest = &rest[nl + 1..];
        lines.push(line);
        if line.starts_with(terminator) {
            return Ok((lines, rest));
        }
        if lines.len() > 64 {
            return Err(Error::Format("header does not terminate".into()));
        }
    }
}

fn parse_floats(line: &str, key: &str) -> Result<Vec<f64>> {
    let body = line
        .strip_prefix(key)
        .ok_or_else(|| Error::Format(format!("expected `{key}` line, found `{line}`")))?;
    body.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| Error::Format(format!("bad float `{tok}` in `{key}`")))
        })
        .collect()
}

fn parse_counts(line: &str, key: &str) -> Result<Vec<usize>> {
    let body = line
        .strip_prefix(key)
        .ok_or_else(|| Error::Format(format!("expected `{key}` line, found `{line}`")))?;
    body.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad count `{tok}` in `{key}`")))
        })
        .collect()
}

fn parse_payload(bytes: &[u8], expect: usize) -> Result<Vec<f64>> {
    if bytes.len() != expect * 8 {
        return Err(Error::Format(format!(
            "payload holds {} bytes, want {}",
            bytes.len(),
            expect * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunked by 8")))
        .collect())
}

struct DbvHeader {
    grid: Grid,
    time_axis: bool,
    matrix_dim: Option<usize>,
    layout: String,
}

fn parse_dbv_header(lines: &[&str]) -> Result<DbvHeader> {
    if lines.first() != Some(&DBV_MAGIC) {
        return Err(Error::Format("missing dbv1 magic".into()));
    }
    if lines.len() < 6 {
        return Err(Error::Format("dbv1 header is incomplete".into()));
    }
    let n = parse_counts(lines[1], "n")?;
    if n.len() != 1 {
        return Err(Error::Format("`n` wants exactly one value".into()));
    }
    let origin = parse_floats(lines[2], "origin")?;
    let spacing = parse_floats(lines[3], "spacing")?;
    let counts = parse_counts(lines[4], "counts")?;
    if origin.len() != n[0] || spacing.len() != n[0] || counts.len() != n[0] {
        return Err(Error::Format("axis lines disagree with `n`".into()));
    }
    let grid = Grid::new(origin, spacing, counts)?;
    let mut time_axis = false;
    let mut matrix_dim = None;
    let mut layout = String::new();
    for line in &lines[5..] {
        if let Some(rest) = line.strip_prefix("time-axis") {
            if rest.trim() != "0" {
                return Err(Error::Format("only a leading time axis is supported".into()));
            }
            time_axis = true;
        } else if line.starts_with("matrix-dim") {
            let v = parse_counts(line, "matrix-dim")?;
            if v.len() != 1 {
                return Err(Error::Format("`matrix-dim` wants one value".into()));
            }
            matrix_dim = Some(v[0]);
        } else if let Some(rest) = line.strip_prefix("layout") {
            layout = rest.trim().to_string();
        } else {
            return Err(Error::Format(format!("unknown header line `{line}`")));
        }
    }
    Ok(DbvHeader {
        grid,
        time_axis,
        matrix_dim,
        layout,
    })
}

pub fn field_from_bytes(bytes: &[u8]) -> Result<TensorField> {
    let (lines, payload) = split_header(bytes, "layout")?;
    let head = parse_dbv_header(&lines)?;
    if head.layout != "packed-upper" {
        return Err(Error::Format(format!(
            "layout `{}` is not a tensor layout",
            head.layout
        )));
    }
    let mdim = head.matrix_dim.unwrap_or(head.grid.dim());
    let data = parse_payload(payload, head.grid.cells() * packed_len(mdim))?;
    TensorField::from_parts(head.grid, mdim, data, head.time_axis)
}

pub fn scalar_from_bytes(bytes: &[u8]) -> Result<ScalarField> {
    let (lines, payload) = split_header(bytes, "layout")?;
    let head = parse_dbv_header(&lines)?;
    if head.layout != "scalar" {
        return Err(Error::Format(format!(
            "layout `{}` is not a scalar layout",
            head.layout
        )));
    }
    let data = parse_payload(payload, head.grid.cells())?;
    ScalarField::from_parts(head.grid, data)
}

pub fn flow_from_bytes(bytes: &[u8]) -> Result<FlowField> {
    let (lines, payload) = split_header(bytes, "fields")?;
    if lines.first() != Some(&FLW_MAGIC) {
        return Err(Error::Format("missing flw1 magic".into()));
    }
    if lines.len() != 7 {
        return Err(Error::Format("flw1 header is incomplete".into()));
    }
    let d = parse_counts(lines[1], "d")?;
    if d.len() != 1 {
        return Err(Error::Format("`d` wants exactly one value".into()));
    }
    let d = d[0];
    let origin = parse_floats(lines[2], "origin")?;
    let spacing = parse_floats(lines[3], "spacing")?;
    let counts = parse_counts(lines[4], "counts")?;
    if origin.len() != d || spacing.len() != d || counts.len() != d {
        return Err(Error::Format("axis lines disagree with `d`".into()));
    }
    let grid = Grid::new(origin, spacing, counts)?;
    let times = parse_floats(lines[5], "times")?;
    if lines[6] != "fields rho u p e" {
        return Err(Error::Format(format!(
            "unsupported field list `{}`",
            lines[6]
        )));
    }
    let cells = grid.cells();
    let per_snap = cells * (3 + d);
    let data = parse_payload(payload, times.len() * per_snap)?;
    let mut snaps = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let base = k * per_snap;
        snaps.push(Snapshot {
            rho: data[base..base + cells].to_vec(),
            u: data[base + cells..base + cells + cells * d].to_vec(),
            p: data[base + cells + cells * d..base + 2 * cells + cells * d].to_vec(),
            e: data[base + 2 * cells + cells * d..base + 3 * cells + cells * d].to_vec(),
        });
    }
    FlowField::new(grid, times, snaps)
}

pub fn save_field(path: &Path, f: &TensorField) -> Result<()> {
    fs::write(path, field_to_bytes(f))?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<TensorField> {
    field_from_bytes(&fs::read(path)?)
}

pub fn save_scalar(path: &Path, f: &ScalarField) -> Result<()> {
    fs::write(path, scalar_to_bytes(f))?;
    Ok(())
}

pub fn load_scalar(path: &Path) -> Result<ScalarField> {
    scalar_from_bytes(&fs::read(path)?)
}

pub fn save_flow(path: &Path, w: &FlowField) -> Result<()> {
    fs::write(path, flow_to_bytes(w))?;
    Ok(())
}

pub fn load_flow(path: &Path) -> Result<FlowField> {
    flow_from_bytes(&fs::read(path)?)
}

pub fn fingerprint_field(f: &TensorField) -> String {
    crate::report::fingerprint_bytes(&field_to_bytes(f))
}

pub fn fingerprint_scalar(f: &ScalarField) -> String {
    crate::report::fingerprint_bytes(&scalar_to_bytes(f))
}

pub fn fingerprint_flow(w: &FlowField) -> String {
    crate::report::fingerprint_bytes(&flow_to_bytes(w))
}
