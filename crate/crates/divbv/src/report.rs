//! Structured verification results and their CSV serialization.
//!
//! Every estimate check produces one `Report` row. Numeric fields are
//! written with the shortest round-trip float formatting so that reruns
//! with identical inputs produce byte-identical output.

use sha2::{Digest, Sha256};
use std::fmt;
use std::io::{self, Write};

/// Outcome classification for a verification run.
///
/// Slack and resolution problems are statuses, not errors: the row still
/// carries the computed numbers so a degraded run remains inspectable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Inputs violated an admissibility assumption (for example a
    /// conservation defect above tolerance); values are still reported.
    InadmissibleInput,
    /// Count of cells where a determinant that should be nonnegative came
    /// out negative and was clamped to zero in the integrand.
    ClampedCells(usize),
    /// The configuration asked for structure finer than the grid resolves.
    BelowResolution,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ok => write!(f, "ok"),
            Status::InadmissibleInput => write!(f, "inadmissible-input"),
            Status::ClampedCells(k) => write!(f, "clamped-cells({k})"),
            Status::BelowResolution => write!(f, "below-resolution"),
        }
    }
}

pub const CSV_HEADER: &str = "estimate,lhs,rhs_scale,ratio,status,fingerprint,grid,extra";

#[derive(Clone, Debug)]
pub struct Report {
    pub estimate: String,
    pub lhs: f64,
    pub rhs_scale: f64,
    pub ratio: f64,
    pub status: Status,
    pub fingerprint: String,
    pub grid: String,
    pub extra: String,
}

impl Report {
    pub fn new(
        estimate: &str,
        lhs: f64,
        rhs_scale: f64,
        status: Status,
        fingerprint: String,
        grid: String,
        extra: String,
    ) -> Self {
        let ratio = if rhs_scale != 0.0 { lhs / rhs_scale } else { 0.0 };
        Self {
            estimate: estimate.to_string(),
            lhs,
            rhs_scale,
            ratio,
            status,
            fingerprint,
            grid,
            extra,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            sanitize(&self.estimate),
            self.lhs,
            self.rhs_scale,
            self.ratio,
            self.status,
            sanitize(&self.fingerprint),
            sanitize(&self.grid),
            sanitize(&self.extra),
        )
    }
}

/// Commas would break the fixed eight-column layout; swap them for
/// semicolons inside free-text fields.
fn sanitize(s: &str) -> String {
    s.replace(',', ";")
}

pub fn write_csv<W: Write>(reports: &[Report], w: &mut W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Parse rows previously produced by `write_csv` (used by report merging).
pub fn parse_csv(text: &str) -> crate::error::Result<Vec<Report>> {
    let mut out = Vec::new();
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == CSV_HEADER => {}
        _ => return Err(crate::error::Error::Format("missing report header".into())),
    }
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.splitn(8, ',').collect();
        if parts.len() != 8 {
            return Err(crate::error::Error::Format(format!(
                "report line {} has {} fields",
                k + 2,
                parts.len()
            )));
        }
        let num = |s: &str| -> crate::error::Result<f64> {
            s.parse::<f64>()
                .map_err(|_| crate::error::Error::Format(format!("bad number {s:?}")))
        };
        let status = parse_status(parts[4])?;
        out.push(Report {
            estimate: parts[0].to_string(),
            lhs: num(parts[1])?,
            rhs_scale: num(parts[2])?,
            ratio: num(parts[3])?,
            status,
            fingerprint: parts[5].to_string(),
            grid: parts[6].to_string(),
            extra: parts[7].to_string(),
        });
    }
    Ok(out)
}

fn parse_status(s: &str) -> crate::error::Result<Status> {
    if s == "ok" {
        return Ok(Status::Ok);
    }
    if s == "inadmissible-input" {
        return Ok(Status::InadmissibleInput);
    }
    if s == "below-resolution" {
        return Ok(Status::BelowResolution);
    }
    if let Some(k) = s
        .strip_prefix("clamped-cells(")
        .and_then(|t| t.strip_suffix(')'))
    {
        if let Ok(k) = k.parse::<usize>() {
            return Ok(Status::ClampedCells(k));
        }
    }
    Err(crate::error::Error::Format(format!("bad status {s:?}")))
}

/// Hex prefix of a SHA-256 digest; short enough for CSV, long enough to
/// make accidental collisions between runs implausible.
pub fn fingerprint_bytes(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_csv() {
        let r = Report::new(
            "fund",
            0.25,
            3.1,
            Status::ClampedCells(2),
            "abcd".into(),
            "n=2;counts=4x4".into(),
            "note=with,comma".into(),
        );
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&r), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = parse_csv(&text).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].estimate, "fund");
        assert_eq!(back[0].lhs, 0.25);
        assert_eq!(back[0].status, Status::ClampedCells(2));
        // The comma was sanitized away.
        assert_eq!(back[0].extra, "note=with;comma");
    }

    #[test]
    fn ratio_guards_zero_scale() {
        let r = Report::new("fund", 0.0, 0.0, Status::Ok, String::new(), String::new(), String::new());
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn fingerprints_are_stable_and_distinct() {
        let a = fingerprint_bytes(b"payload");
        let b = fingerprint_bytes(b"payload");
        let c = fingerprint_bytes(b"payloae");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn rejects_missing_header() {
        assert!(parse_csv("estimate,lhs\nfund,1").is_err());
    }
}
