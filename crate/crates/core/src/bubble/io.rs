use super::{BubbleParams, BubbleReport, RadialProfile};
use crate::error::{Result, SylError};
use std::io::{BufRead, BufReader, Read, Write};

/// Write `r,u,v` rows at full round-trip precision.
pub fn write_profile_csv<W: Write>(profile: &RadialProfile, mut out: W) -> Result<()> {
    writeln!(out, "r,u,v")?;
    for i in 0..profile.r.len() {
        writeln!(out, "{:e},{:e},{:e}", profile.r[i], profile.u[i], profile.v[i])?;
    }
    Ok(())
}

pub fn read_profile_csv<R: Read>(input: R, params: BubbleParams) -> Result<RadialProfile> {
    let mut lines = BufReader::new(input).lines();
    let header = lines
        .next()
        .ok_or_else(|| SylError::Parse("empty profile file".into()))??;
    if header.trim() != "r,u,v" {
        return Err(SylError::Parse(format!("expected header 'r,u,v', got '{header}'")));
    }
    let (mut r, mut u, mut v) = (Vec::new(), Vec::new(), Vec::new());
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| SylError::Parse(format!("line {}: {e}", lineno + 2)))?;
        if vals.len() != 3 {
            return Err(SylError::Parse(format!("line {}: expected 3 columns", lineno + 2)));
        }
        r.push(vals[0]);
        u.push(vals[1]);
        v.push(vals[2]);
    }
    RadialProfile::new(r, u, v, params)
}

pub fn write_report_json<W: Write>(report: &BubbleReport, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, report)?;
    Ok(())
}
