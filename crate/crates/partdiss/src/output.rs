//! Bit-defined output formats: CSV with shortest round-trip floats, a manifest that
//! hashes every data file, and the raw little-endian snapshot stream.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use partdiss_core::integrate::Snapshot;

use crate::error::CliResult;

/// Shortest decimal that parses back to the same bits. Rust's `{:?}` for floats is exactly
/// that (and switches to exponent form when shorter), so reproducibility claims reduce to
/// byte equality of the CSVs.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn csv_escape(cell: &str) -> String {
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// A CSV cell: numbers go through the round-trip formatter, text through quoting.
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

pub fn csv_bytes(columns: &[&str], rows: &[Vec<Cell>]) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for cell in row {
            if !first {
                out.push(',');
            }
            first = false;
            match cell {
                Cell::Num(x) => out.push_str(&fmt_f64(*x)),
                Cell::Int(i) => out.push_str(&i.to_string()),
                Cell::Text(s) => out.push_str(&csv_escape(s)),
            }
        }
        out.push('\n');
    }
    out.into_bytes()
}

/// Numeric-only table straight from a trajectory record.
pub fn csv_numeric(columns: &[String], rows: &[Vec<f64>]) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for x in row {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&fmt_f64(*x));
        }
        out.push('\n');
    }
    out.into_bytes()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Frame layout: t, v1 coefficients, v2 grid values, z1 coefficients, z2 grid values,
/// all little-endian f64, one frame per record time.
pub fn snapshot_bytes(snaps: &[Snapshot]) -> (Vec<u8>, serde_json::Value) {
    let (nm, np) = snaps
        .first()
        .map(|s| (s.v1.coeffs.len(), s.v2.values.len()))
        .unwrap_or((0, 0));
    let frame_len = 1 + 2 * nm + 2 * np;
    let mut out = Vec::with_capacity(snaps.len() * frame_len * 8);
    for s in snaps {
        out.extend_from_slice(&s.t.to_le_bytes());
        for c in &s.v1.coeffs {
            out.extend_from_slice(&c.to_le_bytes());
        }
        for v in &s.v2.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for c in &s.z1.coeffs {
            out.extend_from_slice(&c.to_le_bytes());
        }
        for v in &s.z2.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let layout = serde_json::json!({
        "element": "f64-le",
        "frames": snaps.len(),
        "frame_len": frame_len,
        "fields": [
            { "name": "t", "len": 1 },
            { "name": "v1", "len": nm },
            { "name": "v2", "len": np },
            { "name": "z1", "len": nm },
            { "name": "z2", "len": np },
        ],
    });
    (out, layout)
}

/// Writes every data file plus `manifest.json`. The timestamp lives only here, so the data
/// files stay byte-identical across reruns of the same config.
pub fn write_outputs(
    dir: &Path,
    command: &str,
    config_bytes: &[u8],
    seed: u64,
    files: &[(String, Vec<u8>)],
    summary: serde_json::Value,
) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    let mut listed = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let mut f = std::fs::File::create(dir.join(name))?;
        f.write_all(bytes)?;
        listed.push(serde_json::json!({
            "name": name,
            "bytes": bytes.len(),
            "sha256": sha256_hex(bytes),
        }));
    }
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = serde_json::json!({
        "command": command,
        "code_version": env!("CARGO_PKG_VERSION"),
        "config_sha256": sha256_hex(config_bytes),
        "created_unix": created,
        "seed": seed,
        "files": listed,
        "summary": summary,
    });
    let mut f = std::fs::File::create(dir.join("manifest.json"))?;
    f.write_all(serde_json::to_string_pretty(&manifest).expect("manifest is valid json").as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}
