//! On-disk cache for the corrector table and the reduced constants.
//! The directory comes from `NBUB_CACHE_DIR` (default `.nbubble-cache`).

use std::path::PathBuf;

use nbubble_core::constants::{ConstantValue, Provenance};
use nbubble_core::corrector::{CorrectorTable, TABLE_FORMAT_VERSION};
use nbubble_core::{Dimension, ReducedConstants};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::output::json_string;
use crate::CliError;

pub const CACHE_ENV: &str = "NBUB_CACHE_DIR";
pub const CONSTANTS_FORMAT_VERSION: u32 = 1;

pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".nbubble-cache"))
}

fn key_hash(key: &str) -> String {
    let digest = Sha256::digest(key.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Where a value came from on this run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
}

impl CacheStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CacheStatus::Hit => "hit",
            CacheStatus::Miss => "miss",
        }
    }
}

fn io_err(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Loads the table for this key or builds and stores it. A file that fails to
/// decode is rebuilt rather than trusted.
pub fn corrector_table(dim: Dimension, r_max: f64, steps: usize, tol: f64) -> Result<(CorrectorTable, CacheStatus, PathBuf), CliError> {
    let key = format!("v{TABLE_FORMAT_VERSION} n={} r_max={r_max:e} steps={steps} tol={tol:e}", dim.n());
    let path = cache_dir().join(format!("phi0-n{}-{}.bin", dim.n(), key_hash(&key)));
    if let Ok(bytes) = std::fs::read(&path) {
        if let Ok(t) = CorrectorTable::from_bytes(&bytes) {
            if t.dim == dim && t.r_max == r_max && t.steps == steps && t.tol == tol {
                return Ok((t, CacheStatus::Hit, path));
            }
        }
        log::warn!("ignoring unreadable cache file {}", path.display());
    }
    let table = CorrectorTable::build(dim, r_max, steps, tol).map_err(CliError::Numeric)?;
    std::fs::create_dir_all(cache_dir()).map_err(|e| io_err(&cache_dir(), e))?;
    std::fs::write(&path, table.to_bytes()).map_err(|e| io_err(&path, e))?;
    Ok((table, CacheStatus::Miss, path))
}

fn value_json(v: &ConstantValue) -> Value {
    json!({
        "value": v.value,
        "quadrature": v.quadrature,
        "err": v.err,
        "closed_form": v.closed_form,
        "provenance": match v.provenance { Provenance::ClosedForm => "closed_form", Provenance::Quadrature => "quadrature" },
    })
}

fn value_from(v: &Value) -> Option<ConstantValue> {
    Some(ConstantValue {
        value: v["value"].as_f64()?,
        quadrature: v["quadrature"].as_f64()?,
        err: v["err"].as_f64()?,
        closed_form: v["closed_form"].as_f64(),
        provenance: match v["provenance"].as_str()? {
            "closed_form" => Provenance::ClosedForm,
            "quadrature" => Provenance::Quadrature,
            _ => return None,
        },
    })
}

pub fn constants_json(k: &ReducedConstants) -> Value {
    json!({"A": value_json(&k.a), "B": value_json(&k.b), "C": value_json(&k.c), "D": value_json(&k.d), "E": value_json(&k.e)})
}

/// Floats are stored at 17 significant digits, so a cache hit is bit-identical
/// to a fresh computation.
pub fn constants(dim: Dimension, tol: f64) -> Result<(ReducedConstants, CacheStatus), CliError> {
    let key = format!("v{CONSTANTS_FORMAT_VERSION} n={} tol={tol:e}", dim.n());
    let path = cache_dir().join(format!("constants-n{}-{}.json", dim.n(), key_hash(&key)));
    if let Ok(text) = std::fs::read_to_string(&path) {
        let parsed: Option<ReducedConstants> = serde_json::from_str::<Value>(&text).ok().and_then(|v| {
            if v["key"].as_str()? != key {
                return None;
            }
            let c = &v["constants"];
            Some(ReducedConstants {
                dim,
                a: value_from(&c["A"])?,
                b: value_from(&c["B"])?,
                c: value_from(&c["C"])?,
                d: value_from(&c["D"])?,
                e: value_from(&c["E"])?,
            })
        });
        if let Some(k) = parsed {
            return Ok((k, CacheStatus::Hit));
        }
        log::warn!("ignoring unreadable cache file {}", path.display());
    }
    let k = ReducedConstants::compute(dim, tol).map_err(CliError::Numeric)?;
    std::fs::create_dir_all(cache_dir()).map_err(|e| io_err(&cache_dir(), e))?;
    let doc = json!({"key": key, "constants": constants_json(&k)});
    std::fs::write(&path, json_string(&doc)).map_err(|e| io_err(&path, e))?;
    Ok((k, CacheStatus::Miss))
}
