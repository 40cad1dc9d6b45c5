//! RunManifest: what ran, with which resolved configuration, and what it wrote.

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use nbubble_core::corrector::TABLE_FORMAT_VERSION;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cache::CONSTANTS_FORMAT_VERSION;
use crate::config::Config;
use crate::output::{json_string, Schema};

pub fn unix_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// SHA-256 of the resolved configuration serialized with the report float format,
/// so equal hashes mean equal inputs down to the last bit.
pub fn config_hash(config: &Config) -> String {
    let value = serde_json::to_value(config).expect("config serializes");
    let digest = Sha256::digest(json_string(&value).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub struct RunManifest {
    pub command: String,
    pub config: Config,
    pub started: f64,
    pub outputs: Vec<PathBuf>,
    pub extra: Value,
}

impl RunManifest {
    pub fn new(command: &str, config: &Config) -> Self {
        RunManifest { command: command.into(), config: config.clone(), started: unix_seconds(), outputs: Vec::new(), extra: json!({}) }
    }

    pub fn to_json(&self, exit_code: i32) -> Value {
        json!({
            "command": self.command,
            "config_hash": config_hash(&self.config),
            "config": serde_json::to_value(&self.config).expect("config serializes"),
            "versions": {
                "nbubble": env!("CARGO_PKG_VERSION"),
                "corrector_table_format": TABLE_FORMAT_VERSION,
                "constants_cache_format": CONSTANTS_FORMAT_VERSION,
            },
            "started_unix": self.started,
            "finished_unix": unix_seconds(),
            "exit_code": exit_code,
            "outputs": self.outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "details": self.extra,
        })
    }

    pub fn schema() -> Schema {
        Schema::obj(vec![
            ("command", Schema::Str),
            ("config_hash", Schema::Str),
            ("config", Schema::Any),
            (
                "versions",
                Schema::obj(vec![
                    ("nbubble", Schema::Str),
                    ("corrector_table_format", Schema::Integer),
                    ("constants_cache_format", Schema::Integer),
                ]),
            ),
            ("started_unix", Schema::Number),
            ("finished_unix", Schema::Number),
            ("exit_code", Schema::Integer),
            ("outputs", Schema::array(Schema::Str)),
            ("details", Schema::Any),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_tracks_every_field() {
        let a = Config::default();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.solve.eps = f64::from_bits(b.solve.eps.to_bits() + 1);
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn manifest_matches_its_schema() {
        let mut m = RunManifest::new("constants", &Config::default());
        m.outputs.push(PathBuf::from("x.json"));
        RunManifest::schema().check(&m.to_json(0), "manifest").unwrap();
    }
}
