use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance block embedded in every output file.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command_line: String,
    pub seed: u64,
    pub type_label: Option<String>,
    pub config_hash: String,
    pub timestamp: String,
    pub version: String,
}

impl RunManifest {
    /// `config` should hold every input that affects results, and nothing else
    /// (no output paths, no thread counts).
    pub fn new(argv: &[String], seed: u64, type_label: Option<String>, config: &serde_json::Value) -> Self {
        Self {
            command_line: argv.join(" "),
            seed,
            type_label,
            config_hash: config_hash(config),
            timestamp: timestamp(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// SHA-256 of a git-style "config <len>\0<canonical json>" blob.
pub fn config_hash(config: &serde_json::Value) -> String {
    // serde_json maps are sorted by key, so this is canonical
    let body = config.to_string();
    let mut h = Sha256::new();
    h.update(format!("config {}\0", body.len()).as_bytes());
    h.update(body.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Honors SOURCE_DATE_EPOCH for reproducible artifacts.
fn timestamp() -> String {
    let t = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|s| DateTime::<Utc>::from_timestamp(s, 0))
        .unwrap_or_else(Utc::now);
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_order_independent() {
        let a: serde_json::Value = serde_json::from_str(r#"{"a":1,"b":[2,3]}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"b":[2,3],"a":1}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
        let c: serde_json::Value = serde_json::from_str(r#"{"a":2,"b":[2,3]}"#).unwrap();
        assert_ne!(config_hash(&a), config_hash(&c));
    }
}
