//! `key = value` configuration.
//!
//! ```text
//! # olac.conf
//! catalog_dir = /var/lib/olac/catalog
//! vocab_dir = /etc/olac/vocab
//! listen_address = 127.0.0.1:8080
//! page_size = 100
//! parallelism = 4
//! retries = 3
//! retry_backoff_ms = 500
//! page_timeout_secs = 30
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Command-line flags
//! override the file, which overrides the defaults above (`catalog_dir`
//! defaults to `./catalog`; without `vocab_dir` the built-in vocabularies
//! are used).

use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliConfig {
    pub catalog_dir: PathBuf,
    pub vocab_dir: Option<PathBuf>,
    pub listen_address: String,
    pub page_size: usize,
    pub parallelism: usize,
    pub retries: u32,
    pub retry_backoff_ms: u64,
    pub page_timeout_secs: u64,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            catalog_dir: PathBuf::from("catalog"),
            vocab_dir: None,
            listen_address: "127.0.0.1:8080".into(),
            page_size: 100,
            parallelism: 4,
            retries: 3,
            retry_backoff_ms: 500,
            page_timeout_secs: 30,
        }
    }
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut config = CliConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected key = value", n + 1));
            };
            let (key, value) = (key.trim(), value.trim());
            let number = |v: &str| -> Result<u64, String> {
                v.parse()
                    .map_err(|_| format!("line {}: {key} must be a non-negative integer", n + 1))
            };
            match key {
                "catalog_dir" => config.catalog_dir = value.into(),
                "vocab_dir" => config.vocab_dir = Some(value.into()),
                "listen_address" => config.listen_address = value.into(),
                "page_size" => config.page_size = number(value)? as usize,
                "parallelism" => config.parallelism = number(value)? as usize,
                "retries" => config.retries = number(value)? as u32,
                "retry_backoff_ms" => config.retry_backoff_ms = number(value)?,
                "page_timeout_secs" => config.page_timeout_secs = number(value)?,
                other => return Err(format!("line {}: unknown key {other:?}", n + 1)),
            }
        }
        if config.page_size == 0 {
            return Err("page_size must be at least 1".into());
        }
        if config.parallelism == 0 {
            return Err("parallelism must be at least 1".into());
        }
        Ok(config)
    }
}
