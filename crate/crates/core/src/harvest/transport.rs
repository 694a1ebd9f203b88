use std::collections::{HashMap, HashSet};
use std::future::Future;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use thiserror::Error;

use crate::oai::Repository;

/// A failure to obtain a response at all. Always worth retrying.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TransportError {
    #[error("{url} unreachable: {message}")]
    Unreachable { url: String, message: String },
    #[error("{url} timed out")]
    Timeout { url: String },
    #[error("{url} answered HTTP {status}")]
    Status { url: String, status: u16 },
}

/// Fetches one protocol response body.
pub trait Transport: Send + Sync + 'static {
    fn fetch(
        &self,
        base_url: &str,
        params: &[(&str, &str)],
    ) -> impl Future<Output = Result<Vec<u8>, TransportError>> + Send;
}

/// HTTP GET via reqwest.
#[derive(Debug, Clone)]
pub struct HttpTransport {
    client: reqwest::Client,
}

impl HttpTransport {
    pub fn new(page_timeout: Duration) -> Self {
        let client = reqwest::Client::builder()
            .timeout(page_timeout)
            .build()
            .expect("HTTP client builds");
        HttpTransport { client }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(30))
    }
}

impl Transport for HttpTransport {
    async fn fetch(&self, base_url: &str, params: &[(&str, &str)]) -> Result<Vec<u8>, TransportError> {
        let unreachable = |message: String| TransportError::Unreachable {
            url: base_url.to_string(),
            message,
        };
        let url = reqwest::Url::parse_with_params(base_url, params).map_err(|e| unreachable(e.to_string()))?;
        let response = self.client.get(url).send().await.map_err(|e| {
            if e.is_timeout() {
                TransportError::Timeout {
                    url: base_url.to_string(),
                }
            } else {
                unreachable(e.to_string())
            }
        })?;
        let status = response.status();
        if !status.is_success() {
            return Err(TransportError::Status {
                url: base_url.to_string(),
                status: status.as_u16(),
            });
        }
        let body = response.bytes().await.map_err(|e| unreachable(e.to_string()))?;
        Ok(body.to_vec())
    }
}

/// In-process providers addressed by a pseudo base URL. Providers can be
/// taken down to simulate outages.
#[derive(Debug, Default, Clone)]
pub struct LocalTransport {
    repos: Arc<RwLock<HashMap<String, Arc<Repository>>>>,
    down: Arc<RwLock<HashSet<String>>>,
}

impl LocalTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mount(&self, base_url: impl Into<String>, repo: Arc<Repository>) {
        self.repos.write().unwrap().insert(base_url.into(), repo);
    }

    pub fn set_down(&self, base_url: &str, down: bool) {
        let mut set = self.down.write().unwrap();
        if down {
            set.insert(base_url.to_string());
        } else {
            set.remove(base_url);
        }
    }
}

impl Transport for LocalTransport {
    async fn fetch(&self, base_url: &str, params: &[(&str, &str)]) -> Result<Vec<u8>, TransportError> {
        let unreachable = |message: &str| TransportError::Unreachable {
            url: base_url.to_string(),
            message: message.to_string(),
        };
        if self.down.read().unwrap().contains(base_url) {
            return Err(unreachable("provider is down"));
        }
        let repo = self
            .repos
            .read()
            .unwrap()
            .get(base_url)
            .cloned()
            .ok_or_else(|| unreachable("no provider mounted"))?;
        let params: Vec<(String, String)> = params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        Ok(repo.handle(&params).into_bytes())
    }
}
