//! HTTP client for a remote multimodal inference endpoint.
//!
//! The endpoint takes `POST {"prompt": ..., "images": [...]}` and answers
//! `{"text": ...}`. Requests run with bounded concurrency; results come back
//! in manifest order whatever the completion order.

use std::path::PathBuf;
use std::time::Duration;

use base64::Engine;
use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};

use super::{EvalError, PredictionRecord};
use crate::dataset::ManifestRecord;
use crate::question::render_prompt_parts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImageMode {
    /// Send frame paths resolved against `frame_root`.
    #[default]
    Paths,
    /// Send base64-encoded file contents.
    Inline,
}

#[derive(Debug, Clone)]
pub struct EndpointConfig {
    pub url: String,
    /// Environment variable holding a bearer token.
    pub token_env: Option<String>,
    pub max_in_flight: usize,
    pub timeout: Duration,
    /// Retries after the first attempt.
    pub retries: u32,
    /// First backoff delay; doubles on each retry.
    pub backoff: Duration,
    pub image_mode: ImageMode,
    pub frame_root: PathBuf,
}

impl EndpointConfig {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            token_env: None,
            max_in_flight: 4,
            timeout: Duration::from_secs(60),
            retries: 3,
            backoff: Duration::from_millis(500),
            image_mode: ImageMode::Paths,
            frame_root: PathBuf::from("."),
        }
    }
}

#[derive(Debug, Serialize)]
struct InferRequest<'a> {
    prompt: &'a str,
    images: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct InferResponse {
    text: String,
}

enum Failure {
    Retryable(String),
    Permanent(String),
}

fn build_request(record: &ManifestRecord, config: &EndpointConfig) -> Result<(String, Vec<String>), String> {
    let prompt = render_prompt_parts(&record.question, &record.options).map_err(|e| e.to_string())?;
    let images = record
        .frames
        .iter()
        .map(|f| {
            let path = config.frame_root.join(f);
            match config.image_mode {
                ImageMode::Paths => Ok(path.to_string_lossy().into_owned()),
                ImageMode::Inline => std::fs::read(&path)
                    .map(|bytes| base64::engine::general_purpose::STANDARD.encode(bytes))
                    .map_err(|e| format!("{}: {e}", path.display())),
            }
        })
        .collect::<Result<_, _>>()?;
    Ok((prompt, images))
}

async fn attempt(
    client: &reqwest::Client,
    config: &EndpointConfig,
    token: Option<&str>,
    body: &InferRequest<'_>,
) -> Result<String, Failure> {
    let mut req = client.post(&config.url).json(body);
    if let Some(t) = token {
        req = req.bearer_auth(t);
    }
    let resp = req.send().await.map_err(|e| Failure::Retryable(e.to_string()))?;
    let status = resp.status();
    if !status.is_success() {
        let msg = format!("HTTP {status}");
        return Err(
            if status.is_server_error() || status == reqwest::StatusCode::TOO_MANY_REQUESTS {
                Failure::Retryable(msg)
            } else {
                Failure::Permanent(msg)
            },
        );
    }
    resp.json::<InferResponse>()
        .await
        .map(|r| r.text)
        .map_err(|e| Failure::Retryable(format!("bad response body: {e}")))
}

async fn infer_one(
    client: &reqwest::Client,
    config: &EndpointConfig,
    token: Option<&str>,
    record: &ManifestRecord,
) -> PredictionRecord {
    let failed = |msg: String| PredictionRecord {
        id: record.id.clone(),
        output: String::new(),
        error: Some(msg),
    };
    let (prompt, images) = match build_request(record, config) {
        Ok(parts) => parts,
        Err(msg) => return failed(msg),
    };
    let body = InferRequest {
        prompt: &prompt,
        images,
    };
    let mut delay = config.backoff;
    let mut tries = 0;
    loop {
        tries += 1;
        match attempt(client, config, token, &body).await {
            Ok(text) => return PredictionRecord::new(record.id.clone(), text),
            Err(Failure::Permanent(msg)) => return failed(msg),
            Err(Failure::Retryable(msg)) if tries > config.retries => {
                return failed(format!("{msg} (after {tries} attempts)"));
            }
            Err(Failure::Retryable(msg)) => {
                log::debug!("{}: attempt {tries} failed: {msg}", record.id);
                tokio::time::sleep(delay).await;
                delay = delay.saturating_mul(2);
            }
        }
    }
}

/// Queries the endpoint for every record.
///
/// Fails with [`EvalError::TooManyFailures`], carrying the predictions
/// gathered so far, once more than half of all items have failed.
pub async fn infer_remote(
    manifest: &[ManifestRecord],
    config: &EndpointConfig,
) -> Result<Vec<PredictionRecord>, EvalError> {
    let token = match &config.token_env {
        Some(var) => Some(std::env::var(var).map_err(|_| EvalError::MissingToken(var.clone()))?),
        None => None,
    };
    let client = reqwest::Client::builder()
        .timeout(config.timeout)
        .build()
        .map_err(|e| EvalError::Client(e.to_string()))?;

    let total = manifest.len();
    let mut failures = 0;
    let mut results = stream::iter(manifest)
        .map(|r| infer_one(&client, config, token.as_deref(), r))
        .buffered(config.max_in_flight.max(1));

    let mut out = Vec::with_capacity(total);
    while let Some(pred) = results.next().await {
        if pred.error.is_some() {
            failures += 1;
        }
        out.push(pred);
        if 2 * failures > total {
            return Err(EvalError::TooManyFailures {
                failed: failures,
                total,
                partial: out,
            });
        }
    }
    Ok(out)
}

/// Runs [`infer_remote`] on a fresh multi-threaded runtime.
pub fn infer_remote_blocking(
    manifest: &[ManifestRecord],
    config: &EndpointConfig,
) -> Result<Vec<PredictionRecord>, EvalError> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| EvalError::Client(e.to_string()))?
        .block_on(infer_remote(manifest, config))
}
