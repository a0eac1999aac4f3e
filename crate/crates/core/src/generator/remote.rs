//! HTTP client for generators hosted as services.
//!
//! Wire protocol, one POST per request:
//!
//! ```text
//! → {"query": str, "evidence": [str], "max_facets": int, "emit_question": bool}
//! ← {"question": str | null, "facets": [str]}      (status 200)
//! ```

use std::time::Duration;

use serde::Deserialize;

use super::{Clarification, Generator, GeneratorRequest};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
struct WireResponse {
    #[serde(default)]
    question: Option<String>,
    facets: Vec<String>,
}

/// A validated response plus any contract fix-ups applied to it.
#[derive(Debug, Clone, PartialEq)]
pub struct RemoteOutput {
    pub clarification: Clarification,
    pub warnings: Vec<String>,
}

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into()
}

fn transport_error(err: ureq::Error) -> Error {
    let retriable = matches!(
        err,
        ureq::Error::Timeout(_)
            | ureq::Error::Io(_)
            | ureq::Error::ConnectionFailed
            | ureq::Error::HostNotFound
    );
    Error::Generator {
        message: err.to_string(),
        retriable,
    }
}

fn call(agent: &ureq::Agent, endpoint: &str, request: &GeneratorRequest) -> Result<RemoteOutput> {
    request.validate()?;
    let mut response = agent
        .post(endpoint)
        .send_json(request)
        .map_err(transport_error)?;
    let status = response.status().as_u16();
    let body = response
        .body_mut()
        .read_to_string()
        .map_err(transport_error)?;
    if status != 200 {
        return Err(Error::generator(format!("status {status}: {body}")));
    }
    let wire: WireResponse = serde_json::from_str(&body)
        .map_err(|e| Error::generator(format!("malformed response ({e}): {body}")))?;
    let mut clarification = Clarification::new(wire.question, &wire.facets)?;
    let mut warnings = Vec::new();
    if clarification.facets.len() > request.max_facets {
        warnings.push(format!(
            "generator returned {} facets, keeping the first {}",
            clarification.facets.len(),
            request.max_facets
        ));
        clarification.facets.truncate(request.max_facets);
    }
    for w in &warnings {
        log::warn!("{endpoint}: {w}");
    }
    Ok(RemoteOutput {
        clarification,
        warnings,
    })
}

/// Send one request to `endpoint` and validate the reply. Facets are
/// normalized and deduplicated, then truncated to `max_facets`.
pub fn remote_generate(
    endpoint: &str,
    request: &GeneratorRequest,
    timeout: Duration,
) -> Result<RemoteOutput> {
    call(&agent(timeout), endpoint, request)
}

/// A [`Generator`] backed by an HTTP endpoint. Connections are pooled and the
/// client is safe to share across worker threads.
#[derive(Debug, Clone)]
pub struct RemoteGenerator {
    endpoint: String,
    agent: ureq::Agent,
}

impl RemoteGenerator {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        RemoteGenerator {
            endpoint: endpoint.into(),
            agent: agent(timeout),
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn call(&self, request: &GeneratorRequest) -> Result<RemoteOutput> {
        call(&self.agent, &self.endpoint, request)
    }
}

impl Generator for RemoteGenerator {
    fn generate(&self, request: &GeneratorRequest) -> Result<Clarification> {
        self.call(request).map(|o| o.clarification)
    }
}
