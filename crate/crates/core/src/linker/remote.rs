use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{AlignmentBackend, EntityLink, LinkError, TargetKg};
use crate::functions::FunctionCategory;

/// Environment variable consulted when no endpoint flag is given.
pub const ENDPOINT_ENV: &str = "EABLOCK_ENDPOINT";

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub endpoint: String,
    /// Retries after the first attempt for retriable failures.
    pub retries: u32,
    /// Delay before the first retry; doubled on each further retry.
    pub backoff: Duration,
    pub timeout: Duration,
    pub score_floor: f64,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into(),
            retries: 3,
            backoff: Duration::from_millis(200),
            timeout: Duration::from_secs(30),
            score_floor: 0.0,
        }
    }

    pub fn fail_fast(mut self) -> Self {
        self.retries = 0;
        self
    }
}

#[derive(Serialize)]
struct Request<'a> {
    text: &'a str,
    mode: String,
    kg: TargetKg,
}

#[derive(Deserialize)]
struct Response {
    entities: Vec<RemoteEntity>,
}

#[derive(Deserialize)]
struct RemoteEntity {
    surface: String,
    iri: String,
    score: f64,
}

/// HTTP client for an external NER + entity linking service.
///
/// Each request is a JSON POST `{"text", "mode", "kg"}` answered by
/// `{"entities": [{"surface", "iri", "score"}]}`.
pub struct RemoteLinker {
    agent: ureq::Agent,
    config: RemoteConfig,
}

fn excerpt(body: &str) -> String {
    body.chars().take(200).collect()
}

impl RemoteLinker {
    pub fn new(config: RemoteConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        RemoteLinker { agent, config }
    }

    /// Decodes a response body. Keyword mode keeps only the best entity,
    /// by score and then IRI.
    pub fn parse_response(
        body: &str,
        category: FunctionCategory,
        kg: TargetKg,
        score_floor: f64,
    ) -> Result<Vec<EntityLink>, LinkError> {
        let malformed = |message: String| LinkError::MalformedResponse { message, excerpt: excerpt(body) };
        let resp: Response = serde_json::from_str(body).map_err(|e| malformed(e.to_string()))?;
        let mut links = Vec::with_capacity(resp.entities.len());
        for e in resp.entities {
            if e.iri.is_empty() {
                return Err(malformed("entity with empty iri".into()));
            }
            if !(0.0..=1.0).contains(&e.score) {
                return Err(malformed(format!("score {} outside [0, 1]", e.score)));
            }
            if e.score >= score_floor {
                links.push(EntityLink { surface: e.surface, iri: e.iri, kg, score: e.score });
            }
        }
        if category == FunctionCategory::Keyword {
            links.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.iri.cmp(&b.iri)));
            links.truncate(1);
        }
        Ok(links)
    }

    fn attempt(&self, body: &str) -> Result<String, LinkError> {
        let resp = self
            .agent
            .post(&self.config.endpoint)
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| LinkError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let mut resp = resp;
        let text = resp.body_mut().read_to_string().map_err(|e| LinkError::Transport(e.to_string()))?;
        match status {
            200..=299 => Ok(text),
            500..=599 => Err(LinkError::Transport(format!("HTTP {status}"))),
            _ => Err(LinkError::MalformedResponse { message: format!("HTTP {status}"), excerpt: excerpt(&text) }),
        }
    }
}

impl AlignmentBackend for RemoteLinker {
    fn align(&self, category: FunctionCategory, text: &str, kg: TargetKg) -> Result<Vec<EntityLink>, LinkError> {
        let body =
            serde_json::to_string(&Request { text, mode: category.to_string(), kg }).expect("request serializes");
        let mut delay = self.config.backoff;
        let mut attempt = 0;
        loop {
            match self.attempt(&body) {
                Ok(text) => return Self::parse_response(&text, category, kg, self.config.score_floor),
                Err(e) if e.is_retriable() && attempt < self.config.retries => {
                    log::warn!("alignment request failed ({e}); retrying in {delay:?}");
                    std::thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}
