use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const DEFAULT_MAX_NEW_TOKENS: usize = 256;
pub const TOKEN_ENV: &str = "DOMFORGE_BACKEND_TOKEN";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionParams {
    pub max_new_tokens: usize,
    #[serde(default)]
    pub stop: Vec<String>,
    #[serde(default)]
    pub temperature: f64,
}

impl Default for CompletionParams {
    fn default() -> Self {
        Self {
            max_new_tokens: DEFAULT_MAX_NEW_TOKENS,
            stop: Vec::new(),
            temperature: 0.0,
        }
    }
}

impl CompletionParams {
    pub fn with_stop(&self, stop: &[&str]) -> Self {
        Self {
            stop: stop.iter().map(|s| s.to_string()).collect(),
            ..self.clone()
        }
    }
}

/// A text-completion model. Returns the raw continuation of `prompt`.
pub trait CompletionBackend: Send + Sync {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String>;
}

impl<B: CompletionBackend + ?Sized> CompletionBackend for Box<B> {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String> {
        (**self).complete(prompt, params)
    }
}

impl<B: CompletionBackend + ?Sized> CompletionBackend for &B {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String> {
        (**self).complete(prompt, params)
    }
}

/// Cuts `text` at the earliest occurrence of any stop sequence.
pub fn apply_stop<'a>(text: &'a str, stop: &[String]) -> &'a str {
    let cut = stop
        .iter()
        .filter(|s| !s.is_empty())
        .filter_map(|s| text.find(s.as_str()))
        .min()
        .unwrap_or(text.len());
    &text[..cut]
}

pub fn prompt_key(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Record/replay backend over a JSON map from prompt hash to completion.
///
/// In replay mode a prompt without a recording is an error. In record mode every
/// call is forwarded to the wrapped backend and its answer kept for [`save`](Self::save).
pub struct MockBackend {
    responses: Mutex<BTreeMap<String, String>>,
    upstream: Option<Box<dyn CompletionBackend>>,
}

impl MockBackend {
    pub fn replay(responses: BTreeMap<String, String>) -> Self {
        Self {
            responses: Mutex::new(responses),
            upstream: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let map = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        Ok(Self::replay(map))
    }

    pub fn record(upstream: Box<dyn CompletionBackend>) -> Self {
        Self {
            responses: Mutex::new(BTreeMap::new()),
            upstream: Some(upstream),
        }
    }

    /// Adds a response for `prompt` (keyed by its hash).
    pub fn insert(&self, prompt: &str, response: impl Into<String>) {
        self.lock().insert(prompt_key(prompt), response.into());
    }

    pub fn recordings(&self) -> BTreeMap<String, String> {
        self.lock().clone()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&*self.lock()).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, BTreeMap<String, String>> {
        self.responses.lock().unwrap_or_else(|p| p.into_inner())
    }
}

impl CompletionBackend for MockBackend {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String> {
        let key = prompt_key(prompt);
        match &self.upstream {
            Some(up) => {
                let text = up.complete(prompt, params)?;
                self.lock().insert(key, text.clone());
                Ok(text)
            }
            None => self.lock().get(&key).cloned().ok_or(Error::ReplayMiss(key)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireFormat {
    /// `{"prompt", "max_tokens", "stop", "temperature"}` → `{"text"}`.
    Completion,
    /// Chat-style endpoints: one user message in, `choices[0].message.content` out.
    Chat,
}

/// HTTP JSON completion endpoint with retries on transport errors, 429 and 5xx.
#[derive(Debug, Clone)]
pub struct RemoteBackend {
    pub url: String,
    pub format: WireFormat,
    pub model: Option<String>,
    pub token: Option<String>,
    pub attempts: u32,
    pub backoff: Duration,
    pub timeout: Duration,
}

impl RemoteBackend {
    /// Endpoints ending in `/chat/completions` use the chat format; the bearer token
    /// comes from `DOMFORGE_BACKEND_TOKEN` when set.
    pub fn new(url: impl Into<String>) -> Self {
        let url = url.into();
        let format = if url.trim_end_matches('/').ends_with("/chat/completions") {
            WireFormat::Chat
        } else {
            WireFormat::Completion
        };
        Self {
            url,
            format,
            model: None,
            token: std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty()),
            attempts: 3,
            backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(120),
        }
    }

    fn body(&self, prompt: &str, params: &CompletionParams) -> serde_json::Value {
        let mut body = match self.format {
            WireFormat::Completion => serde_json::json!({
                "prompt": prompt,
                "max_tokens": params.max_new_tokens,
                "stop": params.stop,
                "temperature": params.temperature,
            }),
            WireFormat::Chat => serde_json::json!({
                "messages": [{"role": "user", "content": prompt}],
                "max_tokens": params.max_new_tokens,
                "stop": params.stop,
                "temperature": params.temperature,
            }),
        };
        if let Some(model) = &self.model {
            body["model"] = model.clone().into();
        }
        if params.stop.is_empty() {
            body.as_object_mut().map(|o| o.remove("stop"));
        }
        body
    }

    fn extract(&self, value: &serde_json::Value) -> Option<String> {
        let text = match self.format {
            WireFormat::Completion => value
                .get("text")
                .or_else(|| value.pointer("/choices/0/text")),
            WireFormat::Chat => value.pointer("/choices/0/message/content"),
        };
        text.and_then(|t| t.as_str()).map(str::to_string)
    }

    fn attempt(
        &self,
        agent: &ureq::Agent,
        body: &serde_json::Value,
    ) -> std::result::Result<String, (bool, Error)> {
        let mut req = agent.post(&self.url);
        if let Some(token) = &self.token {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req
            .send_json(body)
            .map_err(|e| (true, Error::BackendTransport(e.to_string())))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| (true, Error::BackendTransport(e.to_string())))?;
        if !(200..300).contains(&status) {
            let transient = status == 429 || status >= 500;
            let excerpt: String = text.chars().take(512).collect();
            return Err((
                transient,
                Error::BackendStatus {
                    status,
                    body: excerpt,
                },
            ));
        }
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
            (
                false,
                Error::BackendTransport(format!("invalid JSON response: {e}")),
            )
        })?;
        self.extract(&value).ok_or_else(|| {
            let excerpt: String = text.chars().take(512).collect();
            (
                false,
                Error::BackendTransport(format!("response has no completion text: {excerpt}")),
            )
        })
    }
}

impl CompletionBackend for RemoteBackend {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        let body = self.body(prompt, params);
        let attempts = self.attempts.max(1);
        let mut last = None;
        for i in 0..attempts {
            if i > 0 {
                std::thread::sleep(self.backoff * 2u32.pow(i - 1));
            }
            match self.attempt(&agent, &body) {
                Ok(text) => return Ok(text),
                Err((transient, e)) => {
                    log::warn!("backend attempt {}/{attempts} failed: {e}", i + 1);
                    if !transient {
                        return Err(e);
                    }
                    last = Some(e);
                }
            }
        }
        Err(last.expect("at least one attempt"))
    }
}

/// Backend selected by a spec string: `mock:FILE` replays recordings, anything
/// else is an endpoint URL.
pub fn backend_from_spec(spec: &str) -> Result<Box<dyn CompletionBackend>> {
    if let Some(path) = spec.strip_prefix("mock:") {
        return Ok(Box::new(MockBackend::load(&PathBuf::from(path))?));
    }
    if spec.starts_with("http://") || spec.starts_with("https://") {
        return Ok(Box::new(RemoteBackend::new(spec)));
    }
    Err(Error::Config(format!(
        "backend must be `mock:FILE` or an http(s) URL, got `{spec}`"
    )))
}
