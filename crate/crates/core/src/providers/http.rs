//! JSON-over-HTTP provider adapter.
//!
//! The request body is built from a JSON template. String leaves are
//! substituted (`{prompt}`, `{model}`, `{audio_b64}`), and an array element
//! that is exactly `"{frames}"` expands into one `frame_item` per frame. The
//! response text is pulled out with a dotted path such as
//! `choices.0.message.content`; an empty path keeps the whole body.

use std::time::{Duration, Instant};

use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Backend, Modality, ModelRequest, ModelResponse, Payload, ProviderError, ResponseStatus, Result};

fn default_auth_header() -> String {
    "Authorization".into()
}
fn default_auth_scheme() -> String {
    "Bearer".into()
}
fn default_frame_mime() -> String {
    "image/jpeg".into()
}
fn default_timeout_s() -> u64 {
    300
}
fn default_retries() -> u32 {
    1
}
pub fn default_oom_patterns() -> Vec<String> {
    ["out of memory", "outofmemoryerror", "cuda oom", "oom-kill"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpProviderConfig {
    pub id: String,
    pub modality: Modality,
    pub endpoint: String,
    #[serde(default)]
    pub model: String,
    #[serde(default = "default_auth_header")]
    pub auth_header: String,
    #[serde(default = "default_auth_scheme")]
    pub auth_scheme: String,
    /// Name of the environment variable holding the API key.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default)]
    pub request_template: Option<Value>,
    #[serde(default)]
    pub frame_item: Option<Value>,
    #[serde(default = "default_frame_mime")]
    pub frame_mime: String,
    #[serde(default)]
    pub response_path: Option<String>,
    #[serde(default = "default_timeout_s")]
    pub timeout_s: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    /// Case-insensitive substrings that mark an error payload as OOM.
    #[serde(default = "default_oom_patterns")]
    pub oom_patterns: Vec<String>,
}

/// The provider config file: `{"providers": [...]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProviderFile {
    pub providers: Vec<HttpProviderConfig>,
}

impl HttpProviderConfig {
    pub fn request_template(&self) -> Value {
        if let Some(t) = &self.request_template {
            return t.clone();
        }
        match self.modality {
            Modality::Asr => json!({
                "model": "{model}",
                "audio": "{audio_b64}",
                "response_format": "verbose_json"
            }),
            Modality::Vlm | Modality::Llm => json!({
                "model": "{model}",
                "messages": [{
                    "role": "user",
                    "content": [{"type": "text", "text": "{prompt}"}, "{frames}"]
                }]
            }),
        }
    }

    pub fn frame_item(&self) -> Value {
        self.frame_item.clone().unwrap_or_else(
            || json!({"type": "image_url", "image_url": {"url": "data:{frame_mime};base64,{frame_b64}"}}),
        )
    }

    pub fn response_path(&self) -> String {
        self.response_path.clone().unwrap_or_else(|| match self.modality {
            Modality::Asr => String::new(),
            Modality::Vlm | Modality::Llm => "choices.0.message.content".into(),
        })
    }

    pub fn is_oom(&self, payload: &str) -> bool {
        let lower = payload.to_lowercase();
        self.oom_patterns.iter().any(|p| lower.contains(&p.to_lowercase()))
    }
}

fn substitute_str(s: &str, vars: &[(&str, &str)]) -> String {
    let mut out = s.to_string();
    for (name, value) in vars {
        let token = format!("{{{name}}}");
        if out.contains(&token) {
            out = out.replace(&token, value);
        }
    }
    out
}

fn expand(template: &Value, vars: &[(&str, &str)], frames: &[Value]) -> Value {
    match template {
        Value::String(s) => Value::String(substitute_str(s, vars)),
        Value::Array(items) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                if item.as_str() == Some("{frames}") {
                    out.extend(frames.iter().cloned());
                } else {
                    out.push(expand(item, vars, frames));
                }
            }
            Value::Array(out)
        }
        Value::Object(map) => Value::Object(map.iter().map(|(k, v)| (k.clone(), expand(v, vars, frames))).collect()),
        other => other.clone(),
    }
}

/// Follows a dotted path; numeric segments index arrays.
pub fn extract_path<'a>(value: &'a Value, path: &str) -> Option<&'a Value> {
    if path.is_empty() {
        return Some(value);
    }
    path.split('.').try_fold(value, |v, seg| match v {
        Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get(i)),
        Value::Object(map) => map.get(seg),
        _ => None,
    })
}

pub struct HttpBackend {
    config: HttpProviderConfig,
    agent: ureq::Agent,
}

enum Attempt {
    Done(ModelResponse),
    Retry(String),
    Fatal(String),
}

impl HttpBackend {
    pub fn new(config: HttpProviderConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_s)))
            .http_status_as_error(false)
            .build()
            .into();
        Self { config, agent }
    }

    pub fn config(&self) -> &HttpProviderConfig {
        &self.config
    }

    pub fn build_body(&self, request: &ModelRequest, payload: &Payload) -> Value {
        let b64 = base64::engine::general_purpose::STANDARD;
        let mime = self.config.frame_mime.clone();
        let frame_item = self.config.frame_item();
        let frames: Vec<Value> = payload
            .frames
            .iter()
            .map(|f| {
                let encoded = b64.encode(f);
                expand(&frame_item, &[("frame_b64", &encoded), ("frame_mime", &mime)], &[])
            })
            .collect();
        let audio = payload.audio.as_deref().map(|a| b64.encode(a)).unwrap_or_default();
        let vars = [
            ("prompt", request.prompt.as_str()),
            ("model", self.config.model.as_str()),
            ("audio_b64", audio.as_str()),
        ];
        expand(&self.config.request_template(), &vars, &frames)
    }

    fn attempt(&self, body: &Value, api_key: Option<&str>) -> Attempt {
        let started = Instant::now();
        let mut req = self
            .agent
            .post(&self.config.endpoint)
            .header("Content-Type", "application/json");
        if let Some(key) = api_key {
            let value = if self.config.auth_scheme.is_empty() {
                key.to_string()
            } else {
                format!("{} {key}", self.config.auth_scheme)
            };
            req = req.header(self.config.auth_header.as_str(), value.as_str());
        }
        let result = req.send_json(body);
        let latency_ms = started.elapsed().as_millis() as u64;
        let mut response = match result {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => {
                return Attempt::Done(ModelResponse::failed(
                    ResponseStatus::Timeout,
                    latency_ms,
                    "request timed out",
                ))
            }
            Err(ureq::Error::Io(e)) if e.kind() == std::io::ErrorKind::TimedOut => {
                return Attempt::Done(ModelResponse::failed(
                    ResponseStatus::Timeout,
                    latency_ms,
                    e.to_string(),
                ))
            }
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        let status = response.status().as_u16();
        let text = match response.body_mut().read_to_string() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(format!("reading body: {e}")),
        };
        if !(200..300).contains(&status) {
            if self.config.is_oom(&text) {
                return Attempt::Done(ModelResponse::failed(ResponseStatus::Oom, latency_ms, text));
            }
            let reason = format!("HTTP {status}: {}", text.chars().take(300).collect::<String>());
            return if status >= 500 || status == 429 {
                Attempt::Retry(reason)
            } else {
                Attempt::Fatal(reason)
            };
        }
        let path = self.config.response_path();
        if path.is_empty() {
            return Attempt::Done(ModelResponse::ok(text, latency_ms));
        }
        let parsed: Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(e) => {
                return Attempt::Done(ModelResponse::failed(
                    ResponseStatus::Invalid,
                    latency_ms,
                    format!("response is not JSON: {e}"),
                ))
            }
        };
        if let Some(err) = parsed.get("error") {
            if self.config.is_oom(&err.to_string()) {
                return Attempt::Done(ModelResponse::failed(ResponseStatus::Oom, latency_ms, err.to_string()));
            }
        }
        match extract_path(&parsed, &path) {
            Some(Value::String(s)) => Attempt::Done(ModelResponse::ok(s.clone(), latency_ms)),
            Some(Value::Null) | None => Attempt::Done(ModelResponse::failed(
                ResponseStatus::Invalid,
                latency_ms,
                format!("response has no value at {path:?}"),
            )),
            Some(other) => Attempt::Done(ModelResponse::ok(other.to_string(), latency_ms)),
        }
    }
}

impl Backend for HttpBackend {
    fn call(&self, request: &ModelRequest, payload: &Payload) -> Result<ModelResponse> {
        let unavailable = |reason: String| ProviderError::ProviderUnavailable {
            provider_id: self.config.id.clone(),
            reason,
        };
        let api_key = match &self.config.api_key_env {
            Some(var) => {
                Some(std::env::var(var).map_err(|_| unavailable(format!("environment variable {var} is not set")))?)
            }
            None => None,
        };
        let body = self.build_body(request, payload);
        let mut last = String::new();
        for _ in 0..=self.config.retries {
            match self.attempt(&body, api_key.as_deref()) {
                Attempt::Done(r) => return Ok(r),
                Attempt::Fatal(reason) => return Err(unavailable(reason)),
                Attempt::Retry(reason) => last = reason,
            }
        }
        Err(unavailable(last))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::mpsc;

    /// Serves the canned `(status, body)` replies in order, one per
    /// connection, and forwards each request body to the returned channel.
    fn serve(replies: Vec<(u16, String)>) -> (String, mpsc::Receiver<(String, String)>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for (status, body) in replies {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut headers = String::new();
                let mut content_length = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        content_length = v.trim().parse().unwrap();
                    }
                    headers.push_str(&line);
                }
                let mut req_body = vec![0u8; content_length];
                reader.read_exact(&mut req_body).unwrap();
                tx.send((headers, String::from_utf8(req_body).unwrap())).unwrap();
                let mut stream = stream;
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
        });
        (format!("http://{addr}/v1/chat/completions"), rx)
    }

    fn config(endpoint: String) -> HttpProviderConfig {
        serde_json::from_value(json!({
            "id": "qwen2-vl-7b",
            "modality": "vlm",
            "endpoint": endpoint,
            "model": "Qwen/Qwen2-VL-7B-Instruct",
            "retries": 1
        }))
        .unwrap()
    }

    fn request() -> ModelRequest {
        ModelRequest {
            provider_id: "qwen2-vl-7b".into(),
            modality: Modality::Vlm,
            prompt: "Summarize".into(),
            frame_refs: vec![],
            audio_ref: None,
            condition: None,
        }
    }

    fn payload() -> Payload {
        Payload {
            frames: vec![b"f0".to_vec(), b"f1".to_vec()],
            audio: None,
        }
    }

    #[test]
    fn body_expands_frames_and_prompt() {
        let backend = HttpBackend::new(config("http://unused".into()));
        let body = backend.build_body(&request(), &payload());
        let content = &body["messages"][0]["content"];
        assert_eq!(content.as_array().unwrap().len(), 3);
        assert_eq!(content[0]["text"], "Summarize");
        assert_eq!(content[1]["image_url"]["url"], "data:image/jpeg;base64,ZjA=");
        assert_eq!(body["model"], "Qwen/Qwen2-VL-7B-Instruct");
    }

    #[test]
    fn extracts_chat_completion_text() {
        let (endpoint, rx) = serve(vec![(
            200,
            r#"{"choices":[{"message":{"content":"The answer is A."}}]}"#.into(),
        )]);
        let backend = HttpBackend::new(config(endpoint));
        let r = backend.call(&request(), &payload()).unwrap();
        assert_eq!(r.status, ResponseStatus::Ok);
        assert_eq!(r.raw_text, "The answer is A.");
        let (_, sent) = rx.recv().unwrap();
        let sent: Value = serde_json::from_str(&sent).unwrap();
        assert_eq!(sent["messages"][0]["content"][0]["text"], "Summarize");
    }

    #[test]
    fn oom_payload_is_in_band() {
        let (endpoint, _rx) = serve(vec![(
            500,
            r#"{"error":"CUDA out of memory. Tried to allocate 2.00 GiB"}"#.into(),
        )]);
        let backend = HttpBackend::new(config(endpoint));
        let r = backend.call(&request(), &payload()).unwrap();
        assert_eq!(r.status, ResponseStatus::Oom);
        assert_eq!(r.raw_text, "");
    }

    #[test]
    fn retries_then_gives_up() {
        let (endpoint, _rx) = serve(vec![
            (503, "{}".into()),
            (200, r#"{"choices":[{"message":{"content":"B"}}]}"#.into()),
        ]);
        let backend = HttpBackend::new(config(endpoint));
        assert_eq!(backend.call(&request(), &payload()).unwrap().raw_text, "B");

        let (endpoint, _rx) = serve(vec![(503, "{}".into()), (503, "{}".into())]);
        let backend = HttpBackend::new(config(endpoint));
        assert!(matches!(
            backend.call(&request(), &payload()),
            Err(ProviderError::ProviderUnavailable { .. })
        ));
    }

    #[test]
    fn auth_header_comes_from_environment() {
        let (endpoint, rx) = serve(vec![(200, r#"{"choices":[{"message":{"content":"C"}}]}"#.into())]);
        let mut cfg = config(endpoint);
        cfg.api_key_env = Some("VIDBENCH_TEST_KEY_7731".into());
        std::env::set_var("VIDBENCH_TEST_KEY_7731", "sekrit");
        HttpBackend::new(cfg.clone()).call(&request(), &payload()).unwrap();
        let (headers, _) = rx.recv().unwrap();
        assert!(headers.to_ascii_lowercase().contains("authorization: bearer sekrit"));

        cfg.api_key_env = Some("VIDBENCH_TEST_KEY_UNSET_7731".into());
        assert!(matches!(
            HttpBackend::new(cfg).call(&request(), &payload()),
            Err(ProviderError::ProviderUnavailable { .. })
        ));
    }

    #[test]
    fn asr_keeps_whole_body() {
        let body = r#"{"text":" hi","segments":[{"id":0,"start":0.0,"end":1.0,"text":" hi"}]}"#;
        let (endpoint, rx) = serve(vec![(200, body.into())]);
        let mut cfg = config(endpoint);
        cfg.modality = Modality::Asr;
        let backend = HttpBackend::new(cfg);
        let mut req = request();
        req.modality = Modality::Asr;
        let p = Payload {
            frames: vec![],
            audio: Some(b"wav".to_vec()),
        };
        let r = backend.call(&req, &p).unwrap();
        assert_eq!(r.raw_text, body);
        let (_, sent) = rx.recv().unwrap();
        let sent: Value = serde_json::from_str(&sent).unwrap();
        assert_eq!(sent["audio"], "d2F2");
    }

    #[test]
    fn dotted_paths() {
        let v = json!({"a": [{"b": "x"}, {"b": 2}]});
        assert_eq!(extract_path(&v, "a.0.b"), Some(&json!("x")));
        assert_eq!(extract_path(&v, "a.1.b"), Some(&json!(2)));
        assert_eq!(extract_path(&v, "a.5.b"), None);
        assert_eq!(extract_path(&v, ""), Some(&v));
    }
}
