//! Generation backends.
//!
//! [`RemoteBackend`] posts a chat-completion style JSON request to an HTTP
//! endpoint. [`TemplateBackend`] is an offline, deterministic stand-in that
//! reads the target description out of the prompt and synthesizes a
//! configuration with simple pattern rules. It wraps its answer in a prose
//! line and a code fence, the way chat models tend to.

use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::{tokenize, FilteredDescription, TokenKind};
use crate::prompt::Prompt;
use crate::schema::{serialize_config, ActorClass, ActorGroup, Malfunction, MapId, ScenarioConfig, TimeOfDay, Weather};

/// Environment variable holding the remote API key.
pub const API_KEY_ENV: &str = "SCENEGEN_LLM_API_KEY";

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("{API_KEY_ENV} is not set")]
    MissingCredential,
    #[error("invalid backend configuration: {0}")]
    InvalidConfig(String),
    #[error("network failure after {attempts} attempt(s): {message}")]
    Network { attempts: u32, message: String },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("backend returned an empty response")]
    EmptyResponse,
    #[error("malformed response body: {0}")]
    MalformedResponse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Remote,
    Template,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_backoff_ms: 500,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `attempt` (1-based): `base * 2^(attempt-1)`.
    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = 1u64 << attempt.saturating_sub(1).min(16);
        Duration::from_millis(self.base_backoff_ms.saturating_mul(factor))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub retry: RetryPolicy,
}

impl BackendConfig {
    pub fn template() -> Self {
        Self {
            kind: BackendKind::Template,
            endpoint: String::new(),
            model_name: "template".to_string(),
            temperature: 0.0,
            max_tokens: 1024,
            retry: RetryPolicy::default(),
        }
    }

    pub fn remote(endpoint: impl Into<String>, model_name: impl Into<String>) -> Self {
        Self {
            kind: BackendKind::Remote,
            endpoint: endpoint.into(),
            model_name: model_name.into(),
            ..Self::template()
        }
    }

    pub fn check(&self) -> Result<(), LlmError> {
        if self.kind == BackendKind::Remote {
            if self.endpoint.trim().is_empty() {
                return Err(LlmError::InvalidConfig("remote backend needs an endpoint".into()));
            }
            if self.model_name.trim().is_empty() {
                return Err(LlmError::InvalidConfig("remote backend needs a model name".into()));
            }
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(LlmError::InvalidConfig("temperature must be >= 0".into()));
        }
        if self.max_tokens == 0 {
            return Err(LlmError::InvalidConfig("max_tokens must be positive".into()));
        }
        if self.retry.max_attempts == 0 {
            return Err(LlmError::InvalidConfig("max_attempts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawResponse {
    pub text: String,
    pub backend_id: String,
    pub latency_ms: u64,
}

impl RawResponse {
    pub fn from_text(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            backend_id: "file".to_string(),
            latency_ms: 0,
        }
    }
}

pub trait Backend: Send + Sync {
    fn id(&self) -> String;
    fn generate(&self, prompt: &Prompt) -> Result<RawResponse, LlmError>;
}

/// Builds the backend named by `cfg`; the remote key comes from [`API_KEY_ENV`].
pub fn build_backend(cfg: &BackendConfig) -> Result<Box<dyn Backend>, LlmError> {
    cfg.check()?;
    Ok(match cfg.kind {
        BackendKind::Template => Box::new(TemplateBackend),
        BackendKind::Remote => Box::new(RemoteBackend::from_env(cfg.clone())?),
    })
}

pub fn generate(cfg: &BackendConfig, prompt: &Prompt) -> Result<RawResponse, LlmError> {
    build_backend(cfg)?.generate(prompt)
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

pub struct RemoteBackend {
    cfg: BackendConfig,
    api_key: String,
    agent: ureq::Agent,
}

enum Attempt {
    Done(String),
    Retry(String),
    Fail(LlmError),
}

impl RemoteBackend {
    pub fn new(cfg: BackendConfig, api_key: impl Into<String>) -> Result<Self, LlmError> {
        cfg.check()?;
        let api_key = api_key.into();
        if api_key.is_empty() {
            return Err(LlmError::MissingCredential);
        }
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        Ok(Self { cfg, api_key, agent })
    }

    pub fn from_env(cfg: BackendConfig) -> Result<Self, LlmError> {
        let key = std::env::var(API_KEY_ENV).map_err(|_| LlmError::MissingCredential)?;
        Self::new(cfg, key)
    }

    fn attempt(&self, body: &ChatRequest<'_>) -> Attempt {
        let result = self
            .agent
            .post(&self.cfg.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body);
        let mut resp = match result {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        let status = resp.status().as_u16();
        let text = match resp.body_mut().read_to_string() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        match status {
            200..=299 => Attempt::Done(text),
            429 | 500..=599 => Attempt::Retry(format!("HTTP {status}: {text}")),
            _ => Attempt::Fail(LlmError::Http { status, body: text }),
        }
    }
}

impl Backend for RemoteBackend {
    fn id(&self) -> String {
        format!("remote:{}", self.cfg.model_name)
    }

    fn generate(&self, prompt: &Prompt) -> Result<RawResponse, LlmError> {
        let start = Instant::now();
        let body = ChatRequest {
            model: &self.cfg.model_name,
            messages: vec![ChatMessage {
                role: "user",
                content: &prompt.text,
            }],
            temperature: self.cfg.temperature,
            max_tokens: self.cfg.max_tokens,
        };
        let mut last = String::new();
        for attempt in 1..=self.cfg.retry.max_attempts {
            if attempt > 1 {
                thread::sleep(self.cfg.retry.backoff(attempt - 1));
            }
            match self.attempt(&body) {
                Attempt::Done(text) => {
                    let parsed: ChatResponse =
                        serde_json::from_str(&text).map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
                    let content = parsed
                        .choices
                        .into_iter()
                        .next()
                        .and_then(|c| c.message.content)
                        .unwrap_or_default();
                    if content.is_empty() {
                        return Err(LlmError::EmptyResponse);
                    }
                    return Ok(RawResponse {
                        text: content,
                        backend_id: self.id(),
                        latency_ms: start.elapsed().as_millis() as u64,
                    });
                }
                Attempt::Retry(msg) => {
                    log::warn!("attempt {attempt} failed: {msg}");
                    last = msg;
                }
                Attempt::Fail(err) => return Err(err),
            }
        }
        Err(LlmError::Network {
            attempts: self.cfg.retry.max_attempts,
            message: last,
        })
    }
}

/// Offline backend; a pure function of the prompt's target description.
#[derive(Debug, Clone, Copy, Default)]
pub struct TemplateBackend;

impl Backend for TemplateBackend {
    fn id(&self) -> String {
        "template".to_string()
    }

    fn generate(&self, prompt: &Prompt) -> Result<RawResponse, LlmError> {
        let start = Instant::now();
        let desc = prompt.target_description();
        let text = template_synthesize(&FilteredDescription::unchanged(desc));
        Ok(RawResponse {
            text,
            backend_id: self.id(),
            latency_ms: start.elapsed().as_millis() as u64,
        })
    }
}

const DEFAULT_COUNTS: [(ActorClass, u32); 3] = [
    (ActorClass::Vehicle, 5),
    (ActorClass::Pedestrian, 5),
    (ActorClass::Bicycle, 0),
];

fn class_noun(word: &str) -> Option<ActorClass> {
    Some(match word {
        "vehicle" | "vehicles" | "car" | "cars" | "truck" | "trucks" => ActorClass::Vehicle,
        "pedestrian" | "pedestrians" | "people" | "walker" | "walkers" | "persons" => ActorClass::Pedestrian,
        "bicycle" | "bicycles" | "bike" | "bikes" | "cyclist" | "cyclists" => ActorClass::Bicycle,
        _ => return None,
    })
}

fn number_word(word: &str) -> Option<u32> {
    const WORDS: [&str; 21] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
        "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
    ];
    if word.chars().all(|c| c.is_ascii_digit()) {
        return word.parse().ok();
    }
    WORDS.iter().position(|w| *w == word).map(|n| n as u32)
}

fn weather_word(word: &str) -> Option<Weather> {
    Some(match word {
        "clear" | "sunny" => Weather::Clear,
        "rain" | "rainy" | "raining" => Weather::Rain,
        "drizzle" | "drizzly" | "drizzling" => Weather::Drizzle,
        "fog" | "foggy" | "mist" | "misty" => Weather::Fog,
        "cloudy" | "overcast" | "clouds" => Weather::Cloudy,
        _ => return None,
    })
}

fn time_word(word: &str) -> Option<TimeOfDay> {
    Some(match word {
        "morning" | "dawn" | "sunrise" => TimeOfDay::Morning,
        "noon" | "midday" | "afternoon" | "daytime" => TimeOfDay::Noon,
        "sunset" | "dusk" | "evening" => TimeOfDay::Sunset,
        "night" | "midnight" | "nighttime" => TimeOfDay::Night,
        _ => return None,
    })
}

fn map_word(word: &str) -> Option<MapId> {
    Some(match word {
        "highway" | "straight" => MapId::Town01,
        "parallel" => MapId::Town02,
        "downtown" | "city" | "urban" | "intersection" | "junction" => MapId::Town03,
        "ring" | "roundabout" | "circular" => MapId::Town04,
        "grid" | "suburb" | "suburban" | "blocks" => MapId::Town05,
        _ => return MapId::ALL.iter().copied().find(|m| m.as_str() == word),
    })
}

const NEGLIGENT: &[&str] = &[
    "negligent", "reckless", "careless", "aggressive", "aggressively", "erratic", "erratically", "drunk",
    "ignored", "ignoring", "ignores", "violated", "violating", "disobeyed", "disobey",
];

/// Lowercased words grouped by sentence.
fn sentences(text: &str) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for tok in tokenize(text) {
        match tok.kind {
            TokenKind::Word => out.last_mut().unwrap().push(tok.text.to_lowercase()),
            TokenKind::Punctuation if tok.text.starts_with(['.', '!', '?']) => out.push(Vec::new()),
            _ => {}
        }
    }
    out.retain(|s| !s.is_empty());
    out
}

/// Rule-based configuration synthesis used by the offline backend.
///
/// Recognized: `<N> <class>` counts (one adjective may sit in between),
/// `<P>%` fractions in a sentence mentioning running, weather, time-of-day
/// and map words, wiper/door/stall malfunctions, and negligent-driving
/// cues. Unmatched fields take schema defaults; unmentioned counts default
/// to 5 vehicles, 5 pedestrians, 0 bicycles.
pub fn template_synthesize(desc: &FilteredDescription) -> String {
    let sentences = sentences(&desc.text);
    let words: Vec<&str> = sentences.iter().flatten().map(String::as_str).collect();

    let mut cfg = ScenarioConfig::new("generated");
    if let Some(w) = words.iter().find_map(|w| weather_word(w)) {
        cfg.weather = w;
    }
    if let Some(t) = words.iter().find_map(|w| time_word(w)) {
        cfg.time_of_day = t;
    }
    if let Some(m) = words.iter().find_map(|w| map_word(w)) {
        cfg.map = m;
    }

    let mut counts: Vec<(ActorClass, u32)> = Vec::new();
    for (i, w) in words.iter().enumerate() {
        let Some(n) = number_word(w) else { continue };
        let class = words.get(i + 1).and_then(|w| class_noun(w)).or_else(|| {
            words.get(i + 2).and_then(|w| class_noun(w)).filter(|_| number_word(words[i + 1]).is_none())
        });
        if let Some(class) = class {
            if !counts.iter().any(|(c, _)| *c == class) {
                counts.push((class, n));
            }
        }
    }

    let mut running_fraction = 0.0;
    for s in &sentences {
        if !s.iter().any(|w| w == "running" || w == "run" || w == "runs") {
            continue;
        }
        if let Some(p) = s.iter().find_map(|w| w.strip_suffix('%').and_then(|n| n.parse::<f64>().ok())) {
            running_fraction = (p / 100.0).clamp(0.0, 1.0);
            break;
        }
        if s.iter().any(|w| w == "half") {
            running_fraction = 0.5;
            break;
        }
    }

    let mut malfunction = std::collections::BTreeSet::new();
    for s in &sentences {
        let has = |w: &str| s.iter().any(|x| x == w);
        if has("wiper") || has("wipers") {
            malfunction.insert(Malfunction::Wipers);
        }
        if (has("door") || has("doors")) && has("open") {
            malfunction.insert(Malfunction::DoorsOpen);
        }
        if has("stalled") || has("stationary") || has("parked") || has("broken") {
            malfunction.insert(Malfunction::Stationary);
        }
    }

    let obeyed = sentences.iter().any(|s| {
        s.iter().enumerate().any(|(i, w)| {
            matches!(w.as_str(), "obey" | "obeys" | "obeyed" | "obeying")
                && !s[i.saturating_sub(2)..i].iter().any(|p| p == "not" || p == "never")
        })
    });
    let negligent = words.iter().any(|w| NEGLIGENT.contains(w));
    let obeys_rules = obeyed || !negligent;

    for (class, default) in DEFAULT_COUNTS {
        let count = counts.iter().find(|(c, _)| *c == class).map_or(default, |(_, n)| *n);
        let mut group = ActorGroup::new(class, count);
        match class {
            ActorClass::Vehicle => {
                group.malfunction = malfunction.clone();
                group.obeys_rules = obeys_rules;
            }
            ActorClass::Pedestrian => group.running_fraction = running_fraction,
            ActorClass::Bicycle => {}
        }
        cfg.set_group(group);
    }

    format!("Here is the result:\n```\n{}```\n", serialize_config(&cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::parse_config;
    use crate::validator::extract_config;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    const DRIZZLY_DOWNTOWN: &str = "In downtown area, during a drizzly noon, there are vehicles malfunctioning windshield wipers and some of the vehicles' doors are open. Some vehicles exhibit negligent driving behavior, compromising visibility in wet conditions. There are 10 pedestrians on the road, with 50% of the pedestrian running. No one was hurt and no accident happened since all the vehicles except the malfunctioning one obeyed the traffic rules.";

    fn synthesize(text: &str) -> ScenarioConfig {
        let raw = template_synthesize(&FilteredDescription::unchanged(text));
        let (candidate, _) = extract_config(&raw).unwrap();
        parse_config(&candidate).unwrap()
    }

    #[test]
    fn drizzly_downtown_description() {
        let cfg = synthesize(DRIZZLY_DOWNTOWN);
        let peds = cfg.group(ActorClass::Pedestrian).unwrap();
        assert_eq!(peds.count, 10);
        assert_eq!(peds.running_fraction, 0.5);
        assert_eq!(cfg.weather, Weather::Drizzle);
        assert_eq!(cfg.time_of_day, TimeOfDay::Noon);
        assert_eq!(cfg.map, MapId::Town03);
        let v = cfg.group(ActorClass::Vehicle).unwrap();
        assert!(v.malfunction.contains(&Malfunction::Wipers));
        assert!(v.malfunction.contains(&Malfunction::DoorsOpen));
        assert!(v.obeys_rules);
    }

    #[test]
    fn counts_and_defaults() {
        let cfg = synthesize("there are 10 pedestrians on the road");
        assert_eq!(cfg.count(ActorClass::Pedestrian), 10);
        let cfg = synthesize("a road with vehicles");
        assert_eq!(cfg.count(ActorClass::Vehicle), 5);
        assert_eq!(cfg.count(ActorClass::Pedestrian), 5);
        assert_eq!(cfg.count(ActorClass::Bicycle), 0);
        let cfg = synthesize("three red vehicles and 2 bicycles at night");
        assert_eq!(cfg.count(ActorClass::Vehicle), 3);
        assert_eq!(cfg.count(ActorClass::Bicycle), 2);
        assert_eq!(cfg.time_of_day, TimeOfDay::Night);
    }

    #[test]
    fn drizzly_noon() {
        let cfg = synthesize("vehicles during a drizzly noon");
        assert_eq!(cfg.weather, Weather::Drizzle);
        assert_eq!(cfg.time_of_day, TimeOfDay::Noon);
    }

    #[test]
    fn negligent_without_obeying_disables_rules() {
        let cfg = synthesize("reckless vehicles on a highway");
        assert!(!cfg.group(ActorClass::Vehicle).unwrap().obeys_rules);
        assert_eq!(cfg.map, MapId::Town01);
    }

    #[test]
    fn output_has_prose_and_fence() {
        let raw = template_synthesize(&FilteredDescription::unchanged("vehicles"));
        assert!(raw.starts_with("Here is the result:\n```\n"));
        assert!(raw.ends_with("```\n"));
    }

    #[test]
    fn template_backend_is_deterministic() {
        let prompt = crate::prompt::assemble_prompt(
            &FilteredDescription::unchanged(DRIZZLY_DOWNTOWN),
            &[],
            crate::prompt::DEFAULT_INSTRUCTION,
        );
        let first = TemplateBackend.generate(&prompt).unwrap();
        for _ in 0..100 {
            assert_eq!(TemplateBackend.generate(&prompt).unwrap().text, first.text);
        }
        assert_eq!(synthesize(DRIZZLY_DOWNTOWN).count(ActorClass::Pedestrian), 10);
    }

    #[test]
    fn config_checks() {
        assert!(BackendConfig::template().check().is_ok());
        assert!(BackendConfig::remote("", "m").check().is_err());
        assert!(BackendConfig::remote("http://x", "").check().is_err());
        let mut cfg = BackendConfig::template();
        cfg.temperature = -1.0;
        assert!(cfg.check().is_err());
    }

    #[test]
    fn backoff_doubles() {
        let r = RetryPolicy { max_attempts: 4, base_backoff_ms: 10 };
        assert_eq!(r.backoff(1), Duration::from_millis(10));
        assert_eq!(r.backoff(3), Duration::from_millis(40));
    }

    fn prompt() -> Prompt {
        crate::prompt::assemble_prompt(&FilteredDescription::unchanged("vehicles in rain"), &[], "go")
    }

    #[test]
    fn unreachable_endpoint_fails_after_max_attempts() {
        // Bind then drop to get a port nothing listens on.
        let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
        let mut cfg = BackendConfig::remote(format!("http://127.0.0.1:{port}/v1/chat"), "m");
        cfg.retry = RetryPolicy { max_attempts: 2, base_backoff_ms: 1 };
        let backend = RemoteBackend::new(cfg, "key").unwrap();
        match backend.generate(&prompt()) {
            Err(LlmError::Network { attempts, .. }) => assert_eq!(attempts, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_key_is_a_credential_error() {
        assert!(matches!(
            RemoteBackend::new(BackendConfig::remote("http://x", "m"), ""),
            Err(LlmError::MissingCredential)
        ));
    }

    /// Serves canned HTTP responses, one per connection, returning the requests seen.
    fn serve(responses: Vec<(u16, String)>) -> (String, thread::JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let handle = thread::spawn(move || {
            let mut seen = Vec::new();
            for (status, body) in responses {
                let (mut stream, _) = listener.accept().unwrap();
                let mut buf = Vec::new();
                let mut chunk = [0u8; 4096];
                loop {
                    let n = stream.read(&mut chunk).unwrap();
                    buf.extend_from_slice(&chunk[..n]);
                    let text = String::from_utf8_lossy(&buf);
                    if let Some(head_end) = text.find("\r\n\r\n") {
                        let len = text[..head_end]
                            .lines()
                            .find_map(|l| {
                                let (k, v) = l.split_once(':')?;
                                k.eq_ignore_ascii_case("content-length").then(|| v.trim().parse::<usize>().ok())?
                            })
                            .unwrap_or(0);
                        if buf.len() >= head_end + 4 + len {
                            break;
                        }
                    }
                    if n == 0 {
                        break;
                    }
                }
                seen.push(String::from_utf8_lossy(&buf).into_owned());
                let reply = format!(
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(reply.as_bytes()).unwrap();
            }
            seen
        });
        (url, handle)
    }

    #[test]
    fn remote_retries_server_errors_then_succeeds() {
        let ok = r#"{"choices":[{"message":{"role":"assistant","content":"scenario \"s\" { }"}}]}"#;
        let (url, handle) = serve(vec![(503, "busy".into()), (429, "slow".into()), (200, ok.into())]);
        let mut cfg = BackendConfig::remote(url, "test-model");
        cfg.retry = RetryPolicy { max_attempts: 3, base_backoff_ms: 1 };
        let resp = RemoteBackend::new(cfg, "secret").unwrap().generate(&prompt()).unwrap();
        assert_eq!(resp.text, "scenario \"s\" { }");
        let requests = handle.join().unwrap();
        assert_eq!(requests.len(), 3);
        let last = &requests[2];
        assert!(last.contains("Bearer secret"));
        let body: serde_json::Value = serde_json::from_str(&last[last.find("\r\n\r\n").unwrap() + 4..]).unwrap();
        assert_eq!(body["model"], "test-model");
        assert_eq!(body["messages"][0]["role"], "user");
        assert_eq!(body["temperature"], 0.0);
        assert!(body["max_tokens"].is_u64());
    }

    #[test]
    fn client_errors_are_not_retried() {
        let (url, handle) = serve(vec![(400, "bad request".into())]);
        let mut cfg = BackendConfig::remote(url, "m");
        cfg.retry = RetryPolicy { max_attempts: 3, base_backoff_ms: 1 };
        match RemoteBackend::new(cfg, "k").unwrap().generate(&prompt()) {
            Err(LlmError::Http { status, .. }) => assert_eq!(status, 400),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(handle.join().unwrap().len(), 1);
    }

    #[test]
    fn empty_content_is_an_error() {
        let (url, handle) = serve(vec![(200, r#"{"choices":[{"message":{"content":""}}]}"#.into())]);
        let cfg = BackendConfig::remote(url, "m");
        assert!(matches!(
            RemoteBackend::new(cfg, "k").unwrap().generate(&prompt()),
            Err(LlmError::EmptyResponse)
        ));
        handle.join().unwrap();
    }
}
