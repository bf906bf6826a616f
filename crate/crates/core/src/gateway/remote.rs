//! HTTP+JSON backend. One endpoint per capability under the base URL:
//!
//! | endpoint             | request                                                | response              |
//! |----------------------|--------------------------------------------------------|-----------------------|
//! | `POST /v1/caption`   | `{memory_id, kind, image_b64, frames_b64}`             | `{"caption": str}`    |
//! | `POST /v1/ocr`       | `{memory_id, kind, image_b64, frames_b64}`             | `{"text": str}`       |
//! | `POST /v1/transcribe`| `{memory_id, kind, media_b64}`                         | `{"transcript": str}` |
//! | `POST /v1/chat`      | `{system_instruction, user_payload, response_schema}`  | `{"content": str}`    |
//! | `POST /v1/embed/text`| `{text}`                                               | `{"embedding": [f32]}`|
//! | `POST /v1/embed/image`| `{memory_id, image_b64}`                              | `{"embedding": [f32]}`|
//!
//! Which hosted models sit behind the endpoints is deployment
//! configuration.

use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use super::{ChatRequest, GatewayError, MediaInput, ModelBackend};

pub const URL_ENV: &str = "MEMQ_REMOTE_URL";
pub const TOKEN_ENV: &str = "MEMQ_REMOTE_TOKEN";

#[derive(Debug, Clone)]
pub struct RemoteBackend {
    base_url: String,
    token: Option<String>,
    client: reqwest::blocking::Client,
}

impl RemoteBackend {
    pub fn new(base_url: impl Into<String>, token: Option<String>) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| GatewayError::BackendUnavailable(e.to_string()))?;
        Ok(Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            token,
            client,
        })
    }

    /// Reads `MEMQ_REMOTE_URL` and the optional `MEMQ_REMOTE_TOKEN`.
    pub fn from_env() -> Result<Self, GatewayError> {
        let url = std::env::var(URL_ENV).map_err(|_| {
            GatewayError::BackendUnavailable(format!("{URL_ENV} is not set"))
        })?;
        Self::new(url, std::env::var(TOKEN_ENV).ok())
    }

    fn post<T: DeserializeOwned>(&self, path: &str, body: &Value) -> Result<T, GatewayError> {
        let url = format!("{}{}", self.base_url, path);
        let mut req = self.client.post(&url).json(body);
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        let resp = req
            .send()
            .map_err(|e| GatewayError::BackendUnavailable(format!("{url}: {e}")))?;
        let status = resp.status();
        if status.is_server_error() {
            return Err(GatewayError::BackendUnavailable(format!("{url}: HTTP {status}")));
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(GatewayError::Backend(format!("{url}: HTTP {status}: {text}")));
        }
        resp.json::<T>()
            .map_err(|e| GatewayError::Backend(format!("{url}: undecodable body: {e}")))
    }

    fn media_body(media: &MediaInput<'_>) -> Value {
        json!({
            "memory_id": media.memory_id,
            "kind": media.kind,
            "image_b64": B64.encode(media.primary_image()),
            "frames_b64": media.frames.iter().map(|f| B64.encode(&f.bytes)).collect::<Vec<_>>(),
        })
    }
}

#[derive(Deserialize)]
struct CaptionReply {
    caption: String,
}

#[derive(Deserialize)]
struct TextReply {
    text: String,
}

#[derive(Deserialize)]
struct TranscriptReply {
    transcript: String,
}

#[derive(Deserialize)]
struct ChatReply {
    content: String,
}

#[derive(Deserialize)]
struct EmbeddingReply {
    embedding: Vec<f32>,
}

impl ModelBackend for RemoteBackend {
    fn caption(&self, media: &MediaInput<'_>) -> Result<String, GatewayError> {
        Ok(self.post::<CaptionReply>("/v1/caption", &Self::media_body(media))?.caption)
    }

    fn extract_text(&self, media: &MediaInput<'_>) -> Result<String, GatewayError> {
        Ok(self.post::<TextReply>("/v1/ocr", &Self::media_body(media))?.text)
    }

    fn transcribe(&self, media: &MediaInput<'_>) -> Result<String, GatewayError> {
        let body = json!({
            "memory_id": media.memory_id,
            "kind": media.kind,
            "media_b64": B64.encode(media.bytes),
        });
        Ok(self.post::<TranscriptReply>("/v1/transcribe", &body)?.transcript)
    }

    fn chat(&self, request: &ChatRequest) -> Result<String, GatewayError> {
        let body = json!({
            "system_instruction": request.system_instruction,
            "user_payload": request.user_payload,
            "response_schema": request.response_schema,
        });
        Ok(self.post::<ChatReply>("/v1/chat", &body)?.content)
    }

    fn embed_text(&self, text: &str) -> Result<Vec<f32>, GatewayError> {
        Ok(self
            .post::<EmbeddingReply>("/v1/embed/text", &json!({ "text": text }))?
            .embedding)
    }

    fn embed_image(&self, media: &MediaInput<'_>) -> Result<Vec<f32>, GatewayError> {
        let body = json!({
            "memory_id": media.memory_id,
            "image_b64": B64.encode(media.primary_image()),
        });
        Ok(self.post::<EmbeddingReply>("/v1/embed/image", &body)?.embedding)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{Gateway, SchemaId};
    use crate::gateway::schema::TemporalStrictnessResponse;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::Arc;
    use std::thread;

    /// Serves `count` requests, answering each by path.
    fn serve(count: usize) -> (String, thread::JoinHandle<Vec<(String, String)>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = thread::spawn(move || {
            let mut seen = Vec::new();
            for _ in 0..count {
                let (mut stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let path = line.split_whitespace().nth(1).unwrap().to_string();
                let mut len = 0usize;
                let mut auth = String::new();
                loop {
                    let mut h = String::new();
                    reader.read_line(&mut h).unwrap();
                    if h == "\r\n" {
                        break;
                    }
                    let lower = h.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    if lower.starts_with("authorization:") {
                        auth = h.trim().to_string();
                    }
                }
                let mut body = vec![0; len];
                reader.read_exact(&mut body).unwrap();
                let (status, reply) = match path.as_str() {
                    "/v1/embed/text" => ("200 OK", r#"{"embedding":[0.0,2.0]}"#.to_string()),
                    "/v1/chat" => ("200 OK", r#"{"content":"{\"strict\": true}"}"#.to_string()),
                    _ => ("503 Service Unavailable", "{}".to_string()),
                };
                write!(
                    stream,
                    "HTTP/1.1 {status}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{reply}",
                    reply.len()
                )
                .unwrap();
                seen.push((path, auth));
            }
            seen
        });
        (format!("http://{addr}"), handle)
    }

    #[test]
    fn speaks_the_endpoint_protocol() {
        let (url, handle) = serve(3);
        let backend = RemoteBackend::new(url, Some("secret".into())).unwrap();
        let gw = Gateway::new(Arc::new(backend), 2);
        assert_eq!(gw.embed_text("hi").unwrap().as_slice(), &[0.0, 1.0]);
        let req = ChatRequest::new(
            SchemaId::TemporalStrictness,
            "sys",
            &json!({"phrase": "during CHI 2024"}),
            "",
        );
        let r: TemporalStrictnessResponse = gw.chat(&req).unwrap();
        assert!(r.strict);
        let id = crate::model::MemoryId::new("m");
        let err = gw
            .caption_media(&MediaInput::new(&id, crate::model::MediaKind::Photo, b"x"))
            .unwrap_err();
        assert!(matches!(err, GatewayError::BackendUnavailable(_)));
        let seen = handle.join().unwrap();
        assert_eq!(seen[0].0, "/v1/embed/text");
        assert_eq!(seen[0].1, "authorization: Bearer secret");
        assert_eq!(seen[2].0, "/v1/caption");
    }

    #[test]
    fn unreachable_server_is_unavailable() {
        let backend = RemoteBackend::new("http://127.0.0.1:9", None).unwrap();
        assert!(matches!(
            backend.embed_text("x"),
            Err(GatewayError::BackendUnavailable(_))
        ));
    }
}
