//! Wire messages, one JSON object per line.
//!
//! ```text
//! -> {"type":"hello","protocol":1}
//! <- {"type":"hello","name":"...","protocol":1}
//! -> {"type":"fit","series":[{"id":"...","values":[...]}, ...]}
//! <- {"type":"fit_done"}
//! -> {"type":"score","id":"...","context":[...],"values":[...]}
//! <- {"type":"scores","id":"...","scores":[...]}
//! -> {"type":"shutdown"}
//! <- {"type":"error","message":"..."}        (allowed at any point)
//! ```

use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPayload {
    pub id: String,
    pub values: Vec<f64>,
}

/// Harness to detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    Hello {
        protocol: u32,
    },
    Fit {
        series: Vec<SeriesPayload>,
    },
    Score {
        id: String,
        context: Vec<f64>,
        values: Vec<f64>,
    },
    Shutdown,
}

/// Detector to harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Reply {
    Hello { name: String, protocol: u32 },
    FitDone,
    Scores { id: String, scores: Vec<f64> },
    Error { message: String },
}

/// Serializes a message as a single line terminated by `\n`.
pub fn encode<T: Serialize>(message: &T) -> String {
    let mut line = serde_json::to_string(message).expect("protocol messages always serialize");
    line.push('\n');
    line
}

pub fn decode_reply(line: &str) -> Result<Reply, String> {
    serde_json::from_str(line.trim_end_matches(['\r', '\n'])).map_err(|e| format!("{e}: {}", truncate(line)))
}

pub fn decode_request(line: &str) -> Result<Request, String> {
    serde_json::from_str(line.trim_end_matches(['\r', '\n'])).map_err(|e| format!("{e}: {}", truncate(line)))
}

fn truncate(line: &str) -> String {
    const MAX: usize = 120;
    match line.char_indices().nth(MAX) {
        Some((cut, _)) => format!("{}...", &line[..cut]),
        None => line.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_format() {
        assert_eq!(
            encode(&Request::Hello { protocol: 1 }),
            "{\"type\":\"hello\",\"protocol\":1}\n"
        );
        assert_eq!(encode(&Request::Shutdown), "{\"type\":\"shutdown\"}\n");
        assert_eq!(
            encode(&Request::Score {
                id: "a".into(),
                context: vec![1.0],
                values: vec![2.5]
            }),
            "{\"type\":\"score\",\"id\":\"a\",\"context\":[1.0],\"values\":[2.5]}\n"
        );
        assert_eq!(decode_reply("{\"type\":\"fit_done\"}\n"), Ok(Reply::FitDone));
        assert_eq!(
            decode_reply(r#"{"type":"scores","id":"x","scores":[0,1.5]}"#),
            Ok(Reply::Scores {
                id: "x".into(),
                scores: vec![0.0, 1.5]
            })
        );
        assert_eq!(
            decode_reply(r#"{"type":"error","message":"boom"}"#),
            Ok(Reply::Error { message: "boom".into() })
        );
    }

    #[test]
    fn malformed_replies() {
        for line in [
            "",
            "not json",
            "{}",
            r#"{"type":"scores","id":"x"}"#,
            r#"{"type":"scores","id":"x","scores":[NaN]}"#,
            r#"{"type":"scores","id":"x","scores":[null]}"#,
            r#"{"type":"bogus"}"#,
        ] {
            assert!(decode_reply(line).is_err(), "{line}");
        }
    }
}
