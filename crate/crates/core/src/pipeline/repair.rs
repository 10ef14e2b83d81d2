//! Getting a usable artifact out of a model response.

use serde_json::Value;

use super::transport::{ChatMessage, ChatRequest, ChatTransport, Role};
use super::{prompts, PipelineError, Recorder};

/// Removes markdown fences and any prose around the outermost JSON object
/// or array.
pub fn strip_framing(raw: &str) -> Option<&str> {
    let mut s = raw.trim();
    if let Some(open) = s.find("```") {
        let after = &s[open + 3..];
        let body_start = after.find('\n').map_or(0, |i| i + 1);
        let body = &after[body_start..];
        if let Some(close) = body.find("```") {
            s = body[..close].trim();
        }
    }
    let start = s.find(['{', '['])?;
    let closer = if s.as_bytes()[start] == b'{' { '}' } else { ']' };
    let end = s.rfind(closer)?;
    (end > start).then(|| &s[start..=end])
}

/// Strict parse, then parse after [`strip_framing`]. Schema checks run on
/// whichever JSON value decoded.
pub fn parse_payload<T>(raw: &str, check: &dyn Fn(Value) -> Result<T, Vec<String>>) -> Result<T, Vec<String>> {
    match serde_json::from_str::<Value>(raw.trim()) {
        Ok(v) => check(v),
        Err(strict) => match strip_framing(raw).map(serde_json::from_str::<Value>) {
            Some(Ok(v)) => check(v),
            Some(Err(e)) => Err(vec![format!("response is not valid JSON: {e}")]),
            None => Err(vec![format!("response is not valid JSON: {strict}")]),
        },
    }
}

/// Runs one labelled call with at most one corrective follow-up. Each raw
/// response is recorded before any parse is attempted.
pub fn repair_structured_output<T>(
    transport: &dyn ChatTransport,
    recorder: &Recorder,
    request: ChatRequest<'_>,
    check: &dyn Fn(Value) -> Result<T, Vec<String>>,
) -> Result<T, PipelineError> {
    let label = request.label.clone();
    let raw = transport
        .complete(&request)
        .map_err(|source| PipelineError::Transport { label: label.clone(), source })?;
    recorder.record(&label, &raw)?;
    let errors = match parse_payload(&raw, check) {
        Ok(v) => return Ok(v),
        Err(e) => e,
    };

    let repair_label = format!("{label}.repair");
    let mut messages = request.messages.clone();
    messages.push(ChatMessage { role: Role::Assistant, text: raw.clone() });
    messages.push(ChatMessage { role: Role::User, text: prompts::corrective(&errors) });
    let follow = ChatRequest { label: repair_label.clone(), messages, image: request.image };
    let raw2 = transport
        .complete(&follow)
        .map_err(|source| PipelineError::Transport { label: repair_label.clone(), source })?;
    recorder.record(&repair_label, &raw2)?;
    parse_payload(&raw2, check).map_err(|errors| PipelineError::Schema { label, errors, transcripts: vec![raw, raw2] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fences_and_prose_are_removed() {
        let raw = "Here you go:\n```json\n{\"a\": 1}\n```\nDone.";
        assert_eq!(strip_framing(raw), Some("{\"a\": 1}"));
        assert_eq!(strip_framing("note {\"a\": [1]} end"), Some("{\"a\": [1]}"));
        assert_eq!(strip_framing("no json here"), None);
    }
}
