//! Deterministic scripted client: replays canned responses so that runs and
//! tests work fully offline. Identical request sequences always yield
//! identical response sequences.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::llm::{fnv1a64, ChatRequest, LlmClient};

/// Fingerprint of a request: hash of (system_text, user_text).
pub fn fingerprint(system_text: Option<&str>, user_text: &str) -> u64 {
    let mut bytes = Vec::with_capacity(
        system_text.map(str::len).unwrap_or(0) + user_text.len() + 1,
    );
    if let Some(s) = system_text {
        bytes.extend_from_slice(s.as_bytes());
    }
    bytes.push(0x1f);
    bytes.extend_from_slice(user_text.as_bytes());
    fnv1a64(&bytes)
}

/// A substring-match rule for rule-based scripts.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ScriptRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_contains: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_contains: Option<String>,
    pub response: String,
}

impl ScriptRule {
    fn matches(&self, request: &ChatRequest) -> bool {
        let system_ok = match &self.system_contains {
            Some(needle) => request
                .system_text
                .as_deref()
                .is_some_and(|s| s.contains(needle.as_str())),
            None => true,
        };
        let user_ok = match &self.user_contains {
            Some(needle) => request.user_text.contains(needle.as_str()),
            None => true,
        };
        system_ok && user_ok
    }
}

enum Script {
    Queue(Mutex<VecDeque<String>>),
    Keyed {
        map: HashMap<u64, String>,
        default: Option<String>,
    },
    Rules {
        rules: Vec<ScriptRule>,
        default: Option<String>,
    },
}

/// Canned-response LLM client.
///
/// Three modes:
/// - queue: responses served in order, one per call; running dry is an error;
/// - keyed: responses looked up by request [`fingerprint`];
/// - rules: first substring rule that matches the request wins.
pub struct ScriptedClient {
    script: Script,
}

impl ScriptedClient {
    pub fn queue(responses: impl IntoIterator<Item = impl Into<String>>) -> Self {
        ScriptedClient {
            script: Script::Queue(Mutex::new(
                responses.into_iter().map(Into::into).collect(),
            )),
        }
    }

    /// Keyed script; entries are `(system_text, user_text, response)`.
    pub fn keyed<'a>(
        entries: impl IntoIterator<Item = (Option<&'a str>, &'a str, &'a str)>,
        default: Option<String>,
    ) -> Self {
        let map = entries
            .into_iter()
            .map(|(system, user, response)| (fingerprint(system, user), response.to_string()))
            .collect();
        ScriptedClient {
            script: Script::Keyed { map, default },
        }
    }

    pub fn rules(rules: Vec<ScriptRule>, default: Option<String>) -> Self {
        ScriptedClient {
            script: Script::Rules { rules, default },
        }
    }

    /// Fast-forwards a queue script past `n` already-consumed responses,
    /// used when resuming a checkpointed run. No-op for other modes.
    pub fn skip(&self, n: usize) {
        if let Script::Queue(queue) = &self.script {
            let mut q = queue.lock().unwrap();
            for _ in 0..n {
                q.pop_front();
            }
        }
    }

    pub fn remaining(&self) -> Option<usize> {
        match &self.script {
            Script::Queue(queue) => Some(queue.lock().unwrap().len()),
            _ => None,
        }
    }
}

impl LlmClient for ScriptedClient {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        request.validate()?;
        match &self.script {
            Script::Queue(queue) => queue
                .lock()
                .unwrap()
                .pop_front()
                .ok_or(Error::ScriptExhausted),
            Script::Keyed { map, default } => map
                .get(&fingerprint(request.system_text.as_deref(), &request.user_text))
                .cloned()
                .or_else(|| default.clone())
                .ok_or(Error::ScriptExhausted),
            Script::Rules { rules, default } => rules
                .iter()
                .find(|r| r.matches(request))
                .map(|r| r.response.clone())
                .or_else(|| default.clone())
                .ok_or(Error::ScriptExhausted),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(user: &str) -> ChatRequest {
        ChatRequest::new("test-model", user)
    }

    #[test]
    fn queue_serves_in_order_and_exhausts() {
        let client = ScriptedClient::queue(["OK", "second"]);
        assert_eq!(client.complete(&req("a")).unwrap(), "OK");
        assert_eq!(client.complete(&req("b")).unwrap(), "second");
        assert!(matches!(
            client.complete(&req("c")),
            Err(Error::ScriptExhausted)
        ));
    }

    #[test]
    fn keyed_lookup_by_fingerprint() {
        let client = ScriptedClient::keyed(
            [(Some("sys"), "hello", "world"), (None, "plain", "answer")],
            None,
        );
        let hit = ChatRequest::new("m", "hello").with_system("sys");
        assert_eq!(client.complete(&hit).unwrap(), "world");
        assert_eq!(client.complete(&req("plain")).unwrap(), "answer");
        assert!(client.complete(&req("unknown")).is_err());
    }

    #[test]
    fn rules_match_on_system_and_user_substrings() {
        let client = ScriptedClient::rules(
            vec![
                ScriptRule {
                    system_contains: Some("expert".into()),
                    user_contains: Some("7".into()),
                    response: "yes".into(),
                },
                ScriptRule {
                    system_contains: None,
                    user_contains: None,
                    response: "fallthrough".into(),
                },
            ],
            None,
        );
        let hit = ChatRequest::new("m", "what about 7?").with_system("you are an expert");
        assert_eq!(client.complete(&hit).unwrap(), "yes");
        assert_eq!(client.complete(&req("what about 7?")).unwrap(), "fallthrough");
    }

    #[test]
    fn identical_sequences_yield_identical_responses() {
        let build = || ScriptedClient::queue(["r1", "r2", "r3"]);
        let a: Vec<String> = {
            let c = build();
            (0..3).map(|i| c.complete(&req(&format!("{i}"))).unwrap()).collect()
        };
        let b: Vec<String> = {
            let c = build();
            (0..3).map(|i| c.complete(&req(&format!("{i}"))).unwrap()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn skip_fast_forwards_queue() {
        let client = ScriptedClient::queue(["a", "b", "c"]);
        client.skip(2);
        assert_eq!(client.complete(&req("x")).unwrap(), "c");
    }

    #[test]
    fn empty_user_text_is_a_contract_violation() {
        let client = ScriptedClient::queue(["a"]);
        assert!(client.complete(&req("  ")).is_err());
    }
}
