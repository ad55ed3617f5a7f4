//! Minimal chat-completions server for tests: HTTP/1.1 keep-alive, one JSON
//! answer per request, optional first-attempt failures.

#![allow(dead_code)]

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

pub type Answer = Arc<dyn Fn(&str) -> String + Send + Sync>;

#[derive(Default)]
pub struct Stats {
    pub requests: AtomicUsize,
    pub injected_failures: AtomicUsize,
    pub in_flight: AtomicUsize,
    pub max_in_flight: AtomicUsize,
    seen: Mutex<HashSet<String>>,
    pub last_body: Mutex<String>,
    pub last_auth: Mutex<Option<String>>,
}

pub struct StubServer {
    pub base_url: String,
    pub stats: Arc<Stats>,
}

#[derive(Clone, Copy)]
pub enum Failure {
    None,
    /// 503 the first time each distinct prompt arrives.
    FirstAttempt,
    /// Always answer with this status.
    Always(u16),
}

pub fn start(answer: Answer, failure: Failure, delay: Duration) -> StubServer {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base_url = format!("http://{}/v1", listener.local_addr().unwrap());
    let stats = Arc::new(Stats::default());
    let s = stats.clone();
    std::thread::spawn(move || {
        for conn in listener.incoming() {
            let Ok(conn) = conn else { continue };
            let (s, answer) = (s.clone(), answer.clone());
            std::thread::spawn(move || serve(conn, &s, &answer, failure, delay));
        }
    });
    StubServer { base_url, stats }
}

fn prompt_of(body: &str) -> String {
    let v: serde_json::Value = serde_json::from_str(body).unwrap_or_default();
    v["messages"].as_array().and_then(|m| m.last()).and_then(|m| m["content"].as_str()).unwrap_or_default().to_string()
}

fn serve(conn: TcpStream, stats: &Stats, answer: &Answer, failure: Failure, delay: Duration) {
    let mut reader = BufReader::new(conn.try_clone().unwrap());
    let mut out = conn;
    loop {
        let mut length = 0usize;
        let mut auth = None;
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        loop {
            line.clear();
            if reader.read_line(&mut line).unwrap_or(0) == 0 {
                return;
            }
            let l = line.trim_end();
            if l.is_empty() {
                break;
            }
            if let Some((k, v)) = l.split_once(':') {
                if k.eq_ignore_ascii_case("content-length") {
                    length = v.trim().parse().unwrap_or(0);
                }
                if k.eq_ignore_ascii_case("authorization") {
                    auth = Some(v.trim().to_string());
                }
            }
        }
        let mut body = vec![0; length];
        if reader.read_exact(&mut body).is_err() {
            return;
        }
        let body = String::from_utf8_lossy(&body).to_string();
        stats.requests.fetch_add(1, Ordering::SeqCst);
        let now = stats.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        stats.max_in_flight.fetch_max(now, Ordering::SeqCst);
        *stats.last_body.lock().unwrap() = body.clone();
        *stats.last_auth.lock().unwrap() = auth;
        std::thread::sleep(delay);
        let prompt = prompt_of(&body);
        let fail = match failure {
            Failure::None => None,
            Failure::FirstAttempt => stats.seen.lock().unwrap().insert(prompt.clone()).then_some(503),
            Failure::Always(code) => Some(code),
        };
        let (status, payload) = match fail {
            Some(code) => {
                stats.injected_failures.fetch_add(1, Ordering::SeqCst);
                (code, r#"{"error":{"message":"injected"}}"#.to_string())
            }
            None => {
                let content = answer(&prompt);
                (200, serde_json::json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]}).to_string())
            }
        };
        stats.in_flight.fetch_sub(1, Ordering::SeqCst);
        let head = format!(
            "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n",
            payload.len()
        );
        if out.write_all(head.as_bytes()).and_then(|_| out.write_all(payload.as_bytes())).and_then(|_| out.flush()).is_err() {
            return;
        }
    }
}

/// The buggy snippet a rendered prompt carries, inserted lines removed.
pub fn buggy_from_prompt(prompt: &str) -> String {
    let start = prompt.find("<Buggy Code>\n").map(|i| i + "<Buggy Code>\n".len()).unwrap_or(0);
    let end = prompt.rfind("\n<Fixed Code>").unwrap_or(prompt.len());
    reviewfix::prompt::strip_inserted_lines(&prompt[start..end.max(start)])
}
