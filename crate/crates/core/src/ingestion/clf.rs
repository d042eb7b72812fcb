//! Common Log Format parsing.
//!
//! `host ident authuser [dd/Mon/yyyy:HH:MM:SS +zzzz] "METHOD /path PROTO" status bytes`
//!
//! Trailing fields (as in the combined format) are ignored.

use chrono::DateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    pub client_id: String,
    /// Seconds since the Unix epoch.
    pub timestamp: i64,
    pub page: String,
    pub status: u16,
    pub bytes: u64,
}

fn split_token(s: &str) -> Option<(&str, &str)> {
    let s = s.trim_start_matches(' ');
    if s.is_empty() {
        return None;
    }
    match s.find(' ') {
        Some(i) => Some((&s[..i], &s[i..])),
        None => Some((s, "")),
    }
}

/// Request line inside the quotes; honours `\"` escapes.
fn split_quoted(s: &str) -> Option<(&str, &str)> {
    let s = s.trim_start_matches(' ').strip_prefix('"')?;
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => return Some((&s[..i], &s[i + 1..])),
            _ => i += 1,
        }
    }
    None
}

/// Strips scheme/host, query string and fragment, then trailing slashes.
pub fn normalize_page(uri: &str) -> Option<String> {
    let mut path = uri;
    for scheme in ["http://", "https://"] {
        if let Some(rest) = path.strip_prefix(scheme) {
            path = rest.find('/').map_or("/", |i| &rest[i..]);
        }
    }
    let end = path.find(['?', '#']).unwrap_or(path.len());
    let mut path = &path[..end];
    while path.len() > 1 && path.ends_with('/') {
        path = &path[..path.len() - 1];
    }
    if path.is_empty() {
        None
    } else {
        Some(path.to_string())
    }
}

/// Parses one CLF line. `line_no` is attached to any error.
pub fn parse_log_line(line: &str, line_no: usize) -> Result<LogRecord> {
    let err = |msg: &str| Error::parse(line_no, msg.to_string());
    let line = line.trim_end_matches(['\r', '\n']);

    let (client, rest) = split_token(line).ok_or_else(|| err("missing client address"))?;
    let (_ident, rest) = split_token(rest).ok_or_else(|| err("missing ident field"))?;
    let (_user, rest) = split_token(rest).ok_or_else(|| err("missing authuser field"))?;

    let rest = rest
        .trim_start_matches(' ')
        .strip_prefix('[')
        .ok_or_else(|| err("missing timestamp"))?;
    let close = rest.find(']').ok_or_else(|| err("unterminated timestamp"))?;
    let stamp = DateTime::parse_from_str(&rest[..close], "%d/%b/%Y:%H:%M:%S %z")
        .map_err(|e| err(&format!("bad timestamp: {e}")))?;
    let timestamp = stamp.timestamp();
    if timestamp < 0 {
        return Err(err("timestamp before the epoch"));
    }

    let (request, rest) = split_quoted(&rest[close + 1..]).ok_or_else(|| err("missing request"))?;
    let mut parts = request.split_whitespace();
    let uri = match (parts.next(), parts.next()) {
        (Some(_method), Some(uri)) => uri,
        _ => return Err(err("malformed request line")),
    };
    let page = normalize_page(uri).ok_or_else(|| err("empty page"))?;

    let (status, rest) = split_token(rest).ok_or_else(|| err("missing status"))?;
    let status: u16 = status.parse().map_err(|_| err("bad status code"))?;
    let (bytes, _) = split_token(rest).ok_or_else(|| err("missing byte count"))?;
    let bytes = if bytes == "-" {
        0
    } else {
        bytes.parse().map_err(|_| err("bad byte count"))?
    };

    Ok(LogRecord {
        client_id: client.to_string(),
        timestamp,
        page,
        status,
        bytes,
    })
}
