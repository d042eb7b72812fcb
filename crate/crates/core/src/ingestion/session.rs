//! Gap-based sessionization of log records into transactions.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingestion::clf::LogRecord;
use crate::item::{PageCatalog, Transaction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Largest inter-request gap, in seconds, that keeps a session open.
    pub session_threshold: u64,
    pub min_status: u16,
    pub max_status: u16,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            session_threshold: 1800,
            min_status: 200,
            max_status: 399,
        }
    }
}

impl SessionConfig {
    pub fn with_threshold(session_threshold: u64) -> Self {
        Self {
            session_threshold,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.session_threshold == 0 {
            return Err(Error::Config("session threshold must be positive".into()));
        }
        if self.min_status > self.max_status {
            return Err(Error::Config(format!(
                "status range {}..={} is empty",
                self.min_status, self.max_status
            )));
        }
        Ok(())
    }

    pub fn accepts(&self, status: u16) -> bool {
        (self.min_status..=self.max_status).contains(&status)
    }
}

pub type SessionKeyFn = Box<dyn Fn(&LogRecord) -> String + Send + Sync>;

struct Session {
    start: i64,
    key: String,
    pages: BTreeSet<String>,
}

/// Buffers records per visitor and cuts sessions on gaps larger than the
/// threshold. Visitors are keyed by client address unless a custom key
/// function is supplied.
pub struct Sessionizer {
    cfg: SessionConfig,
    key_fn: SessionKeyFn,
    pending: HashMap<String, Vec<(i64, String)>>,
    accepted: usize,
    filtered: usize,
}

impl Sessionizer {
    pub fn new(cfg: SessionConfig) -> Result<Self> {
        Self::with_key_fn(cfg, Box::new(|r: &LogRecord| r.client_id.clone()))
    }

    pub fn with_key_fn(cfg: SessionConfig, key_fn: SessionKeyFn) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            key_fn,
            pending: HashMap::new(),
            accepted: 0,
            filtered: 0,
        })
    }

    pub fn push(&mut self, record: LogRecord) {
        if !self.cfg.accepts(record.status) {
            self.filtered += 1;
            return;
        }
        self.accepted += 1;
        let key = (self.key_fn)(&record);
        self.pending
            .entry(key)
            .or_default()
            .push((record.timestamp, record.page));
    }

    /// Records dropped by the status filter so far.
    pub fn filtered(&self) -> usize {
        self.filtered
    }

    pub fn accepted(&self) -> usize {
        self.accepted
    }

    /// Visitors with buffered requests (one open session each after
    /// [`take_closed`](Self::take_closed)).
    pub fn n_pending(&self) -> usize {
        self.pending.len()
    }

    fn cut(&self, key: &str, requests: &mut [(i64, String)], sessions: &mut Vec<Session>) {
        requests.sort();
        let mut current: Option<(Session, i64)> = None;
        for (ts, page) in requests.iter() {
            match &mut current {
                Some((session, last)) if (*ts - *last) as u64 <= self.cfg.session_threshold => {
                    session.pages.insert(page.clone());
                    *last = *ts;
                }
                _ => {
                    if let Some((done, _)) = current.take() {
                        sessions.push(done);
                    }
                    let mut pages = BTreeSet::new();
                    pages.insert(page.clone());
                    current = Some((
                        Session {
                            start: *ts,
                            key: key.to_string(),
                            pages,
                        },
                        *ts,
                    ));
                }
            }
        }
        if let Some((done, _)) = current {
            sessions.push(done);
        }
    }

    fn emit(mut sessions: Vec<Session>, catalog: &mut PageCatalog, first_tid: u64) -> Vec<Transaction> {
        sessions.sort_by(|a, b| (a.start, &a.key, &a.pages).cmp(&(b.start, &b.key, &b.pages)));
        sessions
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                let items = s.pages.into_iter().map(|p| catalog.register(p)).collect();
                Transaction::new(first_tid + i as u64, items)
            })
            .collect()
    }

    /// Closes every buffered session. Tids are assigned from `first_tid` in
    /// (session start, visitor key) order so the output does not depend on
    /// the order records were pushed in.
    pub fn finish(mut self, catalog: &mut PageCatalog, first_tid: u64) -> Vec<Transaction> {
        let mut sessions = Vec::new();
        let mut pending = std::mem::take(&mut self.pending);
        for (key, requests) in pending.iter_mut() {
            self.cut(key, requests, &mut sessions);
        }
        Self::emit(sessions, catalog, first_tid)
    }

    /// Emits only sessions that can no longer grow: their last request is
    /// more than the threshold before `watermark`. Open sessions stay
    /// buffered for a later call.
    pub fn take_closed(
        &mut self,
        watermark: i64,
        catalog: &mut PageCatalog,
        first_tid: u64,
    ) -> Vec<Transaction> {
        let threshold = self.cfg.session_threshold as i64;
        let mut closed = Vec::new();
        let mut pending = std::mem::take(&mut self.pending);
        for (key, requests) in pending.iter_mut() {
            requests.sort();
            // split point: first request of the session still open at watermark
            let mut open_from = requests.len();
            for i in (0..requests.len()).rev() {
                let last_of_session = i + 1 == requests.len()
                    || requests[i + 1].0 - requests[i].0 > threshold;
                if last_of_session && requests[i].0 + threshold < watermark {
                    break;
                }
                open_from = i;
            }
            let mut done: Vec<_> = requests.drain(..open_from).collect();
            self.cut(key, &mut done, &mut closed);
        }
        pending.retain(|_, r| !r.is_empty());
        self.pending = pending;
        Self::emit(closed, catalog, first_tid)
    }
}

/// Sessionizes a complete record stream.
pub fn sessionize<I>(
    records: I,
    cfg: SessionConfig,
    catalog: &mut PageCatalog,
) -> Result<Vec<Transaction>>
where
    I: IntoIterator<Item = LogRecord>,
{
    let mut s = Sessionizer::new(cfg)?;
    for r in records {
        s.push(r);
    }
    Ok(s.finish(catalog, 1))
}
