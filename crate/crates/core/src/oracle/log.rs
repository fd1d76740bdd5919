use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::SampleHandle;
use crate::bitdist::BitString;

/// One transcript entry. Query indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    Sample(SampleHandle),
    Query { h: SampleHandle, j: u32, answer: bool },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: sample id {got}, expected {expected}")]
    OutOfOrderSample { line: usize, got: usize, expected: usize },
    #[error("line {line}: query on sample {i} before it was drawn")]
    UnknownSample { line: usize, i: usize },
    #[error("line {line}: index must be at least 1")]
    ZeroIndex { line: usize },
    #[error("line {line}: answer must be 0 or 1")]
    BadAnswer { line: usize },
}

/// Ordered transcript of sample draws and bit queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryLog {
    events: Vec<Event>,
    bulk_spans: Vec<Range<usize>>,
    samples: usize,
    queries: usize,
    recording: bool,
}

impl Default for QueryLog {
    fn default() -> Self {
        QueryLog {
            events: Vec::new(),
            bulk_spans: Vec::new(),
            samples: 0,
            queries: 0,
            recording: true,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "ev", rename_all = "lowercase", deny_unknown_fields)]
enum EventDoc {
    Sample { i: usize },
    Query { i: usize, j: usize, a: u8 },
}

impl QueryLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_sample(&mut self, h: SampleHandle) {
        if self.recording {
            self.events.push(Event::Sample(h));
        }
        self.samples += 1;
    }

    pub fn push_query(&mut self, h: SampleHandle, j: usize, answer: bool) {
        if self.recording {
            self.events.push(Event::Query {
                h,
                j: j as u32,
                answer,
            });
        }
        self.queries += 1;
    }

    /// Marks the events from `start` to the current end as one bulk request.
    pub fn mark_bulk(&mut self, start: usize) {
        if self.recording {
            self.bulk_spans.push(start..self.events.len());
        }
    }

    /// Whether events are stored; counters are kept either way.
    pub fn is_recording(&self) -> bool {
        self.recording
    }

    pub(crate) fn set_recording(&mut self, on: bool) {
        self.recording = on;
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Event ranges produced by bulk non-adaptive requests.
    pub fn bulk_spans(&self) -> &[Range<usize>] {
        &self.bulk_spans
    }

    pub fn samples_used(&self) -> usize {
        self.samples
    }

    pub fn queries_used(&self) -> usize {
        self.queries
    }

    /// Iterates over `(handle, j, answer)` for every query event.
    pub fn queries(&self) -> impl Iterator<Item = (SampleHandle, usize, bool)> + '_ {
        self.events.iter().filter_map(|e| match *e {
            Event::Query { h, j, answer } => Some((h, j as usize, answer)),
            Event::Sample(_) => None,
        })
    }

    /// Whether every recorded answer matches the given drawn strings.
    pub fn replays_against(&self, drawn: &[BitString]) -> bool {
        self.queries().all(|(h, j, a)| {
            drawn
                .get(h.index())
                .is_some_and(|x| j >= 1 && j <= x.len() && x.bit(j - 1) == a)
        })
    }

    /// One JSON object per line: `{"ev":"sample","i":k}` or `{"ev":"query","i":k,"j":j,"a":0|1}`.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::with_capacity(self.events.len() * 32);
        for e in &self.events {
            let doc = match *e {
                Event::Sample(h) => EventDoc::Sample { i: h.index() },
                Event::Query { h, j, answer } => EventDoc::Query {
                    i: h.index(),
                    j: j as usize,
                    a: u8::from(answer),
                },
            };
            out.push_str(&serde_json::to_string(&doc).expect("serializable"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LogError> {
        let mut log = QueryLog::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let doc: EventDoc = serde_json::from_str(raw).map_err(|e| LogError::Parse {
                line,
                message: e.to_string(),
            })?;
            match doc {
                EventDoc::Sample { i } => {
                    if i != log.samples {
                        return Err(LogError::OutOfOrderSample {
                            line,
                            got: i,
                            expected: log.samples,
                        });
                    }
                    log.push_sample(SampleHandle(i as u32));
                }
                EventDoc::Query { i, j, a } => {
                    if i >= log.samples {
                        return Err(LogError::UnknownSample { line, i });
                    }
                    if j == 0 {
                        return Err(LogError::ZeroIndex { line });
                    }
                    if a > 1 {
                        return Err(LogError::BadAnswer { line });
                    }
                    log.push_query(SampleHandle(i as u32), j, a == 1);
                }
            }
        }
        Ok(log)
    }
}
