//! Marked event logs and their on-disk formats.
//!
//! An [`EventLog`] is a time-ordered sequence of `(t, pair)` events on
//! `[0, horizon]` for a fixed group count. Two formats are supported:
//!
//! * **JSONL**: one header line `{"K": 2, "horizon": ...}` followed by one
//!   `{"t": ..., "i": 1, "j": 2}` object per event;
//! * **CSV**: a `t,i,j` table plus a sidecar metadata JSON document carrying
//!   `K` and `horizon`.
//!
//! Floats are written with 17 significant digits, which uniquely identifies an
//! `f64`, so a write/read cycle reproduces the log bit-exactly.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pair::{pair_count, GroupPair, PairError};
use crate::scalar::Scalar;

/// Errors from validating or parsing an event log.
#[derive(Debug, Error)]
pub enum EventLogError {
    /// Group count must be positive.
    #[error("need at least one group")]
    NoGroups,
    /// Horizon must be finite and strictly positive.
    #[error("horizon must be finite and > 0")]
    BadHorizon,
    /// An event mark was invalid for the log's group count.
    #[error("event {index}: {source}")]
    BadMark {
        index: usize,
        #[source]
        source: PairError,
    },
    /// An event time fell outside `[0, horizon]` or was not finite.
    #[error("event {index}: time outside [0, horizon]")]
    TimeOutOfRange { index: usize },
    /// Global timestamps must be nondecreasing.
    #[error("event {index}: timestamp decreases")]
    OutOfOrder { index: usize },
    /// Within one mark stream timestamps must be strictly increasing.
    #[error("event {index}: duplicate timestamp within mark stream {pair}")]
    DuplicateInStream { index: usize, pair: String },
    /// Underlying I/O failure.
    #[error("I/O error reading event log")]
    Io(#[from] io::Error),
    /// A malformed line, with its 1-based line number.
    #[error("line {line}: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    /// The log had no header line.
    #[error("missing header line")]
    MissingHeader,
    /// A CSV record did not have the `t,i,j` shape.
    #[error("line {line}: expected `t,i,j` record")]
    BadCsvRecord { line: usize },
}

/// A single marked event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<F> {
    /// Event time in `[0, horizon]`.
    pub t: F,
    /// Group pair of the interacting endpoints.
    pub mark: GroupPair,
}

/// Time-ordered marked event log over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog<F> {
    k_groups: usize,
    horizon: F,
    events: Vec<Event<F>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderLine {
    #[serde(rename = "K")]
    k: usize,
    horizon: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventLine {
    t: f64,
    i: u32,
    j: u32,
}

/// Formats a float with 17 significant digits (enough to reproduce any `f64`
/// exactly on parse).
fn format_f64_exact(x: f64) -> String {
    format!("{x:.16e}")
}

impl<F: Scalar> EventLog<F> {
    /// Validates an already-ordered event sequence.
    ///
    /// Ordering contract: timestamps are nondecreasing globally and strictly
    /// increasing within each mark stream; exact global ties across different
    /// marks keep their given order.
    ///
    /// # Errors
    ///
    /// See [`EventLogError`].
    pub fn new(k_groups: usize, horizon: F, events: Vec<Event<F>>) -> Result<Self, EventLogError> {
        if k_groups == 0 {
            return Err(EventLogError::NoGroups);
        }
        if !horizon.is_finite() || horizon <= F::zero() {
            return Err(EventLogError::BadHorizon);
        }
        let g = pair_count(k_groups);
        let mut last_by_pair: Vec<Option<F>> = vec![None; g];
        let mut last_t: Option<F> = None;
        for (index, ev) in events.iter().enumerate() {
            GroupPair::new_checked(ev.mark.i(), ev.mark.j(), k_groups)
                .map_err(|source| EventLogError::BadMark { index, source })?;
            if !ev.t.is_finite() || ev.t < F::zero() || ev.t > horizon {
                return Err(EventLogError::TimeOutOfRange { index });
            }
            if let Some(prev) = last_t {
                if ev.t < prev {
                    return Err(EventLogError::OutOfOrder { index });
                }
            }
            last_t = Some(ev.t);
            let slot = &mut last_by_pair[ev.mark.flat_index(k_groups)];
            if let Some(prev) = *slot {
                if ev.t <= prev {
                    return Err(EventLogError::DuplicateInStream {
                        index,
                        pair: ev.mark.label(),
                    });
                }
            }
            *slot = Some(ev.t);
        }
        Ok(Self {
            k_groups,
            horizon,
            events,
        })
    }

    /// Stable-sorts events by time (ties keep insertion order) and validates.
    ///
    /// # Errors
    ///
    /// See [`EventLogError`].
    pub fn from_unsorted(
        k_groups: usize,
        horizon: F,
        mut events: Vec<Event<F>>,
    ) -> Result<Self, EventLogError> {
        events.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap_or(std::cmp::Ordering::Equal));
        Self::new(k_groups, horizon, events)
    }

    /// Group count K.
    #[inline]
    pub fn k_groups(&self) -> usize {
        self.k_groups
    }

    /// Number of group pairs G.
    #[inline]
    pub fn n_pairs(&self) -> usize {
        pair_count(self.k_groups)
    }

    /// End of the observation window.
    #[inline]
    pub fn horizon(&self) -> F {
        self.horizon
    }

    /// All events in time order.
    #[inline]
    pub fn events(&self) -> &[Event<F>] {
        &self.events
    }

    /// Total number of events.
    #[inline]
    pub fn len(&self) -> usize {
        self.events.len()
    }

    /// True when the log holds no events.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Event count per pair, flat-indexed.
    pub fn counts_by_pair(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_pairs()];
        for ev in &self.events {
            counts[ev.mark.flat_index(self.k_groups)] += 1;
        }
        counts
    }

    /// Times of `pair` events inside `[start, end)`, in order.
    pub fn times_in_window(&self, pair: GroupPair, start: F, end: F) -> Vec<F> {
        self.events
            .iter()
            .filter(|ev| ev.mark == pair && ev.t >= start && ev.t < end)
            .map(|ev| ev.t)
            .collect()
    }

    /// Number of `pair` events inside `[start, end)`.
    pub fn count_in_window(&self, pair: GroupPair, start: F, end: F) -> usize {
        self.events
            .iter()
            .filter(|ev| ev.mark == pair && ev.t >= start && ev.t < end)
            .count()
    }

    /// Cumulative (within, cross) event counts up to and including time `t`.
    pub fn within_cross_counts_at(&self, t: F) -> (usize, usize) {
        let mut within = 0;
        let mut cross = 0;
        for ev in &self.events {
            if ev.t > t {
                break;
            }
            if ev.mark.is_within() {
                within += 1;
            } else {
                cross += 1;
            }
        }
        (within, cross)
    }

    /// Writes the JSONL form (header line, then one object per event).
    ///
    /// # Errors
    ///
    /// Propagates write failures.
    pub fn to_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "{{\"K\":{},\"horizon\":{}}}",
            self.k_groups,
            format_f64_exact(self.horizon.as_f64())
        )?;
        for ev in &self.events {
            writeln!(
                w,
                "{{\"t\":{},\"i\":{},\"j\":{}}}",
                format_f64_exact(ev.t.as_f64()),
                ev.mark.i(),
                ev.mark.j()
            )?;
        }
        Ok(())
    }

    /// JSONL form as an owned string.
    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.to_jsonl(&mut buf)
            .expect("in-memory write cannot fail");
        String::from_utf8(buf).expect("JSONL output is ASCII")
    }

    /// Parses the JSONL form.
    ///
    /// # Errors
    ///
    /// Reports the offending 1-based line for malformed JSON, plus all
    /// validation errors of [`EventLog::new`].
    pub fn from_jsonl<R: BufRead>(r: R) -> Result<Self, EventLogError> {
        let mut lines = r.lines();
        let header_text = match lines.next() {
            Some(line) => line?,
            None => return Err(EventLogError::MissingHeader),
        };
        let header: HeaderLine = serde_json::from_str(&header_text)
            .map_err(|source| EventLogError::Malformed { line: 1, source })?;
        let mut events = Vec::new();
        for (offset, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: EventLine =
                serde_json::from_str(&line).map_err(|source| EventLogError::Malformed {
                    line: offset + 2,
                    source,
                })?;
            let mark =
                GroupPair::new(record.i, record.j).map_err(|source| EventLogError::BadMark {
                    index: events.len(),
                    source,
                })?;
            events.push(Event {
                t: F::lit(record.t),
                mark,
            });
        }
        Self::new(header.k, F::lit(header.horizon), events)
    }

    /// Parses the JSONL form from a string.
    ///
    /// # Errors
    ///
    /// See [`EventLog::from_jsonl`].
    pub fn from_jsonl_str(s: &str) -> Result<Self, EventLogError> {
        Self::from_jsonl(s.as_bytes())
    }

    /// Writes the CSV form (`t,i,j` header plus one row per event).
    ///
    /// # Errors
    ///
    /// Propagates write failures.
    pub fn to_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,i,j")?;
        for ev in &self.events {
            writeln!(
                w,
                "{},{},{}",
                format_f64_exact(ev.t.as_f64()),
                ev.mark.i(),
                ev.mark.j()
            )?;
        }
        Ok(())
    }

    /// Sidecar metadata (JSON) accompanying the CSV form.
    pub fn metadata_json(&self) -> String {
        format!(
            "{{\"K\":{},\"horizon\":{}}}",
            self.k_groups,
            format_f64_exact(self.horizon.as_f64())
        )
    }

    /// Parses the CSV form given its sidecar metadata document.
    ///
    /// # Errors
    ///
    /// Reports the offending 1-based line for malformed rows, plus all
    /// validation errors of [`EventLog::new`].
    pub fn from_csv<R: BufRead>(r: R, metadata: &str) -> Result<Self, EventLogError> {
        let header: HeaderLine = serde_json::from_str(metadata)
            .map_err(|source| EventLogError::Malformed { line: 0, source })?;
        let mut events = Vec::new();
        for (offset, line) in r.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if offset == 0 || trimmed.is_empty() {
                continue; // column header
            }
            let mut fields = trimmed.split(',');
            let parsed = (|| {
                let t: f64 = fields.next()?.trim().parse().ok()?;
                let i: u32 = fields.next()?.trim().parse().ok()?;
                let j: u32 = fields.next()?.trim().parse().ok()?;
                if fields.next().is_some() {
                    return None;
                }
                Some((t, i, j))
            })();
            let (t, i, j) = parsed.ok_or(EventLogError::BadCsvRecord { line: offset + 1 })?;
            let mark = GroupPair::new(i, j).map_err(|source| EventLogError::BadMark {
                index: events.len(),
                source,
            })?;
            events.push(Event { t: F::lit(t), mark });
        }
        Self::new(header.k, F::lit(header.horizon), events)
    }
}
