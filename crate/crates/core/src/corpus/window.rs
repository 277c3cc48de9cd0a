use std::fmt;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CorpusError;

pub const SECONDS_PER_DAY: i64 = 86_400;

/// Parses an ISO-8601 / RFC 3339 instant with an explicit offset into UTC seconds.
pub fn parse_timestamp(s: &str) -> Result<i64, String> {
    DateTime::parse_from_rfc3339(s.trim())
        .map(|dt| dt.with_timezone(&Utc).timestamp())
        .map_err(|e| format!("invalid timestamp {s:?}: {e}"))
}

/// Formats UTC seconds as `YYYY-MM-DDThh:mm:ssZ`.
pub fn format_timestamp(ts: i64) -> String {
    DateTime::<Utc>::from_timestamp(ts, 0)
        .map(|dt| dt.to_rfc3339_opts(SecondsFormat::Secs, true))
        .unwrap_or_else(|| ts.to_string())
}

/// Half-open time interval `[start, end)` in UTC seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimeWindow {
    start: i64,
    end: i64,
}

impl TimeWindow {
    pub fn new(start: i64, end: i64) -> Result<Self, CorpusError> {
        if start >= end {
            return Err(CorpusError::InvalidWindow { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn parse(start: &str, end: &str) -> Result<Self, CorpusError> {
        let s = parse_timestamp(start).map_err(CorpusError::Timestamp)?;
        let e = parse_timestamp(end).map_err(CorpusError::Timestamp)?;
        Self::new(s, e)
    }

    /// The window of `days` days ending where `self` starts.
    pub fn preceding_days(&self, days: i64) -> Result<Self, CorpusError> {
        Self::new(self.start - days * SECONDS_PER_DAY, self.start)
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.end
    }

    pub fn len_seconds(&self) -> i64 {
        self.end - self.start
    }

    pub fn contains(&self, ts: i64) -> bool {
        self.start <= ts && ts < self.end
    }

    /// Shifts the window by `k` whole window lengths.
    pub fn shifted(&self, k: i64) -> Self {
        let len = self.len_seconds();
        Self { start: self.start + k * len, end: self.end + k * len }
    }
}

impl fmt::Display for TimeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", format_timestamp(self.start), format_timestamp(self.end))
    }
}

#[derive(Serialize, Deserialize)]
struct WindowRepr {
    start: String,
    end: String,
}

impl Serialize for TimeWindow {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        WindowRepr { start: format_timestamp(self.start), end: format_timestamp(self.end) }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TimeWindow {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = WindowRepr::deserialize(deserializer)?;
        TimeWindow::parse(&repr.start, &repr.end).map_err(serde::de::Error::custom)
    }
}
