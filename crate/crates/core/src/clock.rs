//! Time sources. Datestamps have one-second granularity.

use std::sync::Mutex;

use chrono::{DateTime, DurationRound, TimeDelta, Utc};

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        truncate_to_second(Utc::now())
    }
}

/// A clock that only moves when told to.
#[derive(Debug)]
pub struct ManualClock(Mutex<DateTime<Utc>>);

impl ManualClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        ManualClock(Mutex::new(truncate_to_second(start)))
    }

    pub fn set(&self, t: DateTime<Utc>) {
        *self.0.lock().unwrap() = truncate_to_second(t);
    }

    pub fn advance(&self, seconds: i64) -> DateTime<Utc> {
        let mut t = self.0.lock().unwrap();
        *t += TimeDelta::seconds(seconds);
        *t
    }
}

impl Clock for ManualClock {
    fn now(&self) -> DateTime<Utc> {
        *self.0.lock().unwrap()
    }
}

pub fn truncate_to_second(t: DateTime<Utc>) -> DateTime<Utc> {
    t.duration_trunc(TimeDelta::seconds(1)).unwrap_or(t)
}

/// `YYYY-MM-DDThh:mm:ssZ`.
pub fn format_datestamp(t: &DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Which end of a day a date-only value denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DayBound {
    Start,
    End,
}

/// Accepts `YYYY-MM-DDThh:mm:ssZ` or a bare `YYYY-MM-DD`.
pub fn parse_datestamp(s: &str, bound: DayBound) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        if s.ends_with('Z') && !s.contains('.') {
            return Some(t.with_timezone(&Utc));
        }
        return None;
    }
    let date = chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()?;
    if s.len() != 10 {
        return None;
    }
    let time = match bound {
        DayBound::Start => date.and_hms_opt(0, 0, 0)?,
        DayBound::End => date.and_hms_opt(23, 59, 59)?,
    };
    Some(time.and_utc())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn datestamp_formats() {
        let t = parse_datestamp("2001-05-04T12:30:00Z", DayBound::Start).unwrap();
        assert_eq!(format_datestamp(&t), "2001-05-04T12:30:00Z");
        let d = parse_datestamp("2001-05-04", DayBound::End).unwrap();
        assert_eq!(format_datestamp(&d), "2001-05-04T23:59:59Z");
        for bad in [
            "2001-5-4",
            "yesterday",
            "2001-05-04T12:30:00+02:00",
            "2001-05-04T12:30:00.5Z",
            "",
        ] {
            assert!(parse_datestamp(bad, DayBound::Start).is_none(), "{bad}");
        }
    }

    #[test]
    fn manual_clock_moves_on_demand() {
        let c = ManualClock::new(parse_datestamp("2001-01-01", DayBound::Start).unwrap());
        let before = c.now();
        assert_eq!(c.now(), before);
        assert_eq!(c.advance(5) - before, TimeDelta::seconds(5));
    }
}
