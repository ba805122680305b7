//! Event logs (`<t_ms> <KIND> <x> <y>` per line) and calibration files.

use std::path::Path;

use tapemouse_core::{Calibration, MouseEvent};

use crate::error::{HarnessError, Result};

/// Ordered mouse events with non-decreasing timestamps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    events: Vec<MouseEvent>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an event. Panics if it is older than the last one.
    pub fn push(&mut self, event: MouseEvent) {
        if let Some(last) = self.events.last() {
            assert!(last.t_ms <= event.t_ms, "event log timestamps must not decrease");
        }
        self.events.push(event);
    }

    pub fn extend(&mut self, events: impl IntoIterator<Item = MouseEvent>) {
        for e in events {
            self.push(e);
        }
    }

    pub fn events(&self) -> &[MouseEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn render(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut log = EventLog::new();
        if text.is_empty() {
            return Ok(log);
        }
        let Some(body) = text.strip_suffix('\n') else {
            return Err(HarnessError::EventLog {
                line: text.lines().count(),
                message: "missing trailing newline".into(),
            });
        };
        for (idx, line) in body.split('\n').enumerate() {
            let event: MouseEvent = line
                .parse()
                .map_err(|message| HarnessError::EventLog { line: idx + 1, message })?;
            if log.events.last().is_some_and(|last| last.t_ms > event.t_ms) {
                return Err(HarnessError::EventLog {
                    line: idx + 1,
                    message: "timestamp goes backwards".into(),
                });
            }
            log.events.push(event);
        }
        Ok(log)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| HarnessError::io(path, e))
    }
}

impl From<EventLog> for Vec<MouseEvent> {
    fn from(log: EventLog) -> Self {
        log.events
    }
}

/// `D=<float>` and `D_prime=<float>` lines.
pub fn render_calibration(cal: &Calibration) -> String {
    format!("D={}\nD_prime={}\n", cal.open(), cal.pinch())
}

pub fn parse_calibration(text: &str) -> Result<Calibration> {
    let bad = |m: String| HarnessError::CalibrationFile(m);
    let mut open = None;
    let mut pinch = None;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {line:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| bad(format!("invalid number {value:?}")))?;
        match key.trim() {
            "D" => open = Some(value),
            "D_prime" => pinch = Some(value),
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    let open = open.ok_or_else(|| bad("missing D".into()))?;
    let pinch = pinch.ok_or_else(|| bad("missing D_prime".into()))?;
    Ok(Calibration::new(open, pinch)?)
}

pub fn load_calibration(path: &Path) -> Result<Calibration> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_calibration(&text)
}

pub fn save_calibration(path: &Path, cal: &Calibration) -> Result<()> {
    std::fs::write(path, render_calibration(cal)).map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tapemouse_core::EventKind;

    #[test]
    fn render_is_line_per_event() {
        let mut log = EventLog::new();
        log.push(MouseEvent { t_ms: 0, kind: EventKind::Move, x: 300, y: 450 });
        log.push(MouseEvent { t_ms: 2866, kind: EventKind::LeftClick, x: 300, y: 450 });
        assert_eq!(log.render(), "0 MOVE 300 450\n2866 LEFT_CLICK 300 450\n");
        assert_eq!(EventLog::parse(&log.render()).unwrap(), log);
        assert_eq!(EventLog::parse("").unwrap(), EventLog::new());
    }

    #[test]
    fn parse_rejects_sloppy_logs() {
        assert!(EventLog::parse("0 MOVE 1 1").is_err());
        assert!(EventLog::parse("5 MOVE 1 1\n4 MOVE 1 1\n").is_err());
        assert!(EventLog::parse("0 MOVE 1 1\n\n").is_err());
        assert!(EventLog::parse("0 move 1 1\n").is_err());
    }

    #[test]
    #[should_panic(expected = "must not decrease")]
    fn push_rejects_time_travel() {
        let mut log = EventLog::new();
        log.push(MouseEvent { t_ms: 5, kind: EventKind::Move, x: 0, y: 0 });
        log.push(MouseEvent { t_ms: 4, kind: EventKind::Move, x: 0, y: 0 });
    }

    #[test]
    fn calibration_file() {
        let cal = Calibration::new(199.87, 40.25).unwrap();
        let text = render_calibration(&cal);
        assert_eq!(text, "D=199.87\nD_prime=40.25\n");
        assert_eq!(parse_calibration(&text).unwrap(), cal);
        assert!(parse_calibration("D=10\n").is_err());
        assert!(parse_calibration("D=10\nD_prime=20\n").is_err());
        assert!(parse_calibration("D=ten\nD_prime=2\n").is_err());
    }
}
