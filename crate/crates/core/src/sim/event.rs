//! Trace records: the observable, line-oriented output of a simulation run.
//!
//! A trace is a sequence of records ordered by `(tick, seq)`. Each record
//! serializes to one JSON object per line with keys in sorted order, so a
//! whole trace is reproducible byte for byte.

use serde_json::Value;

/// What a trace record reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// First line of every trace: config hash, seed, tool version, digest
    /// scheme.
    Header,
    /// A node's per-tick position estimate from ultrasonic trilateration.
    PositionEstimated,
    /// The node's estimated position mapped into a different cell than
    /// before.
    CellEntered,
    /// The location database recorded a reporting-cell entry.
    LocationUpdated,
    /// The backend probed cells to find a node.
    SearchPerformed,
    /// The found cell's ceiling transceiver was activated toward the node.
    LinkEstablished,
    /// A password-authenticated key agreement finished (matching or not).
    HandshakeCompleted,
    /// An enciphered test message crossed the link and was compared after
    /// deciphering.
    MessageDelivered,
    /// A node's optical connectivity check failed where it previously held.
    LinkLost,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Header => "Header",
            EventKind::PositionEstimated => "PositionEstimated",
            EventKind::CellEntered => "CellEntered",
            EventKind::LocationUpdated => "LocationUpdated",
            EventKind::SearchPerformed => "SearchPerformed",
            EventKind::LinkEstablished => "LinkEstablished",
            EventKind::HandshakeCompleted => "HandshakeCompleted",
            EventKind::MessageDelivered => "MessageDelivered",
            EventKind::LinkLost => "LinkLost",
        }
    }
}

/// One line of the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub tick: u64,
    /// Intra-tick sequence number; restarts at 0 every tick.
    pub seq: u64,
    pub kind: EventKind,
    /// The node the record is about, when it is about one.
    pub node: Option<String>,
    /// Kind-specific fields.
    pub payload: Value,
}

impl TraceRecord {
    /// The record as a JSON object. `serde_json` maps iterate keys in sorted
    /// order, which keeps serialization deterministic.
    pub fn to_json_value(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("kind".to_string(), Value::from(self.kind.as_str()));
        if let Some(node) = &self.node {
            map.insert("node".to_string(), Value::from(node.as_str()));
        }
        map.insert("payload".to_string(), self.payload.clone());
        map.insert("seq".to_string(), Value::from(self.seq));
        map.insert("tick".to_string(), Value::from(self.tick));
        Value::Object(map)
    }

    /// The record as one line of compact JSON (no trailing newline).
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("trace records serialize")
    }
}

/// The whole trace as line-delimited JSON, LF line endings, trailing newline.
pub fn trace_to_jsonl(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&record.to_json_line());
        out.push('\n');
    }
    out
}

/// Rounds to 6 significant decimal digits. Trace payloads pass every float
/// through this so that emitted values are short, stable, and insensitive to
/// sub-ulp platform differences. Implemented with decimal formatting and
/// re-parsing, both of which are exact, platform-independent operations.
pub fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.5e}").parse().expect("scientific notation parses")
}
