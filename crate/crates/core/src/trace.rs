//! Trace, sigma-series and session-event CSV formats, plus offline replay.
//!
//! All three formats are plain CSV with a fixed header. Traces may be
//! preceded by `# key=value` metadata lines; sigma series carry the producing
//! config's fingerprint the same way. Floats are written with Rust's shortest
//! round-trip formatting, so `parse(write(x)) == x` bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::controller::{
    self, BlurFrameOutput, ControllerConfig, ControllerError, InputSample, Phase,
};

pub const TRACE_HEADER: &str =
    "t_us,ctrl_yaw_delta_deg,ctrl_pitch_delta_deg,head_yaw_delta_deg,head_pitch_delta_deg,head_roll_delta_deg";
pub const SIGMA_HEADER: &str = "t_us,sigma_px,phase,pending_count,v_deg_s,a_deg_s2";
pub const EVENTS_HEADER: &str = "t_us,event,value";

const FINGERPRINT_KEY: &str = "config_fingerprint";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("line {line}: expected header `{expected}`, found `{found}`")]
    MalformedHeader {
        line: usize,
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: t_us {t_us} does not increase past {prev_us}")]
    NonMonotonicTime {
        line: usize,
        t_us: i64,
        prev_us: i64,
    },
    #[error("line {line}: field `{field}` has invalid value `{value}`")]
    NonNumericField {
        line: usize,
        field: &'static str,
        value: String,
    },
    #[error("line {line}: expected {expected} fields, found {found}")]
    WrongFieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: malformed metadata `{text}`")]
    MalformedMeta { line: usize, text: String },
    #[error("trace has no samples")]
    EmptyTrace,
    #[error("sample {index} (t_us {t_us}): {source}")]
    Controller {
        index: usize,
        t_us: i64,
        #[source]
        source: ControllerError,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub samples: Vec<InputSample>,
    /// Free-form metadata such as the capture source or frame-rate hint.
    pub meta: BTreeMap<String, String>,
}

impl Trace {
    pub fn new(samples: Vec<InputSample>) -> Self {
        Self {
            samples,
            meta: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SigmaSeries {
    pub frames: Vec<BlurFrameOutput>,
    pub config_fingerprint: String,
}

/// Stable 64-bit digest of every config field, as 16 hex digits.
pub fn config_fingerprint(config: &ControllerConfig) -> String {
    let canonical = format!(
        "a_min_deg_s2={:016x}\nactivation_frames={}\ngain_px_per_deg_s2={:016x}\nsigma_max_px={:016x}\n\
         ema_alpha={:016x}\nattack_tau_s={:016x}\nrelease_tau_s={:016x}\nv_stop_deg_s={:016x}\n\
         sigma_eps_px={:016x}\ndeg_per_count={:016x}\n",
        config.a_min_deg_s2.to_bits(),
        config.activation_frames,
        config.gain_px_per_deg_s2.to_bits(),
        config.sigma_max_px.to_bits(),
        config.ema_alpha.to_bits(),
        config.attack_tau_s.to_bits(),
        config.release_tau_s.to_bits(),
        config.v_stop_deg_s.to_bits(),
        config.sigma_eps_px.to_bits(),
        config.deg_per_count.to_bits(),
    );
    let digest = Sha256::digest(canonical.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs every sample of `trace` through a fresh controller.
pub fn replay(trace: &Trace, config: &ControllerConfig) -> Result<SigmaSeries, TraceError> {
    if trace.samples.is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let mut state = controller::reset(config).map_err(|source| TraceError::Controller {
        index: 0,
        t_us: trace.samples[0].t_us,
        source,
    })?;
    let mut frames = Vec::with_capacity(trace.samples.len());
    for (index, sample) in trace.samples.iter().enumerate() {
        let (next, out) =
            controller::step(&state, sample, config).map_err(|source| TraceError::Controller {
                index,
                t_us: sample.t_us,
                source,
            })?;
        state = next;
        frames.push(out);
    }
    Ok(SigmaSeries {
        frames,
        config_fingerprint: config_fingerprint(config),
    })
}

// ---------------------------------------------------------------------------
// Line scanning shared by the three formats.

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
        }
    }

    /// Next non-blank line with its 1-based number.
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        self.inner
            .by_ref()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .find(|(_, l)| !l.trim().is_empty())
    }
}

/// Reads `# key=value` lines, then expects `header`.
fn read_preamble(
    lines: &mut Lines<'_>,
    header: &'static str,
) -> Result<(BTreeMap<String, String>, bool), TraceError> {
    let mut meta = BTreeMap::new();
    loop {
        let Some((line, text)) = lines.next_line() else {
            return Ok((meta, false));
        };
        if let Some(rest) = text.strip_prefix('#') {
            let (key, value) =
                rest.trim_start()
                    .split_once('=')
                    .ok_or_else(|| TraceError::MalformedMeta {
                        line,
                        text: text.to_string(),
                    })?;
            meta.insert(key.trim().to_string(), value.trim().to_string());
            continue;
        }
        if text.trim() != header {
            return Err(TraceError::MalformedHeader {
                line,
                expected: header,
                found: text.to_string(),
            });
        }
        return Ok((meta, true));
    }
}

fn split_fields(line: usize, text: &str, expected: usize) -> Result<Vec<&str>, TraceError> {
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    if fields.len() != expected {
        return Err(TraceError::WrongFieldCount {
            line,
            expected,
            found: fields.len(),
        });
    }
    Ok(fields)
}

fn parse_field<T: FromStr>(line: usize, field: &'static str, value: &str) -> Result<T, TraceError> {
    value.parse().map_err(|_| TraceError::NonNumericField {
        line,
        field,
        value: value.to_string(),
    })
}

fn parse_finite(line: usize, field: &'static str, value: &str) -> Result<f64, TraceError> {
    let v: f64 = parse_field(line, field, value)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(TraceError::NonNumericField {
            line,
            field,
            value: value.to_string(),
        })
    }
}

fn parse_time(line: usize, value: &str, prev: Option<i64>) -> Result<i64, TraceError> {
    let t_us: i64 = parse_field(line, "t_us", value)?;
    if t_us < 0 {
        return Err(TraceError::NonNumericField {
            line,
            field: "t_us",
            value: value.to_string(),
        });
    }
    if let Some(prev_us) = prev {
        if t_us <= prev_us {
            return Err(TraceError::NonMonotonicTime {
                line,
                t_us,
                prev_us,
            });
        }
    }
    Ok(t_us)
}

fn write_meta(out: &mut String, meta: &BTreeMap<String, String>) {
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
}

// ---------------------------------------------------------------------------
// Trace CSV

pub fn parse_trace(text: &str) -> Result<Trace, TraceError> {
    const FIELDS: [&str; 6] = [
        "t_us",
        "ctrl_yaw_delta_deg",
        "ctrl_pitch_delta_deg",
        "head_yaw_delta_deg",
        "head_pitch_delta_deg",
        "head_roll_delta_deg",
    ];
    let mut lines = Lines::new(text);
    let (meta, has_header) = read_preamble(&mut lines, TRACE_HEADER)?;
    if !has_header {
        return Err(TraceError::MalformedHeader {
            line: 1,
            expected: TRACE_HEADER,
            found: String::new(),
        });
    }

    let mut samples: Vec<InputSample> = Vec::new();
    while let Some((line, text)) = lines.next_line() {
        let f = split_fields(line, text, FIELDS.len())?;
        let t_us = parse_time(line, f[0], samples.last().map(|s| s.t_us))?;
        samples.push(InputSample {
            t_us,
            ctrl_yaw_delta_deg: parse_finite(line, FIELDS[1], f[1])?,
            ctrl_pitch_delta_deg: parse_finite(line, FIELDS[2], f[2])?,
            head_yaw_delta_deg: parse_finite(line, FIELDS[3], f[3])?,
            head_pitch_delta_deg: parse_finite(line, FIELDS[4], f[4])?,
            head_roll_delta_deg: parse_finite(line, FIELDS[5], f[5])?,
        });
    }
    Ok(Trace { samples, meta })
}

pub fn write_trace(trace: &Trace) -> String {
    let mut out = String::new();
    write_meta(&mut out, &trace.meta);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for s in &trace.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.t_us,
            s.ctrl_yaw_delta_deg,
            s.ctrl_pitch_delta_deg,
            s.head_yaw_delta_deg,
            s.head_pitch_delta_deg,
            s.head_roll_delta_deg
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Sigma CSV

pub fn parse_sigma_series(text: &str) -> Result<SigmaSeries, TraceError> {
    let mut lines = Lines::new(text);
    let (mut meta, has_header) = read_preamble(&mut lines, SIGMA_HEADER)?;
    if !has_header {
        return Err(TraceError::MalformedHeader {
            line: 1,
            expected: SIGMA_HEADER,
            found: String::new(),
        });
    }
    let config_fingerprint = meta.remove(FINGERPRINT_KEY).unwrap_or_default();

    let mut frames: Vec<BlurFrameOutput> = Vec::new();
    while let Some((line, text)) = lines.next_line() {
        let f = split_fields(line, text, 6)?;
        let t_us = parse_time(line, f[0], frames.last().map(|o| o.t_us))?;
        let count: u32 = parse_field(line, "pending_count", f[3])?;
        let phase = match (f[2], count) {
            ("Idle", 0) => Phase::Idle,
            ("Pending", c) if c > 0 => Phase::Pending { count: c },
            ("Active", 0) => Phase::Active,
            ("Releasing", 0) => Phase::Releasing,
            _ => {
                return Err(TraceError::NonNumericField {
                    line,
                    field: "phase",
                    value: format!("{}/{}", f[2], f[3]),
                })
            }
        };
        frames.push(BlurFrameOutput {
            t_us,
            sigma_px: parse_finite(line, "sigma_px", f[1])?,
            phase,
            v_deg_s: parse_finite(line, "v_deg_s", f[4])?,
            a_deg_s2: parse_finite(line, "a_deg_s2", f[5])?,
        });
    }
    Ok(SigmaSeries {
        frames,
        config_fingerprint,
    })
}

pub fn write_sigma_series(series: &SigmaSeries) -> String {
    let mut out = String::new();
    if !series.config_fingerprint.is_empty() {
        let _ = writeln!(out, "# {FINGERPRINT_KEY}={}", series.config_fingerprint);
    }
    out.push_str(SIGMA_HEADER);
    out.push('\n');
    for o in &series.frames {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            o.t_us,
            o.sigma_px,
            o.phase.name(),
            o.phase.pending_count(),
            o.v_deg_s,
            o.a_deg_s2
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Session events CSV

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    RbToggled,
    FmsPrompt,
    FmsResponse,
    FmsTimeout,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::RbToggled => "rb_toggled",
            EventKind::FmsPrompt => "fms_prompt",
            EventKind::FmsResponse => "fms_response",
            EventKind::FmsTimeout => "fms_timeout",
        }
    }
}

impl FromStr for EventKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "rb_toggled" => Ok(EventKind::RbToggled),
            "fms_prompt" => Ok(EventKind::FmsPrompt),
            "fms_response" => Ok(EventKind::FmsResponse),
            "fms_timeout" => Ok(EventKind::FmsTimeout),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionEvent {
    pub t_us: i64,
    pub kind: EventKind,
    pub value: String,
}

/// Parses an events log. Timestamps must not decrease; several events may
/// share a frame.
pub fn parse_events(text: &str) -> Result<Vec<SessionEvent>, TraceError> {
    let mut lines = Lines::new(text);
    let (_, has_header) = read_preamble(&mut lines, EVENTS_HEADER)?;
    if !has_header {
        return Err(TraceError::MalformedHeader {
            line: 1,
            expected: EVENTS_HEADER,
            found: String::new(),
        });
    }
    let mut events: Vec<SessionEvent> = Vec::new();
    while let Some((line, text)) = lines.next_line() {
        let f = split_fields(line, text, 3)?;
        let t_us = parse_time(line, f[0], None)?;
        if let Some(prev) = events.last() {
            if t_us < prev.t_us {
                return Err(TraceError::NonMonotonicTime {
                    line,
                    t_us,
                    prev_us: prev.t_us,
                });
            }
        }
        let kind = f[1].parse().map_err(|_| TraceError::NonNumericField {
            line,
            field: "event",
            value: f[1].to_string(),
        })?;
        events.push(SessionEvent {
            t_us,
            kind,
            value: f[2].to_string(),
        });
    }
    Ok(events)
}

pub fn write_events(events: &[SessionEvent]) -> String {
    let mut out = String::from(EVENTS_HEADER);
    out.push('\n');
    for e in events {
        let _ = writeln!(out, "{},{},{}", e.t_us, e.kind.as_str(), e.value);
    }
    out
}
