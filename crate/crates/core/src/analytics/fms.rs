//! 0-6 motion-sickness ratings sampled during exposure.

use std::collections::BTreeMap;

use ordered_float::OrderedFloat;
use serde::Serialize;

use super::{AnalyticsError, Session};
use crate::trace::{EventKind, SessionEvent};

pub const MAX_RATING: u8 = 6;

/// Minutes between in-session rating prompts in the study protocol.
pub const PROMPT_INTERVAL_MIN: f64 = 2.0;
/// Exposure length in the study protocol.
pub const SESSION_LENGTH_MIN: f64 = 10.0;

/// Scale anchors, indexed by rating.
pub const SCALE_LABELS: [&str; 7] = [
    "no symptoms",
    "any unpleasant symptoms",
    "mild unpleasant symptoms",
    "mild nausea",
    "mild to moderate nausea",
    "moderate nausea but can continue",
    "moderate nausea, want to stop",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FmsRecord {
    pub participant_id: String,
    pub session: Session,
    pub t_min: f64,
    pub rating: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FmsPoint {
    pub t_min: f64,
    pub mean_rating: f64,
    pub n: usize,
}

/// Mean rating per prompt time for one session, ascending in time.
pub fn fms_mean_curve(
    records: &[FmsRecord],
    session: Session,
) -> Result<Vec<FmsPoint>, AnalyticsError> {
    for r in records {
        if r.rating > MAX_RATING {
            return Err(AnalyticsError::RatingOutOfRange(i64::from(r.rating)));
        }
        if !r.t_min.is_finite() {
            return Err(AnalyticsError::NonFinite);
        }
    }
    let mut buckets: BTreeMap<OrderedFloat<f64>, (u64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.session == session) {
        let entry = buckets.entry(OrderedFloat(r.t_min)).or_default();
        entry.0 += u64::from(r.rating);
        entry.1 += 1;
    }
    if buckets.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    Ok(buckets
        .into_iter()
        .map(|(t, (sum, n))| FmsPoint {
            t_min: t.0,
            mean_rating: sum as f64 / n as f64,
            n,
        })
        .collect())
}

/// Pulls rating responses out of a recorded session's event log.
///
/// Non-numeric or out-of-range response values are errors; prompts and
/// timeouts are skipped.
pub fn records_from_events(
    participant_id: &str,
    session: Session,
    events: &[SessionEvent],
) -> Result<Vec<FmsRecord>, AnalyticsError> {
    events
        .iter()
        .filter(|e| e.kind == EventKind::FmsResponse)
        .map(|e| {
            let rating: i64 = e.value.trim().parse().map_err(|_| AnalyticsError::Parse {
                line: 0,
                message: format!("fms_response value `{}` is not an integer", e.value),
            })?;
            if !(0..=i64::from(MAX_RATING)).contains(&rating) {
                return Err(AnalyticsError::RatingOutOfRange(rating));
            }
            Ok(FmsRecord {
                participant_id: participant_id.to_string(),
                session,
                t_min: e.t_us as f64 / 60e6,
                rating: rating as u8,
            })
        })
        .collect()
}
