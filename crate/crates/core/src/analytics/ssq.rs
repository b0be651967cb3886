//! Simulator Sickness Questionnaire scoring.
//!
//! Item order, subscale membership and weights follow Kennedy, Lane, Berbaum
//! & Lilienthal (1993), "Simulator Sickness Questionnaire: An enhanced method
//! for quantifying simulator sickness", Int. J. Aviation Psychology 3(3),
//! Table 1. Each subscale draws on seven items; five items load on two
//! subscales.

use serde::Serialize;

use super::{AnalyticsError, Session};

pub const ITEM_COUNT: usize = 16;
pub const MAX_ITEM_VALUE: u8 = 3;

pub const NAUSEA_WEIGHT: f64 = 9.54;
pub const OCULOMOTOR_WEIGHT: f64 = 7.58;
pub const DISORIENTATION_WEIGHT: f64 = 13.92;
pub const TOTAL_WEIGHT: f64 = 3.74;

/// Pre-screen cutoff; a total sickness score above it is rejected.
pub const PRESCREEN_CUTOFF: f64 = 7.48;

/// `(symptom, nausea, oculomotor, disorientation)` in questionnaire order.
pub const ITEMS: [(&str, bool, bool, bool); ITEM_COUNT] = [
    ("general discomfort", true, true, false),
    ("fatigue", false, true, false),
    ("headache", false, true, false),
    ("eyestrain", false, true, false),
    ("difficulty focusing", false, true, true),
    ("increased salivation", true, false, false),
    ("sweating", true, false, false),
    ("nausea", true, false, true),
    ("difficulty concentrating", true, true, false),
    ("fullness of head", false, false, true),
    ("blurred vision", false, true, true),
    ("dizzy (eyes open)", false, false, true),
    ("dizzy (eyes closed)", false, false, true),
    ("vertigo", false, false, true),
    ("stomach awareness", true, false, false),
    ("burping", true, false, false),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsqResponse {
    pub participant_id: String,
    pub session: Session,
    pub items: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SsqScores {
    pub raw_n: u32,
    pub raw_o: u32,
    pub raw_d: u32,
    pub n_score: f64,
    pub o_score: f64,
    pub d_score: f64,
    pub ts: f64,
}

pub fn score_ssq(response: &SsqResponse) -> Result<SsqScores, AnalyticsError> {
    score_items(&response.items)
}

pub fn score_items(items: &[u8]) -> Result<SsqScores, AnalyticsError> {
    if items.len() != ITEM_COUNT {
        return Err(AnalyticsError::WrongItemCount(items.len()));
    }
    let (mut raw_n, mut raw_o, mut raw_d) = (0u32, 0u32, 0u32);
    for (i, (&value, &(_, n, o, d))) in items.iter().zip(ITEMS.iter()).enumerate() {
        if value > MAX_ITEM_VALUE {
            return Err(AnalyticsError::ItemOutOfRange {
                item: i + 1,
                value: i64::from(value),
            });
        }
        let v = u32::from(value);
        raw_n += if n { v } else { 0 };
        raw_o += if o { v } else { 0 };
        raw_d += if d { v } else { 0 };
    }
    Ok(SsqScores {
        raw_n,
        raw_o,
        raw_d,
        n_score: NAUSEA_WEIGHT * f64::from(raw_n),
        o_score: OCULOMOTOR_WEIGHT * f64::from(raw_o),
        d_score: DISORIENTATION_WEIGHT * f64::from(raw_d),
        ts: TOTAL_WEIGHT * f64::from(raw_n + raw_o + raw_d),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Screening {
    Accept,
    Reject,
}

impl Screening {
    pub fn as_str(&self) -> &'static str {
        match self {
            Screening::Accept => "accept",
            Screening::Reject => "reject",
        }
    }
}

/// Rejects strictly above `cutoff`; a score equal to the cutoff passes.
pub fn prescreen(ts: f64, cutoff: f64) -> Result<Screening, AnalyticsError> {
    if !ts.is_finite() || !cutoff.is_finite() {
        return Err(AnalyticsError::NonFinite);
    }
    if ts < 0.0 {
        return Err(AnalyticsError::NegativeTs(ts));
    }
    Ok(if ts > cutoff {
        Screening::Reject
    } else {
        Screening::Accept
    })
}
