//! CSV readers and writers for study data.
//!
//! ```text
//! SSQ:    participant_id,session,item_1,...,item_16
//! pairs:  participant_id,ts_nrb,ts_rb
//! FMS:    participant_id,session,t_min,rating
//! ```

use std::fmt::Write as _;

use super::fms::{FmsRecord, MAX_RATING};
use super::ssq::{score_ssq, Screening, SsqResponse, SsqScores, ITEM_COUNT};
use super::{AnalyticsError, PairedTs, Session};

pub const PAIRS_HEADER: &str = "participant_id,ts_nrb,ts_rb";
pub const FMS_HEADER: &str = "participant_id,session,t_min,rating";
pub const SCORES_HEADER: &str =
    "participant_id,session,raw_n,raw_o,raw_d,n_score,o_score,d_score,ts";
pub const SCREENING_HEADER: &str = "participant_id,session,ts,decision";

pub fn ssq_header() -> String {
    let mut h = String::from("participant_id,session");
    for i in 1..=ITEM_COUNT {
        let _ = write!(h, ",item_{i}");
    }
    h
}

/// Data rows as `(line number, fields)` after checking the header.
fn rows<'a>(text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>, AnalyticsError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        Some((line, _)) => {
            return Err(AnalyticsError::MalformedHeader {
                line,
                expected: header.to_string(),
            })
        }
        None => {
            return Err(AnalyticsError::MalformedHeader {
                line: 1,
                expected: header.to_string(),
            })
        }
    }
    let width = header.split(',').count();
    lines
        .map(|(line, l)| {
            let fields: Vec<&str> = l.split(',').map(str::trim).collect();
            if fields.len() != width {
                return Err(AnalyticsError::Parse {
                    line,
                    message: format!("expected {width} fields, found {}", fields.len()),
                });
            }
            Ok((line, fields))
        })
        .collect()
}

fn parse_err(line: usize, field: &str, value: &str) -> AnalyticsError {
    AnalyticsError::Parse {
        line,
        message: format!("field `{field}` has invalid value `{value}`"),
    }
}

fn parse_session(line: usize, value: &str) -> Result<Session, AnalyticsError> {
    value
        .parse()
        .map_err(|message| AnalyticsError::Parse { line, message })
}

fn parse_real(line: usize, field: &str, value: &str) -> Result<f64, AnalyticsError> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(line, field, value)),
    }
}

fn row_err(line: usize, source: AnalyticsError) -> AnalyticsError {
    AnalyticsError::Row {
        line,
        source: Box::new(source),
    }
}

/// Parses SSQ responses; out-of-range items are reported with their line.
pub fn parse_ssq_csv(text: &str) -> Result<Vec<(usize, SsqResponse)>, AnalyticsError> {
    let header = ssq_header();
    rows(text, &header)?
        .into_iter()
        .map(|(line, f)| {
            let session = parse_session(line, f[1])?;
            let mut items = Vec::with_capacity(ITEM_COUNT);
            for (i, raw) in f[2..].iter().enumerate() {
                let v: i64 = raw
                    .parse()
                    .map_err(|_| parse_err(line, &format!("item_{}", i + 1), raw))?;
                if !(0..=3).contains(&v) {
                    return Err(row_err(
                        line,
                        AnalyticsError::ItemOutOfRange {
                            item: i + 1,
                            value: v,
                        },
                    ));
                }
                items.push(v as u8);
            }
            Ok((
                line,
                SsqResponse {
                    participant_id: f[0].to_string(),
                    session,
                    items,
                },
            ))
        })
        .collect()
}

/// Scores every row of an SSQ file.
pub fn score_ssq_csv(text: &str) -> Result<Vec<(SsqResponse, SsqScores)>, AnalyticsError> {
    parse_ssq_csv(text)?
        .into_iter()
        .map(|(line, r)| {
            let s = score_ssq(&r).map_err(|e| row_err(line, e))?;
            Ok((r, s))
        })
        .collect()
}

pub fn write_scores_csv(scored: &[(SsqResponse, SsqScores)]) -> String {
    let mut out = format!("{SCORES_HEADER}\n");
    for (r, s) in scored {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.participant_id,
            r.session,
            s.raw_n,
            s.raw_o,
            s.raw_d,
            s.n_score,
            s.o_score,
            s.d_score,
            s.ts
        );
    }
    out
}

pub fn write_screening_csv(rows: &[(SsqResponse, f64, Screening)]) -> String {
    let mut out = format!("{SCREENING_HEADER}\n");
    for (r, ts, decision) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.participant_id,
            r.session,
            ts,
            decision.as_str()
        );
    }
    out
}

pub fn parse_pairs_csv(text: &str) -> Result<Vec<PairedTs>, AnalyticsError> {
    rows(text, PAIRS_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let nrb = parse_real(line, "ts_nrb", f[1])?;
            let rb = parse_real(line, "ts_rb", f[2])?;
            if nrb < 0.0 {
                return Err(row_err(line, AnalyticsError::NegativeTs(nrb)));
            }
            if rb < 0.0 {
                return Err(row_err(line, AnalyticsError::NegativeTs(rb)));
            }
            Ok(PairedTs::new(f[0], nrb, rb))
        })
        .collect()
}

pub fn write_pairs_csv(pairs: &[PairedTs]) -> String {
    let mut out = format!("{PAIRS_HEADER}\n");
    for p in pairs {
        let _ = writeln!(out, "{},{},{}", p.participant_id, p.ts_nrb, p.ts_rb);
    }
    out
}

pub fn parse_fms_csv(text: &str) -> Result<Vec<FmsRecord>, AnalyticsError> {
    rows(text, FMS_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let session = parse_session(line, f[1])?;
            let t_min = parse_real(line, "t_min", f[2])?;
            if t_min <= 0.0 {
                return Err(parse_err(line, "t_min", f[2]));
            }
            let rating: i64 = f[3].parse().map_err(|_| parse_err(line, "rating", f[3]))?;
            if !(0..=i64::from(MAX_RATING)).contains(&rating) {
                return Err(row_err(line, AnalyticsError::RatingOutOfRange(rating)));
            }
            Ok(FmsRecord {
                participant_id: f[0].to_string(),
                session,
                t_min,
                rating: rating as u8,
            })
        })
        .collect()
}
