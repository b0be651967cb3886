//! Sickness-study analytics: SSQ scoring and pre-screening, descriptive
//! statistics, the paired ΔTS partition, the Wilcoxon signed-rank test and
//! 0-6 rating curves.

pub mod fms;
pub mod io;
pub mod report;
pub mod ssq;
pub mod stats;
pub mod wilcoxon;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

pub use fms::{fms_mean_curve, FmsPoint, FmsRecord};
pub use report::{analyze, AnalysisReport};
pub use ssq::{prescreen, score_ssq, Screening, SsqResponse, SsqScores};
pub use stats::{partition_delta, summarize, DeltaPartition, PairedTs, Summary};
pub use wilcoxon::{signed_rank_test, wilcoxon_signed_rank, WilcoxonMethod, WilcoxonResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("expected 16 SSQ items, got {0}")]
    WrongItemCount(usize),
    #[error("SSQ item {item} has value {value}; items range over 0..=3")]
    ItemOutOfRange { item: usize, value: i64 },
    #[error("total sickness score {0} is negative")]
    NegativeTs(f64),
    #[error("input is empty")]
    EmptyInput,
    #[error("all paired differences are zero; the signed-rank test is undefined")]
    AllZeroDifferences,
    #[error("rating {0} is outside the 0-6 scale")]
    RatingOutOfRange(i64),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("line {line}: expected header `{expected}`")]
    MalformedHeader { line: usize, expected: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Row {
        line: usize,
        #[source]
        source: Box<AnalyticsError>,
    },
}

/// Study condition: rotation blurring off (NRB) or on (RB).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Session {
    #[serde(rename = "NRB")]
    Nrb,
    #[serde(rename = "RB")]
    Rb,
}

impl fmt::Display for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Session::Nrb => "NRB",
            Session::Rb => "RB",
        })
    }
}

impl FromStr for Session {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "NRB" => Ok(Session::Nrb),
            "RB" => Ok(Session::Rb),
            other => Err(format!("unknown session `{other}`; expected NRB or RB")),
        }
    }
}
