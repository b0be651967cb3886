//! Whole-study analysis report.

use serde::Serialize;

use super::fms::{fms_mean_curve, FmsPoint, FmsRecord};
use super::stats::{partition_delta, summarize, PairedTs, Summary};
use super::wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};
use super::{AnalyticsError, Session};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub n_pairs: usize,
    pub ts_nrb: Summary,
    pub ts_rb: Summary,
    pub delta_ts: Summary,
    pub partition: PartitionReport,
    pub wilcoxon: WilcoxonOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fms: Option<FmsCurves>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub declined: usize,
    pub unchanged: usize,
    pub increased: usize,
    pub declined_ids: Vec<String>,
    pub mean_delta_declined: Option<f64>,
    pub mean_delta_non_declined: Option<f64>,
    pub mean_nrb_declined: Option<f64>,
    pub mean_nrb_non_declined: Option<f64>,
}

/// Either a test result or the reason the test could not run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonOutcome {
    Result(WilcoxonResult),
    Undefined { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FmsCurves {
    #[serde(rename = "NRB")]
    pub nrb: Vec<FmsPoint>,
    #[serde(rename = "RB")]
    pub rb: Vec<FmsPoint>,
}

pub fn analyze(
    pairs: &[PairedTs],
    fms: Option<&[FmsRecord]>,
) -> Result<AnalysisReport, AnalyticsError> {
    if pairs.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    let nrb: Vec<f64> = pairs.iter().map(|p| p.ts_nrb).collect();
    let rb: Vec<f64> = pairs.iter().map(|p| p.ts_rb).collect();
    let delta: Vec<f64> = pairs.iter().map(|p| p.delta).collect();

    let part = partition_delta(pairs)?;
    let partition = PartitionReport {
        declined: part.declined.len(),
        unchanged: part.unchanged.len(),
        increased: part.increased.len(),
        declined_ids: part
            .declined
            .iter()
            .map(|p| p.participant_id.clone())
            .collect(),
        mean_delta_declined: part.mean_delta_declined,
        mean_delta_non_declined: part.mean_delta_non_declined,
        mean_nrb_declined: part.mean_nrb_declined,
        mean_nrb_non_declined: part.mean_nrb_non_declined,
    };

    let wilcoxon = match wilcoxon_signed_rank(pairs) {
        Ok(r) => WilcoxonOutcome::Result(r),
        Err(AnalyticsError::AllZeroDifferences) => WilcoxonOutcome::Undefined {
            reason: "AllZeroDifferences".into(),
        },
        Err(e) => return Err(e),
    };

    let fms = match fms {
        Some(records) => Some(FmsCurves {
            nrb: curve_or_empty(records, Session::Nrb)?,
            rb: curve_or_empty(records, Session::Rb)?,
        }),
        None => None,
    };

    Ok(AnalysisReport {
        n_pairs: pairs.len(),
        ts_nrb: summarize(&nrb)?,
        ts_rb: summarize(&rb)?,
        delta_ts: summarize(&delta)?,
        partition,
        wilcoxon,
        fms,
    })
}

fn curve_or_empty(
    records: &[FmsRecord],
    session: Session,
) -> Result<Vec<FmsPoint>, AnalyticsError> {
    match fms_mean_curve(records, session) {
        Err(AnalyticsError::EmptyInput) => Ok(Vec::new()),
        other => other,
    }
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
