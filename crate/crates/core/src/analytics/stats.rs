//! Descriptive statistics and the paired ΔTS partition.

use serde::Serialize;

use super::AnalyticsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub sd: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(values: &[f64]) -> Result<Summary, AnalyticsError> {
    if values.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AnalyticsError::NonFinite);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Summary {
        n,
        mean,
        sd,
        median: quantile_sorted(&sorted, 0.5),
        q1: quantile_sorted(&sorted, 0.25),
        q3: quantile_sorted(&sorted, 0.75),
        min: sorted[0],
        max: sorted[n - 1],
    })
}

/// Inclusive linear-interpolation quantile: position `q * (n - 1)` between
/// order statistics.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

/// One participant's total sickness with and without rotation blurring.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedTs {
    pub participant_id: String,
    pub ts_nrb: f64,
    pub ts_rb: f64,
    /// `ts_rb - ts_nrb`; negative means blurring helped.
    pub delta: f64,
}

impl PairedTs {
    pub fn new(participant_id: impl Into<String>, ts_nrb: f64, ts_rb: f64) -> Self {
        Self {
            participant_id: participant_id.into(),
            ts_nrb,
            ts_rb,
            delta: ts_rb - ts_nrb,
        }
    }
}

/// Participants split by the sign of ΔTS.
///
/// The "declined" group is ΔTS < 0. The non-declined group pools the
/// unchanged and increased participants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaPartition {
    pub declined: Vec<PairedTs>,
    pub unchanged: Vec<PairedTs>,
    pub increased: Vec<PairedTs>,
    pub mean_delta_declined: Option<f64>,
    pub mean_delta_non_declined: Option<f64>,
    pub mean_nrb_declined: Option<f64>,
    pub mean_nrb_non_declined: Option<f64>,
}

impl DeltaPartition {
    pub fn counts(&self) -> (usize, usize, usize) {
        (
            self.declined.len(),
            self.unchanged.len(),
            self.increased.len(),
        )
    }
}

pub fn partition_delta(pairs: &[PairedTs]) -> Result<DeltaPartition, AnalyticsError> {
    if pairs.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    let mut declined = Vec::new();
    let mut unchanged = Vec::new();
    let mut increased = Vec::new();
    for p in pairs {
        if !p.delta.is_finite() {
            return Err(AnalyticsError::NonFinite);
        }
        if p.delta < 0.0 {
            declined.push(p.clone());
        } else if p.delta == 0.0 {
            unchanged.push(p.clone());
        } else {
            increased.push(p.clone());
        }
    }

    fn mean_of<'a>(
        group: impl Iterator<Item = &'a PairedTs>,
        f: impl Fn(&PairedTs) -> f64,
    ) -> Option<f64> {
        let (sum, n) = group.fold((0.0, 0usize), |(s, n), p| (s + f(p), n + 1));
        (n > 0).then(|| sum / n as f64)
    }

    let non_declined = || unchanged.iter().chain(increased.iter());
    Ok(DeltaPartition {
        mean_delta_declined: mean_of(declined.iter(), |p| p.delta),
        mean_delta_non_declined: mean_of(non_declined(), |p| p.delta),
        mean_nrb_declined: mean_of(declined.iter(), |p| p.ts_nrb),
        mean_nrb_non_declined: mean_of(non_declined(), |p| p.ts_nrb),
        declined,
        unchanged,
        increased,
    })
}
