//! Wilcoxon signed-rank test for paired samples.
//!
//! Zero differences are dropped before ranking. Tied magnitudes share the
//! average of their ranks. Up to [`EXACT_MAX_N`] nonzero pairs the two-sided
//! p-value comes from the exact null distribution of W+ over all 2^n sign
//! assignments of the observed ranks, so ties are handled exactly. Beyond
//! that a normal approximation with tie-corrected variance and a 0.5
//! continuity correction is used.
//!
//! Two-sided p doubles the smaller tail and is capped at 1.

use libm::erfc;
use serde::Serialize;

use super::{AnalyticsError, PairedTs};

pub const EXACT_MAX_N: usize = 20;

/// Relative tolerance under which two magnitudes count as tied.
const TIE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// Sum of ranks of positive differences.
    pub w_plus: f64,
    /// Pairs remaining after zero differences are dropped.
    pub n_eff: usize,
    pub p_two_sided: f64,
    pub method: WilcoxonMethod,
}

/// Tests ΔTS = TS_RB − TS_NRB against a zero median.
pub fn wilcoxon_signed_rank(pairs: &[PairedTs]) -> Result<WilcoxonResult, AnalyticsError> {
    let deltas: Vec<f64> = pairs.iter().map(|p| p.delta).collect();
    signed_rank_test(&deltas, None)
}

/// Signed-rank test on raw differences. `method = None` picks exact for
/// `n_eff <= 20`.
pub fn signed_rank_test(
    deltas: &[f64],
    method: Option<WilcoxonMethod>,
) -> Result<WilcoxonResult, AnalyticsError> {
    if deltas.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    if deltas.iter().any(|d| !d.is_finite()) {
        return Err(AnalyticsError::NonFinite);
    }
    let nonzero: Vec<f64> = deltas.iter().copied().filter(|&d| d != 0.0).collect();
    if nonzero.is_empty() {
        return Err(AnalyticsError::AllZeroDifferences);
    }
    let n = nonzero.len();
    let ranked = doubled_ranks(&nonzero);
    let w2_plus: u64 = ranked.iter().filter(|r| r.positive).map(|r| r.rank2).sum();
    let w_plus = w2_plus as f64 / 2.0;

    let method = method.unwrap_or(if n <= EXACT_MAX_N {
        WilcoxonMethod::Exact
    } else {
        WilcoxonMethod::NormalApprox
    });
    let p_two_sided = match method {
        WilcoxonMethod::Exact => exact_p(&ranked, w2_plus),
        WilcoxonMethod::NormalApprox => normal_p(&ranked, w_plus),
    };

    Ok(WilcoxonResult {
        w_plus,
        n_eff: n,
        p_two_sided,
        method,
    })
}

#[derive(Debug, Clone, Copy)]
struct Ranked {
    /// Twice the (average) rank, always an integer.
    rank2: u64,
    positive: bool,
    /// Size of the tie group this rank belongs to.
    tie: usize,
}

fn doubled_ranks(nonzero: &[f64]) -> Vec<Ranked> {
    let mut order: Vec<usize> = (0..nonzero.len()).collect();
    order.sort_by(|&a, &b| nonzero[a].abs().total_cmp(&nonzero[b].abs()));

    let mut out = Vec::with_capacity(nonzero.len());
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() {
            let prev = nonzero[order[end - 1]].abs();
            let cur = nonzero[order[end]].abs();
            if cur - prev > TIE_RTOL * cur.max(1.0) {
                break;
            }
            end += 1;
        }
        // 1-based positions start+1 ..= end average to (start + 1 + end) / 2.
        let rank2 = (start + 1 + end) as u64;
        for &idx in &order[start..end] {
            out.push(Ranked {
                rank2,
                positive: nonzero[idx] > 0.0,
                tie: end - start,
            });
        }
        start = end;
    }
    out
}

/// Null distribution of doubled W+ by dynamic programming over ranks.
fn exact_p(ranked: &[Ranked], w2_obs: u64) -> f64 {
    let total: u64 = ranked.iter().map(|r| r.rank2).sum();
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for r in ranked {
        let step = r.rank2 as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0 {
                counts[s + step] += counts[s];
            }
        }
        reach += step;
    }
    let obs = w2_obs as usize;
    let lower: u64 = counts[..=obs].iter().sum();
    let upper: u64 = counts[obs..].iter().sum();
    let tail = lower.min(upper);
    let outcomes = (1u64 << ranked.len()) as f64;
    (2.0 * tail as f64 / outcomes).min(1.0)
}

fn normal_p(ranked: &[Ranked], w_plus: f64) -> f64 {
    let n = ranked.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    // Each tie group of size t contributes (t^3 - t) / 48, counted once.
    let tie_term: f64 = ranked
        .iter()
        .filter(|r| r.tie > 1)
        .map(|r| {
            let t = r.tie as f64;
            (t * t * t - t) / 48.0 / t
        })
        .sum();
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}
