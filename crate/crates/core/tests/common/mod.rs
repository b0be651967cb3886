#![allow(dead_code)]

use rand::Rng;
use rotoblur::controller::{BlurFrameOutput, ControllerConfig, InputSample, Phase};

pub const FRAME_US: i64 = 10_000;

/// Constant yaw rate from rest, first frame at 10 ms.
pub fn constant_turn(delta_deg: f64, frames: usize) -> Vec<InputSample> {
    (1..=frames)
        .map(|i| InputSample::yaw(i as i64 * FRAME_US, delta_deg))
        .collect()
}

/// Mixed random trace: idle stretches, aiming jitter and fast turns with
/// uneven frame spacing.
pub fn random_trace(rng: &mut impl Rng, frames: usize) -> Vec<InputSample> {
    let mut t = 0i64;
    let mut out = Vec::with_capacity(frames);
    let mut mode = 0u8;
    let mut turn = 0.0;
    for _ in 0..frames {
        if rng.gen_bool(0.05) {
            mode = rng.gen_range(0..3);
            turn = rng.gen_range(-3.0..3.0);
        }
        t += rng.gen_range(5_000..20_000);
        let yaw = match mode {
            0 => 0.0,
            1 => rng.gen_range(-0.05..0.05),
            _ => turn + rng.gen_range(-0.3..0.3),
        };
        out.push(InputSample {
            t_us: t,
            ctrl_yaw_delta_deg: yaw,
            ctrl_pitch_delta_deg: 0.0,
            head_yaw_delta_deg: rng.gen_range(-5.0..5.0),
            head_pitch_delta_deg: rng.gen_range(-5.0..5.0),
            head_roll_delta_deg: rng.gen_range(-2.0..2.0),
        });
    }
    out
}

/// Checks that every blurred frame is preceded by a full run of qualifying
/// frames with no idle frame since. Uses only the output log.
pub fn audit_gating(frames: &[BlurFrameOutput], config: &ControllerConfig) -> Result<(), String> {
    let mut run = 0u32;
    let mut armed = false;
    for (i, f) in frames.iter().enumerate() {
        if f.a_deg_s2.abs() >= config.a_min_deg_s2 {
            run += 1;
        } else {
            run = 0;
        }
        if run >= config.activation_frames {
            armed = true;
        }
        if f.phase == Phase::Idle {
            armed = false;
            run = 0;
        }
        if f.sigma_px > 0.0 && !armed {
            return Err(format!(
                "frame {i} blurred at {} px without a qualifying run",
                f.sigma_px
            ));
        }
    }
    Ok(())
}

/// Wilcoxon oracle: O(n^2) average ranks and enumeration of every sign
/// pattern. Returns `(w_plus, n_eff, smaller tail count, 2^n_eff)`.
pub fn brute_force_signed_rank(deltas: &[i64]) -> Option<(f64, usize, u64, u64)> {
    let nz: Vec<i64> = deltas.iter().copied().filter(|&d| d != 0).collect();
    let n = nz.len();
    if n == 0 {
        return None;
    }
    // Doubled average rank: 2 * (#smaller) + (#equal) + 1.
    let rank2: Vec<u64> = nz
        .iter()
        .map(|d| {
            let smaller = nz.iter().filter(|e| e.abs() < d.abs()).count() as u64;
            let equal = nz.iter().filter(|e| e.abs() == d.abs()).count() as u64;
            2 * smaller + equal + 1
        })
        .collect();
    let observed: u64 = nz
        .iter()
        .zip(&rank2)
        .filter(|(d, _)| **d > 0)
        .map(|(_, r)| r)
        .sum();
    let (mut lo, mut hi) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: u64 = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| rank2[i])
            .sum();
        if w <= observed {
            lo += 1;
        }
        if w >= observed {
            hi += 1;
        }
    }
    Some((observed as f64 / 2.0, n, lo.min(hi), 1 << n))
}

pub fn oracle_p(tail: u64, outcomes: u64) -> f64 {
    (2.0 * tail as f64 / outcomes as f64).min(1.0)
}
