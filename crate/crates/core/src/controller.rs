//! Rotation-blur gating controller.
//!
//! Turns per-frame controller yaw deltas into a Gaussian blur strength. The
//! controller estimates yaw velocity and acceleration with causal finite
//! differences, requires a run of consecutive frames whose acceleration
//! magnitude clears a threshold before blurring, and then shapes the output
//! sigma with an attack/release envelope so the screen never jumps between
//! sharp and blurred.
//!
//! Head-pose deltas are carried on [`InputSample`] but never read by the
//! estimator: physical head motion is not blurred.
//!
//! Everything here is a pure transition over explicit values. A
//! [`ControllerState`] can be cloned, replayed or moved across threads freely.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const MICROS_PER_SEC: f64 = 1_000_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("timestamp {t_us} us is not after previous sample at {prev_us} us")]
    NonMonotonicTime { t_us: i64, prev_us: i64 },
    #[error("non-finite input in field `{field}`")]
    NonFiniteInput { field: &'static str },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

/// One frame of input.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InputSample {
    /// Microseconds since session start.
    pub t_us: i64,
    pub ctrl_yaw_delta_deg: f64,
    /// Locked to zero by constrained locomotion; never used for blur.
    pub ctrl_pitch_delta_deg: f64,
    pub head_yaw_delta_deg: f64,
    pub head_pitch_delta_deg: f64,
    pub head_roll_delta_deg: f64,
}

impl InputSample {
    /// Sample with controller yaw only, head channels zero.
    pub fn yaw(t_us: i64, ctrl_yaw_delta_deg: f64) -> Self {
        Self {
            t_us,
            ctrl_yaw_delta_deg,
            ..Self::default()
        }
    }

    /// Builds a sample from raw mouse counts, converting with `deg_per_count`.
    pub fn from_counts(
        t_us: i64,
        yaw_counts: i32,
        pitch_counts: i32,
        config: &ControllerConfig,
    ) -> Self {
        Self {
            t_us,
            ctrl_yaw_delta_deg: f64::from(yaw_counts) * config.deg_per_count,
            ctrl_pitch_delta_deg: f64::from(pitch_counts) * config.deg_per_count,
            ..Self::default()
        }
    }

    fn check_finite(&self) -> Result<(), ControllerError> {
        let fields = [
            ("ctrl_yaw_delta_deg", self.ctrl_yaw_delta_deg),
            ("ctrl_pitch_delta_deg", self.ctrl_pitch_delta_deg),
            ("head_yaw_delta_deg", self.head_yaw_delta_deg),
            ("head_pitch_delta_deg", self.head_pitch_delta_deg),
            ("head_roll_delta_deg", self.head_roll_delta_deg),
        ];
        for (field, value) in fields {
            if !value.is_finite() {
                return Err(ControllerError::NonFiniteInput { field });
            }
        }
        Ok(())
    }
}

/// Tuning for the gating state machine.
///
/// Field names double as the keys of the config file read by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    /// Acceleration magnitude a frame needs to count as qualifying (deg/s²).
    pub a_min_deg_s2: f64,
    /// Consecutive qualifying frames before blur engages.
    pub activation_frames: u32,
    /// Sigma gain: pixels of blur per deg/s² of acceleration.
    pub gain_px_per_deg_s2: f64,
    pub sigma_max_px: f64,
    /// EMA factor for velocity and acceleration; 1 disables smoothing.
    pub ema_alpha: f64,
    pub attack_tau_s: f64,
    pub release_tau_s: f64,
    /// Below this yaw speed an active blur starts releasing.
    pub v_stop_deg_s: f64,
    /// Releasing sigma below this snaps back to idle.
    pub sigma_eps_px: f64,
    pub deg_per_count: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            a_min_deg_s2: 200.0,
            activation_frames: 5,
            gain_px_per_deg_s2: 0.01,
            sigma_max_px: 8.0,
            ema_alpha: 0.5,
            attack_tau_s: 0.05,
            release_tau_s: 0.3,
            v_stop_deg_s: 10.0,
            sigma_eps_px: 0.05,
            deg_per_count: 0.022,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControllerError> {
        let positive = [
            ("a_min_deg_s2", self.a_min_deg_s2),
            ("gain_px_per_deg_s2", self.gain_px_per_deg_s2),
            ("sigma_max_px", self.sigma_max_px),
            ("ema_alpha", self.ema_alpha),
            ("attack_tau_s", self.attack_tau_s),
            ("release_tau_s", self.release_tau_s),
            ("v_stop_deg_s", self.v_stop_deg_s),
            ("sigma_eps_px", self.sigma_eps_px),
            ("deg_per_count", self.deg_per_count),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ControllerError::InvalidConfig(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if self.ema_alpha > 1.0 {
            return Err(ControllerError::InvalidConfig(format!(
                "ema_alpha must be in (0, 1], got {}",
                self.ema_alpha
            )));
        }
        if self.activation_frames < 1 {
            return Err(ControllerError::InvalidConfig(
                "activation_frames must be at least 1".into(),
            ));
        }
        if self.sigma_eps_px >= self.sigma_max_px {
            return Err(ControllerError::InvalidConfig(format!(
                "sigma_eps_px ({}) must be below sigma_max_px ({})",
                self.sigma_eps_px, self.sigma_max_px
            )));
        }
        Ok(())
    }
}

/// Smoothed yaw kinematics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KinematicState {
    pub v_deg_s: f64,
    pub a_deg_s2: f64,
    pub last_t_us: i64,
    /// Whether any sample has been folded in yet.
    pub primed: bool,
}

/// Folds one yaw delta into the kinematic estimate.
///
/// Raw velocity is `delta / dt`; raw acceleration is the change in smoothed
/// velocity over `dt`. Both are exponentially smoothed with `ema_alpha`, so
/// with `ema_alpha = 1` the result is the plain backward finite difference.
///
/// A zeroed state sits at the session origin (`t = 0`). The very first sample
/// may itself be stamped `t = 0`; it carries no elapsed time and leaves the
/// estimate at rest.
pub fn estimate_kinematics(
    prev: &KinematicState,
    yaw_delta_deg: f64,
    t_us: i64,
    config: &ControllerConfig,
) -> Result<KinematicState, ControllerError> {
    if !yaw_delta_deg.is_finite() {
        return Err(ControllerError::NonFiniteInput {
            field: "ctrl_yaw_delta_deg",
        });
    }
    let first_at_origin = !prev.primed && t_us == prev.last_t_us;
    if t_us <= prev.last_t_us && !first_at_origin {
        return Err(ControllerError::NonMonotonicTime {
            t_us,
            prev_us: prev.last_t_us,
        });
    }
    if first_at_origin {
        return Ok(KinematicState {
            last_t_us: t_us,
            primed: true,
            ..*prev
        });
    }

    let dt = (t_us - prev.last_t_us) as f64 / MICROS_PER_SEC;
    let alpha = config.ema_alpha;

    let v_raw = yaw_delta_deg / dt;
    let v = alpha * v_raw + (1.0 - alpha) * prev.v_deg_s;
    let a_raw = (v - prev.v_deg_s) / dt;
    let a = alpha * a_raw + (1.0 - alpha) * prev.a_deg_s2;

    Ok(KinematicState {
        v_deg_s: v,
        a_deg_s2: a,
        last_t_us: t_us,
        primed: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Idle,
    /// `count` consecutive qualifying frames seen so far.
    Pending {
        count: u32,
    },
    Active,
    Releasing,
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Idle => "Idle",
            Phase::Pending { .. } => "Pending",
            Phase::Active => "Active",
            Phase::Releasing => "Releasing",
        }
    }

    pub fn pending_count(&self) -> u32 {
        match self {
            Phase::Pending { count } => *count,
            _ => 0,
        }
    }

    /// Blur may be nonzero only in these phases.
    pub fn is_engaged(&self) -> bool {
        matches!(self, Phase::Active | Phase::Releasing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    pub phase: Phase,
    pub sigma_px: f64,
    pub kin: KinematicState,
}

/// What the controller emits for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlurFrameOutput {
    pub t_us: i64,
    pub sigma_px: f64,
    pub phase: Phase,
    pub v_deg_s: f64,
    pub a_deg_s2: f64,
}

/// Fresh controller state: idle, unblurred, at rest.
pub fn reset(config: &ControllerConfig) -> Result<ControllerState, ControllerError> {
    config.validate()?;
    Ok(ControllerState {
        phase: Phase::Idle,
        sigma_px: 0.0,
        kin: KinematicState::default(),
    })
}

/// Advances the controller by one frame.
///
/// A frame qualifies when the smoothed acceleration magnitude reaches
/// `a_min_deg_s2`. `activation_frames` consecutive qualifying frames move the
/// controller from idle to active; any non-qualifying frame before that drops
/// it back to idle. While active the sigma target is `gain * |a|` clamped to
/// `sigma_max_px`, followed through a first-order envelope. Once yaw speed
/// falls under `v_stop_deg_s` the target becomes zero and the controller
/// releases until sigma drops below `sigma_eps_px`.
pub fn step(
    state: &ControllerState,
    sample: &InputSample,
    config: &ControllerConfig,
) -> Result<(ControllerState, BlurFrameOutput), ControllerError> {
    sample.check_finite()?;
    let kin = estimate_kinematics(&state.kin, sample.ctrl_yaw_delta_deg, sample.t_us, config)?;
    let dt = (kin.last_t_us - state.kin.last_t_us) as f64 / MICROS_PER_SEC;

    let qualifying = kin.a_deg_s2.abs() >= config.a_min_deg_s2;
    let moving = kin.v_deg_s.abs() >= config.v_stop_deg_s;

    let mut phase = match state.phase {
        Phase::Idle | Phase::Pending { .. } if !qualifying => Phase::Idle,
        Phase::Idle | Phase::Pending { .. } => {
            let count = state.phase.pending_count() + 1;
            if count >= config.activation_frames {
                Phase::Active
            } else {
                Phase::Pending { count }
            }
        }
        Phase::Active => Phase::Active,
        // Renewed turning while the blur is still fading picks it back up.
        Phase::Releasing if qualifying && moving => Phase::Active,
        Phase::Releasing => Phase::Releasing,
    };
    if phase == Phase::Active && !moving {
        phase = Phase::Releasing;
    }

    let sigma_px = match phase {
        Phase::Idle | Phase::Pending { .. } => 0.0,
        Phase::Active => {
            let target = (config.gain_px_per_deg_s2 * kin.a_deg_s2.abs()).min(config.sigma_max_px);
            follow_envelope(state.sigma_px, target, dt, config)
        }
        Phase::Releasing => {
            let sigma = follow_envelope(state.sigma_px, 0.0, dt, config);
            if sigma < config.sigma_eps_px {
                phase = Phase::Idle;
                0.0
            } else {
                sigma
            }
        }
    };

    let next = ControllerState {
        phase,
        sigma_px,
        kin,
    };
    let out = BlurFrameOutput {
        t_us: sample.t_us,
        sigma_px,
        phase,
        v_deg_s: kin.v_deg_s,
        a_deg_s2: kin.a_deg_s2,
    };
    Ok((next, out))
}

fn follow_envelope(current: f64, target: f64, dt: f64, config: &ControllerConfig) -> f64 {
    let tau = if target > current {
        config.attack_tau_s
    } else {
        config.release_tau_s
    };
    let next = current + (target - current) * (1.0 - (-dt / tau).exp());
    next.clamp(0.0, config.sigma_max_px)
}

/// Owning wrapper for callers that drive the controller frame by frame.
#[derive(Debug, Clone)]
pub struct BlurController {
    config: ControllerConfig,
    state: ControllerState,
}

impl BlurController {
    pub fn new(config: ControllerConfig) -> Result<Self, ControllerError> {
        let state = reset(&config)?;
        Ok(Self { config, state })
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn state(&self) -> &ControllerState {
        &self.state
    }

    pub fn push(&mut self, sample: &InputSample) -> Result<BlurFrameOutput, ControllerError> {
        let (next, out) = step(&self.state, sample, &self.config)?;
        self.state = next;
        Ok(out)
    }

    pub fn reset(&mut self) {
        self.state = reset(&self.config).expect("config validated at construction");
    }
}
