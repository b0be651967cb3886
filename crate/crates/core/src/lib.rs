//! Rotation-blur comfort middleware.
//!
//! Controller input goes in, a per-frame Gaussian blur sigma comes out:
//!
//! - [`controller`]: yaw kinematics and the threshold/continuity gating
//!   state machine that drives blur strength.
//! - [`blur`]: normalized Gaussian kernels, separable full-frame blur and a
//!   direct 2D reference; [`image_io`] reads and writes PGM/PPM.
//! - [`trace`]: trace, sigma-series and session-event CSV formats and
//!   deterministic offline replay.
//! - [`analytics`]: SSQ scoring, pre-screening, descriptive statistics, the
//!   ΔTS partition, the Wilcoxon signed-rank test and 0-6 rating curves.
//! - [`cli`]: the `rotoblur` command line.

pub mod analytics;
pub mod blur;
pub mod cli;
pub mod config;
pub mod controller;
pub mod image_io;
pub mod trace;

pub use blur::{blur, blur_reference_2d, make_kernel, ImageBuffer, Kernel1D};
pub use controller::{
    estimate_kinematics, reset, step, BlurController, BlurFrameOutput, ControllerConfig,
    ControllerError, ControllerState, InputSample, KinematicState, Phase,
};
pub use trace::{parse_trace, replay, write_sigma_series, write_trace, SigmaSeries, Trace};
