//! Direction-of-arrival estimation and tracking for four-microphone
//! binaural hearing-aid arrays.
//!
//! The pipeline estimates the azimuth of a single sound source from the
//! inter-microphone phase differences of three microphone pairs (left
//! monaural, right monaural, binaural):
//!
//! 1. [`stft`] converts the four input channels to short-time spectra.
//! 2. [`cimp`] tracks per-bin circular statistics of the instantaneous
//!    phase differences: circular mean, mapped mean resultant length and
//!    circular dispersion. The mapped resultant length separates
//!    localized sources from diffuse noise even at low frequencies.
//! 3. [`tdoa`] turns the per-bin mean phases into one time delay per
//!    pair and frame via a dispersion-weighted linear fit through the
//!    origin, with a closed-form delay variance.
//! 4. [`fusion`] maps the delays to local azimuths, lifts them onto the
//!    full circle using the binaural sign and the front/back information
//!    of the closer-ear pair, tests the branches for a common mean and
//!    combines them.
//! 5. [`tracker`] smooths the fused azimuth with a wrapped Kalman filter
//!    whose measurement variance is driven by the fused dispersion.
//!
//! [`scenegen`] provides a synthetic free-field scene renderer with
//! known ground truth so the whole chain can be verified without
//! recorded data; [`pipeline`] wires the stages together and [`metrics`]
//! scores trajectories against ground truth.
//!
//! See the `examples/` directory for runnable end-to-end demonstrations
//! and the `doatrack` binary for the command-line interface.

// Validation code uses `!(x > 0.0)` on purpose: the negated form also
// rejects NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angle;
pub mod cimp;
pub mod config;
pub mod error;
pub mod fusion;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod scenegen;
pub mod stft;
pub mod tdoa;
pub mod tracker;

pub use cimp::{ArrayGeometry, ChannelMap, ImpdStats, PairId};
pub use config::RunConfig;
pub use error::Error;
pub use fusion::{FusedDoa, FusionMode, LocalDoa};
pub use pipeline::{Pipeline, TrajectoryRecord};
pub use scenegen::{RenderedScene, SceneSpec};
pub use stft::{AudioBlock, FrameSpectrum, StftConfig};
pub use tdoa::TdoaEstimate;
pub use tracker::WrappedKalman;

pub type Result<T> = std::result::Result<T, Error>;
