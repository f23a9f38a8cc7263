//! File formats, equirectangular resampling, visualisation and the
//! command-line driver for [`icocnn_core`].
//!
//! * [`format`]: `.ten` tensors, sphere tensor files, mesh dumps.
//! * [`equirect`]: sampling equirectangular images onto the mesh and
//!   rendering sphere signals back.
//! * [`imageio`]: 8-bit PGM/PPM.
//! * [`unfold`]: the five components side by side, with a label palette.
//! * [`weights`]: weight directories and perspective kernel import.
//! * [`cache`]: `ICO_CACHE_DIR` cache of blend weights and mesh dumps.
//! * [`check`]: grid-versus-oracle comparison.
//! * [`cli`]: the `icocnn` command.

pub mod cache;
pub mod check;
pub mod cli;
pub mod equirect;
mod error;
pub mod format;
pub mod imageio;
pub mod unfold;
pub mod weights;

pub use error::{Error, Result};
pub use icocnn_core as core;
