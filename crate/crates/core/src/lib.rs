//! Battery-assisted quantum gates.

pub mod battery;
pub mod channel;
pub mod cli;
pub mod error;
pub mod gates;
pub mod numerics;
pub mod qudit;
pub mod special;
pub mod spectral;
pub mod variational;

pub use error::{Error, Result};
