pub mod bench;
pub mod codec;
pub mod error;
pub mod group;
pub mod ledger;
pub mod meter;
pub mod mulproof;
pub mod pedersen;
pub mod protocol;
pub mod rangeproof;
pub mod synth;
pub mod transcript;

pub use error::{Error, Result};
