pub mod arith;
pub mod cache;
pub mod characters;
pub mod dedekind;
pub mod error;
pub mod galsums;
pub mod lfunc;
pub mod resonator;
pub mod search;
pub mod summation;
pub mod verify;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
