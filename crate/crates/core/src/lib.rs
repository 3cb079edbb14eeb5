//! Data-driven barrier certificates with PAC safety guarantees for
//! discrete-time polynomial systems driven by i.i.d. disturbances.
//!
//! The pipeline: size the disturbance sample ([`bounds`]), solve a
//! collocation LP for a barrier candidate ([`certify`]), check the barrier
//! conditions over the continuous state space with interval branch-and-bound
//! ([`verify`]), and turn the verified certificate into a probabilistic
//! statement ([`guarantees`]).

pub mod benchmarks;
pub mod bounds;
pub mod certify;
pub mod error;
pub mod guarantees;
pub mod interval;
pub mod lp;
pub mod pipeline;
pub mod poly;
pub mod problem;
pub mod region;
pub mod rng;
pub mod stochastics;
pub mod verify;

pub use error::{Error, Result};

use sha2::{Digest, Sha256};

/// SHA-256 of the compact JSON encoding.
pub fn fingerprint<T: serde::Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("fingerprinted values serialize");
    hex::encode(Sha256::digest(&bytes))
}
