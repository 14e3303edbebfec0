//! Discrete-time sparse spiking engine.
//!
//! X[n+1] = (1 - l)(C(X[n]) - S(X[n])) + Σ W S(X_j[n]) + H + external

mod limits;
mod network;
mod sparse;
mod topology;
mod trace;

pub use limits::{assert_topology_limits, LimitViolation};
pub use network::{step, Network, NetworkState, Stimulus};
pub use sparse::{Incoming, SparseWeights, SynapseMask};
pub use topology::{
    ClusterId, ClusterKind, ClusterSpec, Connection, ConnectionKind, ControlKind, ControlLine,
    ControlSignal, NetworkTopology, SecondDegreeConnection, Synapses,
};
pub use trace::TraceWriter;

use crate::error::{Error, Result};

pub const THRESHOLD: f32 = 1.0;

/// S(x): 1 iff x ≥ 1.
#[inline]
pub fn spike_fn(x: f32) -> u8 {
    (x >= THRESHOLD) as u8
}

/// C_a^b(x) = max(a, min(b, x)).
pub fn clamp(a: f32, b: f32, x: f32) -> Result<f32> {
    if a > b {
        return Err(Error::ClampBounds { lo: a, hi: b });
    }
    Ok(x.min(b).max(a))
}

/// Carried-over own potential of one neuron: (1 - l)(C(x) - S(x)).
#[inline]
pub(crate) fn carry(x: f32, keep: f32) -> f32 {
    let c = x.clamp(0.0, 1.0);
    keep * (c - spike_fn(x) as f32)
}
