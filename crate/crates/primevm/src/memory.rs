//! One-shot symbolic memory: Hebbian bind, anti-Hebbian unbind, default wiring.

use crate::attractors::{recall_with, RecallConfig, TrainedRegister};
use crate::pattern::Pattern;
use crate::substrate::{SparseWeights, SynapseMask};
use std::sync::Arc;

/// Half-intensity wiring from the whole source cluster onto one pattern.
#[derive(Clone, Debug)]
pub struct DefaultWiring {
    target: Pattern,
    weight: f32,
    target_mask: Vec<bool>,
}

impl DefaultWiring {
    pub fn target(&self) -> &Pattern {
        &self.target
    }

    pub fn weight(&self) -> f32 {
        self.weight
    }
}

#[derive(Clone, Debug)]
pub struct MemoryConnection {
    weights: Arc<SparseWeights>,
    nominal: f32,
    default: Option<DefaultWiring>,
    live: usize,
}

/// a = 0.2 / θ with θ = active_in · fanout / n_dst.
pub fn nominal_weight(active_in: usize, fanout: usize, n_dst: usize) -> f32 {
    let theta = active_in as f64 * fanout as f64 / n_dst as f64;
    (0.2 / theta) as f32
}

impl MemoryConnection {
    pub fn new(mask: Arc<SynapseMask>, nominal: f32) -> Self {
        MemoryConnection {
            weights: Arc::new(SparseWeights::zeros(mask)),
            nominal,
            default: None,
            live: 0,
        }
    }

    pub fn weights(&self) -> &SparseWeights {
        &self.weights
    }

    pub fn mask(&self) -> &Arc<SynapseMask> {
        self.weights.mask()
    }

    pub fn nominal(&self) -> f32 {
        self.nominal
    }

    pub fn default_wiring(&self) -> Option<&DefaultWiring> {
        self.default.as_ref()
    }

    pub fn live_bindings(&self) -> usize {
        self.live
    }

    /// Sets every masked synapse from `pre` onto `post` to the nominal weight.
    pub fn bind(&mut self, pre: &Pattern, post: &Pattern) -> usize {
        self.live += 1;
        let a = self.nominal;
        self.set_between(pre.active(), post.active(), a)
    }

    /// Zeroes every masked synapse from `pre` onto `post`.
    pub fn unbind(&mut self, pre: &Pattern, post: &Pattern) -> usize {
        self.live = self.live.saturating_sub(1);
        self.set_between(pre.active(), post.active(), 0.0)
    }

    /// Plasticity driven by spike lists; does not touch the live count.
    pub fn apply(&mut self, pre: &[u32], post: &[u32], bind: bool) -> usize {
        let v = if bind { self.nominal } else { 0.0 };
        self.set_between(pre, post, v)
    }

    fn set_between(&mut self, pre: &[u32], post: &[u32], v: f32) -> usize {
        if pre.is_empty() || post.is_empty() {
            return 0;
        }
        let n_dst = self.weights.n_dst();
        let mut post_mask = vec![false; n_dst];
        for &j in post {
            post_mask[j as usize] = true;
        }
        let w = Arc::make_mut(&mut self.weights);
        let mask = Arc::clone(w.mask());
        let targets = mask.targets();
        let values = w.values_mut();
        let mut touched = 0;
        for &i in pre {
            for k in mask.row_range(i as usize) {
                if post_mask[targets[k] as usize] {
                    values[k] = v;
                    touched += 1;
                }
            }
        }
        touched
    }

    /// Wires any source neuron onto `target` at half the nominal weight.
    pub fn install_default(&mut self, target: Pattern) {
        let target_mask = target.to_mask();
        self.default = Some(DefaultWiring {
            target,
            weight: self.nominal * 0.5,
            target_mask,
        });
    }

    /// out += drive from a source spike list, default wiring included.
    pub fn accumulate(&self, spikes: &[u32], out: &mut [f32]) {
        self.weights.scatter_add(spikes, out);
        if let Some(d) = &self.default {
            let mask = self.weights.mask();
            let targets = mask.targets();
            for &i in spikes {
                for k in mask.row_range(i as usize) {
                    let j = targets[k] as usize;
                    if d.target_mask[j] {
                        out[j] += d.weight;
                    }
                }
            }
        }
    }

    /// Effective weight of the default wiring on one synapse slot.
    pub fn default_weight_at(&self, slot: usize) -> f32 {
        match &self.default {
            Some(d) if d.target_mask[self.weights.mask().targets()[slot] as usize] => d.weight,
            _ => 0.0,
        }
    }
}

/// Drives `mem` with `input` spiking steadily and lets `out` settle.
pub fn recall_bound(
    mem: &MemoryConnection,
    input: &Pattern,
    out: &TrainedRegister,
    max_ticks: usize,
) -> Option<Pattern> {
    let mut drive = vec![0.0f32; out.size()];
    mem.accumulate(input.active(), &mut drive);
    let cfg = RecallConfig {
        max_ticks,
        ..RecallConfig::default()
    };
    recall_with(out, &drive, &cfg)
}

/// Capacity bound on live bindings; 0 when the numerator is not positive.
pub fn capacity_bound(c1: f64, c2: f64, gamma: f64, m: f64, s: f64, t: f64) -> u64 {
    let v = capacity_bound_real(c1, c2, gamma, m, s, t);
    if v <= 0.0 {
        0
    } else {
        v.floor() as u64
    }
}

/// Unfloored right-hand side of the capacity bound.
pub fn capacity_bound_real(c1: f64, c2: f64, gamma: f64, m: f64, s: f64, t: f64) -> f64 {
    let num = 1.0 - s * c1 - t * c1 * c2;
    if num <= 0.0 {
        return 0.0;
    }
    num / (gamma * c1 * c2) - m / c2 - 1.0 / c1
}
