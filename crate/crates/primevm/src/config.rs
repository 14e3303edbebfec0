//! Plain-text key-value configuration for geometry, timing and runs.

use crate::attractors::{DEFAULT_ALPHA, DEFAULT_EXCITE};
use crate::error::{Error, Result};
use crate::switchbox::Timing;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Register and opcode geometry plus the constants of the special circuitry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MachineConfig {
    pub register_size: usize,
    pub register_active: usize,
    pub kappa: usize,
    pub opcode_size: usize,
    pub opcode_active: usize,
    pub opcode_kappa: usize,
    pub hash_size: usize,
    /// Expected active hash neurons for a (table, key) pair.
    pub hash_active: usize,
    pub alpha: f32,
    pub excite: f32,
    pub panel_leak: f32,
    pub arity: usize,
    pub free_symbols: usize,
    pub code_symbols: usize,
    pub t_clear: usize,
    pub t_open: usize,
    /// Ticks a memory or hash gate stays open for a recall.
    pub t_recall: usize,
    /// Ticks a gate stays open before and during a bind or unbind.
    pub t_bind: usize,
    /// Ticks the host holds a read symbol on the reserved register.
    pub t_io: usize,
    pub seed: u64,
}

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig {
            register_size: 5000,
            register_active: 20,
            kappa: 1500,
            opcode_size: 2000,
            opcode_active: 20,
            opcode_kappa: 600,
            hash_size: 10000,
            hash_active: 20,
            alpha: DEFAULT_ALPHA,
            excite: DEFAULT_EXCITE,
            panel_leak: 0.5,
            arity: 2,
            free_symbols: 120,
            code_symbols: 160,
            t_clear: 12,
            t_open: 16,
            t_recall: 30,
            t_bind: 6,
            t_io: 4,
            seed: 1,
        }
    }
}

impl MachineConfig {
    pub fn timing(&self) -> Timing {
        Timing {
            t_clear: self.t_clear,
            t_open: self.t_open,
        }
    }

    /// Register coverage c.
    pub fn coverage(&self) -> f64 {
        self.register_active as f64 / self.register_size as f64
    }

    /// The coverage handed to the second-degree builder: floor(1/c) branches
    /// per hash neuron make a register-coverage pair light about
    /// `hash_active` of them.
    pub fn hash_branch_coverage(&self) -> f64 {
        let c = self.coverage();
        c * c * self.hash_size as f64 / self.hash_active as f64
    }

    /// Expected open incoming synapses per active output neuron.
    pub fn theta(&self) -> f64 {
        self.register_active as f64 * self.kappa as f64 / self.register_size as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.register_active < 2 || self.register_active >= self.register_size {
            return bad("register_active must lie in [2, register_size)");
        }
        if self.opcode_active < 2 || self.opcode_active >= self.opcode_size {
            return bad("opcode_active must lie in [2, opcode_size)");
        }
        if self.kappa == 0 || self.kappa > self.register_size || self.opcode_kappa == 0 || self.opcode_kappa > self.opcode_size {
            return bad("fan-out must lie in [1, cluster size]");
        }
        if self.hash_active == 0 || self.hash_active >= self.hash_size {
            return bad("hash_active must lie in [1, hash_size)");
        }
        if !(self.alpha > 0.0) || self.excite < 1.0 {
            return bad("need alpha > 0 and excite >= 1");
        }
        if !(self.panel_leak > 0.0 && self.panel_leak <= 1.0) {
            return bad("panel_leak must lie in (0, 1]");
        }
        if self.arity < 2 {
            return bad("arity must be at least 2");
        }
        if [self.t_clear, self.t_open, self.t_recall, self.t_bind, self.t_io].contains(&0) {
            return bad("timing constants must be positive");
        }
        Ok(())
    }

    /// A short stable key for caching trained artifacts.
    pub fn fingerprint(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Spiking,
    #[default]
    Functional,
    Both,
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spiking" => Ok(Backend::Spiking),
            "functional" => Ok(Backend::Functional),
            "both" => Ok(Backend::Both),
            _ => Err(Error::Config(format!("unknown backend `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub machine: MachineConfig,
    pub backend: Backend,
    pub max_cycles: Option<u64>,
    pub trace: bool,
    /// Full spike index lists in the trace.
    pub trace_spikes: bool,
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.machine.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_text_fills_defaults() {
        let cfg = RunConfig::from_text("backend = \"both\"\n[machine]\nseed = 9\nt_open = 20\n").unwrap();
        assert_eq!(cfg.backend, Backend::Both);
        assert_eq!(cfg.machine.seed, 9);
        assert_eq!(cfg.machine.t_open, 20);
        assert_eq!(cfg.machine.register_size, 5000);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_text("[machine]\nsize = 3\n").is_err());
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }
}
