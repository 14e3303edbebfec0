//! The symbolic machine: sixteen registers in a switch box, the code,
//! test, alloc, cons and hash circuitry, and microinstruction sequences.
//!
//! Two backends share one [`MicroProgram`]: [`FunctionalMachine`] keeps
//! registers as symbol slots and memories as maps, [`SpikingMachine`]
//! simulates every cluster.

mod functional;
mod spiking;

pub use functional::FunctionalMachine;
pub use spiking::{Core, SpikingMachine};

use crate::assembler::{Opcode, Reg};
use crate::config::MachineConfig;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

pub const FALSE: &str = "false";
pub const TRUE: &str = "true";
pub const NONDIGIT: &str = "nondigit";
pub const IS_DIGIT: &str = "is-digit";
pub const ADD_MOD_10: &str = "add-mod-10";
pub const ADD_CARRY: &str = "add-carry";

pub fn digit(d: u32) -> String {
    d.to_string()
}

pub fn pair(a: u32, b: u32) -> String {
    format!("pair-{a}-{b}")
}

pub fn free_symbol(k: usize) -> String {
    format!("free-{k}")
}

/// Every register-space symbol: digits, the non-digit marker, digit pairs,
/// booleans, table names, the free pool and the code-line pool.
pub fn symbol_names(cfg: &MachineConfig) -> Vec<String> {
    let mut v: Vec<String> = (0..10).map(digit).collect();
    v.push(NONDIGIT.into());
    for a in 0..10 {
        for b in 0..10 {
            v.push(pair(a, b));
        }
    }
    v.extend([TRUE, FALSE, IS_DIGIT, ADD_MOD_10, ADD_CARRY].map(String::from));
    v.extend((0..cfg.free_symbols).map(free_symbol));
    v.extend((0..cfg.code_symbols).map(crate::assembler::code_symbol));
    v
}

/// Hash-table associations loaded before any program runs: (table, key, value).
pub fn prelude_bindings() -> Vec<(String, String, String)> {
    let mut v = Vec::new();
    for a in 0..10 {
        for b in 0..10 {
            v.push((digit(a), digit(b), pair(a, b)));
        }
    }
    for d in 0..10 {
        v.push((IS_DIGIT.into(), digit(d), TRUE.into()));
    }
    for a in 0..10 {
        for b in 0..10 {
            v.push((ADD_MOD_10.into(), pair(a, b), digit((a + b) % 10)));
        }
    }
    for a in 0..10 {
        for b in 0..10 {
            let c = if a + b >= 10 { TRUE } else { FALSE };
            v.push((ADD_CARRY.into(), pair(a, b), c.into()));
        }
    }
    v
}

/// Links (symbol, next) produced by deallocating the free pool one symbol
/// at a time starting from alloc = false; returns them with the final head.
pub fn free_list(cfg: &MachineConfig) -> (Vec<(String, String)>, String) {
    let mut head = FALSE.to_string();
    let mut links = Vec::new();
    for k in 0..cfg.free_symbols {
        let f = free_symbol(k);
        links.push((f.clone(), head));
        head = f;
    }
    (links, head)
}

/// Input characters to channel symbols: digits map to themselves, anything
/// else to the non-digit marker; one marker terminates the input.
pub fn encode_input(s: &str) -> Vec<String> {
    let mut v: Vec<String> = s
        .chars()
        .map(|c| match c.to_digit(10) {
            Some(d) => digit(d),
            None => NONDIGIT.to_string(),
        })
        .collect();
    v.push(NONDIGIT.to_string());
    v
}

/// Output symbols to characters; the non-digit marker prints as ':'.
pub fn decode_output(symbols: &[String]) -> Result<String> {
    symbols
        .iter()
        .map(|s| match s.as_str() {
            NONDIGIT => Ok(':'),
            d if d.len() == 1 && d.as_bytes()[0].is_ascii_digit() => Ok(d.as_bytes()[0] as char),
            other => Err(Error::Machine(format!("symbol `{other}` has no character"))),
        })
        .collect()
}

/// Clusters the microinstruction neurons open by silencing their gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    AllocC,
    ConsC,
    Hash,
    CodeC,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::AllocC, Gate::ConsC, Gate::Hash, Gate::CodeC];

    pub fn cluster_name(self) -> &'static str {
        match self {
            Gate::AllocC => "alloc-c",
            Gate::ConsC => "cons-c",
            Gate::Hash => "hash",
            Gate::CodeC => "code-c",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plasticity {
    Bind,
    Unbind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MicroOp {
    /// Inhibit these registers.
    Clear(Vec<Reg>),
    /// Release the relays from `src` to `dst`.
    Open { src: Reg, dst: Reg },
    /// Release a gated cluster, optionally flagging its memory for plasticity.
    Gate(Gate, Option<Plasticity>),
    Read,
    Write,
    Exit,
    Idle,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MicroStep {
    pub op: MicroOp,
    pub ticks: usize,
}

/// One microinstruction sequence per opcode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MicroProgram {
    pub sequences: BTreeMap<Opcode, Vec<MicroStep>>,
}

fn st(op: MicroOp, ticks: usize) -> MicroStep {
    MicroStep { op, ticks }
}

impl MicroProgram {
    pub fn new(cfg: &MachineConfig) -> Self {
        let sequences = Opcode::all().into_iter().map(|o| (o, Self::sequence(cfg, o))).collect();
        MicroProgram { sequences }
    }

    fn transfer(cfg: &MachineConfig, src: Reg, dst: Reg) -> Vec<MicroStep> {
        vec![st(MicroOp::Clear(vec![dst]), cfg.t_clear), st(MicroOp::Open { src, dst }, cfg.t_open)]
    }

    fn sequence(cfg: &MachineConfig, op: Opcode) -> Vec<MicroStep> {
        if op == Opcode::Exit {
            return vec![st(MicroOp::Exit, 1)];
        }
        let recall = |gate, clear: Vec<Reg>| {
            vec![st(MicroOp::Clear(clear), cfg.t_clear), st(MicroOp::Gate(gate, None), cfg.t_recall)]
        };
        // The gate is opened a few ticks ahead so the gated cluster fires
        // while the plasticity flag is raised.
        let plastic = |gate, p| {
            vec![
                st(MicroOp::Gate(gate, None), 3),
                st(MicroOp::Gate(gate, Some(p)), cfg.t_bind),
            ]
        };
        let mut v = Self::transfer(cfg, Reg::Code2, Reg::Code);
        v.extend(match op {
            Opcode::AllocRecall => recall(Gate::AllocC, vec![Reg::Alloc2]),
            Opcode::AllocBind => plastic(Gate::AllocC, Plasticity::Bind),
            Opcode::AllocUnbind => plastic(Gate::AllocC, Plasticity::Unbind),
            Opcode::ConsRecall => recall(Gate::ConsC, vec![Reg::Car, Reg::Cdr]),
            Opcode::ConsBind => plastic(Gate::ConsC, Plasticity::Bind),
            Opcode::ConsUnbind => plastic(Gate::ConsC, Plasticity::Unbind),
            Opcode::TableRecall => recall(Gate::Hash, vec![Reg::Value]),
            Opcode::TableBind => plastic(Gate::Hash, Plasticity::Bind),
            Opcode::TableUnbind => plastic(Gate::Hash, Plasticity::Unbind),
            Opcode::Read => vec![st(MicroOp::Clear(vec![Reg::Reserved]), cfg.t_clear), st(MicroOp::Read, cfg.t_io)],
            Opcode::Write => vec![st(MicroOp::Write, 1)],
            Opcode::Nop => vec![st(MicroOp::Idle, 1)],
            Opcode::Mov(a, b) => Self::transfer(cfg, a, b),
            Opcode::Exit => unreachable!("handled above"),
        });
        v.push(st(MicroOp::Clear(vec![Reg::Code2, Reg::Arg]), cfg.t_clear));
        v
    }

    pub fn get(&self, op: Opcode) -> Result<&[MicroStep]> {
        self.sequences
            .get(&op)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::Machine(format!("no microinstruction sequence for {op}")))
    }

    /// Dwell ticks of one sequence.
    pub fn ticks(&self, op: Opcode) -> Result<u64> {
        Ok(self.get(op)?.iter().map(|s| s.ticks as u64).sum())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunResult {
    pub output: Vec<String>,
    pub cycles: u64,
    pub histogram: BTreeMap<String, u64>,
    /// One line per executed instruction when tracing is on.
    pub trace: Vec<String>,
}

impl RunResult {
    pub fn text(&self) -> Result<String> {
        decode_output(&self.output)
    }
}
