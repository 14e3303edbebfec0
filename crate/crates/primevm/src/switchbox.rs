//! Register switch box: registers joined by an outbound and an inbound
//! relay tree meeting at the root, every relay gated by an inhibit line.

use crate::attractors::{SymbolSpace, TrainedRegister};
use crate::error::{Error, Result};
use crate::substrate::{
    ClusterId, ClusterSpec, ConnectionKind, ControlSignal, Network, NetworkTopology, SparseWeights,
    Stimulus, Synapses,
};
use std::fmt::Write as _;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Timing {
    pub t_clear: usize,
    pub t_open: usize,
}

impl Default for Timing {
    fn default() -> Self {
        Timing {
            t_clear: 12,
            t_open: 12,
        }
    }
}

/// Relay trees and cluster ids of a switch box inside some topology.
#[derive(Clone, Debug)]
pub struct SwitchboxLayout {
    pub arity: usize,
    pub registers: Vec<(String, ClusterId)>,
    /// Outbound relays by tree node; node `i` of both trees shares its parent.
    pub o_relays: Vec<ClusterId>,
    pub i_relays: Vec<ClusterId>,
    parent: Vec<Option<usize>>,
    /// Tree leaf of each register.
    leaf: Vec<usize>,
}

impl SwitchboxLayout {
    pub fn register(&self, name: &str) -> Result<ClusterId> {
        self.registers
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, c)| c)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn register_index(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn relays(&self) -> impl Iterator<Item = ClusterId> + '_ {
        self.o_relays.iter().chain(&self.i_relays).copied()
    }

    fn path_nodes(&self, reg: usize) -> Vec<usize> {
        let mut v = vec![self.leaf[reg]];
        while let Some(p) = self.parent[*v.last().expect("non-empty")] {
            v.push(p);
        }
        v
    }

    /// Relays released for `src -> dst`: src's outbound path up to the root,
    /// then dst's inbound path down from the root.
    pub fn path(&self, src: usize, dst: usize) -> Vec<ClusterId> {
        let mut v: Vec<ClusterId> = self.path_nodes(src).iter().map(|&n| self.o_relays[n]).collect();
        let mut down: Vec<ClusterId> = self.path_nodes(dst).iter().map(|&n| self.i_relays[n]).collect();
        down.reverse();
        v.extend(down);
        v
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }
}

/// Groups `leaves` nodes under parents of `arity` children until one root.
fn build_tree(leaves: usize, arity: usize) -> Vec<Option<usize>> {
    let mut parent: Vec<Option<usize>> = vec![None; leaves];
    let mut level: Vec<usize> = (0..leaves).collect();
    while level.len() > 1 {
        let mut next = Vec::new();
        for chunk in level.chunks(arity) {
            let id = parent.len();
            parent.push(None);
            for &c in chunk {
                parent[c] = Some(id);
            }
            next.push(id);
        }
        level = next;
    }
    parent
}

/// Adds registers (with self connections), relay clusters and assignation
/// connections, all carrying the one shared weight set.
pub fn build_switchbox(
    topo: &mut NetworkTopology,
    weights: &Arc<SparseWeights>,
    register_names: &[&str],
    arity: usize,
) -> Result<SwitchboxLayout> {
    if register_names.len() < 2 {
        return Err(Error::Topology("a switch box needs at least two registers".into()));
    }
    if arity < 2 {
        return Err(Error::Topology("relay arity must be at least 2".into()));
    }
    let size = weights.n_src();
    let parent = build_tree(register_names.len(), arity);
    let mut registers = Vec::new();
    for name in register_names {
        let c = topo.add_cluster(ClusterSpec::symbol(name, size))?;
        topo.connect(c, c, ConnectionKind::SelfLoop, Synapses::Fixed(Arc::clone(weights)))?;
        registers.push((name.to_string(), c));
    }
    let mut o_relays = Vec::new();
    let mut i_relays = Vec::new();
    for n in 0..parent.len() {
        o_relays.push(topo.add_cluster(ClusterSpec::symbol(&format!("o{}", n + 1), size))?);
    }
    for n in 0..parent.len() {
        i_relays.push(topo.add_cluster(ClusterSpec::symbol(&format!("i{}", n + 1), size))?);
    }
    let assign = |topo: &mut NetworkTopology, s: ClusterId, d: ClusterId| -> Result<()> {
        topo.connect(s, d, ConnectionKind::Assignation, Synapses::Fixed(Arc::clone(weights)))
            .map(|_| ())
    };
    for (r, &(_, c)) in registers.iter().enumerate() {
        assign(topo, c, o_relays[r])?;
        assign(topo, i_relays[r], c)?;
    }
    let mut root = 0;
    for (n, p) in parent.iter().enumerate() {
        match p {
            Some(p) => {
                assign(topo, o_relays[n], o_relays[*p])?;
                assign(topo, i_relays[*p], i_relays[n])?;
            }
            None => root = n,
        }
    }
    assign(topo, o_relays[root], i_relays[root])?;
    Ok(SwitchboxLayout {
        arity,
        registers,
        o_relays,
        i_relays,
        parent,
        leaf: (0..register_names.len()).collect(),
    })
}

/// One stretch of ticks with extra inhibits and released relays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Phase {
    pub ticks: usize,
    pub inhibit: Vec<ClusterId>,
    pub release: Vec<ClusterId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ControlSchedule {
    pub phases: Vec<Phase>,
}

impl ControlSchedule {
    pub fn ticks(&self) -> usize {
        self.phases.iter().map(|p| p.ticks).sum()
    }

    /// `tick signal target` lines; relays not released are inhibited by default.
    pub fn to_text(&self, topo: &NetworkTopology) -> String {
        let mut s = String::new();
        let mut t = 0;
        for p in &self.phases {
            for &c in &p.inhibit {
                let _ = writeln!(s, "{t} inhibit {}", topo.name(c));
            }
            for &c in &p.release {
                let _ = writeln!(s, "{t} release {}", topo.name(c));
            }
            t += p.ticks;
        }
        let _ = writeln!(s, "{t} restore all");
        s
    }
}

pub fn transfer_schedule(layout: &SwitchboxLayout, src: usize, dst: usize, timing: &Timing) -> Result<ControlSchedule> {
    if src == dst {
        return Err(Error::Machine("transfer needs distinct registers".into()));
    }
    let dst_c = layout.registers[dst].1;
    Ok(ControlSchedule {
        phases: vec![
            Phase {
                ticks: timing.t_clear,
                inhibit: vec![dst_c],
                release: vec![],
            },
            Phase {
                ticks: timing.t_open,
                inhibit: vec![],
                release: layout.path(src, dst),
            },
        ],
    })
}

/// Standalone switch box driven by external control signals.
#[derive(Clone, Debug)]
pub struct Switchbox {
    net: Network,
    layout: SwitchboxLayout,
    space: Arc<SymbolSpace>,
    pub timing: Timing,
}

impl Switchbox {
    pub fn build(register: &TrainedRegister, names: &[&str], arity: usize, timing: Timing) -> Result<Self> {
        let mut topo = NetworkTopology::new();
        let layout = build_switchbox(&mut topo, register.weights(), names, arity)?;
        Ok(Switchbox {
            net: Network::new(topo),
            layout,
            space: Arc::clone(register.space()),
            timing,
        })
    }

    pub fn layout(&self) -> &SwitchboxLayout {
        &self.layout
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    fn controls(&self, phase: Option<&Phase>) -> Vec<ControlSignal> {
        let mut v: Vec<ControlSignal> = self
            .layout
            .relays()
            .filter(|c| phase.map_or(true, |p| !p.release.contains(c)))
            .map(ControlSignal::inhibit)
            .collect();
        if let Some(p) = phase {
            v.extend(p.inhibit.iter().copied().map(ControlSignal::inhibit));
        }
        v
    }

    /// Preloads `symbol` into a register and lets it settle.
    pub fn load(&mut self, reg: &str, symbol: &str) -> Result<()> {
        let c = self.layout.register(reg)?;
        let p = self.space.pattern(symbol)?.clone();
        self.net.preload(c, &p, 1.0);
        self.idle(2)
    }

    pub fn held(&self, reg: &str) -> Result<Option<String>> {
        let c = self.layout.register(reg)?;
        Ok(self
            .space
            .lookup(self.net.spikes(c))
            .map(|i| self.space.name(i).to_string()))
    }

    pub fn is_empty(&self, reg: &str) -> Result<bool> {
        let c = self.layout.register(reg)?;
        Ok(self.net.spikes(c).is_empty() && self.net.pending_spikes(c).is_empty())
    }

    pub fn idle(&mut self, ticks: usize) -> Result<()> {
        let ctl = self.controls(None);
        self.net.run(ticks, &Stimulus::new(), &ctl)
    }

    pub fn execute(&mut self, sched: &ControlSchedule) -> Result<()> {
        for p in &sched.phases {
            let ctl = self.controls(Some(p));
            self.net.run(p.ticks, &Stimulus::new(), &ctl)?;
        }
        self.idle(2)
    }

    pub fn transfer(&mut self, src: &str, dst: &str) -> Result<ControlSchedule> {
        let s = self.layout.register_index(src)?;
        let d = self.layout.register_index(dst)?;
        let sched = transfer_schedule(&self.layout, s, d, &self.timing)?;
        self.execute(&sched)?;
        Ok(sched)
    }

    pub fn clear(&mut self, reg: &str) -> Result<()> {
        let c = self.layout.register(reg)?;
        let sched = ControlSchedule {
            phases: vec![Phase {
                ticks: self.timing.t_clear,
                inhibit: vec![c],
                release: vec![],
            }],
        };
        self.execute(&sched)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_registers_make_seven_relays_per_tree() {
        let parent = build_tree(4, 2);
        assert_eq!(parent.len(), 7);
        assert_eq!(parent.iter().filter(|p| p.is_none()).count(), 1);
    }

    #[test]
    fn sixteen_registers_depth_five() {
        let parent = build_tree(16, 2);
        assert_eq!(parent.len(), 31);
        let mut n = 0;
        let mut d = 1;
        while let Some(p) = parent[n] {
            n = p;
            d += 1;
        }
        assert_eq!(d, 5);
    }
}
