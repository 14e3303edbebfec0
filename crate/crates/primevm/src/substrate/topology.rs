//! Clusters, typed connections and control lines.

use super::sparse::SparseWeights;
use crate::error::{Error, Result};
use crate::hashtable::SecondDegreeSpec;
use crate::memory::MemoryConnection;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClusterId(pub usize);

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterKind {
    Symbol,
    Panel,
}

#[derive(Clone, Debug)]
pub struct ClusterSpec {
    pub name: String,
    pub size: usize,
    pub kind: ClusterKind,
    pub leak: f32,
}

impl ClusterSpec {
    pub fn symbol(name: &str, size: usize) -> Self {
        ClusterSpec {
            name: name.to_string(),
            size,
            kind: ClusterKind::Symbol,
            leak: 0.0,
        }
    }

    pub fn panel(name: &str, size: usize, leak: f32) -> Self {
        ClusterSpec {
            name: name.to_string(),
            size,
            kind: ClusterKind::Panel,
            leak,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConnectionKind {
    SelfLoop,
    Assignation,
    Mapping,
    OneShotMemory,
    Recognizer,
    PerNeuron,
}

#[derive(Clone, Debug)]
pub enum Synapses {
    Fixed(Arc<SparseWeights>),
    Memory(MemoryConnection),
}

impl Synapses {
    pub fn accumulate(&self, spikes: &[u32], out: &mut [f32]) {
        match self {
            Synapses::Fixed(w) => w.scatter_add(spikes, out),
            Synapses::Memory(m) => m.accumulate(spikes, out),
        }
    }

    pub fn weights(&self) -> &SparseWeights {
        match self {
            Synapses::Fixed(w) => w,
            Synapses::Memory(m) => m.weights(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Connection {
    pub src: ClusterId,
    pub dst: ClusterId,
    pub kind: ConnectionKind,
    pub synapses: Synapses,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ControlKind {
    Inhibit,
    Bind,
    Unbind,
}

impl fmt::Display for ControlKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControlKind::Inhibit => "inhibit",
            ControlKind::Bind => "bind",
            ControlKind::Unbind => "unbind",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ControlSignal {
    pub kind: ControlKind,
    pub target: ClusterId,
}

impl ControlSignal {
    pub fn inhibit(target: ClusterId) -> Self {
        ControlSignal {
            kind: ControlKind::Inhibit,
            target,
        }
    }
    pub fn bind(target: ClusterId) -> Self {
        ControlSignal {
            kind: ControlKind::Bind,
            target,
        }
    }
    pub fn unbind(target: ClusterId) -> Self {
        ControlSignal {
            kind: ControlKind::Unbind,
            target,
        }
    }
}

/// A single panel neuron whose spike raises a control signal.
#[derive(Clone, Copy, Debug)]
pub struct ControlLine {
    pub src: ClusterId,
    pub neuron: u32,
    pub signal: ControlSignal,
}

/// Second-degree input: H_dst[k] = Σ_branches S(table)[i]·S(key)[j].
#[derive(Clone, Debug)]
pub struct SecondDegreeConnection {
    pub table: ClusterId,
    pub key: ClusterId,
    pub dst: ClusterId,
    pub spec: Arc<SecondDegreeSpec>,
}

#[derive(Clone, Debug, Default)]
pub struct NetworkTopology {
    pub clusters: Vec<ClusterSpec>,
    pub connections: Vec<Connection>,
    pub second_degree: Vec<SecondDegreeConnection>,
    pub control_lines: Vec<ControlLine>,
    names: HashMap<String, ClusterId>,
}

impl NetworkTopology {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_cluster(&mut self, spec: ClusterSpec) -> Result<ClusterId> {
        if !(0.0..=1.0).contains(&spec.leak) {
            return Err(Error::Topology(format!(
                "leak {} of `{}` outside [0, 1]",
                spec.leak, spec.name
            )));
        }
        if spec.size == 0 {
            return Err(Error::Topology(format!("cluster `{}` is empty", spec.name)));
        }
        if self.names.contains_key(&spec.name) {
            return Err(Error::Topology(format!("duplicate cluster `{}`", spec.name)));
        }
        let id = ClusterId(self.clusters.len());
        self.names.insert(spec.name.clone(), id);
        self.clusters.push(spec);
        Ok(id)
    }

    pub fn id(&self, name: &str) -> Result<ClusterId> {
        self.names
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownCluster(name.to_string()))
    }

    pub fn cluster(&self, id: ClusterId) -> &ClusterSpec {
        &self.clusters[id.0]
    }

    pub fn size(&self, id: ClusterId) -> usize {
        self.clusters[id.0].size
    }

    pub fn name(&self, id: ClusterId) -> &str {
        &self.clusters[id.0].name
    }

    fn check_id(&self, id: ClusterId) -> Result<()> {
        if id.0 < self.clusters.len() {
            Ok(())
        } else {
            Err(Error::UnknownControl(id.0))
        }
    }

    pub fn connect(
        &mut self,
        src: ClusterId,
        dst: ClusterId,
        kind: ConnectionKind,
        synapses: Synapses,
    ) -> Result<usize> {
        self.check_id(src)?;
        self.check_id(dst)?;
        let w = synapses.weights();
        if w.n_src() != self.size(src) || w.n_dst() != self.size(dst) {
            return Err(Error::Topology(format!(
                "connection {} -> {} is {}x{}, clusters are {}x{}",
                self.name(src),
                self.name(dst),
                w.n_src(),
                w.n_dst(),
                self.size(src),
                self.size(dst)
            )));
        }
        if kind == ConnectionKind::SelfLoop && src != dst {
            return Err(Error::Topology("self connection between distinct clusters".into()));
        }
        self.connections.push(Connection {
            src,
            dst,
            kind,
            synapses,
        });
        Ok(self.connections.len() - 1)
    }

    pub fn add_second_degree(
        &mut self,
        table: ClusterId,
        key: ClusterId,
        dst: ClusterId,
        spec: Arc<SecondDegreeSpec>,
    ) -> Result<()> {
        for c in [table, key, dst] {
            self.check_id(c)?;
        }
        if spec.table_size() != self.size(table)
            || spec.key_size() != self.size(key)
            || spec.hash_size() != self.size(dst)
        {
            return Err(Error::Topology("second-degree sizes do not match clusters".into()));
        }
        self.second_degree.push(SecondDegreeConnection {
            table,
            key,
            dst,
            spec,
        });
        Ok(())
    }

    pub fn add_control_line(&mut self, src: ClusterId, neuron: u32, signal: ControlSignal) -> Result<()> {
        self.check_id(src)?;
        self.check_id(signal.target)?;
        if neuron as usize >= self.size(src) {
            return Err(Error::Topology(format!(
                "control neuron {neuron} outside `{}`",
                self.name(src)
            )));
        }
        self.control_lines.push(ControlLine { src, neuron, signal });
        Ok(())
    }

    pub fn memory_mut(&mut self, conn: usize) -> Option<&mut MemoryConnection> {
        match &mut self.connections.get_mut(conn)?.synapses {
            Synapses::Memory(m) => Some(m),
            Synapses::Fixed(_) => None,
        }
    }

    pub fn memory(&self, conn: usize) -> Option<&MemoryConnection> {
        match &self.connections.get(conn)?.synapses {
            Synapses::Memory(m) => Some(m),
            Synapses::Fixed(_) => None,
        }
    }
}
