use super::topology::{ClusterId, NetworkTopology};
use std::collections::BTreeSet;
use std::fmt;

pub const MAX_INCOMING_CLUSTERS: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitViolation {
    /// A source neuron exceeds κ outgoing synapses within one connection.
    Fanout {
        src: String,
        dst: String,
        max_fanout: usize,
        kappa: usize,
    },
    /// A cluster receives from more than three source clusters.
    Incoming { cluster: String, sources: Vec<String> },
}

impl fmt::Display for LimitViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitViolation::Fanout {
                src,
                dst,
                max_fanout,
                kappa,
            } => write!(f, "fan-out {max_fanout} > {kappa} on {src} -> {dst}"),
            LimitViolation::Incoming { cluster, sources } => {
                write!(f, "`{cluster}` has {} incoming clusters: {}", sources.len(), sources.join(", "))
            }
        }
    }
}

/// Lists every κ and three-incoming violation; control lines are exempt.
pub fn assert_topology_limits(topo: &NetworkTopology, kappa: usize) -> Vec<LimitViolation> {
    let mut report = Vec::new();
    for conn in &topo.connections {
        let f = conn.synapses.weights().mask().max_fanout();
        if f > kappa {
            report.push(LimitViolation::Fanout {
                src: topo.name(conn.src).to_string(),
                dst: topo.name(conn.dst).to_string(),
                max_fanout: f,
                kappa,
            });
        }
    }
    for sd in &topo.second_degree {
        let f = sd.spec.max_fanout();
        if f > kappa {
            report.push(LimitViolation::Fanout {
                src: format!("{}x{}", topo.name(sd.table), topo.name(sd.key)),
                dst: topo.name(sd.dst).to_string(),
                max_fanout: f,
                kappa,
            });
        }
    }
    for (c, spec) in topo.clusters.iter().enumerate() {
        let id = ClusterId(c);
        let mut sources: BTreeSet<ClusterId> = topo
            .connections
            .iter()
            .filter(|k| k.dst == id)
            .map(|k| k.src)
            .collect();
        for sd in topo.second_degree.iter().filter(|s| s.dst == id) {
            sources.insert(sd.table);
            sources.insert(sd.key);
        }
        if sources.len() > MAX_INCOMING_CLUSTERS {
            report.push(LimitViolation::Incoming {
                cluster: spec.name.clone(),
                sources: sources.iter().map(|&s| topo.name(s).to_string()).collect(),
            });
        }
    }
    report
}
