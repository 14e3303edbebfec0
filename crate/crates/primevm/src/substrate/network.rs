use super::topology::{ClusterId, ControlKind, ControlSignal, NetworkTopology, Synapses};
use super::{carry, THRESHOLD};
use crate::error::{Error, Result};
use crate::memory::MemoryConnection;
use crate::pattern::Pattern;

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkState {
    pub potentials: Vec<Vec<f32>>,
    /// Spike indices emitted on the previous tick, per cluster.
    pub spikes: Vec<Vec<u32>>,
    pub tick: u64,
}

impl NetworkState {
    pub fn zeros(topo: &NetworkTopology) -> Self {
        NetworkState {
            potentials: topo.clusters.iter().map(|c| vec![0.0; c.size]).collect(),
            spikes: vec![Vec::new(); topo.clusters.len()],
            tick: 0,
        }
    }

    pub fn spike_vector(&self, c: ClusterId) -> Vec<bool> {
        let mut v = vec![false; self.potentials[c.0].len()];
        for &i in &self.spikes[c.0] {
            v[i as usize] = true;
        }
        v
    }

    fn check(&self, topo: &NetworkTopology) -> Result<()> {
        if self.potentials.len() != topo.clusters.len() {
            return Err(Error::Dimension {
                what: "cluster count".into(),
                expected: topo.clusters.len(),
                got: self.potentials.len(),
            });
        }
        for (p, c) in self.potentials.iter().zip(&topo.clusters) {
            if p.len() != c.size {
                return Err(Error::Dimension {
                    what: format!("potentials of `{}`", c.name),
                    expected: c.size,
                    got: p.len(),
                });
            }
        }
        Ok(())
    }
}

/// Potential injected this tick, as sparse (cluster, neuron, value) entries.
#[derive(Clone, Debug, Default)]
pub struct Stimulus {
    entries: Vec<(ClusterId, u32, f32)>,
}

impl Stimulus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, c: ClusterId, neuron: u32, v: f32) -> &mut Self {
        self.entries.push((c, neuron, v));
        self
    }

    pub fn add_pattern(&mut self, c: ClusterId, p: &Pattern, v: f32) -> &mut Self {
        for &i in p.active() {
            self.entries.push((c, i, v));
        }
        self
    }

    pub fn add_dense(&mut self, c: ClusterId, v: &[f32]) -> &mut Self {
        for (i, &x) in v.iter().enumerate() {
            if x != 0.0 {
                self.entries.push((c, i as u32, x));
            }
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    fn check(&self, topo: &NetworkTopology) -> Result<()> {
        for &(c, i, _) in &self.entries {
            if c.0 >= topo.clusters.len() {
                return Err(Error::UnknownControl(c.0));
            }
            if i as usize >= topo.clusters[c.0].size {
                return Err(Error::Dimension {
                    what: format!("external input to `{}`", topo.clusters[c.0].name),
                    expected: topo.clusters[c.0].size,
                    got: i as usize + 1,
                });
            }
        }
        Ok(())
    }
}

struct Resolved {
    inhibited: Vec<bool>,
    bind: Vec<ClusterId>,
    unbind: Vec<ClusterId>,
}

fn resolve(topo: &NetworkTopology, raw: &[Vec<u32>], controls: &[ControlSignal]) -> Result<Resolved> {
    let mut r = Resolved {
        inhibited: vec![false; topo.clusters.len()],
        bind: Vec::new(),
        unbind: Vec::new(),
    };
    let mut apply = |s: &ControlSignal| -> Result<()> {
        if s.target.0 >= topo.clusters.len() {
            return Err(Error::UnknownControl(s.target.0));
        }
        match s.kind {
            ControlKind::Inhibit => r.inhibited[s.target.0] = true,
            ControlKind::Bind => r.bind.push(s.target),
            ControlKind::Unbind => r.unbind.push(s.target),
        }
        Ok(())
    };
    for s in controls {
        apply(s)?;
    }
    for line in &topo.control_lines {
        if raw[line.src.0].binary_search(&line.neuron).is_ok() {
            apply(&line.signal)?;
        }
    }
    r.bind.sort();
    r.bind.dedup();
    r.unbind.sort();
    r.unbind.dedup();
    Ok(r)
}

fn raw_spikes(pot: &[f32], out: &mut Vec<u32>) {
    out.clear();
    for (i, &x) in pot.iter().enumerate() {
        if x >= THRESHOLD {
            out.push(i as u32);
        }
    }
}

/// Applies bind/unbind to every memory connection leaving a flagged cluster.
/// Returns the indices of the mutated connections.
fn plasticity(topo: &mut NetworkTopology, spikes: &[Vec<u32>], res: &Resolved) -> Vec<usize> {
    let mut touched = Vec::new();
    if res.bind.is_empty() && res.unbind.is_empty() {
        return touched;
    }
    for (ci, conn) in topo.connections.iter_mut().enumerate() {
        if let Synapses::Memory(m) = &mut conn.synapses {
            let (src, dst) = (conn.src.0, conn.dst.0);
            if res.unbind.contains(&conn.src) {
                m.apply(&spikes[src], &spikes[dst], false);
                touched.push(ci);
            }
            if res.bind.contains(&conn.src) {
                m.apply(&spikes[src], &spikes[dst], true);
                touched.push(ci);
            }
        }
    }
    touched
}

/// Reference implementation of one tick; the cached [`Network`] must agree with it exactly.
pub fn step(
    topo: &mut NetworkTopology,
    state: &NetworkState,
    external: &Stimulus,
    controls: &[ControlSignal],
) -> Result<NetworkState> {
    state.check(topo)?;
    external.check(topo)?;
    let n = topo.clusters.len();
    let mut raw = vec![Vec::new(); n];
    for c in 0..n {
        raw_spikes(&state.potentials[c], &mut raw[c]);
    }
    let res = resolve(topo, &raw, controls)?;
    let spikes: Vec<Vec<u32>> = (0..n)
        .map(|c| if res.inhibited[c] { Vec::new() } else { raw[c].clone() })
        .collect();

    let mut input: Vec<Vec<f32>> = topo.clusters.iter().map(|c| vec![0.0; c.size]).collect();
    for conn in &topo.connections {
        if res.inhibited[conn.dst.0] || spikes[conn.src.0].is_empty() {
            continue;
        }
        let mut tmp = vec![0.0; topo.clusters[conn.dst.0].size];
        conn.synapses.accumulate(&spikes[conn.src.0], &mut tmp);
        for (x, t) in input[conn.dst.0].iter_mut().zip(&tmp) {
            *x += t;
        }
    }
    for sd in &topo.second_degree {
        if res.inhibited[sd.dst.0] || spikes[sd.table.0].is_empty() || spikes[sd.key.0].is_empty() {
            continue;
        }
        let mut tmp = vec![0.0; topo.clusters[sd.dst.0].size];
        sd.spec
            .accumulate(&spikes[sd.table.0], &spikes[sd.key.0], &mut tmp);
        for (x, t) in input[sd.dst.0].iter_mut().zip(&tmp) {
            *x += t;
        }
    }
    for &(c, i, v) in &external.entries {
        input[c.0][i as usize] += v;
    }

    let mut potentials = Vec::with_capacity(n);
    for c in 0..n {
        if res.inhibited[c] {
            potentials.push(vec![0.0; topo.clusters[c].size]);
            continue;
        }
        let keep = 1.0 - topo.clusters[c].leak;
        potentials.push(
            state.potentials[c]
                .iter()
                .zip(&input[c])
                .map(|(&x, &i)| carry(x, keep) + i)
                .collect(),
        );
    }
    plasticity(topo, &spikes, &res);
    Ok(NetworkState {
        potentials,
        spikes,
        tick: state.tick + 1,
    })
}

#[derive(Clone, Debug, Default)]
struct Cache {
    key: (u64, u64),
    valid: bool,
    values: Vec<f32>,
}

/// Topology plus state with an event-driven, contribution-caching step.
///
/// Each connection's drive W·S is cached against a version counter of its
/// source spike set, so clusters holding a steady pattern cost one vector
/// add per tick.
#[derive(Clone, Debug)]
pub struct Network {
    topo: NetworkTopology,
    state: NetworkState,
    versions: Vec<u64>,
    conn_cache: Vec<Cache>,
    sd_cache: Vec<Cache>,
    input: Vec<Vec<f32>>,
    touched: Vec<bool>,
    quiet: Vec<bool>,
    raw: Vec<Vec<u32>>,
}

impl Network {
    pub fn new(topo: NetworkTopology) -> Self {
        let state = NetworkState::zeros(&topo);
        Self::with_state(topo, state).expect("zero state matches topology")
    }

    pub fn with_state(topo: NetworkTopology, state: NetworkState) -> Result<Self> {
        state.check(&topo)?;
        let n = topo.clusters.len();
        let quiet = (0..n)
            .map(|c| state.spikes[c].is_empty() && state.potentials[c].iter().all(|&x| x == 0.0))
            .collect();
        Ok(Network {
            versions: vec![0; n],
            conn_cache: vec![Cache::default(); topo.connections.len()],
            sd_cache: vec![Cache::default(); topo.second_degree.len()],
            input: topo.clusters.iter().map(|c| vec![0.0; c.size]).collect(),
            touched: vec![false; n],
            quiet,
            raw: vec![Vec::new(); n],
            topo,
            state,
        })
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topo
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn into_parts(self) -> (NetworkTopology, NetworkState) {
        (self.topo, self.state)
    }

    pub fn tick(&self) -> u64 {
        self.state.tick
    }

    pub fn id(&self, name: &str) -> Result<ClusterId> {
        self.topo.id(name)
    }

    pub fn spikes(&self, c: ClusterId) -> &[u32] {
        &self.state.spikes[c.0]
    }

    pub fn potentials(&self, c: ClusterId) -> &[f32] {
        &self.state.potentials[c.0]
    }

    /// Neurons currently at or above threshold (they spike on the next step).
    pub fn pending_spikes(&self, c: ClusterId) -> Vec<u32> {
        let mut v = Vec::new();
        raw_spikes(&self.state.potentials[c.0], &mut v);
        v
    }

    pub fn set_potentials(&mut self, c: ClusterId, v: &[f32]) -> Result<()> {
        let p = &mut self.state.potentials[c.0];
        if p.len() != v.len() {
            return Err(Error::Dimension {
                what: format!("potentials of `{}`", self.topo.clusters[c.0].name),
                expected: p.len(),
                got: v.len(),
            });
        }
        p.copy_from_slice(v);
        self.quiet[c.0] = false;
        Ok(())
    }

    /// Sets potentials to `value` on the pattern and 0 elsewhere.
    pub fn preload(&mut self, c: ClusterId, p: &Pattern, value: f32) {
        let pot = &mut self.state.potentials[c.0];
        pot.fill(0.0);
        for &i in p.active() {
            pot[i as usize] = value;
        }
        self.quiet[c.0] = p.is_empty();
    }

    pub fn clear(&mut self, c: ClusterId) {
        self.state.potentials[c.0].fill(0.0);
        self.quiet[c.0] = self.state.spikes[c.0].is_empty();
    }

    pub fn memory(&self, conn: usize) -> Option<&MemoryConnection> {
        self.topo.memory(conn)
    }

    pub fn memory_mut(&mut self, conn: usize) -> Option<&mut MemoryConnection> {
        if let Some(c) = self.conn_cache.get_mut(conn) {
            c.valid = false;
        }
        self.topo.memory_mut(conn)
    }

    pub fn step(&mut self, external: &Stimulus, controls: &[ControlSignal]) -> Result<()> {
        external.check(&self.topo)?;
        let n = self.topo.clusters.len();
        for c in 0..n {
            if self.quiet[c] {
                self.raw[c].clear();
            } else {
                raw_spikes(&self.state.potentials[c], &mut self.raw[c]);
            }
        }
        let res = resolve(&self.topo, &self.raw, controls)?;
        for c in 0..n {
            let emitted: &[u32] = if res.inhibited[c] { &[] } else { &self.raw[c] };
            if self.state.spikes[c] != emitted {
                self.versions[c] += 1;
                self.state.spikes[c].clear();
                self.state.spikes[c].extend_from_slice(emitted);
            }
        }

        self.touched.iter_mut().for_each(|t| *t = false);
        let spikes = &self.state.spikes;
        for (ci, conn) in self.topo.connections.iter().enumerate() {
            let (s, d) = (conn.src.0, conn.dst.0);
            if res.inhibited[d] || spikes[s].is_empty() {
                continue;
            }
            let cache = &mut self.conn_cache[ci];
            if !cache.valid || cache.key.0 != self.versions[s] {
                cache.values.clear();
                cache.values.resize(self.topo.clusters[d].size, 0.0);
                conn.synapses.accumulate(&spikes[s], &mut cache.values);
                cache.key = (self.versions[s], 0);
                cache.valid = true;
            }
            add_into(&mut self.input[d], &mut self.touched[d], &cache.values);
        }
        for (si, sd) in self.topo.second_degree.iter().enumerate() {
            let (t, k, d) = (sd.table.0, sd.key.0, sd.dst.0);
            if res.inhibited[d] || spikes[t].is_empty() || spikes[k].is_empty() {
                continue;
            }
            let cache = &mut self.sd_cache[si];
            let key = (self.versions[t], self.versions[k]);
            if !cache.valid || cache.key != key {
                cache.values.clear();
                cache.values.resize(self.topo.clusters[d].size, 0.0);
                sd.spec.accumulate(&spikes[t], &spikes[k], &mut cache.values);
                cache.key = key;
                cache.valid = true;
            }
            add_into(&mut self.input[d], &mut self.touched[d], &cache.values);
        }
        for &(c, i, v) in &external.entries {
            if !self.touched[c.0] {
                self.input[c.0].fill(0.0);
                self.touched[c.0] = true;
            }
            self.input[c.0][i as usize] += v;
        }

        for c in 0..n {
            let pot = &mut self.state.potentials[c];
            if res.inhibited[c] {
                if !self.quiet[c] {
                    pot.fill(0.0);
                    self.quiet[c] = true;
                }
                continue;
            }
            if !self.touched[c] && self.quiet[c] {
                continue;
            }
            let keep = 1.0 - self.topo.clusters[c].leak;
            let mut any = false;
            if self.touched[c] {
                for (x, &i) in pot.iter_mut().zip(&self.input[c]) {
                    *x = carry(*x, keep) + i;
                    any |= *x != 0.0;
                }
            } else {
                for x in pot.iter_mut() {
                    *x = carry(*x, keep);
                    any |= *x != 0.0;
                }
            }
            self.quiet[c] = !any;
        }

        for ci in plasticity(&mut self.topo, &self.state.spikes, &res) {
            self.conn_cache[ci].valid = false;
        }
        self.state.tick += 1;
        Ok(())
    }

    pub fn run(&mut self, ticks: usize, external: &Stimulus, controls: &[ControlSignal]) -> Result<()> {
        for _ in 0..ticks {
            self.step(external, controls)?;
        }
        Ok(())
    }
}

fn add_into(dst: &mut [f32], touched: &mut bool, src: &[f32]) {
    if !*touched {
        dst.fill(0.0);
        *touched = true;
    }
    for (x, &v) in dst.iter_mut().zip(src) {
        *x += v;
    }
}
