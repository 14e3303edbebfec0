//! Prime attractors: random sparse symbol patterns, margin-trained
//! self/mapping connections, recognizers and recall to convergence.

use crate::error::{Error, Result};
use crate::pattern::Pattern;
use crate::substrate::{
    ClusterSpec, ConnectionKind, Network, NetworkTopology, SparseWeights, Stimulus, SynapseMask,
    Synapses,
};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

pub const DEFAULT_ALPHA: f32 = 3.0;
pub const DEFAULT_EXCITE: f32 = 2.0;
/// Fewest in-pattern synapses each active neuron must receive for a pattern to be kept.
pub const MIN_SUPPORT: usize = 3;
pub const TRAIN_MARGIN: f32 = 0.05;
pub const STABLE_TICKS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceParams {
    pub size: usize,
    pub active: usize,
    pub seed: u64,
}

impl SpaceParams {
    /// Active count is round(c · size).
    pub fn from_coverage(size: usize, c: f64, seed: u64) -> Result<Self> {
        let active = (c * size as f64).round() as usize;
        SpaceParams { size, active, seed }.validated()
    }

    fn validated(self) -> Result<Self> {
        if self.active < 2 || self.active >= self.size {
            return Err(Error::Coverage(format!(
                "{} active of {} neurons",
                self.active, self.size
            )));
        }
        Ok(self)
    }

    pub fn coverage(&self) -> f64 {
        self.active as f64 / self.size as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolSpace {
    size: usize,
    active: usize,
    seed: u64,
    names: Vec<String>,
    patterns: Vec<Pattern>,
    index: HashMap<String, usize>,
}

const MAX_RETRIES: usize = 10_000;

/// `count` distinct exact-size patterns named `s0`, `s1`, ...
pub fn generate_prime_attractors(params: SpaceParams, count: usize) -> Result<SymbolSpace> {
    let names: Vec<String> = (0..count).map(|i| format!("s{i}")).collect();
    generate_named(params, &names, |_| true)
}

/// Named patterns whose every neuron gets at least [`MIN_SUPPORT`] synapses
/// from its own pattern through `mask`.
pub fn generate_supported(params: SpaceParams, names: &[String], mask: &SynapseMask) -> Result<SymbolSpace> {
    generate_named(params, names, |p| min_self_support(mask, p) >= MIN_SUPPORT)
}

/// Like [`generate_supported`], but each pattern is drawn from the neurons no
/// earlier pattern uses, until fewer than `active` remain and the pool refills.
/// The first size/active patterns are therefore pairwise disjoint.
pub fn generate_spread(params: SpaceParams, names: &[String], mask: &SynapseMask) -> Result<SymbolSpace> {
    draw(params, names, true, |p| min_self_support(mask, p) >= MIN_SUPPORT)
}

/// Named patterns, redrawn while `accept` rejects them.
pub fn generate_named<F>(params: SpaceParams, names: &[String], accept: F) -> Result<SymbolSpace>
where
    F: FnMut(&Pattern) -> bool,
{
    draw(params, names, false, accept)
}

fn draw<F>(params: SpaceParams, names: &[String], spread: bool, mut accept: F) -> Result<SymbolSpace>
where
    F: FnMut(&Pattern) -> bool,
{
    let params = params.validated()?;
    if names.is_empty() {
        return Err(Error::Coverage("at least one symbol is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let all: Vec<u32> = (0..params.size as u32).collect();
    let mut pool = all.clone();
    let mut seen = HashSet::with_capacity(names.len());
    let mut patterns = Vec::with_capacity(names.len());
    let mut retries = 0;
    for _ in names {
        let mut tries = 0;
        loop {
            if !spread || pool.len() < params.active || tries == 100 {
                pool.clone_from(&all);
            }
            let picks = index::sample(&mut rng, pool.len(), params.active).into_vec();
            let mut v: Vec<u32> = picks.iter().map(|&k| pool[k]).collect();
            v.sort_unstable();
            let p = Pattern::new(params.size, v)?;
            if !seen.contains(&p) && accept(&p) {
                if spread {
                    let mut picks = picks;
                    picks.sort_unstable_by(|a, b| b.cmp(a));
                    for k in picks {
                        pool.swap_remove(k);
                    }
                }
                seen.insert(p.clone());
                patterns.push(p);
                break;
            }
            tries += 1;
            retries += 1;
            if retries > MAX_RETRIES {
                return Err(Error::DuplicatePatterns {
                    count: names.len(),
                    retries,
                });
            }
        }
    }
    let mut index = HashMap::new();
    for (i, n) in names.iter().enumerate() {
        if index.insert(n.clone(), i).is_some() {
            return Err(Error::Pattern(format!("duplicate symbol name `{n}`")));
        }
    }
    Ok(SymbolSpace {
        size: params.size,
        active: params.active,
        seed: params.seed,
        names: names.to_vec(),
        patterns,
        index,
    })
}

impl SymbolSpace {
    pub fn size(&self) -> usize {
        self.size
    }
    pub fn active(&self) -> usize {
        self.active
    }
    pub fn coverage(&self) -> f64 {
        self.active as f64 / self.size as f64
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn len(&self) -> usize {
        self.patterns.len()
    }
    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
    pub fn names(&self) -> &[String] {
        &self.names
    }
    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn pattern(&self, name: &str) -> Result<&Pattern> {
        Ok(&self.patterns[self.index_of(name)?])
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    /// Symbol whose pattern matches `spikes` exactly.
    pub fn lookup(&self, spikes: &[u32]) -> Option<usize> {
        self.patterns.iter().position(|p| p.active() == spikes)
    }

    /// Best-overlap symbol and its overlap count.
    pub fn nearest(&self, spikes: &[u32]) -> Option<(usize, usize)> {
        if spikes.is_empty() {
            return None;
        }
        let probe = Pattern::from_unsorted(self.size, spikes.to_vec()).ok()?;
        self.patterns
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.overlap(&probe)))
            .max_by_key(|&(i, o)| (o, std::cmp::Reverse(i)))
    }

    /// Header `size coverage seed`, then `i1 i2 ... <tab> name` per symbol.
    /// Names may contain spaces but not tabs or newlines.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.size, self.coverage(), self.seed);
        for (n, p) in self.names.iter().zip(&self.patterns) {
            let idx: Vec<String> = p.active().iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "{}\t{n}", idx.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, msg: &str| Error::Parse {
            line,
            col: 1,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| perr(1, "missing header"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 {
            return Err(perr(1, "header must be `size coverage seed`"));
        }
        let size: usize = h[0].parse().map_err(|_| perr(1, "bad size"))?;
        let coverage: f64 = h[1].parse().map_err(|_| perr(1, "bad coverage"))?;
        let seed: u64 = h[2].parse().map_err(|_| perr(1, "bad seed"))?;
        let active = (coverage * size as f64).round() as usize;
        let mut names = Vec::new();
        let mut patterns = Vec::new();
        let mut index = HashMap::new();
        for (n, line) in lines {
            let (nums, name) = line.split_once('\t').ok_or_else(|| perr(n + 1, "missing tab before name"))?;
            let name = name.to_string();
            let idx: Vec<u32> = nums
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| perr(n + 1, "bad index")))
                .collect::<Result<_>>()?;
            if idx.len() != active {
                return Err(perr(n + 1, "pattern size disagrees with coverage"));
            }
            let p = Pattern::new(size, idx).map_err(|e| perr(n + 1, &e.to_string()))?;
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(perr(n + 1, "duplicate symbol"));
            }
            names.push(name);
            patterns.push(p);
        }
        Ok(SymbolSpace {
            size,
            active,
            seed,
            names,
            patterns,
            index,
        })
    }
}

/// Every active neuron of `p` receives at least one masked synapse from `p`.
pub fn self_reachable(mask: &SynapseMask, p: &Pattern) -> bool {
    min_self_support(mask, p) >= 1
}

/// Fewest masked synapses any active neuron of `p` receives from `p` itself.
pub fn min_self_support(mask: &SynapseMask, p: &Pattern) -> usize {
    let mut hits = vec![0usize; mask.n_dst()];
    for &i in p.active() {
        for &j in mask.row(i as usize) {
            hits[j as usize] += 1;
        }
    }
    p.active().iter().map(|&j| hits[j as usize]).min().unwrap_or(0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub alpha: f32,
    /// Lower bound trained onto active neurons (at least 1).
    pub excite: f32,
    pub margin: f32,
    /// Also ask every leave-one-out subset of an active neuron's inputs for 1+m.
    pub robust: bool,
    /// Synapses that serve some excitatory goal never go below zero.
    pub floor: bool,
    pub max_epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: DEFAULT_ALPHA,
            excite: DEFAULT_EXCITE,
            margin: TRAIN_MARGIN,
            robust: true,
            floor: true,
            max_epochs: 2000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingReport {
    /// Largest epoch count any destination neuron needed.
    pub epochs: usize,
    pub updates: u64,
    pub residual_violations: usize,
    /// Target-active neurons with no admissible synapse from the input pattern.
    pub unreachable: usize,
}

struct Constraint {
    start: usize,
    len: usize,
    excite: bool,
    goal: f32,
    // Leave-one-out copies only shape the weights; they are not verified.
    verify: bool,
}

/// Per-destination margin training (Kaczmarz projections onto violated
/// half-spaces): Σ ≥ 1+m where the target is active, Σ ≤ -α-m elsewhere,
/// over synapses reachable from each input pattern.
pub fn train_weights(
    mask: &Arc<SynapseMask>,
    pairs: &[(&Pattern, &Pattern)],
    cfg: &TrainConfig,
) -> Result<(SparseWeights, TrainingReport)> {
    train_masked(mask, pairs, cfg, true)
}

/// Without `autapses`, synapses from a neuron onto itself stay at zero.
fn train_masked(
    mask: &Arc<SynapseMask>,
    pairs: &[(&Pattern, &Pattern)],
    cfg: &TrainConfig,
    autapses: bool,
) -> Result<(SparseWeights, TrainingReport)> {
    if cfg.alpha <= 0.0 {
        return Err(Error::Config("alpha must be positive".into()));
    }
    let n_src = mask.n_src();
    let n_dst = mask.n_dst();
    for (a, b) in pairs {
        if a.size() != n_src || b.size() != n_dst {
            return Err(Error::Dimension {
                what: "training pair".into(),
                expected: n_src,
                got: a.size(),
            });
        }
    }
    let mut values = vec![0.0f32; mask.nnz()];
    let mut report = TrainingReport::default();
    if pairs.is_empty() {
        return Ok((SparseWeights::from_values(Arc::clone(mask), values), report));
    }

    let mut by_src: Vec<Vec<u32>> = vec![Vec::new(); n_src];
    for (p, (a, _)) in pairs.iter().enumerate() {
        for &i in a.active() {
            by_src[i as usize].push(p as u32);
        }
    }
    let mut in_target: Vec<Vec<u32>> = vec![Vec::new(); n_dst];
    for (p, (_, b)) in pairs.iter().enumerate() {
        for &j in b.active() {
            in_target[j as usize].push(p as u32);
        }
    }

    let incoming = mask.incoming();
    if cfg.excite < 1.0 {
        return Err(Error::Config("excitatory target must be at least 1".into()));
    }
    let hi = cfg.excite + cfg.margin;
    let lo = -cfg.alpha - cfg.margin;
    let mut hits: Vec<(u32, u32)> = Vec::new();
    let mut terms: Vec<u32> = Vec::new();
    let mut cons: Vec<Constraint> = Vec::new();
    let mut w: Vec<f32> = Vec::new();

    for j in 0..n_dst {
        let range = incoming.range(j);
        hits.clear();
        for (local, pos) in range.clone().enumerate() {
            let i = incoming.sources[pos] as usize;
            for &p in &by_src[i] {
                hits.push((p, local as u32));
            }
        }
        hits.sort_unstable();
        terms.clear();
        cons.clear();
        let targets = &in_target[j];
        let mut pinned: Vec<bool> = vec![false; range.len()];
        if !autapses {
            for (local, pos) in range.clone().enumerate() {
                pinned[local] = incoming.sources[pos] as usize == j;
            }
        }
        let mut reached_targets = 0;
        let mut h = 0;
        while h < hits.len() {
            let p = hits[h].0;
            let start = terms.len();
            while h < hits.len() && hits[h].0 == p {
                terms.push(hits[h].1);
                h += 1;
            }
            let excite = targets.binary_search(&p).is_ok();
            reached_targets += excite as usize;
            cons.push(Constraint {
                start,
                len: terms.len() - start,
                excite,
                goal: if excite { hi } else { lo },
                verify: true,
            });
        }
        report.unreachable += targets.len() - reached_targets;
        let base = cons.len();
        if cfg.robust {
            for ci in 0..base {
                let (start, len) = (cons[ci].start, cons[ci].len);
                if !cons[ci].excite || len < 2 {
                    continue;
                }
                for drop in 0..len {
                    let s = terms.len();
                    for t in 0..len {
                        if t != drop {
                            terms.push(terms[start + t]);
                        }
                    }
                    cons.push(Constraint {
                        start: s,
                        len: len - 1,
                        excite: true,
                        goal: 1.0 + cfg.margin,
                        verify: false,
                    });
                }
            }
        }

        let mut floored = vec![false; range.len()];
        if cfg.floor {
            for c in cons[..base].iter().filter(|c| c.excite) {
                for &k in &terms[c.start..c.start + c.len] {
                    floored[k as usize] = true;
                }
            }
        }

        w.clear();
        w.resize(range.len(), 0.0);
        let mut epochs = relax(&cons, &terms, &pinned, &floored, &mut w, cfg.max_epochs, &mut report.updates);
        if cons.len() > base && violations(&cons[..base], &terms, &w, cfg.alpha) > 0 {
            // Some leave-one-out goal conflicts with a verified one: drop them all.
            cons.truncate(base);
            epochs += relax(&cons, &terms, &pinned, &floored, &mut w, cfg.max_epochs, &mut report.updates);
        }
        if floored.contains(&true) && violations(&cons[..base], &terms, &w, cfg.alpha) > 0 {
            floored.fill(false);
            epochs += relax(&cons, &terms, &pinned, &floored, &mut w, cfg.max_epochs, &mut report.updates);
        }
        report.epochs = report.epochs.max(epochs);
        report.residual_violations += violations(&cons[..base], &terms, &w, cfg.alpha);
        for (local, pos) in range.enumerate() {
            values[incoming.slots[pos] as usize] = w[local];
        }
    }
    if report.residual_violations > 0 {
        return Err(Error::NonConvergence {
            epochs: report.epochs,
            violations: report.residual_violations,
        });
    }
    Ok((SparseWeights::from_values(Arc::clone(mask), values), report))
}

/// Kaczmarz sweeps until no constraint moves or the budget runs out; returns
/// the epoch count. Pinned weights never move; floored ones stay at or above 0.
fn relax(
    cons: &[Constraint],
    terms: &[u32],
    pinned: &[bool],
    floored: &[bool],
    w: &mut [f32],
    max_epochs: usize,
    updates: &mut u64,
) -> usize {
    let mut epochs = 0;
    loop {
        let mut updated = false;
        for c in cons {
            let idx = &terms[c.start..c.start + c.len];
            let s: f32 = idx.iter().map(|&k| w[k as usize]).sum();
            if (c.excite && s >= c.goal) || (!c.excite && s <= c.goal) {
                continue;
            }
            let movable = |k: usize, w: &[f32]| !pinned[k] && (c.excite || !floored[k] || w[k] > 0.0);
            let free = idx.iter().filter(|&&k| movable(k as usize, w)).count();
            if free == 0 {
                continue;
            }
            let d = (c.goal - s) / free as f32;
            for &k in idx {
                let k = k as usize;
                if movable(k, w) {
                    w[k] += d;
                    if floored[k] && w[k] < 0.0 {
                        w[k] = 0.0;
                    }
                }
            }
            updated = true;
            *updates += 1;
        }
        epochs += 1;
        if !updated || epochs >= max_epochs {
            return epochs;
        }
    }
}

fn violations(cons: &[Constraint], terms: &[u32], w: &[f32], alpha: f32) -> usize {
    cons.iter()
        .filter(|c| c.verify)
        .filter(|c| {
            let s: f32 = terms[c.start..c.start + c.len].iter().map(|&k| w[k as usize]).sum();
            (c.excite && s < 1.0) || (!c.excite && s > -alpha)
        })
        .count()
}

#[derive(Clone, Debug)]
pub struct TrainedRegister {
    cluster: ClusterSpec,
    weights: Arc<SparseWeights>,
    space: Arc<SymbolSpace>,
    alpha: f32,
    report: TrainingReport,
}

pub fn train_self_connection(
    space: Arc<SymbolSpace>,
    mask: Arc<SynapseMask>,
    cfg: &TrainConfig,
) -> Result<TrainedRegister> {
    if mask.n_src() != space.size() || mask.n_dst() != space.size() {
        return Err(Error::Dimension {
            what: "self mask".into(),
            expected: space.size(),
            got: mask.n_src(),
        });
    }
    let pairs: Vec<(&Pattern, &Pattern)> = space.patterns().iter().map(|p| (p, p)).collect();
    let (w, report) = train_masked(&mask, &pairs, cfg, false)?;
    Ok(TrainedRegister {
        cluster: ClusterSpec::symbol("register", space.size()),
        weights: Arc::new(w),
        space,
        alpha: cfg.alpha,
        report,
    })
}

/// Mapping A_k → B_k; an empty target maps its input to silence.
pub fn train_mapping(
    mask: &Arc<SynapseMask>,
    pairs: &[(Pattern, Pattern)],
    cfg: &TrainConfig,
) -> Result<(SparseWeights, TrainingReport)> {
    let refs: Vec<(&Pattern, &Pattern)> = pairs.iter().map(|(a, b)| (a, b)).collect();
    train_weights(mask, &refs, cfg)
}

impl TrainedRegister {
    pub fn size(&self) -> usize {
        self.cluster.size
    }
    pub fn cluster(&self) -> &ClusterSpec {
        &self.cluster
    }
    pub fn weights(&self) -> &Arc<SparseWeights> {
        &self.weights
    }
    pub fn space(&self) -> &Arc<SymbolSpace> {
        &self.space
    }
    pub fn alpha(&self) -> f32 {
        self.alpha
    }
    pub fn report(&self) -> &TrainingReport {
        &self.report
    }

    /// Reassembles a register from stored weights.
    pub fn from_parts(space: Arc<SymbolSpace>, weights: Arc<SparseWeights>, alpha: f32) -> Self {
        TrainedRegister {
            cluster: ClusterSpec::symbol("register", space.size()),
            weights,
            space,
            alpha,
            report: TrainingReport::default(),
        }
    }

    /// One-cluster network holding this register.
    pub fn network(&self) -> Network {
        let mut topo = NetworkTopology::new();
        let c = topo.add_cluster(self.cluster.clone()).expect("fresh topology");
        topo.connect(
            c,
            c,
            ConnectionKind::SelfLoop,
            Synapses::Fixed(Arc::clone(&self.weights)),
        )
        .expect("square weights");
        Network::new(topo)
    }

    /// Preloads `p` and checks it is re-emitted unchanged for `ticks` ticks.
    pub fn holds(&self, p: &Pattern, ticks: usize) -> bool {
        let mut net = self.network();
        let c = crate::substrate::ClusterId(0);
        net.preload(c, p, 1.0);
        let none = Stimulus::new();
        for _ in 0..ticks {
            if net.step(&none, &[]).is_err() || net.spikes(c) != p.active() {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MarginReport {
    pub checked: usize,
    pub violations: Vec<(usize, u32, f32)>,
    pub unreachable: usize,
}

/// Exhaustive check of both margins by direct scatter products.
pub fn check_margins(w: &SparseWeights, pairs: &[(&Pattern, &Pattern)], alpha: f32) -> MarginReport {
    let mut rep = MarginReport::default();
    let n = w.n_dst();
    let ones = SparseWeights::from_values(Arc::clone(w.mask()), vec![1.0; w.mask().nnz()]);
    let mut drive = vec![0.0f32; n];
    let mut reach = vec![0.0f32; n];
    for (p, (a, b)) in pairs.iter().enumerate() {
        drive.fill(0.0);
        reach.fill(0.0);
        w.scatter_add(a.active(), &mut drive);
        ones.scatter_add(a.active(), &mut reach);
        let target = b.to_mask();
        for j in 0..n {
            if reach[j] == 0.0 {
                rep.unreachable += target[j] as usize;
                continue;
            }
            rep.checked += 1;
            let ok = if target[j] {
                drive[j] >= 1.0
            } else {
                drive[j] <= -alpha
            };
            if !ok {
                rep.violations.push((p, j as u32, drive[j]));
            }
        }
    }
    rep
}

#[derive(Clone, Copy, Debug)]
pub struct RecallConfig {
    pub max_ticks: usize,
    pub stable_ticks: usize,
}

impl Default for RecallConfig {
    fn default() -> Self {
        RecallConfig {
            max_ticks: 60,
            stable_ticks: STABLE_TICKS,
        }
    }
}

/// Steps the register with `injected` added every tick until the spike set
/// repeats for the configured number of ticks.
pub fn recall(reg: &TrainedRegister, injected: &[f32], max_ticks: usize) -> Option<Pattern> {
    recall_with(
        reg,
        injected,
        &RecallConfig {
            max_ticks,
            ..RecallConfig::default()
        },
    )
}

pub fn recall_with(reg: &TrainedRegister, injected: &[f32], cfg: &RecallConfig) -> Option<Pattern> {
    if injected.len() != reg.size() {
        return None;
    }
    let mut net = reg.network();
    let c = crate::substrate::ClusterId(0);
    let mut stim = Stimulus::new();
    stim.add_dense(c, injected);
    let mut prev: Vec<u32> = Vec::new();
    let mut run = 0;
    for _ in 0..cfg.max_ticks {
        net.step(&stim, &[]).ok()?;
        let s = net.spikes(c);
        if !s.is_empty() && s == prev.as_slice() {
            run += 1;
        } else {
            run = if s.is_empty() { 0 } else { 1 };
            prev.clear();
            prev.extend_from_slice(s);
        }
        if run >= cfg.stable_ticks {
            return Pattern::new(reg.size(), prev).ok();
        }
    }
    None
}

/// Recognizer weight so a full pattern of `active` neurons drives 1/0.6 per tick.
pub fn recognizer_weight(active: usize) -> f32 {
    1.0 / (0.6 * active as f32)
}

/// Synapses from each watched pattern's neurons onto its panel neuron.
pub fn build_recognizer(
    src_size: usize,
    dst_size: usize,
    watched: &[(Pattern, u32)],
    weight: f32,
) -> SparseWeights {
    let mut rows = vec![Vec::new(); src_size];
    for (p, k) in watched {
        for &i in p.active() {
            rows[i as usize].push(*k);
        }
    }
    let mask = Arc::new(SynapseMask::from_rows(dst_size, rows));
    let n = mask.nnz();
    SparseWeights::from_values(mask, vec![weight; n])
}
