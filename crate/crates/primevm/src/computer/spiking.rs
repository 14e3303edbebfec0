//! The machine simulated neuron by neuron.
//!
//! Panels: `control` holds a bias neuron and one gate neuron per relay and
//! per gated cluster (alloc-c, cons-c, hash, code-c); a firing gate inhibits
//! its cluster, and a micro neuron releases it with a -2 synapse, one tick
//! later. `test` holds the false, true and bias neurons. `micro` holds the
//! fetch neuron, and per opcode a start neuron, a barrier neuron and a chain
//! of one neuron per dwell tick.

use super::{free_list, prelude_bindings, symbol_names, Gate, MicroOp, MicroProgram, Plasticity, RunResult, FALSE};
use crate::assembler::{LinkedProgram, Opcode, Reg};
use crate::attractors::{
    build_recognizer, generate_spread, recognizer_weight, train_mapping, train_self_connection, SpaceParams,
    SymbolSpace, TrainConfig, TrainedRegister,
};
use crate::config::MachineConfig;
use crate::error::{Error, Result};
use crate::hashtable::{build_hash_net, hash_activate, SecondDegreeSpec};
use crate::memory::{nominal_weight, MemoryConnection};
use crate::pattern::Pattern;
use crate::substrate::{
    ClusterId, ClusterSpec, ConnectionKind, ControlSignal, Network, NetworkTopology, SparseWeights, Stimulus,
    SynapseMask, Synapses,
};
use crate::switchbox::{build_switchbox, SwitchboxLayout};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::Path;
use std::sync::Arc;

/// Program-independent trained parts: both symbol spaces with their
/// weights, the hash net, and the random masks of every learned connection.
#[derive(Clone, Debug)]
pub struct Core {
    cfg: MachineConfig,
    registers: TrainedRegister,
    opcodes: TrainedRegister,
    hash: Arc<SecondDegreeSpec>,
    alloc_mask: Arc<SynapseMask>,
    car_mask: Arc<SynapseMask>,
    cdr_mask: Arc<SynapseMask>,
    value_mask: Arc<SynapseMask>,
    code2_mask: Arc<SynapseMask>,
    arg_mask: Arc<SynapseMask>,
    eq_mask: Arc<SynapseMask>,
    neq_mask: Arc<SynapseMask>,
}

impl Core {
    pub fn train(cfg: &MachineConfig) -> Result<Core> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let n = cfg.register_size;
        let no = cfg.opcode_size;
        let tc = TrainConfig {
            alpha: cfg.alpha,
            excite: cfg.excite,
            ..TrainConfig::default()
        };

        let reg_mask = Arc::new(SynapseMask::random(n, n, cfg.kappa, &mut rng));
        let names = symbol_names(cfg);
        let params = SpaceParams {
            size: n,
            active: cfg.register_active,
            seed: cfg.seed,
        };
        let space = generate_spread(params, &names, &reg_mask)?;
        let registers = train_self_connection(Arc::new(space), reg_mask, &tc)?;

        let op_mask = Arc::new(SynapseMask::random(no, no, cfg.opcode_kappa, &mut rng));
        let op_names: Vec<String> = Opcode::all().iter().map(|o| o.to_string()).collect();
        let op_params = SpaceParams {
            size: no,
            active: cfg.opcode_active,
            seed: cfg.seed.wrapping_add(1),
        };
        let op_space = generate_spread(op_params, &op_names, &op_mask)?;
        let opcodes = train_self_connection(Arc::new(op_space), op_mask, &tc)?;

        let hash = build_hash_net(n, n, cfg.hash_size, cfg.hash_branch_coverage(), cfg.seed.wrapping_add(2))?;
        let mut mask = |src: usize, dst: usize, k: usize| Arc::new(SynapseMask::random(src, dst, k, &mut rng));
        Ok(Core {
            cfg: cfg.clone(),
            registers,
            opcodes,
            hash: Arc::new(hash),
            alloc_mask: mask(n, n, cfg.kappa),
            car_mask: mask(n, n, cfg.kappa),
            cdr_mask: mask(n, n, cfg.kappa),
            value_mask: mask(cfg.hash_size, n, cfg.kappa),
            code2_mask: mask(n, n, cfg.kappa),
            arg_mask: mask(n, n, cfg.kappa),
            eq_mask: mask(n, no, cfg.opcode_kappa),
            neq_mask: mask(n, no, cfg.opcode_kappa),
        })
    }

    pub fn config(&self) -> &MachineConfig {
        &self.cfg
    }

    /// Writes the config, both symbol spaces and both weight vectors to
    /// `dir`. Masks and the hash net are rebuilt from the seed on load.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("machine.toml"), toml::to_string(&self.cfg).expect("config serializes"))?;
        for (name, reg) in [("registers", &self.registers), ("opcodes", &self.opcodes)] {
            std::fs::write(dir.join(format!("{name}.space")), reg.space().to_text())?;
            let values = reg.weights().values();
            let mut bytes = Vec::with_capacity(8 + 4 * values.len());
            bytes.extend_from_slice(&(values.len() as u64).to_le_bytes());
            for v in values {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            std::fs::write(dir.join(format!("{name}.weights")), bytes)?;
        }
        Ok(())
    }

    /// Loads what `save` wrote; the stored config must equal `cfg`.
    pub fn load(dir: &Path, cfg: &MachineConfig) -> Result<Core> {
        cfg.validate()?;
        let stored: MachineConfig = toml::from_str(&std::fs::read_to_string(dir.join("machine.toml"))?)
            .map_err(|e| Error::Config(e.to_string()))?;
        if &stored != cfg {
            return Err(Error::Config(format!("{} holds a different machine", dir.display())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let n = cfg.register_size;
        let no = cfg.opcode_size;
        let read = |name: &str, mask: Arc<SynapseMask>, alpha: f32| -> Result<TrainedRegister> {
            let space = SymbolSpace::from_text(&std::fs::read_to_string(dir.join(format!("{name}.space")))?)?;
            let bytes = std::fs::read(dir.join(format!("{name}.weights")))?;
            let bad = || Error::Config(format!("{name}.weights is malformed"));
            let (head, body) = bytes.split_first_chunk::<8>().ok_or_else(bad)?;
            let count = u64::from_le_bytes(*head) as usize;
            if count != mask.nnz() || body.len() != 4 * count || space.size() != mask.n_dst() {
                return Err(bad());
            }
            let values = body.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
            let w = SparseWeights::from_values(mask, values);
            Ok(TrainedRegister::from_parts(Arc::new(space), Arc::new(w), alpha))
        };
        let reg_mask = Arc::new(SynapseMask::random(n, n, cfg.kappa, &mut rng));
        let registers = read("registers", reg_mask, cfg.alpha)?;
        let op_mask = Arc::new(SynapseMask::random(no, no, cfg.opcode_kappa, &mut rng));
        let opcodes = read("opcodes", op_mask, cfg.alpha)?;
        let hash = build_hash_net(n, n, cfg.hash_size, cfg.hash_branch_coverage(), cfg.seed.wrapping_add(2))?;
        let mut mask = |src: usize, dst: usize, k: usize| Arc::new(SynapseMask::random(src, dst, k, &mut rng));
        Ok(Core {
            cfg: cfg.clone(),
            registers,
            opcodes,
            hash: Arc::new(hash),
            alloc_mask: mask(n, n, cfg.kappa),
            car_mask: mask(n, n, cfg.kappa),
            cdr_mask: mask(n, n, cfg.kappa),
            value_mask: mask(cfg.hash_size, n, cfg.kappa),
            code2_mask: mask(n, n, cfg.kappa),
            arg_mask: mask(n, n, cfg.kappa),
            eq_mask: mask(n, no, cfg.opcode_kappa),
            neq_mask: mask(n, no, cfg.opcode_kappa),
        })
    }

    pub fn registers(&self) -> &TrainedRegister {
        &self.registers
    }

    pub fn opcodes(&self) -> &TrainedRegister {
        &self.opcodes
    }

    pub fn hash_net(&self) -> &Arc<SecondDegreeSpec> {
        &self.hash
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            alpha: self.cfg.alpha,
            excite: self.cfg.excite,
            ..TrainConfig::default()
        }
    }

    fn reg(&self, name: &str) -> Result<Pattern> {
        Ok(self.registers.space().pattern(name)?.clone())
    }

    fn op(&self, op: Opcode) -> Result<Pattern> {
        Ok(self.opcodes.space().pattern(&op.to_string())?.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum HostAction {
    Read,
    Write,
    Exit,
}

/// Per-neuron synapses of a panel, summed on duplicates.
#[derive(Default)]
struct PanelWeights {
    entries: BTreeMap<(u32, u32), f32>,
}

impl PanelWeights {
    fn add(&mut self, src: u32, dst: u32, w: f32) {
        *self.entries.entry((src, dst)).or_default() += w;
    }

    fn build(&self, n_src: usize, n_dst: usize) -> SparseWeights {
        let mut rows = vec![Vec::new(); n_src];
        for &(s, d) in self.entries.keys() {
            rows[s as usize].push(d);
        }
        let mask = Arc::new(SynapseMask::from_rows(n_dst, rows));
        let mut values = vec![0.0; mask.nnz()];
        for (&(s, d), &w) in &self.entries {
            values[mask.slot(s as usize, d).expect("slot exists")] = w;
        }
        SparseWeights::from_values(mask, values)
    }
}

/// Micro-panel layout: what each neuron means to the host.
#[derive(Clone, Debug)]
struct MicroLayout {
    size: usize,
    fetch: u32,
    /// First chain neuron of each opcode; fires once per execution.
    first: HashMap<u32, Opcode>,
    actions: Vec<(u32, HostAction)>,
    longest: usize,
}

const FETCH: u32 = 0;
const TEST_FALSE: u32 = 0;
const TEST_TRUE: u32 = 1;
const TEST_BIAS: u32 = 2;
const CONTROL_BIAS: u32 = 0;

#[derive(Clone, Copy, Debug)]
struct Ids {
    code_c: ClusterId,
    alloc_c: ClusterId,
    cons_c: ClusterId,
    hash: ClusterId,
    opcode: ClusterId,
    test: ClusterId,
    micro: ClusterId,
}

#[derive(Clone, Debug)]
pub struct SpikingMachine {
    net: Network,
    layout: SwitchboxLayout,
    micro: MicroLayout,
    ids: Ids,
    space: Arc<crate::attractors::SymbolSpace>,
    entry: Pattern,
    alloc_head: Pattern,
}

impl SpikingMachine {
    /// Trains the code-c mappings for `program` and assembles the network
    /// with the prelude tables and the free list loaded.
    pub fn new(core: &Core, program: &LinkedProgram) -> Result<Self> {
        let cfg = &core.cfg;
        let n = cfg.register_size;
        let w_r = Arc::clone(core.registers.weights());
        let w_o = Arc::clone(core.opcodes.weights());
        let tc = core.train_config();
        let entry = core.reg(program.entry().ok_or_else(|| Error::Machine("empty program".into()))?)?;

        // Code-c mappings.
        let mut to_code2 = Vec::new();
        let mut to_arg = Vec::new();
        let mut to_eq = Vec::new();
        let mut to_neq = Vec::new();
        for ins in &program.instructions {
            let i = core.reg(&ins.symbol)?;
            to_code2.push((i.clone(), core.reg(&ins.next)?));
            let arg = match &ins.arg {
                Some(a) => core.reg(a)?,
                None => Pattern::empty(n),
            };
            to_arg.push((i.clone(), arg));
            to_eq.push((i.clone(), core.op(ins.op_eq)?));
            to_neq.push((i, core.op(ins.op_neq)?));
        }
        let (m_code2, _) = train_mapping(&core.code2_mask, &to_code2, &tc)?;
        let (m_arg, _) = train_mapping(&core.arg_mask, &to_arg, &tc)?;
        let (m_eq, _) = train_mapping(&core.eq_mask, &to_eq, &tc)?;
        let (m_neq, _) = train_mapping(&core.neq_mask, &to_neq, &tc)?;

        let mut topo = NetworkTopology::new();
        let reg_names: Vec<&str> = Reg::ALL.iter().map(|r| r.name()).collect();
        let layout = build_switchbox(&mut topo, &w_r, &reg_names, cfg.arity)?;
        let reg = |r: Reg| layout.registers[r.index()].1;

        let sym = |topo: &mut NetworkTopology, name: &str, size: usize| topo.add_cluster(ClusterSpec::symbol(name, size));
        let alloc_c = sym(&mut topo, Gate::AllocC.cluster_name(), n)?;
        let cons_c = sym(&mut topo, Gate::ConsC.cluster_name(), n)?;
        let code_c = sym(&mut topo, Gate::CodeC.cluster_name(), n)?;
        let hash = sym(&mut topo, Gate::Hash.cluster_name(), cfg.hash_size)?;
        let op_eq = sym(&mut topo, "opcode-eq", cfg.opcode_size)?;
        let op_neq = sym(&mut topo, "opcode-neq", cfg.opcode_size)?;
        let opcode = sym(&mut topo, "opcode", cfg.opcode_size)?;

        let fixed = |w: &Arc<SparseWeights>| Synapses::Fixed(Arc::clone(w));
        let assign = ConnectionKind::Assignation;
        topo.connect(reg(Reg::Alloc), alloc_c, assign, fixed(&w_r))?;
        topo.connect(reg(Reg::Cons), cons_c, assign, fixed(&w_r))?;
        topo.connect(reg(Reg::Code), code_c, assign, fixed(&w_r))?;
        topo.add_second_degree(reg(Reg::Table), reg(Reg::Key), hash, Arc::clone(&core.hash))?;

        let a = nominal_weight(cfg.register_active, cfg.kappa, n);
        let mem = ConnectionKind::OneShotMemory;
        let alloc_mem = topo.connect(alloc_c, reg(Reg::Alloc2), mem, Synapses::Memory(MemoryConnection::new(Arc::clone(&core.alloc_mask), a)))?;
        topo.connect(cons_c, reg(Reg::Car), mem, Synapses::Memory(MemoryConnection::new(Arc::clone(&core.car_mask), a)))?;
        topo.connect(cons_c, reg(Reg::Cdr), mem, Synapses::Memory(MemoryConnection::new(Arc::clone(&core.cdr_mask), a)))?;
        let mut value_mem = MemoryConnection::new(Arc::clone(&core.value_mask), nominal_weight(cfg.hash_active, cfg.kappa, n));
        value_mem.install_default(core.reg(FALSE)?);
        let hash_mem = topo.connect(hash, reg(Reg::Value), mem, Synapses::Memory(value_mem))?;

        let mapping = ConnectionKind::Mapping;
        topo.connect(code_c, reg(Reg::Code2), mapping, Synapses::Fixed(Arc::new(m_code2)))?;
        topo.connect(code_c, reg(Reg::Arg), mapping, Synapses::Fixed(Arc::new(m_arg)))?;
        topo.connect(code_c, op_eq, mapping, Synapses::Fixed(Arc::new(m_eq)))?;
        topo.connect(code_c, op_neq, mapping, Synapses::Fixed(Arc::new(m_neq)))?;
        topo.connect(op_eq, opcode, assign, fixed(&w_o))?;
        topo.connect(op_neq, opcode, assign, fixed(&w_o))?;

        // Test panel.
        let test = topo.add_cluster(ClusterSpec::panel("test", 3, cfg.panel_leak))?;
        let false_p = core.reg(FALSE)?;
        let rw = recognizer_weight(cfg.register_active);
        let rec = build_recognizer(n, 3, &[(false_p, TEST_FALSE)], rw);
        topo.connect(reg(Reg::Value), test, ConnectionKind::Recognizer, Synapses::Fixed(Arc::new(rec)))?;
        let mut tw = PanelWeights::default();
        tw.add(TEST_BIAS, TEST_BIAS, 1.0);
        tw.add(TEST_BIAS, TEST_TRUE, 1.0);
        tw.add(TEST_FALSE, TEST_TRUE, -2.0);
        topo.connect(test, test, ConnectionKind::PerNeuron, Synapses::Fixed(Arc::new(tw.build(3, 3))))?;
        topo.add_control_line(test, TEST_FALSE, ControlSignal::inhibit(op_eq))?;
        topo.add_control_line(test, TEST_TRUE, ControlSignal::inhibit(op_neq))?;

        // Control panel: bias, then one gate per relay and per gated cluster.
        let mut gated: Vec<ClusterId> = layout.relays().collect();
        let gate_cluster = |g: Gate| match g {
            Gate::AllocC => alloc_c,
            Gate::ConsC => cons_c,
            Gate::Hash => hash,
            Gate::CodeC => code_c,
        };
        gated.extend(Gate::ALL.iter().map(|&g| gate_cluster(g)));
        let gate_of: HashMap<ClusterId, u32> = gated.iter().enumerate().map(|(k, &c)| (c, k as u32 + 1)).collect();
        let control_size = gated.len() + 1;
        let control = topo.add_cluster(ClusterSpec::panel("control", control_size, cfg.panel_leak))?;
        let mut cw = PanelWeights::default();
        cw.add(CONTROL_BIAS, CONTROL_BIAS, 1.0);
        for (&c, &g) in &gate_of {
            cw.add(CONTROL_BIAS, g, 1.0);
            topo.add_control_line(control, g, ControlSignal::inhibit(c))?;
        }
        topo.connect(control, control, ConnectionKind::PerNeuron, Synapses::Fixed(Arc::new(cw.build(control_size, control_size))))?;

        // Micro panel.
        let program_micro = MicroProgram::new(cfg);
        let mut next = 1u32;
        let mut mw = PanelWeights::default();
        let mut releases: Vec<(u32, u32)> = Vec::new();
        let mut lines: Vec<(u32, ControlSignal)> = Vec::new();
        let mut starts: Vec<(Pattern, u32)> = Vec::new();
        let mut first = HashMap::new();
        let mut actions = Vec::new();
        let mut longest = 0;
        releases.push((FETCH, gate_of[&code_c]));
        mw.add(FETCH, FETCH, 1.0);
        for (&op, seq) in &program_micro.sequences {
            let s = next;
            let b = next + 1;
            next += 2;
            starts.push((core.op(op)?, s));
            // The start neuron ends the fetch, which closes code-c again;
            // the barrier blocks re-entry while the opcode pattern lingers.
            mw.add(s, FETCH, -4.0);
            mw.add(s, b, 1.0);
            let mut prev: Option<u32> = None;
            let mut total = 0;
            for step in seq {
                for t in 0..step.ticks {
                    let k = next;
                    next += 1;
                    total += 1;
                    match prev {
                        None => {
                            mw.add(s, k, 1.0);
                            mw.add(b, k, -2.0);
                            first.insert(k, op);
                        }
                        Some(p) => mw.add(p, k, 1.0),
                    }
                    prev = Some(k);
                    match &step.op {
                        MicroOp::Clear(regs) => {
                            for &r in regs {
                                lines.push((k, ControlSignal::inhibit(reg(r))));
                            }
                        }
                        MicroOp::Open { src, dst } => {
                            for c in layout.path(src.index(), dst.index()) {
                                releases.push((k, gate_of[&c]));
                            }
                        }
                        MicroOp::Gate(g, p) => {
                            let c = gate_cluster(*g);
                            releases.push((k, gate_of[&c]));
                            match p {
                                Some(Plasticity::Bind) => lines.push((k, ControlSignal::bind(c))),
                                Some(Plasticity::Unbind) => lines.push((k, ControlSignal::unbind(c))),
                                None => {}
                            }
                        }
                        MicroOp::Read if t == 0 => actions.push((k, HostAction::Read)),
                        MicroOp::Write if t == 0 => actions.push((k, HostAction::Write)),
                        MicroOp::Exit if t == 0 => actions.push((k, HostAction::Exit)),
                        _ => {}
                    }
                }
            }
            longest = longest.max(total);
            if op != Opcode::Exit {
                mw.add(prev.expect("non-empty sequence"), FETCH, 1.0);
            }
        }
        let micro_size = next as usize;
        let micro = topo.add_cluster(ClusterSpec::panel("micro", micro_size, cfg.panel_leak))?;
        let start_rec = build_recognizer(cfg.opcode_size, micro_size, &starts, recognizer_weight(cfg.opcode_active));
        topo.connect(opcode, micro, ConnectionKind::Recognizer, Synapses::Fixed(Arc::new(start_rec)))?;
        topo.connect(micro, micro, ConnectionKind::PerNeuron, Synapses::Fixed(Arc::new(mw.build(micro_size, micro_size))))?;
        let mut rel = PanelWeights::default();
        for (k, g) in releases {
            rel.add(k, g, -2.0);
        }
        topo.connect(micro, control, ConnectionKind::PerNeuron, Synapses::Fixed(Arc::new(rel.build(micro_size, control_size))))?;
        for (k, s) in lines {
            topo.add_control_line(micro, k, s)?;
        }

        // Prelude tables and the free list, written straight into the memories.
        for (t, k, v) in prelude_bindings() {
            let h = hash_activate(&core.hash, &core.reg(&t)?, &core.reg(&k)?);
            let m = topo.memory_mut(hash_mem).expect("memory connection");
            m.bind(&h, &core.reg(&v)?);
        }
        let (links, head) = free_list(cfg);
        for (s, nxt) in links {
            let (p, q) = (core.reg(&s)?, core.reg(&nxt)?);
            topo.memory_mut(alloc_mem).expect("memory connection").bind(&p, &q);
        }

        let mut machine = SpikingMachine {
            net: Network::new(topo),
            layout,
            micro: MicroLayout {
                size: micro_size,
                fetch: FETCH,
                first,
                actions,
                longest,
            },
            ids: Ids {
                code_c,
                alloc_c,
                cons_c,
                hash,
                opcode,
                test,
                micro,
            },
            space: Arc::clone(core.registers.space()),
            entry,
            alloc_head: core.reg(&head)?,
        };
        machine.reset_state();
        let _ = control;
        Ok(machine)
    }

    /// Registers empty except code = entry and alloc = free-list head;
    /// bias, gate and fetch neurons primed.
    fn reset_state(&mut self) {
        let code = self.reg_id(Reg::Code);
        let alloc = self.reg_id(Reg::Alloc);
        let (entry, head) = (self.entry.clone(), self.alloc_head.clone());
        self.net.preload(code, &entry, 1.0);
        self.net.preload(alloc, &head, 1.0);
        let control = self.net.id("control").expect("control panel");
        let ones = vec![1.0; self.net.topology().size(control)];
        self.net.set_potentials(control, &ones).expect("sizes match");
        let mut t = vec![0.0; 3];
        t[TEST_BIAS as usize] = 1.0;
        self.net.set_potentials(self.ids.test, &t).expect("sizes match");
        let mut m = vec![0.0; self.micro.size];
        m[self.micro.fetch as usize] = 1.0;
        self.net.set_potentials(self.ids.micro, &m).expect("sizes match");
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn topology(&self) -> &NetworkTopology {
        self.net.topology()
    }

    pub fn layout(&self) -> &SwitchboxLayout {
        &self.layout
    }

    fn reg_id(&self, r: Reg) -> ClusterId {
        self.layout.registers[r.index()].1
    }

    /// Symbol whose pattern a register emits exactly, if any.
    pub fn register(&self, r: Reg) -> Option<String> {
        self.space
            .lookup(self.net.spikes(self.reg_id(r)))
            .map(|i| self.space.name(i).to_string())
    }

    /// (false, true) neuron outputs of the test panel on the last tick.
    pub fn test_outputs(&self) -> (bool, bool) {
        let s = self.net.spikes(self.ids.test);
        (s.contains(&TEST_FALSE), s.contains(&TEST_TRUE))
    }

    /// Held symbol, `-` when silent, or `~nearest(overlap/firing)`.
    fn describe(&self, r: Reg) -> String {
        let s = self.net.spikes(self.reg_id(r));
        match self.space.lookup(s) {
            Some(i) => self.space.name(i).to_string(),
            None if s.is_empty() => "-".to_string(),
            None => match self.space.nearest(s) {
                Some((i, ov)) => format!("~{}({ov}/{})", self.space.name(i), s.len()),
                None => format!("?({})", s.len()),
            },
        }
    }

    fn snapshot(&self) -> String {
        Reg::ALL
            .iter()
            .map(|&r| format!("{}={}", r.name(), self.describe(r)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Runs until the exit neuron fires. `max_cycles` bounds substrate ticks.
    pub fn run(&mut self, input: &[String], max_cycles: Option<u64>, trace: bool) -> Result<RunResult> {
        self.run_observed(input, max_cycles, trace, &mut |_| Ok(()))
    }

    /// As [`run`](Self::run), calling `observe` after every tick.
    pub fn run_observed(
        &mut self,
        input: &[String],
        max_cycles: Option<u64>,
        trace: bool,
        observe: &mut dyn FnMut(&Network) -> Result<()>,
    ) -> Result<RunResult> {
        let mut input: VecDeque<String> = input.iter().cloned().collect();
        let mut res = RunResult::default();
        let start = self.net.tick();
        let reserved = self.reg_id(Reg::Reserved);
        let mut stim = Stimulus::new();
        let mut last_dispatch = start;
        let stall = self.micro.longest as u64 + 64;
        let mut code_seen = self.describe(Reg::Code);
        loop {
            self.net.step(&stim, &[])?;
            stim.clear();
            observe(&self.net)?;
            let now = self.net.tick();
            let spikes = self.net.spikes(self.ids.micro).to_vec();
            if spikes.binary_search(&self.micro.fetch).is_ok() {
                code_seen = self.describe(Reg::Code);
            }
            for &k in &spikes {
                if let Some(&op) = self.micro.first.get(&k) {
                    last_dispatch = now;
                    *res.histogram.entry(op.to_string()).or_default() += 1;
                    if trace {
                        res.trace.push(format!(
                            "{:>8} {} {} value={}",
                            now - start,
                            code_seen,
                            op,
                            self.describe(Reg::Value)
                        ));
                    }
                }
            }
            for &(k, act) in &self.micro.actions {
                if spikes.binary_search(&k).is_err() {
                    continue;
                }
                match act {
                    HostAction::Read => {
                        let s = input
                            .pop_front()
                            .ok_or_else(|| Error::Machine("read: input channel is empty".into()))?;
                        stim.add_pattern(reserved, self.space.pattern(&s)?, 1.0);
                    }
                    HostAction::Write => match self.register(Reg::Reserved) {
                        Some(s) => res.output.push(s),
                        None => {
                            return Err(Error::Machine(format!(
                                "write at tick {}: reserved holds no symbol; {}",
                                now - start,
                                self.snapshot()
                            )))
                        }
                    },
                    HostAction::Exit => {
                        res.cycles = now - start;
                        return Ok(res);
                    }
                }
            }
            if now - last_dispatch > stall {
                return Err(Error::Machine(format!(
                    "no opcode dispatched since tick {}; {}",
                    last_dispatch - start,
                    self.snapshot()
                )));
            }
            if let Some(m) = max_cycles {
                if now - start > m {
                    return Err(Error::CycleLimit(m));
                }
            }
        }
    }

    /// Cluster ids of the gated special clusters, for tests and traces.
    pub fn gated_clusters(&self) -> [ClusterId; 4] {
        [self.ids.alloc_c, self.ids.cons_c, self.ids.hash, self.ids.code_c]
    }

    pub fn opcode_cluster(&self) -> ClusterId {
        self.ids.opcode
    }
}
