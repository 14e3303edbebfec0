use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use primevm::analysis::{compare_filtering, FilterParams};
use primevm::assembler::{assemble, link, LinkedProgram};
use primevm::attractors::{generate_supported, train_self_connection, SpaceParams, TrainConfig, TrainedRegister};
use primevm::computer::{encode_input, Core, FunctionalMachine, RunResult, SpikingMachine};
use primevm::config::{Backend, RunConfig};
use primevm::memory::{capacity_bound, nominal_weight, recall_bound, MemoryConnection};
use primevm::substrate::SynapseMask;
use primevm::{Error, Pattern};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "primevm", version, about = "Symbolic machine built from prime attractors")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Overrides the machine seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.machine.seed = s;
        }
        cfg.machine.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Assemble, link and run a program.
    Run {
        program: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "")]
        input: String,
        /// Exit with status 1 unless the output equals this.
        #[arg(long)]
        expect: Option<String>,
        #[arg(long, value_parser = parse_backend)]
        backend: Option<Backend>,
        #[arg(long)]
        trace: bool,
        #[arg(long, value_name = "N")]
        max_cycles: Option<u64>,
        /// Directory of trained cores, keyed by machine fingerprint.
        #[arg(long, value_name = "DIR", env = "PRIMEVM_CACHE")]
        cache: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Train the symbol spaces and store them under DIR/<fingerprint>.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Assemble and link a program and print the linked instructions.
    Assemble {
        program: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Recall accuracy of a memory connection against the capacity bound, as CSV.
    BenchCapacity {
        #[command(flatten)]
        common: Common,
        /// Comma-separated live-binding counts; empty for none.
        #[arg(long, default_value = "100,400,1600,6400")]
        loads: String,
        /// Recalls probed per load.
        #[arg(long, default_value_t = 60)]
        probes: usize,
        /// Symbols in the output register.
        #[arg(long, default_value_t = 100)]
        symbols: usize,
        #[arg(long, default_value_t = 5.0)]
        gamma: f64,
        #[arg(long, default_value_t = 4.0)]
        m: f64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Spiking against non-spiking filtering of a noisy superposition.
    CompareFiltering {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        epsilon: Option<f32>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        alpha: Option<f32>,
        #[arg(long)]
        s: Option<f32>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failures carrying their exit status.
#[derive(Debug)]
enum Failure {
    Mismatch(String),
    Usage(anyhow::Error),
    Convergence(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Convergence(_) => 3,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let converge = e.chain().any(|c| {
            matches!(
                c.downcast_ref::<Error>(),
                Some(Error::CycleLimit(_) | Error::NonConvergence { .. } | Error::Machine(_))
            )
        });
        if converge {
            Failure::Convergence(e)
        } else {
            Failure::Usage(e)
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_program(path: &Path, cfg: &RunConfig) -> anyhow::Result<LinkedProgram> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let prog = assemble(&text).with_context(|| path.display().to_string())?;
    for w in &prog.warnings {
        eprintln!("warning: {w}");
    }
    link(&prog, cfg.machine.code_symbols).with_context(|| path.display().to_string())
}

fn default_cache() -> PathBuf {
    std::env::var_os("HOME")
        .map(|h| PathBuf::from(h).join(".cache/primevm"))
        .unwrap_or_else(|| PathBuf::from(".primevm-cache"))
}

/// Loads the core for `cfg` from the cache, training and storing it on a miss.
fn cached_core(cfg: &RunConfig, cache: &Path, log: &mut String) -> Result<Core, Failure> {
    let dir = cache.join(cfg.machine.fingerprint());
    if dir.join("machine.toml").exists() {
        if let Ok(core) = Core::load(&dir, &cfg.machine) {
            let _ = writeln!(log, "core: cached {}", dir.display());
            return Ok(core);
        }
    }
    let core = Core::train(&cfg.machine)?;
    core.save(&dir).with_context(|| format!("writing {}", dir.display()))?;
    let _ = writeln!(log, "core: trained, saved to {}", dir.display());
    Ok(core)
}

fn report(label: &str, r: &RunResult, trace: bool, s: &mut String) -> Result<String, Failure> {
    let text = r.text()?;
    if trace {
        for line in &r.trace {
            let _ = writeln!(s, "[{label}] {line}");
        }
    }
    let _ = writeln!(s, "{label} output: {text}");
    let _ = writeln!(s, "{label} cycles: {}", r.cycles);
    let hist: Vec<String> = r.histogram.iter().map(|(op, n)| format!("{op}={n}")).collect();
    let _ = writeln!(s, "{label} histogram: {}", hist.join(" "));
    Ok(text)
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    program: &Path,
    common: &Common,
    input: &str,
    expect: Option<&str>,
    backend: Option<Backend>,
    trace: bool,
    max_cycles: Option<u64>,
    cache: Option<PathBuf>,
    out: &Option<PathBuf>,
) -> Result<(), Failure> {
    let mut cfg = common.load()?;
    if let Some(b) = backend {
        cfg.backend = b;
    }
    cfg.trace |= trace;
    if max_cycles.is_some() {
        cfg.max_cycles = max_cycles;
    }
    let prog = load_program(program, &cfg)?;
    let symbols = encode_input(input);
    let mut s = format!("seed: {}\n", cfg.machine.seed);
    let mut outputs = Vec::new();
    if matches!(cfg.backend, Backend::Functional | Backend::Both) {
        let mut m = FunctionalMachine::new(&cfg.machine, &prog)?;
        let r = m.run(&symbols, cfg.max_cycles, cfg.trace)?;
        outputs.push(report("functional", &r, cfg.trace, &mut s)?);
    }
    if matches!(cfg.backend, Backend::Spiking | Backend::Both) {
        let cache = cache.unwrap_or_else(default_cache);
        let core = cached_core(&cfg, &cache, &mut s)?;
        let mut m = SpikingMachine::new(&core, &prog)?;
        let r = m.run(&symbols, cfg.max_cycles, cfg.trace)?;
        outputs.push(report("spiking", &r, cfg.trace, &mut s)?);
    }
    emit(out, &s)?;
    if outputs.windows(2).any(|w| w[0] != w[1]) {
        return Err(Failure::Convergence(anyhow::anyhow!(
            "backends disagree: functional {:?}, spiking {:?}",
            outputs[0],
            outputs[1]
        )));
    }
    if let Some(want) = expect {
        if outputs.iter().any(|o| o != want) {
            return Err(Failure::Mismatch(format!("expected {want:?}, got {:?}", outputs[0])));
        }
    }
    Ok(())
}

fn cmd_train(common: &Common, out: &Path) -> Result<(), Failure> {
    let cfg = common.load()?;
    let dir = out.join(cfg.machine.fingerprint());
    let core = Core::train(&cfg.machine)?;
    core.save(&dir).with_context(|| format!("writing {}", dir.display()))?;
    println!("seed: {}", cfg.machine.seed);
    println!("fingerprint: {}", cfg.machine.fingerprint());
    println!("saved: {}", dir.display());
    Ok(())
}

fn cmd_assemble(program: &Path, common: &Common, out: &Option<PathBuf>) -> Result<(), Failure> {
    let cfg = common.load()?;
    let prog = load_program(program, &cfg)?;
    let mut s = format!("# seed: {}\n", cfg.machine.seed);
    s.push_str(&prog.dump());
    emit(out, &s)?;
    Ok(())
}

fn random_pattern(size: usize, active: usize, rng: &mut ChaCha8Rng) -> Pattern {
    let v = sample(rng, size, active).into_iter().map(|i| i as u32).collect();
    Pattern::from_unsorted(size, v).expect("sampled indices are in range")
}

/// Fraction of `probes` bound inputs that recall their own output symbol
/// with `load` live bindings.
fn recall_accuracy(reg: &TrainedRegister, kappa: usize, load: usize, probes: usize, seed: u64) -> f64 {
    let n = reg.size();
    let active = reg.space().active();
    let outs = reg.space().patterns();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask = Arc::new(SynapseMask::random(n, n, kappa, &mut rng));
    let mut mem = MemoryConnection::new(mask, nominal_weight(active, kappa, n));
    let pairs: Vec<(Pattern, &Pattern)> =
        (0..load).map(|k| (random_pattern(n, active, &mut rng), &outs[k % outs.len()])).collect();
    for (a, b) in &pairs {
        mem.bind(a, b);
    }
    let step = (load / probes.max(1)).max(1);
    let probed: Vec<_> = pairs.iter().step_by(step).take(probes).collect();
    if probed.is_empty() {
        return 0.0;
    }
    let ok = probed.iter().filter(|(a, b)| recall_bound(&mem, a, reg, 60).as_ref() == Some(*b)).count();
    ok as f64 / probed.len() as f64
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    common: &Common,
    loads: &str,
    probes: usize,
    symbols: usize,
    gamma: f64,
    m: f64,
    out: &Option<PathBuf>,
) -> Result<(), Failure> {
    let cfg = common.load()?.machine;
    let loads: Vec<usize> = loads
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().with_context(|| format!("bad load `{t}`")))
        .collect::<anyhow::Result<_>>()?;
    eprintln!("seed: {}", cfg.seed);
    let mut s = String::from("live_bindings,recall_accuracy,predicted_capacity\n");
    if !loads.is_empty() {
        let (n, active) = (cfg.register_size, cfg.register_active);
        let c = active as f64 / n as f64;
        let bound = capacity_bound(c, c, gamma, m, 0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mask = Arc::new(SynapseMask::random(n, n, cfg.kappa, &mut rng));
        let names: Vec<String> = (0..symbols).map(|i| format!("s{i}")).collect();
        let params = SpaceParams { size: n, active, seed: cfg.seed.wrapping_add(1) };
        let space = Arc::new(generate_supported(params, &names, &mask)?);
        let tc = TrainConfig { alpha: cfg.alpha, excite: cfg.excite, ..TrainConfig::default() };
        let reg = train_self_connection(space, mask, &tc)?;
        let acc: Vec<f64> = std::thread::scope(|sc| {
            let handles: Vec<_> = loads
                .iter()
                .enumerate()
                .map(|(k, &l)| {
                    let reg = &reg;
                    let seed = cfg.seed.wrapping_add(100 + k as u64);
                    sc.spawn(move || recall_accuracy(reg, cfg.kappa, l, probes, seed))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("bench worker")).collect()
        });
        for (l, a) in loads.iter().zip(acc) {
            let _ = writeln!(s, "{l},{a:.4},{bound}");
        }
    }
    emit(out, &s)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_compare(
    seed: Option<u64>,
    l: Option<usize>,
    epsilon: Option<f32>,
    c: Option<f64>,
    alpha: Option<f32>,
    sp: Option<f32>,
    steps: Option<usize>,
    out: &Option<PathBuf>,
) -> Result<(), Failure> {
    let d = FilterParams::default();
    let p = FilterParams {
        l: l.unwrap_or(d.l),
        epsilon: epsilon.unwrap_or(d.epsilon),
        c: c.unwrap_or(d.c),
        alpha: alpha.unwrap_or(d.alpha),
        s: sp.unwrap_or(d.s),
        steps: steps.unwrap_or(d.steps),
    };
    let r = compare_filtering(&p)?;
    // The comparison is deterministic; the seed is echoed for uniformity.
    let mut s = format!("seed: {}\n", seed.unwrap_or(RunConfig::default().machine.seed));
    let _ = writeln!(
        s,
        "params: l={} epsilon={} c={} alpha={} s={} steps={} n={}",
        p.l, p.epsilon, p.c, p.alpha, p.s, p.steps, r.n
    );
    let _ = writeln!(s, "non-spiking zero at: {:?}", r.nonspiking_zero_at);
    let _ = writeln!(s, "spiking outcome: {:?}", r.outcome);
    let _ = writeln!(s, "step,nonspiking_max,spiking_firing");
    for (k, (x, f)) in r.nonspiking_max.iter().zip(&r.spiking_firing).enumerate() {
        let fired: Vec<String> = f.iter().map(|i| format!("A{}", i + 1)).collect();
        let _ = writeln!(s, "{},{x},{}", k + 1, fired.join(" "));
    }
    emit(out, &s)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run { program, common, input, expect, backend, trace, max_cycles, cache, out } => cmd_run(
            &program,
            &common,
            &input,
            expect.as_deref(),
            backend,
            trace,
            max_cycles,
            cache,
            &out,
        ),
        Cmd::Train { common, out } => cmd_train(&common, &out),
        Cmd::Assemble { program, common, out } => cmd_assemble(&program, &common, &out),
        Cmd::BenchCapacity { common, loads, probes, symbols, gamma, m, out } => {
            cmd_bench(&common, &loads, probes, symbols, gamma, m, &out)
        }
        Cmd::CompareFiltering { seed, l, epsilon, c, alpha, s, steps, out } => {
            cmd_compare(seed, l, epsilon, c, alpha, s, steps, &out)
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Mismatch(m) => eprintln!("mismatch: {m}"),
                Failure::Usage(e) | Failure::Convergence(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}
