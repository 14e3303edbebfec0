use primevm::assembler::{assemble, link, LinkedProgram, Opcode, Reg, MOV_TABLE};
use primevm::computer::*;
use primevm::config::MachineConfig;
use primevm::substrate::assert_topology_limits;
use primevm::Error;
use proptest::prelude::*;
use std::sync::OnceLock;

fn cfg() -> MachineConfig {
    MachineConfig::default()
}

fn core() -> &'static Core {
    static C: OnceLock<Core> = OnceLock::new();
    C.get_or_init(|| Core::train(&cfg()).unwrap())
}

fn linked(text: &str) -> LinkedProgram {
    link(&assemble(text).unwrap(), cfg().code_symbols).unwrap()
}

fn program(name: &str) -> LinkedProgram {
    let path = format!("{}/programs/{name}.sasm", env!("CARGO_MANIFEST_DIR"));
    linked(&std::fs::read_to_string(path).unwrap())
}

fn functional(p: &LinkedProgram, input: &str) -> RunResult {
    let mut m = FunctionalMachine::new(&cfg(), p).unwrap();
    m.run(&encode_input(input), Some(10_000_000), false).unwrap()
}

fn spiking(p: &LinkedProgram, input: &str, trace: bool) -> (SpikingMachine, RunResult) {
    let mut m = SpikingMachine::new(core(), p).unwrap();
    let r = m.run(&encode_input(input), Some(2_000_000), trace).unwrap();
    (m, r)
}

const PROGRAMS: [(&str, &str, &str); 10] = [
    ("echo", "1234", "1234"),
    ("echo2", "12345", "54321"),
    ("echo3", "2345678", "2345678"),
    ("add", "0+1", "1"),
    ("add", "1969+1973", "3942"),
    ("add", "99995+5", "100000"),
    ("add", "21341000009+5", "21341000014"),
    ("count-digits", "0", ":0:1:"),
    ("count-digits", "212", ":1:1::2:2:"),
    ("count-digits", "2214523678703", ":0:1::1:1::2:3::3:2::4:1::5:1::6:1::7:2::8:1:"),
];

#[test]
fn functional_outputs() {
    for (name, input, want) in PROGRAMS {
        let r = functional(&program(name), input);
        assert_eq!(r.text().unwrap(), want, "{name} {input}");
        assert!(r.cycles > 0);
        assert_eq!(r.histogram.get("exit"), Some(&1));
    }
}

#[test]
fn prelude_tables() {
    let m = FunctionalMachine::new(&cfg(), &program("echo")).unwrap();
    assert_eq!(m.table_get(IS_DIGIT, "7"), Some(TRUE));
    assert_eq!(m.table_get(IS_DIGIT, NONDIGIT), None);
    assert_eq!(m.table_get(ADD_MOD_10, &pair(9, 3)), Some("2"));
    assert_eq!(m.table_get(ADD_CARRY, &pair(9, 3)), Some(TRUE));
    assert_eq!(m.table_get(ADD_CARRY, &pair(1, 2)), Some(FALSE));
    assert_eq!(m.table_get("3", "4"), Some(pair(3, 4).as_str()));
    assert_eq!(prelude_bindings().len(), 310);
    assert_eq!(m.free_count(), cfg().free_symbols);
    assert_eq!(m.register(Reg::Code), Some("line-0"));
}

/// Looks up (table, key) on a running machine and writes the value.
fn lookup_program(table: &str, key: &str) -> LinkedProgram {
    linked(&format!(
        "(mov(arg, table), arg = {table})\n(mov(arg, key), arg = {key})\n(table-recall)\n\
         (mov(value, reserved))\n(write)\n(exit)\n"
    ))
}

#[test]
fn prelude_recalls_on_both_backends() {
    let cases = [
        (IS_DIGIT, "'7'".to_string(), TRUE.to_string()),
        (IS_DIGIT, NONDIGIT.to_string(), FALSE.to_string()),
        (ADD_MOD_10, pair(9, 3), "2".to_string()),
        (ADD_CARRY, pair(9, 3), TRUE.to_string()),
        (ADD_CARRY, pair(1, 2), FALSE.to_string()),
    ];
    for (t, k, v) in cases {
        let p = lookup_program(t, &k);
        assert_eq!(functional(&p, "").output, [v.clone()], "{t}[{k}]");
        assert_eq!(spiking(&p, "", false).1.output, [v], "{t}[{k}] spiking");
    }
}

/// Opcodes that leave value, code, arg and the memories alone.
const SAFE: [Opcode; 10] = [
    Opcode::Nop,
    Opcode::Mov(Reg::Arg, Reg::R1),
    Opcode::Mov(Reg::Arg, Reg::R2),
    Opcode::Mov(Reg::Arg, Reg::Key),
    Opcode::Mov(Reg::Arg, Reg::Reserved),
    Opcode::Mov(Reg::Arg, Reg::Table),
    Opcode::Mov(Reg::R1, Reg::Key),
    Opcode::Mov(Reg::Reserved, Reg::Key),
    Opcode::Mov(Reg::Value, Reg::R1),
    Opcode::Mov(Reg::R2, Reg::Table),
];

/// A straight 30-line program: set value, 28 two-way lines, exit.
fn dispatch_program(value: &str) -> (LinkedProgram, Vec<(Opcode, Opcode)>) {
    let mut text = format!("(mov(arg, value), arg = {value})\n");
    let mut pairs = Vec::new();
    for k in 0..28 {
        let a = SAFE[k % SAFE.len()];
        let b = SAFE[(3 * k + 1) % SAFE.len()];
        let b = if a == b { SAFE[(k + 5) % SAFE.len()] } else { b };
        pairs.push((a, b));
        text.push_str(&format!("({a}, {b}, arg = '3')\n"));
    }
    text.push_str("(exit)\n");
    let p = linked(&text);
    assert_eq!(p.instructions.len(), 30);
    for &(a, b) in &pairs {
        for op in [a, b] {
            if let Opcode::Mov(x, y) = op {
                assert!(MOV_TABLE.contains(&(x, y)));
            }
        }
    }
    (p, pairs)
}

/// Opcode names in dispatch order, read from a trace.
fn dispatched(trace: &[String]) -> Vec<(String, String)> {
    trace
        .iter()
        .map(|l| {
            let mut parts = l.split_whitespace();
            parts.next();
            let sym = parts.next().unwrap().to_string();
            let rest: Vec<&str> = parts.collect();
            let rest = rest.join(" ");
            let op = rest.split(" value=").next().unwrap().to_string();
            (sym, op)
        })
        .collect()
}

#[test]
fn dispatch_follows_the_test_outcome() {
    for (value, take_eq) in [(FALSE, false), ("'7'", true)] {
        let (p, pairs) = dispatch_program(value);
        let mut want: Vec<(String, String)> = vec![("line-0".into(), "mov(arg, value)".into())];
        for (k, &(a, b)) in pairs.iter().enumerate() {
            let op = if take_eq { a } else { b };
            want.push((format!("line-{}", k + 1), op.to_string()));
        }
        want.push(("line-29".into(), "exit".into()));

        let mut fm = FunctionalMachine::new(&cfg(), &p).unwrap();
        let r = fm.run(&[], None, true).unwrap();
        assert_eq!(dispatched(&r.trace), want, "functional, value {value}");

        let (_, r) = spiking(&p, "", true);
        assert_eq!(dispatched(&r.trace), want, "spiking, value {value}");
    }
}

#[test]
fn test_circuit() {
    let run = |text: &str| spiking(&linked(text), "", false).0.test_outputs();
    assert_eq!(run("(mov(arg, value), arg = false)\n(exit)"), (true, false));
    assert_eq!(run("(mov(arg, value), arg = '7')\n(exit)"), (false, true));
    // A silent value register reads as not-false.
    assert_eq!(run("(nop)\n(exit)"), (false, true));
}

#[test]
fn stack_restores_and_frees() {
    let p = program("echo2");
    for input in ["", "7", "31415926535"] {
        let mut m = FunctionalMachine::new(&cfg(), &p).unwrap();
        let r = m.run(&encode_input(input), None, false).unwrap();
        let rev: String = input.chars().rev().collect();
        assert_eq!(r.text().unwrap(), rev);
        assert_eq!(m.register(Reg::Stack), Some(FALSE));
        assert_eq!(m.free_count(), cfg().free_symbols);
    }
}

const SUBROUTINES: &str = "
        (mov(arg, stack), arg = false)
        (mov(arg, cont), arg = false)
        (read)
        call(out)
        call(twice)
        (exit)
out:    (write)
        ret
twice:  call(out)
        call(out)
        ret
";

#[test]
fn subroutines_restore_cont() {
    let p = linked(SUBROUTINES);
    let mut m = FunctionalMachine::new(&cfg(), &p).unwrap();
    let r = m.run(&encode_input("5"), None, false).unwrap();
    assert_eq!(r.text().unwrap(), "555");
    assert_eq!(m.register(Reg::Cont), Some(FALSE));
    assert_eq!(m.register(Reg::Stack), Some(FALSE));
    assert_eq!(m.free_count(), cfg().free_symbols);
    let (_, s) = spiking(&p, "5", false);
    assert_eq!(s.output, r.output);
}

#[test]
fn spiking_echo() {
    let (m, r) = spiking(&program("echo"), "1234", false);
    assert_eq!(r.text().unwrap(), "1234");
    assert_eq!(m.register(Reg::Value).as_deref(), Some(FALSE));
    let (_, again) = spiking(&program("echo"), "1234", false);
    assert_eq!(again.cycles, r.cycles);
}

#[test]
fn read_on_empty_input_is_an_error() {
    let p = linked("(read)\n(read)\n(exit)");
    let mut m = FunctionalMachine::new(&cfg(), &p).unwrap();
    assert!(matches!(m.run(&[NONDIGIT.to_string()], None, false), Err(Error::Machine(_))));
    let mut s = SpikingMachine::new(core(), &p).unwrap();
    assert!(matches!(s.run(&[NONDIGIT.to_string()], Some(100_000), false), Err(Error::Machine(_))));
}

#[test]
fn cycle_limit() {
    let p = linked("top: (nop)\n(mov(arg, code), arg = top)");
    let mut m = FunctionalMachine::new(&cfg(), &p).unwrap();
    assert!(matches!(m.run(&[], Some(5000), false), Err(Error::CycleLimit(5000))));
    let mut s = SpikingMachine::new(core(), &p).unwrap();
    assert!(matches!(s.run(&[], Some(5000), false), Err(Error::CycleLimit(5000))));
}

#[test]
fn functional_preconditions() {
    // Unbinding a pair that was never bound.
    let p = linked("(mov(arg, table), arg = '1')\n(mov(arg, key), arg = '2')\n(mov(arg, value), arg = '3')\n(table-unbind)\n(exit)");
    let mut m = FunctionalMachine::new(&cfg(), &p).unwrap();
    assert!(m.run(&[], None, false).is_err());
}

#[test]
fn alloc_round_trip_keeps_the_free_list() {
    let p = linked("alloc_into(cons)\ndealloc_from(cons)\n(exit)");
    let mut m = FunctionalMachine::new(&cfg(), &p).unwrap();
    let head = m.register(Reg::Alloc).unwrap().to_string();
    m.run(&[], None, false).unwrap();
    assert_eq!(m.free_count(), cfg().free_symbols);
    assert_eq!(m.register(Reg::Alloc), Some(head.as_str()));
}

#[test]
fn micro_sequences() {
    let c = cfg();
    let mp = MicroProgram::new(&c);
    assert_eq!(mp.sequences.len(), Opcode::all().len());
    for (op, seq) in &mp.sequences {
        assert!(seq.iter().all(|s| s.ticks > 0), "{op}");
        if *op == Opcode::Exit {
            assert_eq!(seq, &[MicroStep { op: MicroOp::Exit, ticks: 1 }]);
            continue;
        }
        // Every sequence first moves code2 into code, then runs its body,
        // then clears code2 and arg before the next fetch.
        assert_eq!(seq[0].op, MicroOp::Clear(vec![Reg::Code]));
        assert_eq!(seq[1].op, MicroOp::Open { src: Reg::Code2, dst: Reg::Code });
        assert_eq!(seq.last().unwrap().op, MicroOp::Clear(vec![Reg::Code2, Reg::Arg]));
        assert_eq!(mp.ticks(*op).unwrap(), seq.iter().map(|s| s.ticks as u64).sum::<u64>());
    }
    let mov = mp.get(Opcode::Mov(Reg::R1, Reg::Key)).unwrap();
    assert_eq!(mov[2].op, MicroOp::Clear(vec![Reg::Key]));
    assert_eq!(mov[3].op, MicroOp::Open { src: Reg::R1, dst: Reg::Key });
    assert!(mp.get(Opcode::Mov(Reg::R1, Reg::R2)).is_err());
}

#[test]
fn machine_topology_respects_limits() {
    let c = cfg();
    let m = SpikingMachine::new(core(), &program("count-digits")).unwrap();
    let report = assert_topology_limits(m.topology(), c.kappa);
    assert!(report.is_empty(), "{report:?}");
    assert_eq!(m.layout().registers.len(), 16);
}

#[test]
fn symbol_budget() {
    let c = cfg();
    let names = symbol_names(&c);
    assert!(names.len() >= 300);
    let unique: std::collections::HashSet<_> = names.iter().collect();
    assert_eq!(unique.len(), names.len());
    let (links, head) = free_list(&c);
    assert_eq!(links.len(), c.free_symbols);
    assert_eq!(links[0].1, FALSE);
    assert_eq!(head, free_symbol(c.free_symbols - 1));
    let too_long = "(nop)\n".repeat(c.code_symbols + 1) + "(exit)";
    assert!(link(&assemble(&too_long).unwrap(), c.code_symbols).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    /// Pushing then popping any digit sequence reverses it and returns every
    /// cons symbol to the free pool.
    #[test]
    fn stack_discipline(digits in "[0-9]{0,40}") {
        let mut m = FunctionalMachine::new(&cfg(), &program("echo2")).unwrap();
        let r = m.run(&encode_input(&digits), None, false).unwrap();
        let rev: String = digits.chars().rev().collect();
        prop_assert_eq!(r.text().unwrap(), rev);
        prop_assert_eq!(m.register(Reg::Stack), Some(FALSE));
        prop_assert_eq!(m.free_count(), cfg().free_symbols);
    }

    #[test]
    fn add_matches_integers(a in 0u64..1_000_000_000, b in 0u64..1_000_000_000) {
        let r = functional(&program("add"), &format!("{a}+{b}"));
        prop_assert_eq!(r.text().unwrap(), (a + b).to_string());
    }
}

#[test]
fn saved_core_reloads() {
    let dir = tempfile::tempdir().unwrap();
    core().save(dir.path()).unwrap();
    let loaded = Core::load(dir.path(), core().config()).unwrap();
    assert_eq!(loaded.registers().weights().values(), core().registers().weights().values());
    assert_eq!(loaded.opcodes().space().to_text(), core().opcodes().space().to_text());
    let p = program("echo");
    let a = SpikingMachine::new(core(), &p).unwrap().run(&encode_input("1234"), None, false).unwrap();
    let b = SpikingMachine::new(&loaded, &p).unwrap().run(&encode_input("1234"), None, false).unwrap();
    assert_eq!((a.output, a.cycles), (b.output, b.cycles));

    let other = MachineConfig { seed: 2, ..core().config().clone() };
    assert!(matches!(Core::load(dir.path(), &other), Err(Error::Config(_))));
}
