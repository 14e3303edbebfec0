use primevm::assembler::*;
use primevm::Error;
use proptest::prelude::*;

fn program_text(name: &str) -> String {
    let path = format!("{}/programs/{name}.sasm", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

/// Renders expanded lines in assembly notation, one per line.
fn render(lines: &[AsmLine]) -> String {
    let mut s = String::new();
    for l in lines {
        if let Some(label) = &l.label {
            s.push_str(label);
            s.push_str(": ");
        }
        s.push('(');
        s.push_str(&l.op_eq.to_string());
        if l.op_neq != l.op_eq {
            s.push_str(", ");
            s.push_str(&l.op_neq.to_string());
        }
        if let Some(a) = &l.arg {
            s.push_str(&format!(", arg = {a}"));
        }
        s.push_str(")\n");
    }
    s
}

fn expand(text: &str) -> String {
    render(&expand_macros(&parse(text).unwrap()).unwrap())
}

#[test]
fn alloc_into_golden() {
    assert_eq!(
        expand("alloc_into(r1)"),
        "(alloc-recall)\n(alloc-unbind)\n(mov(alloc, r1))\n(mov(alloc2, alloc))\n"
    );
}

#[test]
fn dealloc_from_golden() {
    assert_eq!(expand("dealloc_from(r2)"), "(mov(alloc, alloc2))\n(mov(r2, alloc))\n(alloc-bind)\n");
}

/// Push is five steps; the first one is the allocation sequence into cons.
#[test]
fn push_golden() {
    let alloc = expand("alloc_into(cons)");
    let steps = "(mov(r1, car))\n(mov(stack, cdr))\n(cons-bind)\n(mov(cons, stack))\n";
    assert_eq!(expand("push(r1)"), format!("{alloc}{steps}"));
    assert_eq!(steps.lines().count() + 1, 5);
}

#[test]
fn pop_golden() {
    let dealloc = expand("dealloc_from(cons)");
    let steps = "(mov(stack, cons))\n(cons-recall)\n(cons-unbind)\n(mov(car, r2))\n(mov(cdr, stack))\n";
    assert_eq!(expand("pop(r2)"), format!("{steps}{dealloc}"));
}

#[test]
fn ret_golden() {
    assert_eq!(expand("ret"), "(mov(cont, code))\n");
    assert_eq!(expand("ret()"), "(mov(cont, code))\n");
}

#[test]
fn call_golden() {
    let push = expand("push(cont)");
    let pop = expand("pop(cont)");
    let got = expand("call(sub)");
    let want = format!("{push}(mov(arg, cont), arg = .ret1)\n(mov(arg, code), arg = sub)\n.ret1: {pop}");
    assert_eq!(got, want);
}

#[test]
fn if_true_golden() {
    assert_eq!(expand("if_true(write)"), "(nop, mov(arg, code), arg = .if1)\n(write)\n.if1: (nop)\n");
    let nested = expand("if_true(push(r1))");
    assert!(nested.starts_with("(nop, mov(arg, code), arg = .if1)\n"));
    assert!(nested.ends_with(".if1: (nop)\n"));
    assert_eq!(nested.lines().count(), 2 + 8);
}

#[test]
fn empty_program() {
    assert!(expand_macros(&parse("").unwrap()).unwrap().is_empty());
    let p = assemble("; nothing\n\n").unwrap();
    assert!(p.lines.is_empty());
    let linked = link(&p, 10).unwrap();
    assert!(linked.instructions.is_empty());
    assert_eq!(linked.entry(), None);
}

#[test]
fn unknown_macro() {
    let e = expand_macros(&parse("frobnicate(r1)").unwrap()).unwrap_err().to_string();
    assert!(e.contains("frobnicate"), "{e}");
    assert!(expand_macros(&parse("push(nowhere)").unwrap()).is_err());
}

#[test]
fn shorthand() {
    let p = assemble("(read)").unwrap();
    assert_eq!(p.lines[0].op_eq, Opcode::Read);
    assert_eq!(p.lines[0].op_neq, Opcode::Read);
    assert_eq!(p.lines[0].arg, None);
}

#[test]
fn branch_if_false() {
    let p = assemble("loop: (nop, mov(arg, code), arg = done)\ndone: (exit)").unwrap();
    let l = &p.lines[0];
    assert_eq!(l.label.as_deref(), Some("loop"));
    assert_eq!(l.op_eq, Opcode::Nop);
    assert_eq!(l.op_neq, Opcode::Mov(Reg::Arg, Reg::Code));
    assert_eq!(l.arg, Some(ArgExpr::Name("done".into())));
    let linked = link(&p, 10).unwrap();
    assert_eq!(linked.instructions[0].arg.as_deref(), Some("line-1"));
}

#[test]
fn syntax_errors_carry_position() {
    match assemble("(read)\n  (jump)") {
        Err(Error::Parse { line, col, msg }) => {
            assert_eq!((line, col), (2, 4));
            assert!(msg.contains("jump"), "{msg}");
        }
        r => panic!("{r:?}"),
    }
    assert!(matches!(assemble("(read"), Err(Error::Parse { line: 1, .. })));
    assert!(assemble("(mov(arg, nowhere), arg = x)").is_err());
    assert!(assemble("(read, write, nop)").is_err());
}

#[test]
fn label_errors() {
    let e = assemble("a: (read)\na: (exit)").unwrap_err().to_string();
    assert!(e.contains("duplicate"), "{e}");
    let e = assemble("(mov(arg, code), arg = nowhere)\n(exit)").unwrap_err().to_string();
    assert!(e.contains("nowhere"), "{e}");
    assert!(assemble("(mov(arg, code))\n(exit)").is_err());
}

#[test]
fn quoted_args_are_symbols() {
    let p = assemble("(mov(arg, r1), arg = '7')\n(exit)").unwrap();
    assert_eq!(p.lines[0].arg, Some(ArgExpr::Quoted("7".into())));
    let linked = link(&p, 5).unwrap();
    assert_eq!(linked.instructions[0].arg.as_deref(), Some("7"));
}

#[test]
fn straight_program_links_to_a_chain() {
    let p = assemble("(read)\n(write)\n(exit)").unwrap();
    assert!(p.warnings.is_empty());
    let l = link(&p, 3).unwrap();
    let syms: Vec<_> = l.instructions.iter().map(|i| i.symbol.clone()).collect();
    assert_eq!(syms, [code_symbol(0), code_symbol(1), code_symbol(2)]);
    assert_eq!(l.instructions[0].next, code_symbol(1));
    assert_eq!(l.instructions[1].next, code_symbol(2));
    assert_eq!(l.instructions[2].op_eq, Opcode::Exit);
    assert_eq!(l.entry(), Some("line-0"));
    assert!(matches!(link(&p, 2), Err(Error::SymbolBudget { need: 3, have: 2 })));
}

#[test]
fn missing_exit_warns() {
    assert!(!assemble("(read)\n(write)").unwrap().warnings.is_empty());
    assert!(!assemble("top: (read)\n(mov(arg, code), arg = top)").unwrap().warnings.is_empty());
}

#[test]
fn call_jumps_to_the_subroutine_entry() {
    let text = "call(sub)\n(exit)\nsub: (write)\nret";
    let p = assemble(text).unwrap();
    let l = link(&p, 40).unwrap();
    let entry = l.labels.iter().find(|(n, _)| n == "sub").unwrap().1.clone();
    let jump = l
        .instructions
        .iter()
        .find(|i| i.op_eq == Opcode::Mov(Reg::Arg, Reg::Code))
        .unwrap();
    assert_eq!(jump.arg.as_deref(), Some(entry.as_str()));
    let set_cont = l
        .instructions
        .iter()
        .find(|i| i.op_eq == Opcode::Mov(Reg::Arg, Reg::Cont))
        .unwrap();
    let ret_sym = l.labels.iter().find(|(n, _)| n.starts_with(".ret")).unwrap().1.clone();
    assert_eq!(set_cont.arg.as_deref(), Some(ret_sym.as_str()));
    // The return point pops cont.
    let ret_at = l.instructions.iter().position(|i| i.symbol == ret_sym).unwrap();
    assert_eq!(l.instructions[ret_at].op_eq, Opcode::Mov(Reg::Stack, Reg::Cons));
}

#[test]
fn unwired_mov_is_rejected_at_link() {
    let p = assemble("(mov(r1, r2))\n(exit)").unwrap();
    assert!(!MOV_TABLE.contains(&(Reg::R1, Reg::R2)));
    assert!(link(&p, 10).is_err());
}

#[test]
fn shipped_programs_link() {
    for name in ["echo", "echo2", "echo3", "add", "count-digits"] {
        let p = assemble(&program_text(name)).unwrap();
        assert!(p.warnings.is_empty(), "{name}: {:?}", p.warnings);
        let l = link(&p, 160).unwrap();
        assert_eq!(l.instructions.len(), p.lines.len());
    }
}

#[test]
fn dump_format() {
    let l = link(&assemble("(mov(arg, r1), arg = '3')\n(exit)").unwrap(), 4).unwrap();
    assert_eq!(
        l.dump(),
        "line-0\teq=mov(arg, r1)\tneq=mov(arg, r1)\targ=3\tnext=line-1\n\
         line-1\teq=exit\tneq=exit\targ=-\tnext=line-1\n"
    );
}

#[test]
fn every_mov_in_the_table_is_an_opcode() {
    let all = Opcode::all();
    assert_eq!(all.len(), 13 + MOV_TABLE.len());
    for &(a, b) in MOV_TABLE {
        assert!(all.contains(&Opcode::Mov(a, b)));
        assert_ne!(a, b);
    }
    for r in Reg::ALL {
        assert_eq!(Reg::from_name(r.name()), Some(r));
    }
}

/// Graph isomorphism up to symbol renaming: same opcodes, and args/next
/// that map through the same position.
fn same_graph(a: &LinkedProgram, b: &LinkedProgram) -> bool {
    let pos = |p: &LinkedProgram, s: &str| p.instructions.iter().position(|i| i.symbol == s);
    a.instructions.len() == b.instructions.len()
        && a.instructions.iter().zip(&b.instructions).all(|(x, y)| {
            let arg_ok = match (&x.arg, &y.arg) {
                (None, None) => true,
                (Some(p), Some(q)) => match (pos(a, p), pos(b, q)) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => p == q,
                    _ => false,
                },
                _ => false,
            };
            x.op_eq == y.op_eq && x.op_neq == y.op_neq && arg_ok && pos(a, &x.next) == pos(b, &y.next)
        })
}

#[test]
fn shipped_programs_round_trip() {
    for name in ["echo", "echo2", "echo3", "add", "count-digits"] {
        let l = link(&assemble(&program_text(name)).unwrap(), 160).unwrap();
        let back = link(&assemble(&l.disassemble()).unwrap(), 160).unwrap();
        assert!(same_graph(&l, &back), "{name}");
    }
}

fn arb_line(n_labels: usize) -> impl Strategy<Value = String> {
    let simple = prop::sample::select(vec!["read", "write", "nop", "table-recall", "cons-bind", "alloc-recall"]);
    let mov = prop::sample::select(MOV_TABLE.iter().filter(|(a, _)| *a != Reg::Arg).copied().collect::<Vec<_>>());
    let jump = (0..n_labels).prop_map(|k| format!("(nop, mov(arg, code), arg = L{k})"));
    let lit = prop::sample::select(vec!["'0'", "'9'", "false", "is-digit"]).prop_map(|a| format!("(mov(arg, r1), arg = {a})"));
    prop_oneof![
        simple.prop_map(|s| format!("({s})")),
        mov.prop_map(|(a, b)| format!("(mov({a}, {b}))")),
        jump,
        lit,
        prop::sample::select(vec!["push(reserved)", "pop(key)", "if_true(write)"]).prop_map(String::from),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn random_programs_round_trip(body in prop::collection::vec(arb_line(4), 4..30)) {
        let mut text = String::new();
        for (k, line) in body.iter().enumerate() {
            if k < 4 {
                text.push_str(&format!("L{k}: "));
            }
            text.push_str(line);
            text.push('\n');
        }
        text.push_str("(exit)\n");
        let l = link(&assemble(&text).unwrap(), 1000).unwrap();
        let back = link(&assemble(&l.disassemble()).unwrap(), 1000).unwrap();
        prop_assert!(same_graph(&l, &back));
    }
}
