//! Symbol-slot interpreter of the instruction set.

use super::{free_list, prelude_bindings, MicroProgram, RunResult, FALSE};
use crate::assembler::{Instruction, LinkedProgram, Opcode, Reg};
use crate::config::MachineConfig;
use crate::error::{Error, Result};
use std::collections::{HashMap, VecDeque};

/// Registers hold at most one symbol; memories are maps. Preconditions of
/// the bind, unbind and recall opcodes are checked and violations are errors.
#[derive(Clone, Debug)]
pub struct FunctionalMachine {
    regs: [Option<String>; 16],
    alloc: HashMap<String, String>,
    cons: HashMap<String, (String, String)>,
    table: HashMap<(String, String), String>,
    code: HashMap<String, Instruction>,
    micro: MicroProgram,
}

fn need(regs: &[Option<String>; 16], r: Reg, op: Opcode) -> Result<String> {
    regs[r.index()]
        .clone()
        .ok_or_else(|| Error::Machine(format!("{op}: register {r} is empty")))
}

impl FunctionalMachine {
    pub fn new(cfg: &MachineConfig, program: &LinkedProgram) -> Result<Self> {
        let entry = program
            .entry()
            .ok_or_else(|| Error::Machine("empty program".into()))?
            .to_string();
        let (links, head) = free_list(cfg);
        let mut regs: [Option<String>; 16] = Default::default();
        regs[Reg::Code.index()] = Some(entry);
        regs[Reg::Alloc.index()] = Some(head);
        Ok(FunctionalMachine {
            regs,
            alloc: links.into_iter().collect(),
            cons: HashMap::new(),
            table: prelude_bindings().into_iter().map(|(t, k, v)| ((t, k), v)).collect(),
            code: program.instructions.iter().map(|i| (i.symbol.clone(), i.clone())).collect(),
            micro: MicroProgram::new(cfg),
        })
    }

    pub fn register(&self, r: Reg) -> Option<&str> {
        self.regs[r.index()].as_deref()
    }

    /// Number of symbols reachable on the free list from the alloc register.
    pub fn free_count(&self) -> usize {
        let mut n = 0;
        let mut cur = self.register(Reg::Alloc).map(str::to_string);
        while let Some(s) = cur {
            if s == FALSE {
                break;
            }
            n += 1;
            cur = self.alloc.get(&s).cloned();
        }
        n
    }

    pub fn table_get(&self, table: &str, key: &str) -> Option<&str> {
        self.table.get(&(table.to_string(), key.to_string())).map(String::as_str)
    }

    /// Runs until exit. `max_cycles` bounds the nominal tick count.
    pub fn run(&mut self, input: &[String], max_cycles: Option<u64>, trace: bool) -> Result<RunResult> {
        let mut input: VecDeque<String> = input.iter().cloned().collect();
        let mut res = RunResult::default();
        loop {
            let at = need(&self.regs, Reg::Code, Opcode::Nop)?;
            let ins = self
                .code
                .get(&at)
                .cloned()
                .ok_or_else(|| Error::Machine(format!("`{at}` is not an instruction")))?;
            let take_eq = self.register(Reg::Value) != Some(FALSE);
            let op = if take_eq { ins.op_eq } else { ins.op_neq };
            if trace {
                res.trace.push(format!(
                    "{:>8} {} {} value={}",
                    res.cycles,
                    ins.symbol,
                    op,
                    self.register(Reg::Value).unwrap_or("-")
                ));
            }
            *res.histogram.entry(op.to_string()).or_default() += 1;
            res.cycles += self.micro.ticks(op)?;
            if op == Opcode::Exit {
                return Ok(res);
            }
            self.regs[Reg::Code2.index()] = Some(ins.next.clone());
            self.regs[Reg::Arg.index()] = ins.arg.clone();
            self.regs[Reg::Code.index()] = Some(ins.next);
            self.execute(op, &mut input, &mut res.output)?;
            self.regs[Reg::Code2.index()] = None;
            self.regs[Reg::Arg.index()] = None;
            if let Some(m) = max_cycles {
                if res.cycles > m {
                    return Err(Error::CycleLimit(m));
                }
            }
        }
    }

    fn execute(&mut self, op: Opcode, input: &mut VecDeque<String>, output: &mut Vec<String>) -> Result<()> {
        let r = &mut self.regs;
        let fail = |m: &str| Err(Error::Machine(format!("{op}: {m}")));
        match op {
            Opcode::AllocRecall => {
                let a = need(r, Reg::Alloc, op)?;
                match self.alloc.get(&a) {
                    Some(n) => r[Reg::Alloc2.index()] = Some(n.clone()),
                    None => return fail(&format!("`{a}` has no link")),
                }
            }
            Opcode::AllocBind => {
                let (a, b) = (need(r, Reg::Alloc, op)?, need(r, Reg::Alloc2, op)?);
                if self.alloc.contains_key(&a) {
                    return fail(&format!("`{a}` is already linked"));
                }
                self.alloc.insert(a, b);
            }
            Opcode::AllocUnbind => {
                let (a, b) = (need(r, Reg::Alloc, op)?, need(r, Reg::Alloc2, op)?);
                if self.alloc.get(&a) != Some(&b) {
                    return fail(&format!("`{a}` is not linked to `{b}`"));
                }
                self.alloc.remove(&a);
            }
            Opcode::ConsRecall => {
                let c = need(r, Reg::Cons, op)?;
                match self.cons.get(&c) {
                    Some((a, d)) => {
                        r[Reg::Car.index()] = Some(a.clone());
                        r[Reg::Cdr.index()] = Some(d.clone());
                    }
                    None => return fail(&format!("`{c}` is not a cons cell")),
                }
            }
            Opcode::ConsBind => {
                let c = need(r, Reg::Cons, op)?;
                let cell = (need(r, Reg::Car, op)?, need(r, Reg::Cdr, op)?);
                if self.cons.contains_key(&c) {
                    return fail(&format!("`{c}` is already a cons cell"));
                }
                self.cons.insert(c, cell);
            }
            Opcode::ConsUnbind => {
                let c = need(r, Reg::Cons, op)?;
                let cell = (need(r, Reg::Car, op)?, need(r, Reg::Cdr, op)?);
                if self.cons.get(&c) != Some(&cell) {
                    return fail(&format!("`{c}` does not hold car and cdr"));
                }
                self.cons.remove(&c);
            }
            Opcode::TableRecall => {
                let k = (need(r, Reg::Table, op)?, need(r, Reg::Key, op)?);
                let v = self.table.get(&k).cloned().unwrap_or_else(|| FALSE.to_string());
                r[Reg::Value.index()] = Some(v);
            }
            Opcode::TableBind => {
                let k = (need(r, Reg::Table, op)?, need(r, Reg::Key, op)?);
                let v = need(r, Reg::Value, op)?;
                if self.table.contains_key(&k) {
                    return fail(&format!("({}, {}) is already bound", k.0, k.1));
                }
                self.table.insert(k, v);
            }
            Opcode::TableUnbind => {
                let k = (need(r, Reg::Table, op)?, need(r, Reg::Key, op)?);
                let v = need(r, Reg::Value, op)?;
                if self.table.get(&k) != Some(&v) {
                    return fail(&format!("({}, {}) is not bound to `{v}`", k.0, k.1));
                }
                self.table.remove(&k);
            }
            Opcode::Read => match input.pop_front() {
                Some(s) => r[Reg::Reserved.index()] = Some(s),
                None => return fail("input channel is empty"),
            },
            Opcode::Write => output.push(need(r, Reg::Reserved, op)?),
            Opcode::Nop => {}
            Opcode::Exit => {}
            Opcode::Mov(a, b) => r[b.index()] = r[a.index()].clone(),
        }
        Ok(())
    }
}
