//! Assembly language: registers, opcodes, a line parser, the macro
//! library, and linking onto a pool of code-line symbols.
//!
//! ```text
//! ; comment
//! loop: (read)
//!       (nop, mov(arg, code), arg = done)
//!       push(reserved)
//!       (mov(arg, code), arg = loop)
//! done: (exit)
//! ```

use crate::error::{Error, Result};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reg {
    Reserved,
    R1,
    R2,
    Table,
    Key,
    Value,
    Code,
    Code2,
    Cont,
    Arg,
    Alloc,
    Alloc2,
    Cons,
    Car,
    Cdr,
    Stack,
}

impl Reg {
    pub const ALL: [Reg; 16] = [
        Reg::Reserved,
        Reg::R1,
        Reg::R2,
        Reg::Table,
        Reg::Key,
        Reg::Value,
        Reg::Code,
        Reg::Code2,
        Reg::Cont,
        Reg::Arg,
        Reg::Alloc,
        Reg::Alloc2,
        Reg::Cons,
        Reg::Car,
        Reg::Cdr,
        Reg::Stack,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Reg::Reserved => "reserved",
            Reg::R1 => "r1",
            Reg::R2 => "r2",
            Reg::Table => "table",
            Reg::Key => "key",
            Reg::Value => "value",
            Reg::Code => "code",
            Reg::Code2 => "code2",
            Reg::Cont => "cont",
            Reg::Arg => "arg",
            Reg::Alloc => "alloc",
            Reg::Alloc2 => "alloc2",
            Reg::Cons => "cons",
            Reg::Car => "car",
            Reg::Cdr => "cdr",
            Reg::Stack => "stack",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_name(s: &str) -> Option<Reg> {
        Reg::ALL.iter().copied().find(|r| r.name() == s)
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Opcode {
    AllocRecall,
    AllocBind,
    AllocUnbind,
    ConsRecall,
    ConsBind,
    ConsUnbind,
    TableRecall,
    TableBind,
    TableUnbind,
    Read,
    Write,
    Nop,
    Exit,
    Mov(Reg, Reg),
}

const SIMPLE: [(Opcode, &str); 13] = [
    (Opcode::AllocRecall, "alloc-recall"),
    (Opcode::AllocBind, "alloc-bind"),
    (Opcode::AllocUnbind, "alloc-unbind"),
    (Opcode::ConsRecall, "cons-recall"),
    (Opcode::ConsBind, "cons-bind"),
    (Opcode::ConsUnbind, "cons-unbind"),
    (Opcode::TableRecall, "table-recall"),
    (Opcode::TableBind, "table-bind"),
    (Opcode::TableUnbind, "table-unbind"),
    (Opcode::Read, "read"),
    (Opcode::Write, "write"),
    (Opcode::Nop, "nop"),
    (Opcode::Exit, "exit"),
];

impl Opcode {
    pub fn from_simple(s: &str) -> Option<Opcode> {
        SIMPLE.iter().find(|(_, n)| *n == s).map(|(o, _)| *o)
    }

    pub fn reads_arg(self) -> bool {
        matches!(self, Opcode::Mov(Reg::Arg, _))
    }

    /// Every opcode the machine implements: the fixed ones plus the mov table.
    pub fn all() -> Vec<Opcode> {
        let mut v: Vec<Opcode> = SIMPLE.iter().map(|(o, _)| *o).collect();
        v.extend(MOV_TABLE.iter().map(|&(a, b)| Opcode::Mov(a, b)));
        v
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Opcode::Mov(a, b) => write!(f, "mov({a}, {b})"),
            o => f.write_str(SIMPLE.iter().find(|(x, _)| x == o).map(|(_, n)| *n).unwrap_or("?")),
        }
    }
}

/// Register pairs wired for mov: every pair the shipped programs use, plus
/// the three that call and ret need.
pub const MOV_TABLE: &[(Reg, Reg)] = &[
    (Reg::Reserved, Reg::Car),
    (Reg::Reserved, Reg::Key),
    (Reg::Reserved, Reg::Stack),
    (Reg::Reserved, Reg::Table),
    (Reg::R1, Reg::Key),
    (Reg::R1, Reg::Reserved),
    (Reg::R1, Reg::Stack),
    (Reg::R1, Reg::Table),
    (Reg::R1, Reg::Value),
    (Reg::R2, Reg::Stack),
    (Reg::R2, Reg::Table),
    (Reg::R2, Reg::Value),
    (Reg::Table, Reg::R1),
    (Reg::Table, Reg::Stack),
    (Reg::Value, Reg::Key),
    (Reg::Value, Reg::R1),
    (Reg::Value, Reg::Reserved),
    (Reg::Value, Reg::Table),
    (Reg::Cont, Reg::Stack),
    (Reg::Arg, Reg::Code),
    (Reg::Arg, Reg::Cont),
    (Reg::Arg, Reg::Key),
    (Reg::Arg, Reg::R1),
    (Reg::Arg, Reg::R2),
    (Reg::Arg, Reg::Reserved),
    (Reg::Arg, Reg::Stack),
    (Reg::Arg, Reg::Table),
    (Reg::Arg, Reg::Value),
    (Reg::Alloc, Reg::Alloc2),
    (Reg::Alloc, Reg::Cons),
    (Reg::Alloc, Reg::R2),
    (Reg::Alloc2, Reg::Alloc),
    (Reg::Cons, Reg::Alloc),
    (Reg::Cons, Reg::Stack),
    (Reg::Car, Reg::Key),
    (Reg::Car, Reg::Reserved),
    (Reg::Car, Reg::Table),
    (Reg::Cdr, Reg::Stack),
    (Reg::Stack, Reg::Cdr),
    (Reg::Stack, Reg::Cons),
    (Reg::Stack, Reg::Cont),
    (Reg::Stack, Reg::R1),
    (Reg::Stack, Reg::R2),
    (Reg::Stack, Reg::Reserved),
    (Reg::Stack, Reg::Table),
    (Reg::Stack, Reg::Value),
    // call and ret
    (Reg::Cont, Reg::Car),
    (Reg::Car, Reg::Cont),
    (Reg::Cont, Reg::Code),
];

/// An `arg = ...` operand: a quoted digit, or an identifier that names a
/// label or a machine symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ArgExpr {
    Name(String),
    Quoted(String),
}

impl fmt::Display for ArgExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgExpr::Name(s) => f.write_str(s),
            ArgExpr::Quoted(s) => write!(f, "'{s}'"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsmLine {
    pub label: Option<String>,
    pub op_eq: Opcode,
    pub op_neq: Opcode,
    pub arg: Option<ArgExpr>,
    /// Source line number (1-based); expansion lines share their macro's line.
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AsmProgram {
    pub lines: Vec<AsmLine>,
    pub warnings: Vec<String>,
}

/// A parsed statement, before macro expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    Instr {
        op_eq: Opcode,
        op_neq: Opcode,
        arg: Option<ArgExpr>,
    },
    Macro { name: String, args: Vec<MacroArg> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MacroArg {
    Name(String),
    Statement(Box<Statement>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceStatement {
    pub label: Option<String>,
    pub stmt: Statement,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Quoted(String),
    LParen,
    RParen,
    Comma,
    Eq,
    Colon,
}

fn lex(text: &str, line: usize) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ';' => break,
            c if c.is_whitespace() => i += 1,
            '(' | ')' | ',' | '=' | ':' => {
                out.push((
                    match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        '=' => Tok::Eq,
                        _ => Tok::Colon,
                    },
                    col,
                ));
                i += 1;
            }
            '\'' | '"' => {
                let close = chars[i + 1..]
                    .iter()
                    .position(|&d| d == c)
                    .ok_or_else(|| parse_err(line, col, "unterminated quote"))?;
                let s: String = chars[i + 1..i + 1 + close].iter().collect();
                if s.is_empty() {
                    return Err(parse_err(line, col, "empty quoted symbol"));
                }
                out.push((Tok::Quoted(s), col));
                i += close + 2;
            }
            c if c.is_alphanumeric() || c == '_' || c == '-' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '-') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            }
            c => return Err(parse_err(line, col, &format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

fn parse_err(line: usize, col: usize, msg: &str) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.to_string(),
    }
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn err(&self, msg: &str) -> Error {
        parse_err(self.line, self.col(), msg)
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(&format!("expected {what}"))),
        }
    }

    fn register(&mut self) -> Result<Reg> {
        let col = self.col();
        let name = self.ident("a register name")?;
        Reg::from_name(&name).ok_or_else(|| parse_err(self.line, col, &format!("unknown register `{name}`")))
    }

    fn opcode(&mut self) -> Result<Opcode> {
        let col = self.col();
        let name = self.ident("an opcode")?;
        if name == "mov" {
            self.expect(Tok::LParen, "`(` after mov")?;
            let a = self.register()?;
            self.expect(Tok::Comma, "`,` between mov registers")?;
            let b = self.register()?;
            self.expect(Tok::RParen, "`)` closing mov")?;
            return Ok(Opcode::Mov(a, b));
        }
        Opcode::from_simple(&name).ok_or_else(|| parse_err(self.line, col, &format!("unknown opcode `{name}`")))
    }

    fn tuple(&mut self) -> Result<Statement> {
        self.expect(Tok::LParen, "`(`")?;
        let op_eq = self.opcode()?;
        let mut op_neq = op_eq;
        let mut arg = None;
        let mut seen_second = false;
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            let is_arg = matches!(self.peek(), Some(Tok::Ident(s)) if s == "arg")
                && matches!(self.toks.get(self.pos + 1), Some((Tok::Eq, _)));
            if is_arg {
                if arg.is_some() {
                    return Err(self.err("duplicate arg"));
                }
                self.pos += 2;
                arg = Some(match self.peek() {
                    Some(Tok::Ident(s)) => ArgExpr::Name(s.clone()),
                    Some(Tok::Quoted(s)) => ArgExpr::Quoted(s.clone()),
                    _ => return Err(self.err("expected an arg value")),
                });
                self.pos += 1;
            } else {
                if seen_second || arg.is_some() {
                    return Err(self.err("at most two opcodes, before arg"));
                }
                op_neq = self.opcode()?;
                seen_second = true;
            }
        }
        self.expect(Tok::RParen, "`)` closing the instruction")?;
        Ok(Statement::Instr { op_eq, op_neq, arg })
    }

    fn statement(&mut self) -> Result<Statement> {
        match self.peek() {
            Some(Tok::LParen) => self.tuple(),
            Some(Tok::Ident(_)) => {
                let name = self.ident("a macro")?;
                let mut args = Vec::new();
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    loop {
                        match self.peek() {
                            Some(Tok::RParen) => break,
                            Some(Tok::LParen) => args.push(MacroArg::Statement(Box::new(self.tuple()?))),
                            Some(Tok::Ident(_)) => {
                                let is_call = matches!(self.toks.get(self.pos + 1), Some((Tok::LParen, _)));
                                if is_call {
                                    args.push(MacroArg::Statement(Box::new(self.statement()?)));
                                } else {
                                    args.push(MacroArg::Name(self.ident("a macro argument")?));
                                }
                            }
                            _ => return Err(self.err("expected a macro argument")),
                        }
                        if self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::RParen, "`)` closing the macro")?;
                }
                Ok(Statement::Macro { name, args })
            }
            _ => Err(self.err("expected an instruction or a macro")),
        }
    }
}

/// Parses source text into labelled statements (macros unexpanded).
pub fn parse(text: &str) -> Result<Vec<SourceStatement>> {
    let mut out = Vec::new();
    let mut pending: Option<(String, usize)> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let toks = lex(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut p = Parser {
            toks: &toks,
            pos: 0,
            line,
            end_col: raw.chars().count() + 1,
        };
        let mut label = None;
        if let (Some((Tok::Ident(s), _)), Some((Tok::Colon, _))) = (toks.first(), toks.get(1)) {
            label = Some(s.clone());
            p.pos = 2;
        }
        if p.pos == toks.len() {
            // A label alone on its line names the next statement.
            if let Some((l, ln)) = pending.take() {
                return Err(parse_err(ln, 1, &format!("label `{l}` is followed by another label")));
            }
            pending = label.map(|l| (l, line));
            continue;
        }
        if label.is_some() && pending.is_some() {
            return Err(parse_err(line, 1, "two labels on one statement"));
        }
        let label = label.or_else(|| pending.take().map(|(l, _)| l));
        let stmt = p.statement()?;
        if p.pos != toks.len() {
            return Err(p.err("unexpected trailing input"));
        }
        out.push(SourceStatement { label, stmt, line });
    }
    if let Some((l, ln)) = pending {
        return Err(parse_err(ln, 1, &format!("label `{l}` names nothing")));
    }
    Ok(out)
}

struct Expander {
    fresh: usize,
}

fn instr(op_eq: Opcode, op_neq: Opcode, arg: Option<ArgExpr>) -> Statement {
    Statement::Instr { op_eq, op_neq, arg }
}

fn one(op: Opcode) -> Statement {
    instr(op, op, None)
}

fn mov(a: Reg, b: Reg) -> Statement {
    one(Opcode::Mov(a, b))
}

impl Expander {
    fn label(&mut self, kind: &str) -> String {
        self.fresh += 1;
        format!(".{kind}{}", self.fresh)
    }

    /// Expands one statement into (label, instruction) pairs.
    fn expand(&mut self, stmt: &Statement, line: usize, out: &mut Vec<(Option<String>, Statement)>) -> Result<()> {
        let (name, args) = match stmt {
            Statement::Instr { .. } => {
                out.push((None, stmt.clone()));
                return Ok(());
            }
            Statement::Macro { name, args } => (name.as_str(), args.as_slice()),
        };
        let reg_arg = |args: &[MacroArg]| -> Result<Reg> {
            match args {
                [MacroArg::Name(r)] => Reg::from_name(r)
                    .ok_or_else(|| parse_err(line, 1, &format!("`{name}` needs a register, got `{r}`"))),
                _ => Err(parse_err(line, 1, &format!("`{name}` takes one register"))),
            }
        };
        let mut lines: Vec<(Option<String>, Statement)> = Vec::new();
        match name {
            "alloc_into" => {
                let r = reg_arg(args)?;
                lines.push((None, one(Opcode::AllocRecall)));
                lines.push((None, one(Opcode::AllocUnbind)));
                lines.push((None, mov(Reg::Alloc, r)));
                lines.push((None, mov(Reg::Alloc2, Reg::Alloc)));
            }
            "dealloc_from" => {
                let r = reg_arg(args)?;
                lines.push((None, mov(Reg::Alloc, Reg::Alloc2)));
                lines.push((None, mov(r, Reg::Alloc)));
                lines.push((None, one(Opcode::AllocBind)));
            }
            "push" => {
                let r = reg_arg(args)?;
                self.expand(&macro1("alloc_into", "cons"), line, &mut lines)?;
                lines.push((None, mov(r, Reg::Car)));
                lines.push((None, mov(Reg::Stack, Reg::Cdr)));
                lines.push((None, one(Opcode::ConsBind)));
                lines.push((None, mov(Reg::Cons, Reg::Stack)));
            }
            "pop" => {
                let r = reg_arg(args)?;
                lines.push((None, mov(Reg::Stack, Reg::Cons)));
                lines.push((None, one(Opcode::ConsRecall)));
                lines.push((None, one(Opcode::ConsUnbind)));
                lines.push((None, mov(Reg::Car, r)));
                lines.push((None, mov(Reg::Cdr, Reg::Stack)));
                self.expand(&macro1("dealloc_from", "cons"), line, &mut lines)?;
            }
            "call" => {
                let target = match args {
                    [MacroArg::Name(l)] => l.clone(),
                    _ => return Err(parse_err(line, 1, "`call` takes one label")),
                };
                let ret = self.label("ret");
                self.expand(&macro1("push", "cont"), line, &mut lines)?;
                lines.push((
                    None,
                    instr(
                        Opcode::Mov(Reg::Arg, Reg::Cont),
                        Opcode::Mov(Reg::Arg, Reg::Cont),
                        Some(ArgExpr::Name(ret.clone())),
                    ),
                ));
                lines.push((
                    None,
                    instr(
                        Opcode::Mov(Reg::Arg, Reg::Code),
                        Opcode::Mov(Reg::Arg, Reg::Code),
                        Some(ArgExpr::Name(target)),
                    ),
                ));
                let mut tail = Vec::new();
                self.expand(&macro1("pop", "cont"), line, &mut tail)?;
                tail[0].0 = Some(ret);
                lines.extend(tail);
            }
            "ret" => {
                if !args.is_empty() {
                    return Err(parse_err(line, 1, "`ret` takes no arguments"));
                }
                lines.push((None, mov(Reg::Cont, Reg::Code)));
            }
            "if_true" => {
                let action = match args {
                    [MacroArg::Statement(s)] => (**s).clone(),
                    [MacroArg::Name(op)] => match Opcode::from_simple(op) {
                        Some(o) => one(o),
                        None => Statement::Macro {
                            name: op.clone(),
                            args: vec![],
                        },
                    },
                    _ => return Err(parse_err(line, 1, "`if_true` takes one action")),
                };
                let skip = self.label("if");
                lines.push((
                    None,
                    instr(
                        Opcode::Nop,
                        Opcode::Mov(Reg::Arg, Reg::Code),
                        Some(ArgExpr::Name(skip.clone())),
                    ),
                ));
                self.expand(&action, line, &mut lines)?;
                lines.push((Some(skip), one(Opcode::Nop)));
            }
            other => return Err(parse_err(line, 1, &format!("unknown macro `{other}`"))),
        }
        out.extend(lines);
        Ok(())
    }
}

fn macro1(name: &str, arg: &str) -> Statement {
    Statement::Macro {
        name: name.to_string(),
        args: vec![MacroArg::Name(arg.to_string())],
    }
}

/// Replaces every macro by its instruction sequence.
pub fn expand_macros(stmts: &[SourceStatement]) -> Result<Vec<AsmLine>> {
    let mut ex = Expander { fresh: 0 };
    let mut out = Vec::new();
    for s in stmts {
        let mut lines = Vec::new();
        ex.expand(&s.stmt, s.line, &mut lines)?;
        for (k, (label, st)) in lines.into_iter().enumerate() {
            let label = if k == 0 { s.label.clone() } else { label };
            if let Statement::Instr { op_eq, op_neq, arg } = st {
                out.push(AsmLine {
                    label,
                    op_eq,
                    op_neq,
                    arg,
                    line: s.line,
                });
            }
        }
    }
    Ok(out)
}

/// Parses, expands macros and checks labels and arguments.
pub fn assemble(text: &str) -> Result<AsmProgram> {
    let lines = expand_macros(&parse(text)?)?;
    check(lines)
}

fn check(lines: Vec<AsmLine>) -> Result<AsmProgram> {
    let mut labels = HashMap::new();
    for (k, l) in lines.iter().enumerate() {
        if let Some(name) = &l.label {
            if labels.insert(name.clone(), k).is_some() {
                return Err(parse_err(l.line, 1, &format!("duplicate label `{name}`")));
            }
        }
    }
    for l in &lines {
        let reads = l.op_eq.reads_arg() || l.op_neq.reads_arg();
        if reads && l.arg.is_none() {
            return Err(parse_err(l.line, 1, "instruction reads arg but gives none"));
        }
        // Jump targets must be labels; other args may name machine symbols.
        let targets_code = [l.op_eq, l.op_neq]
            .iter()
            .any(|o| matches!(o, Opcode::Mov(Reg::Arg, Reg::Code)));
        if let (true, Some(ArgExpr::Name(n))) = (targets_code, &l.arg) {
            if !labels.contains_key(n) {
                return Err(parse_err(l.line, 1, &format!("undefined label `{n}`")));
            }
        }
    }
    let mut warnings = Vec::new();
    if let Some(w) = exit_warning(&lines, &labels) {
        warnings.push(w);
    }
    Ok(AsmProgram { lines, warnings })
}

/// Warns when some path can fall off the end or loop without reaching exit.
fn exit_warning(lines: &[AsmLine], labels: &HashMap<String, usize>) -> Option<String> {
    if lines.is_empty() {
        return None;
    }
    let mut seen = HashSet::new();
    let mut stack = vec![0usize];
    let mut exits = false;
    while let Some(k) = stack.pop() {
        if !seen.insert(k) {
            continue;
        }
        let l = &lines[k];
        for op in [l.op_eq, l.op_neq] {
            match op {
                Opcode::Exit => exits = true,
                Opcode::Mov(Reg::Arg, Reg::Code) => {
                    if let Some(ArgExpr::Name(n)) = &l.arg {
                        if let Some(&t) = labels.get(n) {
                            stack.push(t);
                        }
                    }
                }
                Opcode::Mov(Reg::Cont, Reg::Code) => {}
                _ => {
                    if k + 1 < lines.len() {
                        stack.push(k + 1);
                    } else {
                        return Some(format!("line {} can run past the last instruction", l.line));
                    }
                }
            }
        }
    }
    (!exits).then(|| "no reachable exit".to_string())
}

/// A linked instruction: one code-line symbol with its four bindings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instruction {
    pub symbol: String,
    pub op_eq: Opcode,
    pub op_neq: Opcode,
    pub arg: Option<String>,
    pub next: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkedProgram {
    pub instructions: Vec<Instruction>,
    /// Source labels with their code-line symbols.
    pub labels: Vec<(String, String)>,
}

/// Name of the k-th code-line symbol in the machine's pool.
pub fn code_symbol(k: usize) -> String {
    format!("line-{k}")
}

/// Name a quoted or bare argument refers to when it is not a label.
pub fn literal_symbol(arg: &ArgExpr) -> String {
    match arg {
        ArgExpr::Name(s) | ArgExpr::Quoted(s) => s.clone(),
    }
}

/// Assigns one code-line symbol per line in textual order and resolves labels.
pub fn link(program: &AsmProgram, code_pool: usize) -> Result<LinkedProgram> {
    let n = program.lines.len();
    if n > code_pool {
        return Err(Error::SymbolBudget { need: n, have: code_pool });
    }
    for l in &program.lines {
        for op in [l.op_eq, l.op_neq] {
            if let Opcode::Mov(a, b) = op {
                if !MOV_TABLE.contains(&(a, b)) {
                    return Err(parse_err(l.line, 1, &format!("{op} is not wired in this machine")));
                }
            }
        }
    }
    let mut labels = Vec::new();
    let mut by_label = HashMap::new();
    for (k, l) in program.lines.iter().enumerate() {
        if let Some(name) = &l.label {
            labels.push((name.clone(), code_symbol(k)));
            by_label.insert(name.as_str(), code_symbol(k));
        }
    }
    let instructions = program
        .lines
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let arg = l.arg.as_ref().map(|a| match a {
                ArgExpr::Name(s) => by_label.get(s.as_str()).cloned().unwrap_or_else(|| s.clone()),
                ArgExpr::Quoted(s) => s.clone(),
            });
            Instruction {
                symbol: code_symbol(k),
                op_eq: l.op_eq,
                op_neq: l.op_neq,
                arg,
                next: code_symbol(if k + 1 < n { k + 1 } else { k }),
            }
        })
        .collect();
    Ok(LinkedProgram { instructions, labels })
}

impl LinkedProgram {
    /// One line per instruction: symbol, both opcodes, arg and next.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for i in &self.instructions {
            let _ = writeln!(
                s,
                "{}\teq={}\tneq={}\targ={}\tnext={}",
                i.symbol,
                i.op_eq,
                i.op_neq,
                i.arg.as_deref().unwrap_or("-"),
                i.next
            );
        }
        s
    }

    pub fn entry(&self) -> Option<&str> {
        self.instructions.first().map(|i| i.symbol.as_str())
    }

    /// Assembly text that reassembles to an isomorphic program; every
    /// code-line argument becomes a label `L<k>`.
    pub fn disassemble(&self) -> String {
        let index: HashMap<&str, usize> = self
            .instructions
            .iter()
            .enumerate()
            .map(|(k, i)| (i.symbol.as_str(), k))
            .collect();
        let targets: HashSet<usize> = self
            .instructions
            .iter()
            .filter_map(|i| i.arg.as_deref().and_then(|a| index.get(a).copied()))
            .collect();
        let mut s = String::new();
        for (k, i) in self.instructions.iter().enumerate() {
            if targets.contains(&k) {
                let _ = write!(s, "L{k}: ");
            }
            let _ = write!(s, "({}", i.op_eq);
            if i.op_neq != i.op_eq {
                let _ = write!(s, ", {}", i.op_neq);
            }
            if let Some(a) = &i.arg {
                match index.get(a.as_str()) {
                    Some(t) => {
                        let _ = write!(s, ", arg = L{t}");
                    }
                    None if a.chars().all(|c| c.is_ascii_digit()) => {
                        let _ = write!(s, ", arg = '{a}'");
                    }
                    None => {
                        let _ = write!(s, ", arg = {a}");
                    }
                }
            }
            s.push_str(")\n");
        }
        s
    }
}
