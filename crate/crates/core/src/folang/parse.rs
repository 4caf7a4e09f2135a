use std::fmt;

use indexmap::IndexMap;
use num_bigint::BigInt;

use super::ast::{Formula, NameExpr};
use super::FolangError;
use crate::boolalg::{Algebra, EventLit};
use crate::bvm::HfSet;
use crate::lzero::RandVar;
use crate::rational::{format_rational, Rational};

const KEYWORDS: &[&str] =
    &["forall", "exists", "in", "not", "and", "or", "true", "false", "canon", "scalar", "mix", "top", "bot"];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: &[&str] = &["->", "=", "(", ")", "{", "}", "[", "]", ",", ";", ":", "/", "-"];

fn lex(text: &str, first_line: usize) -> Result<Vec<Token>, FolangError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0, first_line, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            column += 1;
            i += 1;
            continue;
        }
        let start_col = column;
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                i += 1;
                column += 1;
            }
            out.push(Token { tok: Tok::Ident(s), line, column: start_col });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                i += 1;
                column += 1;
            }
            out.push(Token { tok: Tok::Num(s), line, column: start_col });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                column += sym.len();
                out.push(Token { tok: Tok::Sym(sym), line, column: start_col });
            }
            None => {
                return Err(FolangError::Syntax { line, column, message: format!("unexpected character '{c}'") });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, column });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str, first_line: usize) -> Result<Self, FolangError> {
        Ok(Parser { toks: lex(text, first_line)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn error(&self, message: impl Into<String>) -> FolangError {
        let t = &self.toks[self.pos];
        FolangError::Syntax { line: t.line, column: t.column, message: message.into() }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn at_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.at_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), FolangError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{s}'")))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<(), FolangError> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{k}'")))
        }
    }

    fn ident(&mut self) -> Result<String, FolangError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error("expected an identifier")),
        }
    }

    fn number(&mut self) -> Result<String, FolangError> {
        match self.peek() {
            Tok::Num(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error("expected a number")),
        }
    }

    fn finish(&self) -> Result<(), FolangError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn formula(&mut self) -> Result<Formula, FolangError> {
        let universal = self.at_kw("forall");
        if universal || self.at_kw("exists") {
            self.bump();
            let var = self.ident()?;
            self.expect_kw("in")?;
            let bound = self.name_expr()?;
            self.expect_sym(":")?;
            let body = Box::new(self.formula()?);
            return Ok(if universal {
                Formula::Forall { var, bound, body }
            } else {
                Formula::Exists { var, bound, body }
            });
        }
        self.implication()
    }

    fn implication(&mut self) -> Result<Formula, FolangError> {
        let left = self.disjunction()?;
        if self.eat_sym("->") {
            let right = self.implication()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Formula, FolangError> {
        let mut left = self.conjunction()?;
        while self.eat_kw("or") {
            left = Formula::or(left, self.conjunction()?);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Formula, FolangError> {
        let mut left = self.unary()?;
        while self.eat_kw("and") {
            left = Formula::and(left, self.unary()?);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, FolangError> {
        if self.eat_kw("not") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat_sym("(") {
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        if self.eat_kw("true") {
            return Ok(Formula::True);
        }
        if self.eat_kw("false") {
            return Ok(Formula::False);
        }
        let left = self.name_expr()?;
        if self.eat_sym("=") {
            return Ok(Formula::eq(left, self.name_expr()?));
        }
        if self.eat_kw("in") {
            return Ok(Formula::member(left, self.name_expr()?));
        }
        Err(self.error("expected '=' or 'in'"))
    }

    fn name_expr(&mut self) -> Result<NameExpr, FolangError> {
        if self.eat_kw("canon") {
            return Ok(NameExpr::Canon(self.hf()?));
        }
        if self.eat_kw("scalar") {
            return Ok(NameExpr::Scalar(self.rational()?));
        }
        if self.eat_kw("mix") {
            self.expect_sym("[")?;
            let mut pieces = Vec::new();
            loop {
                let e = self.event()?;
                self.expect_sym(":")?;
                pieces.push((e, self.name_expr()?));
                if self.eat_sym("]") {
                    break;
                }
                self.expect_sym(";")?;
            }
            return Ok(NameExpr::Mix(pieces));
        }
        if self.eat_sym("{") {
            let mut entries = Vec::new();
            if self.eat_sym("}") {
                return Ok(NameExpr::Explicit(entries));
            }
            loop {
                self.expect_sym("(")?;
                let child = self.name_expr()?;
                self.expect_sym(",")?;
                let e = self.event()?;
                self.expect_sym(")")?;
                entries.push((child, e));
                if self.eat_sym("}") {
                    break;
                }
                self.expect_sym(",")?;
            }
            return Ok(NameExpr::Explicit(entries));
        }
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => Ok(NameExpr::Ident(self.ident()?)),
            _ => Err(self.error("expected a name expression")),
        }
    }

    fn hf(&mut self) -> Result<HfSet, FolangError> {
        self.expect_sym("{")?;
        let mut elems = Vec::new();
        if !self.eat_sym("}") {
            loop {
                elems.push(self.hf()?);
                if self.eat_sym("}") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        Ok(HfSet::new(elems))
    }

    fn event(&mut self) -> Result<EventLit, FolangError> {
        if self.eat_kw("top") {
            return Ok(EventLit::Top);
        }
        if self.eat_kw("bot") {
            return Ok(EventLit::Bot);
        }
        self.expect_sym("{")?;
        let mut atoms = Vec::new();
        if !self.eat_sym("}") {
            loop {
                let n = self.number()?;
                atoms.push(n.parse::<usize>().map_err(|_| self.error("atom index too large"))?);
                if self.eat_sym("}") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        atoms.sort_unstable();
        atoms.dedup();
        Ok(EventLit::Atoms(atoms))
    }

    fn rational(&mut self) -> Result<Rational, FolangError> {
        let negative = self.eat_sym("-");
        let p: BigInt = self.number()?.parse().expect("digits");
        let q: BigInt = if self.eat_sym("/") {
            let q: BigInt = self.number()?.parse().expect("digits");
            if q == BigInt::from(0) {
                return Err(self.error("zero denominator"));
            }
            q
        } else {
            BigInt::from(1)
        };
        let r = Rational::new(p, q);
        Ok(if negative { -r } else { r })
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, FolangError> {
    let mut p = Parser::new(text, 1)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_name_expr(text: &str) -> Result<NameExpr, FolangError> {
    let mut p = Parser::new(text, 1)?;
    let e = p.name_expr()?;
    p.finish()?;
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum What {
    Formula,
    Name,
    Model,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Formula(Formula),
    Name(NameExpr),
    Model(ModelFile),
}

pub fn parse(text: &str, what: What) -> Result<Parsed, FolangError> {
    Ok(match what {
        What::Formula => Parsed::Formula(parse_formula(text)?),
        What::Name => Parsed::Name(parse_name_expr(text)?),
        What::Model => Parsed::Model(ModelFile::parse(text)?),
    })
}

/// Line-oriented model description: `atoms N`, then `name ID = NAMEEXPR`
/// and `rv ID = [q1, ..., qN]` lines. `#` starts a comment.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub algebra: Algebra,
    pub bindings: IndexMap<String, NameExpr>,
    pub rvs: IndexMap<String, RandVar>,
}

impl ModelFile {
    pub fn new(algebra: Algebra) -> Self {
        ModelFile { algebra, bindings: IndexMap::new(), rvs: IndexMap::new() }
    }

    fn check_fresh(&self, id: &str) -> Result<(), FolangError> {
        if self.bindings.contains_key(id) || self.rvs.contains_key(id) {
            return Err(FolangError::DuplicateIdentifier(id.to_string()));
        }
        Ok(())
    }

    pub fn bind(&mut self, id: &str, e: NameExpr) -> Result<(), FolangError> {
        self.check_fresh(id)?;
        self.bindings.insert(id.to_string(), e);
        Ok(())
    }

    pub fn bind_rv(&mut self, id: &str, v: RandVar) -> Result<(), FolangError> {
        self.check_fresh(id)?;
        if v.len() != self.algebra.atom_count() {
            return Err(
                crate::lzero::LzeroError::ShapeMismatch { left: v.len(), right: self.algebra.atom_count() }.into()
            );
        }
        self.rvs.insert(id.to_string(), v);
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, FolangError> {
        let mut model: Option<ModelFile> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let mut p = Parser::new(line, i + 1)?;
            let head_at = p.pos;
            if p.eat_kw("atoms") {
                if model.is_some() {
                    return Err(p.error("'atoms' declared twice"));
                }
                let n: usize = p.number()?.parse().map_err(|_| p.error("atom count too large"))?;
                p.finish()?;
                model = Some(ModelFile::new(Algebra::new(n)?));
                continue;
            }
            let Some(m) = model.as_mut() else {
                return Err(FolangError::MissingAtoms);
            };
            if p.eat_kw("name") {
                let id = p.ident()?;
                p.expect_sym("=")?;
                let e = p.name_expr()?;
                p.finish()?;
                m.bind(&id, e)?;
            } else if p.eat_kw("rv") {
                let id = p.ident()?;
                p.expect_sym("=")?;
                p.expect_sym("[")?;
                let mut values = Vec::new();
                if !p.eat_sym("]") {
                    loop {
                        values.push(p.rational()?);
                        if p.eat_sym("]") {
                            break;
                        }
                        p.expect_sym(",")?;
                    }
                }
                p.finish()?;
                m.bind_rv(&id, RandVar::new(values)?)?;
            } else {
                p.pos = head_at;
                return Err(p.error("expected 'atoms', 'name' or 'rv'"));
            }
        }
        model.ok_or(FolangError::MissingAtoms)
    }
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "atoms {}", self.algebra.atom_count())?;
        for (id, v) in &self.rvs {
            let vals: Vec<String> = v.values().iter().map(format_rational).collect();
            writeln!(f, "rv {id} = [{}]", vals.join(", "))?;
        }
        for (id, e) in &self.bindings {
            writeln!(f, "name {id} = {e}")?;
        }
        Ok(())
    }
}
