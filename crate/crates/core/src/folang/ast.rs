use std::collections::BTreeSet;
use std::fmt;

use crate::boolalg::EventLit;
use crate::bvm::{AtomicKind, HfSet};
use crate::rational::{format_rational, Rational};

/// Unresolved name syntax; identifiers are looked up at evaluation time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NameExpr {
    Ident(String),
    Canon(HfSet),
    Scalar(Rational),
    Explicit(Vec<(NameExpr, EventLit)>),
    Mix(Vec<(EventLit, NameExpr)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Atomic { kind: AtomicKind, left: NameExpr, right: NameExpr },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall { var: String, bound: NameExpr, body: Box<Formula> },
    Exists { var: String, bound: NameExpr, body: Box<Formula> },
    True,
    False,
}

impl Formula {
    pub fn eq(left: NameExpr, right: NameExpr) -> Formula {
        Formula::Atomic { kind: AtomicKind::Equality, left, right }
    }

    pub fn member(left: NameExpr, right: NameExpr) -> Formula {
        Formula::Atomic { kind: AtomicKind::Membership, left, right }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(var: &str, bound: NameExpr, body: Formula) -> Formula {
        Formula::Forall { var: var.to_string(), bound, body: Box::new(body) }
    }

    pub fn exists(var: &str, bound: NameExpr, body: Formula) -> Formula {
        Formula::Exists { var: var.to_string(), bound, body: Box::new(body) }
    }

    /// Identifiers not bound by an enclosing quantifier, in sorted order.
    pub fn free_identifiers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        free_in_formula(self, &mut bound, &mut out);
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atomic { .. } | Formula::True | Formula::False => 0,
            Formula::Not(a) => 1 + a.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => 1 + a.depth().max(b.depth()),
            Formula::Forall { body, .. } | Formula::Exists { body, .. } => 1 + body.depth(),
        }
    }
}

fn free_in_name(e: &NameExpr, bound: &[String], out: &mut BTreeSet<String>) {
    match e {
        NameExpr::Ident(id) => {
            if !bound.iter().any(|b| b == id) {
                out.insert(id.clone());
            }
        }
        NameExpr::Canon(_) | NameExpr::Scalar(_) => {}
        NameExpr::Explicit(v) => v.iter().for_each(|(c, _)| free_in_name(c, bound, out)),
        NameExpr::Mix(v) => v.iter().for_each(|(_, c)| free_in_name(c, bound, out)),
    }
}

fn free_in_formula(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match f {
        Formula::Atomic { left, right, .. } => {
            free_in_name(left, bound, out);
            free_in_name(right, bound, out);
        }
        Formula::Not(a) => free_in_formula(a, bound, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            free_in_formula(a, bound, out);
            free_in_formula(b, bound, out);
        }
        Formula::Forall { var, bound: u, body } | Formula::Exists { var, bound: u, body } => {
            free_in_name(u, bound, out);
            bound.push(var.clone());
            free_in_formula(body, bound, out);
            bound.pop();
        }
        Formula::True | Formula::False => {}
    }
}

impl fmt::Display for NameExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NameExpr::Ident(id) => f.write_str(id),
            NameExpr::Canon(hf) => write!(f, "canon{hf}"),
            NameExpr::Scalar(q) => write!(f, "scalar {}", format_rational(q)),
            NameExpr::Explicit(entries) => {
                f.write_str("{")?;
                for (i, (c, e)) in entries.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "({c}, {e})")?;
                }
                f.write_str("}")
            }
            NameExpr::Mix(pieces) => {
                f.write_str("mix[")?;
                for (i, (e, c)) in pieces.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{e}: {c}")?;
                }
                f.write_str("]")
            }
        }
    }
}

// Binding strength, loosest first: quantifier, ->, or, and, prefix/atom.
const QUANT: u8 = 0;
const IMPL: u8 = 1;
const DISJ: u8 = 2;
const CONJ: u8 = 3;
const UNARY: u8 = 4;

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Forall { .. } | Formula::Exists { .. } => QUANT,
        Formula::Implies(..) => IMPL,
        Formula::Or(..) => DISJ,
        Formula::And(..) => CONJ,
        _ => UNARY,
    }
}

fn write_at(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level(f) < min {
        out.write_str("(")?;
        write_formula(f, out)?;
        return out.write_str(")");
    }
    write_formula(f, out)
}

fn write_formula(f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        Formula::True => out.write_str("true"),
        Formula::False => out.write_str("false"),
        Formula::Atomic { kind, left, right } => {
            let op = match kind {
                AtomicKind::Equality => "=",
                AtomicKind::Membership => "in",
            };
            write!(out, "{left} {op} {right}")
        }
        Formula::Not(a) => {
            out.write_str("not ")?;
            write_at(a, UNARY, out)
        }
        // `and`/`or` chains parse left-associatively; a right operand at the
        // same level needs parentheses to survive the round trip.
        Formula::And(a, b) => {
            write_at(a, CONJ, out)?;
            out.write_str(" and ")?;
            write_at(b, UNARY, out)
        }
        Formula::Or(a, b) => {
            write_at(a, DISJ, out)?;
            out.write_str(" or ")?;
            write_at(b, CONJ, out)
        }
        Formula::Implies(a, b) => {
            write_at(a, DISJ, out)?;
            out.write_str(" -> ")?;
            write_at(b, IMPL, out)
        }
        Formula::Forall { var, bound, body } => {
            write!(out, "forall {var} in {bound} : ")?;
            write_formula(body, out)
        }
        Formula::Exists { var, bound, body } => {
            write!(out, "exists {var} in {bound} : ")?;
            write_formula(body, out)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, f)
    }
}
