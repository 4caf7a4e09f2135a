use indexmap::IndexMap;

use super::ast::{Formula, NameExpr};
use super::parse::ModelFile;
use super::FolangError;
use crate::boolalg::{Algebra, Event};
use crate::bvm::{BvmError, Name, TruthSession};
use crate::lzero::{to_name, RandVar};

/// A model file with every binding resolved to a name. Random variables are
/// visible to formulas through their scalar-mixture names.
#[derive(Debug, Clone)]
pub struct Model {
    pub algebra: Algebra,
    pub names: IndexMap<String, Name>,
    pub rvs: IndexMap<String, RandVar>,
}

impl Model {
    /// Resolves random variables first, then name bindings in file order;
    /// a binding may refer to any random variable and to earlier bindings.
    pub fn resolve(file: &ModelFile, s: &TruthSession) -> Result<Model, FolangError> {
        if file.algebra != *s.algebra() {
            return Err(BvmError::MixedAlgebras {
                name_atoms: file.algebra.atom_count(),
                session_atoms: s.algebra().atom_count(),
            }
            .into());
        }
        let mut model = Model { algebra: file.algebra, names: IndexMap::new(), rvs: file.rvs.clone() };
        for (id, v) in &file.rvs {
            model.names.insert(id.clone(), to_name(v));
        }
        for (id, e) in &file.bindings {
            let n = resolve_name(e, &model, &[], s)?;
            model.names.insert(id.clone(), n);
        }
        Ok(model)
    }

    pub fn empty(algebra: Algebra) -> Model {
        Model { algebra, names: IndexMap::new(), rvs: IndexMap::new() }
    }

    pub fn with(mut self, id: &str, n: Name) -> Model {
        self.names.insert(id.to_string(), n);
        self
    }
}

/// Resolves a name expression; `scope` holds quantifier-bound variables,
/// innermost last, and shadows model bindings.
pub fn resolve_name(
    e: &NameExpr,
    model: &Model,
    scope: &[(String, Name)],
    s: &TruthSession,
) -> Result<Name, FolangError> {
    let alg = s.algebra();
    let n = match e {
        NameExpr::Ident(id) => {
            if let Some((_, n)) = scope.iter().rev().find(|(v, _)| v == id) {
                return Ok(n.clone());
            }
            model.names.get(id).cloned().ok_or_else(|| FolangError::UnknownIdentifier(id.clone()))?
        }
        NameExpr::Canon(hf) => Name::canonical(hf, alg),
        NameExpr::Scalar(q) => Name::scalar(q.clone()),
        NameExpr::Explicit(entries) => {
            let mut v = Vec::with_capacity(entries.len());
            for (c, lit) in entries {
                v.push((resolve_name(c, model, scope, s)?, lit.resolve(alg)?));
            }
            Name::set(v)
        }
        NameExpr::Mix(pieces) => {
            let mut blocks = Vec::with_capacity(pieces.len());
            let mut xs = Vec::with_capacity(pieces.len());
            for (lit, c) in pieces {
                blocks.push(lit.resolve(alg)?);
                xs.push(resolve_name(c, model, scope, s)?);
            }
            s.mix(&blocks, &xs)?
        }
    };
    s.check_name(&n)?;
    Ok(n)
}

struct Evaluator<'a> {
    model: &'a Model,
    session: &'a mut TruthSession,
    scope: Vec<(String, Name)>,
}

impl Evaluator<'_> {
    fn name(&self, e: &NameExpr) -> Result<Name, FolangError> {
        resolve_name(e, self.model, &self.scope, self.session)
    }

    fn eval(&mut self, f: &Formula) -> Result<Event, FolangError> {
        let alg = *self.session.algebra();
        Ok(match f {
            Formula::True => alg.top(),
            Formula::False => alg.bottom(),
            Formula::Atomic { kind, left, right } => {
                let x = self.name(left)?;
                let y = self.name(right)?;
                self.session.truth(*kind, &x, &y)?
            }
            Formula::Not(a) => self.eval(a)?.complement(),
            Formula::And(a, b) => self.eval(a)?.meet(&self.eval(b)?),
            Formula::Or(a, b) => self.eval(a)?.join(&self.eval(b)?),
            Formula::Implies(a, b) => self.eval(a)?.implies(&self.eval(b)?),
            Formula::Forall { var, bound, body } => {
                let u = self.name(bound)?;
                let mut acc = alg.top();
                for (t, g) in u.entries() {
                    self.scope.push((var.clone(), t.clone()));
                    let v = self.eval(body);
                    self.scope.pop();
                    acc = acc.meet(&g.implies(&v?));
                }
                acc
            }
            Formula::Exists { var, bound, body } => {
                let u = self.name(bound)?;
                let mut acc = alg.bottom();
                for (t, g) in u.entries() {
                    self.scope.push((var.clone(), t.clone()));
                    let v = self.eval(body);
                    self.scope.pop();
                    acc = acc.join(&g.meet(&v?));
                }
                acc
            }
        })
    }
}

/// Exact truth value of `f` in `model`.
pub fn eval_formula(f: &Formula, model: &Model, s: &mut TruthSession) -> Result<Event, FolangError> {
    Evaluator { model, session: s, scope: Vec::new() }.eval(f)
}

fn eval_with(f: &Formula, var: &str, value: &Name, model: &Model, s: &mut TruthSession) -> Result<Event, FolangError> {
    Evaluator { model, session: s, scope: vec![(var.to_string(), value.clone())] }.eval(f)
}

#[derive(Debug, Clone)]
pub struct MaximumWitness {
    pub witness: Name,
    /// `⋁_i ⟦f(pool_i)⟧`.
    pub value: Event,
    /// `⟦f(pool_i)⟧` per pool element.
    pub per_candidate: Vec<Event>,
    /// The disjointified blocks the witness was mixed over, in pool order.
    pub blocks: Vec<Event>,
    /// `⟦f(witness)⟧`, recomputed.
    pub witness_value: Event,
}

/// Finite-pool maximum principle: mixes the pool over the greedy
/// disjointification of the candidates' truth values, with the uncovered
/// remainder assigned to the first candidate.
pub fn maximum_witness(
    f: &Formula,
    var: &str,
    pool: &[Name],
    model: &Model,
    s: &mut TruthSession,
) -> Result<MaximumWitness, FolangError> {
    if pool.is_empty() {
        return Err(FolangError::EmptyPool);
    }
    let alg = *s.algebra();
    let mut per_candidate = Vec::with_capacity(pool.len());
    for p in pool {
        per_candidate.push(eval_with(f, var, p, model, s)?);
    }
    let value = per_candidate.iter().fold(alg.bottom(), |acc, b| acc.join(b));
    let mut covered = alg.bottom();
    let mut blocks = Vec::with_capacity(pool.len());
    for (i, b) in per_candidate.iter().enumerate() {
        let a = if i == 0 { b.join(&value.complement()) } else { b.minus(&covered) };
        covered = covered.join(&a);
        blocks.push(a);
    }
    let witness = s.mix(&blocks, pool)?;
    let witness_value = eval_with(f, var, &witness, model, s)?;
    Ok(MaximumWitness { witness, value, per_candidate, blocks, witness_value })
}

/// Bounded sentences provable in ZFC, over the free identifiers `x`, `y`, `z`.
/// Each must evaluate to `top` in every model binding those identifiers to
/// set names.
pub const TRANSFER_SUITE: [(&str, &str); 10] = [
    ("reflexivity", "forall t in x : t = t"),
    ("symmetry", "forall s in x : forall t in y : s = t -> t = s"),
    ("transitivity", "forall s in x : forall t in y : forall u in z : s = t and t = u -> s = u"),
    ("member-of-bound", "forall t in x : t in x"),
    ("substitution-left", "forall s in x : forall t in y : s = t -> (s in z -> t in z)"),
    ("substitution-right", "forall s in x : forall t in y : s = t -> (z in s -> z in t)"),
    ("extensionality", "(forall t in x : t in y) and (forall t in y : t in x) -> x = y"),
    ("pairing-members", "x in {(x, top), (y, top)} and y in {(x, top), (y, top)}"),
    ("pairing-only", "forall t in {(x, top), (y, top)} : t = x or t = y"),
    ("canonical-two", "forall t in canon{{},{{}}} : t = canon{} or t = canon{{}}"),
];
