//! `L⁰` over a finite algebra: atom-indexed exact rationals, their order
//! truths, concatenation, and the correspondence with scalar-valued names.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::boolalg::{check_pasting, common_refinement, Algebra, AlgebraError, Event, Partition};
use crate::bvm::{BvmError, Name, TruthSession};
use crate::error::{Classify, ErrorClass};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LzeroError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Bvm(#[from] BvmError),
    #[error("shape mismatch: {left} vs {right} atoms")]
    ShapeMismatch { left: usize, right: usize },
    #[error("empty family")]
    EmptyFamily,
    #[error("not a mixture of scalar constants over a partition of unity: {0}")]
    NotAScalarMixture(String),
    #[error("undefined arithmetic: +inf and -inf combined at atom {atom}")]
    InfiniteCancellation { atom: usize },
    #[error("malformed random variable literal: {0}")]
    MalformedLiteral(String),
}

impl Classify for LzeroError {
    fn class(&self) -> ErrorClass {
        match self {
            LzeroError::Algebra(e) => e.class(),
            LzeroError::Bvm(e) => e.class(),
            LzeroError::MalformedLiteral(_) => ErrorClass::Parse,
            _ => ErrorClass::Precondition,
        }
    }
}

/// An element of `L⁰(ℚ)`: one exact rational per atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RandVar {
    values: Vec<Rational>,
}

impl RandVar {
    pub fn new(values: Vec<Rational>) -> Result<Self, LzeroError> {
        Algebra::new(values.len())?;
        Ok(RandVar { values })
    }

    pub fn constant(algebra: &Algebra, q: Rational) -> Self {
        RandVar { values: vec![q; algebra.atom_count()] }
    }

    pub fn zero(algebra: &Algebra) -> Self {
        RandVar::constant(algebra, Rational::zero())
    }

    /// Indicator `1_A`.
    pub fn indicator(event: &Event) -> Self {
        let values = (0..event.atom_count())
            .map(|w| if event.contains_index(w) { crate::rational::int(1) } else { Rational::zero() })
            .collect();
        RandVar { values }
    }

    pub fn from_ints(values: &[i64]) -> Result<Self, LzeroError> {
        RandVar::new(values.iter().map(|&v| crate::rational::int(v)).collect())
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn algebra(&self) -> Algebra {
        Algebra::new(self.values.len()).expect("validated on construction")
    }

    fn same_shape(&self, other: &RandVar) -> Result<(), LzeroError> {
        if self.len() != other.len() {
            return Err(LzeroError::ShapeMismatch { left: self.len(), right: other.len() });
        }
        Ok(())
    }

    fn zip_with(&self, other: &RandVar, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<RandVar, LzeroError> {
        self.same_shape(other)?;
        Ok(RandVar { values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect() })
    }

    pub fn add(&self, other: &RandVar) -> Result<RandVar, LzeroError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RandVar) -> Result<RandVar, LzeroError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &RandVar) -> Result<RandVar, LzeroError> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn min(&self, other: &RandVar) -> Result<RandVar, LzeroError> {
        self.zip_with(other, |a, b| a.min(b).clone())
    }

    pub fn max(&self, other: &RandVar) -> Result<RandVar, LzeroError> {
        self.zip_with(other, |a, b| a.max(b).clone())
    }

    pub fn abs(&self) -> RandVar {
        RandVar { values: self.values.iter().map(|a| a.abs()).collect() }
    }

    pub fn neg(&self) -> RandVar {
        RandVar { values: self.values.iter().map(|a| -a).collect() }
    }

    /// `1_A · x`.
    pub fn restrict(&self, event: &Event) -> Result<RandVar, LzeroError> {
        if event.atom_count() != self.len() {
            return Err(LzeroError::ShapeMismatch { left: self.len(), right: event.atom_count() });
        }
        Ok(RandVar {
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(w, a)| if event.contains_index(w) { a.clone() } else { Rational::zero() })
                .collect(),
        })
    }

    /// `x ≤ y` in the `L⁰` order, i.e. on every atom.
    pub fn le(&self, other: &RandVar) -> Result<bool, LzeroError> {
        Ok(truth_cmp_rv(Comparison::Le, self, other)?.is_top())
    }

    /// Level-set partition: blocks of atoms with equal value, paired with
    /// that value, ordered by smallest atom.
    pub fn level_sets(&self) -> Vec<(Event, Rational)> {
        let alg = self.algebra();
        let mut out: Vec<(u64, Rational)> = Vec::new();
        for (w, v) in self.values.iter().enumerate() {
            match out.iter_mut().find(|(_, q)| q == v) {
                Some((bits, _)) => *bits |= 1 << w,
                None => out.push((1 << w, v.clone())),
            }
        }
        out.into_iter().map(|(b, q)| (alg.from_bits(b), q)).collect()
    }

    /// Parses `[q1, q2, ...]`.
    pub fn parse(text: &str) -> Result<Self, LzeroError> {
        let items = split_bracket_list(text).ok_or_else(|| LzeroError::MalformedLiteral(text.to_string()))?;
        let values = items
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| LzeroError::MalformedLiteral(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        RandVar::new(values)
    }
}

pub(crate) fn split_bracket_list(text: &str) -> Option<Vec<&str>> {
    let t = text.trim().strip_prefix('[')?.strip_suffix(']')?;
    if t.trim().is_empty() {
        return Some(Vec::new());
    }
    Some(t.split(',').map(str::trim).collect())
}

impl fmt::Display for RandVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(format_rational).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// `ℚ ∪ {−∞, +∞}` ordered as usual.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtRational {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl ExtRational {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRational::Finite(_))
    }

    /// Sum, `None` for `(+∞) + (−∞)`.
    pub fn checked_add(&self, other: &ExtRational) -> Option<ExtRational> {
        use ExtRational::*;
        match (self, other) {
            (PosInf, NegInf) | (NegInf, PosInf) => None,
            (PosInf, _) | (_, PosInf) => Some(PosInf),
            (NegInf, _) | (_, NegInf) => Some(NegInf),
            (Finite(a), Finite(b)) => Some(Finite(a + b)),
        }
    }

    pub fn neg(&self) -> ExtRational {
        match self {
            ExtRational::NegInf => ExtRational::PosInf,
            ExtRational::PosInf => ExtRational::NegInf,
            ExtRational::Finite(q) => ExtRational::Finite(-q),
        }
    }

    pub fn parse(text: &str) -> Option<ExtRational> {
        match text.trim() {
            "inf" | "+inf" => Some(ExtRational::PosInf),
            "-inf" => Some(ExtRational::NegInf),
            t => parse_rational(t).map(ExtRational::Finite),
        }
    }
}

impl From<Rational> for ExtRational {
    fn from(q: Rational) -> Self {
        ExtRational::Finite(q)
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::NegInf => f.write_str("-inf"),
            ExtRational::PosInf => f.write_str("inf"),
            ExtRational::Finite(q) => f.write_str(&format_rational(q)),
        }
    }
}

/// An element of `L̄⁰`: atom-indexed extended rationals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtRandVar {
    values: Vec<ExtRational>,
}

impl ExtRandVar {
    pub fn new(values: Vec<ExtRational>) -> Result<Self, LzeroError> {
        Algebra::new(values.len())?;
        Ok(ExtRandVar { values })
    }

    pub fn constant(algebra: &Algebra, v: ExtRational) -> Self {
        ExtRandVar { values: vec![v; algebra.atom_count()] }
    }

    pub fn values(&self) -> &[ExtRational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn add(&self, other: &ExtRandVar) -> Result<ExtRandVar, LzeroError> {
        if self.len() != other.len() {
            return Err(LzeroError::ShapeMismatch { left: self.len(), right: other.len() });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(w, (a, b))| a.checked_add(b).ok_or(LzeroError::InfiniteCancellation { atom: w + 1 }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ExtRandVar { values })
    }

    pub fn neg(&self) -> ExtRandVar {
        ExtRandVar { values: self.values.iter().map(ExtRational::neg).collect() }
    }

    /// Finite part, if every atom is finite.
    pub fn to_finite(&self) -> Option<RandVar> {
        let values = self.values.iter().map(|v| v.finite().cloned()).collect::<Option<Vec<_>>>()?;
        Some(RandVar { values })
    }

    pub fn parse(text: &str) -> Result<Self, LzeroError> {
        let items = split_bracket_list(text).ok_or_else(|| LzeroError::MalformedLiteral(text.to_string()))?;
        let values = items
            .iter()
            .map(|s| ExtRational::parse(s).ok_or_else(|| LzeroError::MalformedLiteral(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        ExtRandVar::new(values)
    }
}

impl From<RandVar> for ExtRandVar {
    fn from(r: RandVar) -> Self {
        ExtRandVar { values: r.values.into_iter().map(ExtRational::Finite).collect() }
    }
}

impl fmt::Display for ExtRandVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// An element of `L⁰(ℕ)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexedNat {
    values: Vec<u64>,
}

impl IndexedNat {
    pub fn new(values: Vec<u64>) -> Result<Self, LzeroError> {
        Algebra::new(values.len())?;
        Ok(IndexedNat { values })
    }

    pub fn constant(algebra: &Algebra, k: u64) -> Self {
        IndexedNat { values: vec![k; algebra.atom_count()] }
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The event `{𝔫 = k}`.
    pub fn level(&self, k: u64) -> Event {
        let alg = Algebra::new(self.values.len()).expect("validated");
        let mut bits = 0;
        for (w, &v) in self.values.iter().enumerate() {
            if v == k {
                bits |= 1 << w;
            }
        }
        alg.from_bits(bits)
    }
}

impl fmt::Display for IndexedNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Expression tree over the ring/lattice operations of `L⁰`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RvExpr {
    Leaf(RandVar),
    Add(Box<RvExpr>, Box<RvExpr>),
    Sub(Box<RvExpr>, Box<RvExpr>),
    Mul(Box<RvExpr>, Box<RvExpr>),
    Abs(Box<RvExpr>),
    Min(Box<RvExpr>, Box<RvExpr>),
    Max(Box<RvExpr>, Box<RvExpr>),
    /// `1_A · x`.
    Indicator(Event, Box<RvExpr>),
}

/// Componentwise exact evaluation.
pub fn rv_eval(expr: &RvExpr) -> Result<RandVar, LzeroError> {
    match expr {
        RvExpr::Leaf(r) => Ok(r.clone()),
        RvExpr::Add(a, b) => rv_eval(a)?.add(&rv_eval(b)?),
        RvExpr::Sub(a, b) => rv_eval(a)?.sub(&rv_eval(b)?),
        RvExpr::Mul(a, b) => rv_eval(a)?.mul(&rv_eval(b)?),
        RvExpr::Abs(a) => Ok(rv_eval(a)?.abs()),
        RvExpr::Min(a, b) => rv_eval(a)?.min(&rv_eval(b)?),
        RvExpr::Max(a, b) => rv_eval(a)?.max(&rv_eval(b)?),
        RvExpr::Indicator(e, a) => rv_eval(a)?.restrict(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Eq,
    Le,
}

/// The event on which `r = s` (resp. `r ≤ s`) holds. The join of all `A`
/// with `1_A r = 1_A s` is attained atomwise, so this is exactly the set of
/// atoms where the comparison holds.
pub fn truth_cmp_rv(kind: Comparison, r: &RandVar, s: &RandVar) -> Result<Event, LzeroError> {
    r.same_shape(s)?;
    let alg = r.algebra();
    let mut bits = 0;
    for (w, (a, b)) in r.values.iter().zip(&s.values).enumerate() {
        let holds = match kind {
            Comparison::Eq => a == b,
            Comparison::Le => a <= b,
        };
        if holds {
            bits |= 1 << w;
        }
    }
    Ok(alg.from_bits(bits))
}

/// `Σ 1_{A_k} x_k` along a partition of unity in caller order.
pub fn concatenate_rv(blocks: &[Event], xs: &[RandVar]) -> Result<RandVar, LzeroError> {
    let first = xs.first().ok_or(AlgebraError::ArityMismatch { blocks: blocks.len(), items: 0 })?;
    let alg = first.algebra();
    for x in xs {
        first.same_shape(x)?;
    }
    if let Some(b) = blocks.first() {
        if b.atom_count() != alg.atom_count() {
            return Err(LzeroError::ShapeMismatch { left: alg.atom_count(), right: b.atom_count() });
        }
    }
    check_pasting(blocks, xs.len(), &alg)?;
    let values = (0..alg.atom_count())
        .map(|w| {
            let k = blocks.iter().position(|b| b.contains_index(w)).expect("partition of unity covers every atom");
            xs[k].values[w].clone()
        })
        .collect();
    Ok(RandVar { values })
}

/// Atomwise supremum and infimum of a nonempty family.
pub fn ess_bounds(family: &[RandVar]) -> Result<(RandVar, RandVar), LzeroError> {
    let first = family.first().ok_or(LzeroError::EmptyFamily)?;
    let mut sup = first.clone();
    let mut inf = first.clone();
    for x in &family[1..] {
        sup = sup.max(x)?;
        inf = inf.min(x)?;
    }
    Ok((sup, inf))
}

/// Gordon correspondence on `L⁰(ℚ)`: a random variable becomes the mix of
/// scalar constants over its level-set partition.
pub fn to_name(v: &RandVar) -> Name {
    let alg = v.algebra();
    Name::mixed(&alg, Vec::new(), v.level_sets().into_iter().collect())
}

/// Inverse of [`to_name`]; requires a pure scalar mixture covering every atom.
pub fn from_name(name: &Name, algebra: &Algebra) -> Result<RandVar, LzeroError> {
    if let Some(n) = name.atom_count() {
        if n != algebra.atom_count() {
            return Err(BvmError::MixedAlgebras { name_atoms: n, session_atoms: algebra.atom_count() }.into());
        }
    }
    let support = name.scalar_support(algebra);
    if !support.is_top() || !name.entries().is_empty() {
        return Err(LzeroError::NotAScalarMixture(format!("{name} is a set on atoms {}", support.complement())));
    }
    let mut values = vec![Rational::zero(); algebra.atom_count()];
    for (e, q) in name.scalar_pieces(algebra) {
        for w in e.indices() {
            values[w] = q.clone();
        }
    }
    Ok(RandVar { values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToName,
    FromName,
}

/// Either side of the correspondence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GordonValue {
    Rv(RandVar),
    Name(Name),
}

pub fn gordon_roundtrip(direction: Direction, arg: &GordonValue, s: &TruthSession) -> Result<GordonValue, LzeroError> {
    match (direction, arg) {
        (Direction::ToName, GordonValue::Rv(v)) => {
            if v.len() != s.algebra().atom_count() {
                return Err(LzeroError::ShapeMismatch { left: v.len(), right: s.algebra().atom_count() });
            }
            Ok(GordonValue::Name(to_name(v)))
        }
        (Direction::FromName, GordonValue::Name(n)) => Ok(GordonValue::Rv(from_name(n, s.algebra())?)),
        (Direction::ToName, GordonValue::Name(n)) => {
            Err(LzeroError::NotAScalarMixture(format!("expected a random variable, got name {n}")))
        }
        (Direction::FromName, GordonValue::Rv(v)) => {
            Err(LzeroError::NotAScalarMixture(format!("expected a name, got random variable {v}")))
        }
    }
}

fn scalar_partition(name: &Name, algebra: &Algebra) -> Result<Vec<(Event, Rational)>, LzeroError> {
    let pieces = name.scalar_pieces(algebra);
    let support = pieces.iter().fold(algebra.bottom(), |acc, (e, _)| acc.join(e));
    if !support.is_top() {
        return Err(LzeroError::NotAScalarMixture(name.to_string()));
    }
    Ok(pieces)
}

/// Name-level ring operation on scalar mixtures: the common refinement of
/// both level-set partitions with the operation applied blockwise.
pub fn name_binop(
    x: &Name,
    y: &Name,
    algebra: &Algebra,
    op: impl Fn(&Rational, &Rational) -> Rational,
) -> Result<Name, LzeroError> {
    let px = scalar_partition(x, algebra)?;
    let py = scalar_partition(y, algebra)?;
    let part_x = Partition::of_unity(px.iter().map(|(e, _)| *e).collect(), algebra)?;
    let part_y = Partition::of_unity(py.iter().map(|(e, _)| *e).collect(), algebra)?;
    let refined = common_refinement(&part_x, &part_y)?;
    let value_on = |pieces: &[(Event, Rational)], block: &Event| -> Rational {
        pieces.iter().find(|(e, _)| block.le(e)).map(|(_, q)| q.clone()).expect("refinement block inside a piece")
    };
    let scalars = refined.blocks().iter().map(|b| (*b, op(&value_on(&px, b), &value_on(&py, b)))).collect();
    Ok(Name::mixed(algebra, Vec::new(), scalars))
}

pub fn name_add(x: &Name, y: &Name, algebra: &Algebra) -> Result<Name, LzeroError> {
    name_binop(x, y, algebra, |a, b| a + b)
}

pub fn name_mul(x: &Name, y: &Name, algebra: &Algebra) -> Result<Name, LzeroError> {
    name_binop(x, y, algebra, |a, b| a * b)
}

/// `⟦x ≤ y⟧` for scalar mixtures: the join of `a ∧ b` over pieces
/// `(a, p)` of `x` and `(b, q)` of `y` with `p ≤ q`.
pub fn truth_order(x: &Name, y: &Name, algebra: &Algebra) -> Result<Event, LzeroError> {
    let px = scalar_partition(x, algebra)?;
    let py = scalar_partition(y, algebra)?;
    let mut acc = algebra.bottom();
    for (a, p) in &px {
        for (b, q) in &py {
            if p.cmp(q) != Ordering::Greater {
                acc = acc.join(&a.meet(b));
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn rv(v: &[i64]) -> RandVar {
        RandVar::from_ints(v).unwrap()
    }

    fn alg(n: usize) -> Algebra {
        Algebra::new(n).unwrap()
    }

    #[test]
    fn rv_ops_examples() {
        let sum =
            rv_eval(&RvExpr::Add(Box::new(RvExpr::Leaf(rv(&[1, 2]))), Box::new(RvExpr::Leaf(rv(&[3, 4]))))).unwrap();
        assert_eq!(sum, rv(&[4, 6]));
        let a = alg(2);
        let ind = rv_eval(&RvExpr::Indicator(a.atom(1).unwrap(), Box::new(RvExpr::Leaf(rv(&[3, 4]))))).unwrap();
        assert_eq!(ind, rv(&[3, 0]));
        assert_eq!(rv_eval(&RvExpr::Abs(Box::new(RvExpr::Leaf(rv(&[-2, 5]))))).unwrap(), rv(&[2, 5]));
        let bad = RvExpr::Add(Box::new(RvExpr::Leaf(rv(&[1, 2]))), Box::new(RvExpr::Leaf(rv(&[1, 2, 3]))));
        assert_eq!(rv_eval(&bad).unwrap_err(), LzeroError::ShapeMismatch { left: 2, right: 3 });
        assert_eq!(RandVar::indicator(&a.atom(2).unwrap()).mul(&rv(&[3, 4])).unwrap(), rv(&[0, 4]));
    }

    #[test]
    fn truth_cmp_examples() {
        let a = alg(2);
        assert!(truth_cmp_rv(Comparison::Eq, &rv(&[1, 5]), &rv(&[1, 5])).unwrap().is_top());
        assert_eq!(truth_cmp_rv(Comparison::Le, &rv(&[1, 5]), &rv(&[3, 2])).unwrap(), a.atom(1).unwrap());
        assert_eq!(truth_cmp_rv(Comparison::Eq, &rv(&[0, 0]), &rv(&[0, 1])).unwrap(), a.atom(1).unwrap());
    }

    #[test]
    fn concatenate_examples() {
        let a = alg(2);
        let (b1, b2) = (a.atom(1).unwrap(), a.atom(2).unwrap());
        assert_eq!(concatenate_rv(&[b1, b2], &[rv(&[7, 7]), rv(&[9, 9])]).unwrap(), rv(&[7, 9]));
        assert_eq!(concatenate_rv(&[a.top()], &[rv(&[3, 4])]).unwrap(), rv(&[3, 4]));
        assert_eq!(concatenate_rv(&[b2, b1], &[rv(&[7, 7]), rv(&[9, 9])]).unwrap(), rv(&[9, 7]));
        assert!(matches!(
            concatenate_rv(&[b1], &[rv(&[7, 7])]),
            Err(LzeroError::Algebra(AlgebraError::NotAPartitionOfOne(_)))
        ));
        assert!(matches!(
            concatenate_rv(&[b1, b2], &[rv(&[7, 7])]),
            Err(LzeroError::Algebra(AlgebraError::ArityMismatch { blocks: 2, items: 1 }))
        ));
    }

    #[test]
    fn ess_bounds_examples() {
        let (sup, inf) = ess_bounds(&[rv(&[1, 5]), rv(&[3, 2])]).unwrap();
        assert_eq!((sup, inf), (rv(&[3, 5]), rv(&[1, 2])));
        let x = rv(&[4, -1]);
        assert_eq!(ess_bounds(std::slice::from_ref(&x)).unwrap(), (x.clone(), x.clone()));
        assert_eq!(ess_bounds(&[x.clone(), rv(&[0, 0]), x.clone()]).unwrap(), ess_bounds(&[x, rv(&[0, 0])]).unwrap());
        assert_eq!(ess_bounds(&[]).unwrap_err(), LzeroError::EmptyFamily);
    }

    #[test]
    fn gordon_examples() {
        let a = alg(2);
        let mut s = TruthSession::new(a);
        let five = to_name(&rv(&[5, 5]));
        assert_eq!(five, Name::scalar(int(5)));
        let one = to_name(&rv(&[1, 1]));
        assert!(s.equivalent(&one, &Name::scalar(int(1))).unwrap());

        let v = RandVar::new(vec![ratio(7, 2), int(-1)]).unwrap();
        let n = to_name(&v);
        assert_eq!(n.to_string(), "mix[{1}: scalar 7/2; {2}: scalar -1]");
        assert_eq!(s.truth_eq(&n, &Name::scalar(ratio(7, 2))).unwrap(), a.atom(1).unwrap());
        assert_eq!(from_name(&n, &a).unwrap(), v);

        let set = Name::set([(Name::empty(), a.top())]);
        assert!(matches!(from_name(&set, &a), Err(LzeroError::NotAScalarMixture(_))));
        let back = gordon_roundtrip(Direction::FromName, &GordonValue::Name(n), &s).unwrap();
        assert_eq!(back, GordonValue::Rv(v));
    }

    #[test]
    fn ext_arithmetic_guards_cancellation() {
        let x = ExtRandVar::parse("[inf, 1]").unwrap();
        let y = ExtRandVar::parse("[-inf, 2]").unwrap();
        assert_eq!(x.add(&y).unwrap_err(), LzeroError::InfiniteCancellation { atom: 1 });
        let z = ExtRandVar::parse("[3, -1/2]").unwrap();
        assert_eq!(x.add(&z).unwrap().to_string(), "[inf, 1/2]");
        assert!(ExtRational::NegInf < ExtRational::Finite(int(-100)));
        assert!(ExtRational::Finite(int(100)) < ExtRational::PosInf);
    }

    #[test]
    fn name_level_ring_and_order() {
        let a = alg(3);
        let mut s = TruthSession::new(a);
        let r = rv(&[1, 2, 2]);
        let t = rv(&[0, 5, -1]);
        let sum = name_add(&to_name(&r), &to_name(&t), &a).unwrap();
        assert!(s.equivalent(&sum, &to_name(&r.add(&t).unwrap())).unwrap());
        let prod = name_mul(&to_name(&r), &to_name(&t), &a).unwrap();
        assert_eq!(from_name(&prod, &a).unwrap(), r.mul(&t).unwrap());
        assert_eq!(truth_order(&to_name(&r), &to_name(&t), &a).unwrap(), a.atom(2).unwrap());
    }

    #[test]
    fn literals() {
        assert_eq!(RandVar::parse("[1/2, 3, -2]").unwrap().to_string(), "[1/2, 3, -2]");
        assert!(RandVar::parse("[1/2, x]").is_err());
        assert!(RandVar::parse("1, 2").is_err());
    }
}
