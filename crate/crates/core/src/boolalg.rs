//! Finite complete Boolean algebras.
//!
//! Every finite complete Boolean algebra is the powerset of its atoms, so an
//! [`Event`] is a bitmask over `atom_count` atoms. Atoms are 1-based in all
//! text forms and 0-based internally.

use std::fmt;

use thiserror::Error;

use crate::error::{Classify, ErrorClass};

/// Largest supported number of atoms (one bit per atom in a `u64`).
pub const MAX_ATOMS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("atom count must be between 1 and {MAX_ATOMS}, got {0}")]
    InvalidAtomCount(usize),
    #[error("mixed algebras: {left} atoms vs {right} atoms")]
    MixedAlgebras { left: usize, right: usize },
    #[error("atom {atom} out of range for an algebra with {atom_count} atoms")]
    AtomOutOfRange { atom: usize, atom_count: usize },
    #[error("partitions cover different events: {left} vs {right}")]
    MismatchedSupport { left: String, right: String },
    #[error("not a partition: {0}")]
    NotAPartition(PartitionViolation),
    #[error("not a partition of unity: {0}")]
    NotAPartitionOfOne(PartitionViolation),
    #[error("arity mismatch: {blocks} blocks but {items} items")]
    ArityMismatch { blocks: usize, items: usize },
    #[error("malformed event literal at offset {offset}: {message}")]
    MalformedLiteral { offset: usize, message: String },
}

impl Classify for AlgebraError {
    fn class(&self) -> ErrorClass {
        match self {
            AlgebraError::MalformedLiteral { .. } => ErrorClass::Parse,
            _ => ErrorClass::Precondition,
        }
    }
}

/// The powerset algebra of `{1..atom_count}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Algebra {
    atom_count: usize,
}

impl Algebra {
    pub fn new(atom_count: usize) -> Result<Self, AlgebraError> {
        if atom_count == 0 || atom_count > MAX_ATOMS {
            return Err(AlgebraError::InvalidAtomCount(atom_count));
        }
        Ok(Algebra { atom_count })
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn bottom(&self) -> Event {
        Event { atom_count: self.atom_count as u8, bits: 0 }
    }

    pub fn top(&self) -> Event {
        Event { atom_count: self.atom_count as u8, bits: full_mask(self.atom_count) }
    }

    /// The event `{atom}` for a 1-based atom index.
    pub fn atom(&self, atom: usize) -> Result<Event, AlgebraError> {
        self.event([atom])
    }

    /// Builds an event from 1-based atom indices.
    pub fn event<I: IntoIterator<Item = usize>>(&self, atoms: I) -> Result<Event, AlgebraError> {
        let mut bits = 0u64;
        for a in atoms {
            if a == 0 || a > self.atom_count {
                return Err(AlgebraError::AtomOutOfRange { atom: a, atom_count: self.atom_count });
            }
            bits |= 1 << (a - 1);
        }
        Ok(Event { atom_count: self.atom_count as u8, bits })
    }

    pub fn from_bits(&self, bits: u64) -> Event {
        Event { atom_count: self.atom_count as u8, bits: bits & full_mask(self.atom_count) }
    }

    /// All `2^atom_count` events in increasing bitmask order.
    pub fn events(&self) -> impl Iterator<Item = Event> + '_ {
        assert!(self.atom_count < 32, "exhaustive event enumeration needs fewer than 32 atoms");
        (0..(1u64 << self.atom_count)).map(move |b| self.from_bits(b))
    }

    /// The finest partition of unity, `[{1};{2};...]`.
    pub fn atom_partition(&self) -> Partition {
        Partition { of: self.top(), blocks: (0..self.atom_count).map(|i| self.from_bits(1 << i)).collect() }
    }

    pub fn unit_partition(&self) -> Partition {
        Partition { of: self.top(), blocks: vec![self.top()] }
    }

    pub fn parse_event(&self, text: &str) -> Result<Event, AlgebraError> {
        parse_event_lit(text)?.resolve(self)
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A truth value: a set of atoms of a fixed algebra.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    atom_count: u8,
    bits: u64,
}

impl Event {
    pub fn algebra(&self) -> Algebra {
        Algebra { atom_count: self.atom_count as usize }
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count as usize
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_bottom(&self) -> bool {
        self.bits == 0
    }

    pub fn is_top(&self) -> bool {
        self.bits == full_mask(self.atom_count as usize)
    }

    /// Membership of a 0-based atom index.
    pub fn contains_index(&self, idx: usize) -> bool {
        idx < self.atom_count as usize && self.bits >> idx & 1 == 1
    }

    /// Membership of a 1-based atom.
    pub fn contains(&self, atom: usize) -> bool {
        atom >= 1 && self.contains_index(atom - 1)
    }

    /// 1-based atoms in increasing order.
    pub fn atoms(&self) -> Vec<usize> {
        self.indices().map(|i| i + 1).collect()
    }

    /// 0-based atom indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.atom_count as usize).filter(move |&i| self.bits >> i & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    fn same(&self, other: &Event) -> Result<(), AlgebraError> {
        if self.atom_count != other.atom_count {
            return Err(AlgebraError::MixedAlgebras {
                left: self.atom_count as usize,
                right: other.atom_count as usize,
            });
        }
        Ok(())
    }

    pub fn try_meet(&self, other: &Event) -> Result<Event, AlgebraError> {
        self.same(other)?;
        Ok(self.meet(other))
    }

    pub fn try_join(&self, other: &Event) -> Result<Event, AlgebraError> {
        self.same(other)?;
        Ok(self.join(other))
    }

    // The unchecked lattice operations below assume a shared algebra; they
    // are the hot path of truth-value recursion.

    pub fn meet(&self, other: &Event) -> Event {
        debug_assert_eq!(self.atom_count, other.atom_count);
        Event { atom_count: self.atom_count, bits: self.bits & other.bits }
    }

    pub fn join(&self, other: &Event) -> Event {
        debug_assert_eq!(self.atom_count, other.atom_count);
        Event { atom_count: self.atom_count, bits: self.bits | other.bits }
    }

    pub fn complement(&self) -> Event {
        Event { atom_count: self.atom_count, bits: !self.bits & full_mask(self.atom_count as usize) }
    }

    /// `a ⇒ b := aᶜ ∨ b`.
    pub fn implies(&self, other: &Event) -> Event {
        self.complement().join(other)
    }

    pub fn minus(&self, other: &Event) -> Event {
        self.meet(&other.complement())
    }

    /// The lattice order `a ≤ b`, i.e. `a ∧ b = a`.
    pub fn le(&self, other: &Event) -> bool {
        self.bits & !other.bits == 0
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bottom() {
            return f.write_str("bot");
        }
        if self.is_top() {
            return f.write_str("top");
        }
        f.write_str("{")?;
        for (k, a) in self.atoms().into_iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Event({self}/{})", self.atom_count)
    }
}

/// Event-expression tree evaluated by [`lattice_eval`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventExpr {
    Leaf(Event),
    Join(Box<EventExpr>, Box<EventExpr>),
    Meet(Box<EventExpr>, Box<EventExpr>),
    Complement(Box<EventExpr>),
    Implies(Box<EventExpr>, Box<EventExpr>),
}

impl EventExpr {
    pub fn leaf(e: Event) -> Self {
        EventExpr::Leaf(e)
    }
    pub fn join(a: EventExpr, b: EventExpr) -> Self {
        EventExpr::Join(Box::new(a), Box::new(b))
    }
    pub fn meet(a: EventExpr, b: EventExpr) -> Self {
        EventExpr::Meet(Box::new(a), Box::new(b))
    }
    pub fn complement(a: EventExpr) -> Self {
        EventExpr::Complement(Box::new(a))
    }
    pub fn implies(a: EventExpr, b: EventExpr) -> Self {
        EventExpr::Implies(Box::new(a), Box::new(b))
    }
}

/// Exact evaluation of an event expression. `a ⇒ b` is rewritten as `aᶜ ∨ b`.
pub fn lattice_eval(expr: &EventExpr) -> Result<Event, AlgebraError> {
    match expr {
        EventExpr::Leaf(e) => Ok(*e),
        EventExpr::Join(a, b) => lattice_eval(a)?.try_join(&lattice_eval(b)?),
        EventExpr::Meet(a, b) => lattice_eval(a)?.try_meet(&lattice_eval(b)?),
        EventExpr::Complement(a) => Ok(lattice_eval(a)?.complement()),
        EventExpr::Implies(a, b) => lattice_eval(a)?.complement().try_join(&lattice_eval(b)?),
    }
}

/// First reason a candidate family fails to be a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionViolation {
    /// Blocks `first` and `second` (0-based positions) share the listed atoms.
    Overlap { first: usize, second: usize, shared: Event },
    /// Atoms of the partitioned element covered by no block.
    Uncovered(Event),
    /// Block `block` contains atoms outside the partitioned element.
    Escapes { block: usize, atoms: Event },
}

impl fmt::Display for PartitionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionViolation::Overlap { first, second, shared } => {
                write!(f, "blocks {} and {} overlap on {shared}", first + 1, second + 1)
            }
            PartitionViolation::Uncovered(e) => write!(f, "atoms {e} are not covered"),
            PartitionViolation::Escapes { block, atoms } => {
                write!(f, "block {} contains atoms {atoms} outside the partitioned event", block + 1)
            }
        }
    }
}

/// Checks that `candidate` is pairwise disjoint with join `of`. Empty blocks
/// are allowed.
pub fn is_partition(candidate: &[Event], of: &Event) -> Result<Option<PartitionViolation>, AlgebraError> {
    for e in candidate {
        e.same(of)?;
    }
    for (i, a) in candidate.iter().enumerate() {
        for (j, b) in candidate.iter().enumerate().skip(i + 1) {
            let shared = a.meet(b);
            if !shared.is_bottom() {
                return Ok(Some(PartitionViolation::Overlap { first: i, second: j, shared }));
            }
        }
    }
    for (i, a) in candidate.iter().enumerate() {
        let outside = a.minus(of);
        if !outside.is_bottom() {
            return Ok(Some(PartitionViolation::Escapes { block: i, atoms: outside }));
        }
    }
    let join = candidate.iter().fold(of.algebra().bottom(), |acc, e| acc.join(e));
    let uncovered = of.minus(&join);
    if !uncovered.is_bottom() {
        return Ok(Some(PartitionViolation::Uncovered(uncovered)));
    }
    Ok(None)
}

/// Validates that `blocks` partition unity and pairs them with `items`.
/// Used by every paste/mix operation; block order is the caller's.
pub fn check_pasting(blocks: &[Event], items: usize, algebra: &Algebra) -> Result<(), AlgebraError> {
    if blocks.len() != items {
        return Err(AlgebraError::ArityMismatch { blocks: blocks.len(), items });
    }
    if let Some(v) = is_partition(blocks, &algebra.top())? {
        return Err(AlgebraError::NotAPartitionOfOne(v));
    }
    Ok(())
}

/// A partition of an event into nonempty, pairwise disjoint blocks, sorted
/// by smallest atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    of: Event,
    blocks: Vec<Event>,
}

impl Partition {
    pub fn new(blocks: Vec<Event>, of: Event) -> Result<Self, AlgebraError> {
        if let Some(v) = is_partition(&blocks, &of)? {
            return Err(AlgebraError::NotAPartition(v));
        }
        let mut blocks: Vec<Event> = blocks.into_iter().filter(|b| !b.is_bottom()).collect();
        blocks.sort_by_key(|b| b.bits.trailing_zeros());
        Ok(Partition { of, blocks })
    }

    pub fn of_unity(blocks: Vec<Event>, algebra: &Algebra) -> Result<Self, AlgebraError> {
        Partition::new(blocks, algebra.top())
    }

    pub fn of(&self) -> Event {
        self.of
    }

    pub fn blocks(&self) -> &[Event] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Position of the block containing a 0-based atom index.
    pub fn block_of(&self, idx: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains_index(idx))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{}", Bracketed(*b))?;
        }
        f.write_str("]")
    }
}

/// Displays an event always in `{...}` form, never `top`/`bot`.
pub struct Bracketed(pub Event);

impl fmt::Display for Bracketed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<String> = self.0.atoms().iter().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", atoms.join(","))
    }
}

/// Meets of all pairs of blocks, empty meets dropped.
pub fn common_refinement(p: &Partition, q: &Partition) -> Result<Partition, AlgebraError> {
    p.of.same(&q.of)?;
    if p.of != q.of {
        return Err(AlgebraError::MismatchedSupport { left: p.of.to_string(), right: q.of.to_string() });
    }
    let mut blocks = Vec::with_capacity(p.len() * q.len());
    for a in &p.blocks {
        for b in &q.blocks {
            let m = a.meet(b);
            if !m.is_bottom() {
                blocks.push(m);
            }
        }
    }
    Partition::new(blocks, p.of)
}

/// All partitions of unity of an algebra, in restricted-growth-string order
/// (coarsest first).
pub fn partitions_of_unity(algebra: &Algebra) -> Vec<Partition> {
    let n = algebra.atom_count();
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    loop {
        let k = rgs.iter().copied().max().unwrap_or(0) + 1;
        let mut blocks = vec![0u64; k];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b] |= 1 << i;
        }
        out.push(Partition { of: algebra.top(), blocks: blocks.into_iter().map(|b| algebra.from_bits(b)).collect() });
        // next restricted growth string
        let mut i = n;
        loop {
            if i <= 1 {
                return out;
            }
            i -= 1;
            let prefix_max = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
        }
    }
}

/// An event literal not yet bound to an algebra: `top`, `bot` or `{1,3}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EventLit {
    Top,
    Bot,
    Atoms(Vec<usize>),
}

impl EventLit {
    pub fn resolve(&self, algebra: &Algebra) -> Result<Event, AlgebraError> {
        match self {
            EventLit::Top => Ok(algebra.top()),
            EventLit::Bot => Ok(algebra.bottom()),
            EventLit::Atoms(a) => algebra.event(a.iter().copied()),
        }
    }

    pub fn from_event(e: &Event) -> Self {
        if e.is_top() {
            EventLit::Top
        } else if e.is_bottom() {
            EventLit::Bot
        } else {
            EventLit::Atoms(e.atoms())
        }
    }
}

impl fmt::Display for EventLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventLit::Top => f.write_str("top"),
            EventLit::Bot => f.write_str("bot"),
            EventLit::Atoms(a) => {
                let s: Vec<String> = a.iter().map(|x| x.to_string()).collect();
                write!(f, "{{{}}}", s.join(","))
            }
        }
    }
}

fn malformed(offset: usize, message: impl Into<String>) -> AlgebraError {
    AlgebraError::MalformedLiteral { offset, message: message.into() }
}

struct LitCursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl LitCursor<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn event(&mut self) -> Result<EventLit, AlgebraError> {
        self.skip_ws();
        let rest = &self.s[self.pos..];
        if rest.starts_with(b"top") {
            self.pos += 3;
            return Ok(EventLit::Top);
        }
        if rest.starts_with(b"bot") {
            self.pos += 3;
            return Ok(EventLit::Bot);
        }
        if !self.eat(b'{') {
            return Err(malformed(self.pos, "expected '{', 'top' or 'bot'"));
        }
        let mut atoms = Vec::new();
        if self.eat(b'}') {
            return Ok(EventLit::Atoms(atoms));
        }
        loop {
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(malformed(self.pos, "expected an atom index"));
            }
            let n: usize = std::str::from_utf8(&self.s[start..self.pos])
                .expect("ascii digits")
                .parse()
                .map_err(|_| malformed(start, "atom index too large"))?;
            atoms.push(n);
            if self.eat(b'}') {
                break;
            }
            if !self.eat(b',') {
                return Err(malformed(self.pos, "expected ',' or '}'"));
            }
        }
        atoms.sort_unstable();
        atoms.dedup();
        Ok(EventLit::Atoms(atoms))
    }

    fn finish(&mut self) -> Result<(), AlgebraError> {
        self.skip_ws();
        if self.pos != self.s.len() {
            return Err(malformed(self.pos, "trailing input"));
        }
        Ok(())
    }
}

/// Parses `top`, `bot` or `{i,j,...}`.
pub fn parse_event_lit(text: &str) -> Result<EventLit, AlgebraError> {
    let mut c = LitCursor { s: text.as_bytes(), pos: 0 };
    let lit = c.event()?;
    c.finish()?;
    Ok(lit)
}

/// Parses a partition literal `[{1};{2,3}]`, keeping the written block order.
pub fn parse_partition_lit(text: &str) -> Result<Vec<EventLit>, AlgebraError> {
    let mut c = LitCursor { s: text.as_bytes(), pos: 0 };
    if !c.eat(b'[') {
        return Err(malformed(c.pos, "expected '['"));
    }
    let mut blocks = Vec::new();
    if !c.eat(b']') {
        loop {
            blocks.push(c.event()?);
            if c.eat(b']') {
                break;
            }
            if !c.eat(b';') {
                return Err(malformed(c.pos, "expected ';' or ']'"));
            }
        }
    }
    c.finish()?;
    Ok(blocks)
}
