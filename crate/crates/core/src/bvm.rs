//! Names of the Boolean-valued universe at bounded rank.
//!
//! A [`Name`] is a finite map from child names to guard events, optionally
//! mixed with ground rational constants (a second sort). Truth values of the
//! atomic formulas `x ∈ y` and `x = y` are computed by the usual mutual
//! recursion, memoized per [`TruthSession`].

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::boolalg::{check_pasting, Algebra, AlgebraError, Event};
use crate::error::{Classify, ErrorClass};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BvmError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("name built over {name_atoms} atoms used in a session over {session_atoms} atoms")]
    MixedAlgebras { name_atoms: usize, session_atoms: usize },
    #[error("malformed hereditarily-finite literal at offset {offset}: {message}")]
    MalformedLiteral { offset: usize, message: String },
    #[error("descent needs a total nonempty guard; missing atoms {missing}")]
    NotTotal { missing: Event },
    #[error("enumeration of {needed} selector functions exceeds cap {cap}")]
    CapExceeded { needed: u128, cap: u128 },
    #[error("extensionality violated between rows {first} and {second} on {event}")]
    ExtensionalityViolated { first: usize, second: usize, event: Event },
}

impl Classify for BvmError {
    fn class(&self) -> ErrorClass {
        match self {
            BvmError::Algebra(e) => e.class(),
            BvmError::MalformedLiteral { .. } => ErrorClass::Parse,
            BvmError::CapExceeded { .. } => ErrorClass::Cap,
            _ => ErrorClass::Precondition,
        }
    }
}

/// Hereditarily finite set, kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HfSet(Vec<HfSet>);

impl HfSet {
    pub fn empty() -> Self {
        HfSet(Vec::new())
    }

    pub fn new(mut elems: Vec<HfSet>) -> Self {
        elems.sort();
        elems.dedup();
        HfSet(elems)
    }

    pub fn elements(&self) -> &[HfSet] {
        &self.0
    }

    /// Von Neumann numeral: `0 = {}`, `k+1 = k ∪ {k}`.
    pub fn numeral(k: usize) -> Self {
        let mut cur: Vec<HfSet> = Vec::new();
        for _ in 0..k {
            let next = HfSet::new(cur.clone());
            cur.push(next);
        }
        HfSet::new(cur)
    }

    pub fn parse(text: &str) -> Result<Self, BvmError> {
        let bytes = text.as_bytes();
        let mut pos = 0;
        let set = hf_parse(bytes, &mut pos)?;
        skip_ws(bytes, &mut pos);
        if pos != bytes.len() {
            return Err(BvmError::MalformedLiteral { offset: pos, message: "trailing input".into() });
        }
        Ok(set)
    }
}

fn skip_ws(b: &[u8], pos: &mut usize) {
    while *pos < b.len() && b[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn hf_parse(b: &[u8], pos: &mut usize) -> Result<HfSet, BvmError> {
    skip_ws(b, pos);
    if b.get(*pos) != Some(&b'{') {
        return Err(BvmError::MalformedLiteral { offset: *pos, message: "expected '{'".into() });
    }
    *pos += 1;
    let mut elems = Vec::new();
    skip_ws(b, pos);
    if b.get(*pos) == Some(&b'}') {
        *pos += 1;
        return Ok(HfSet::empty());
    }
    loop {
        elems.push(hf_parse(b, pos)?);
        skip_ws(b, pos);
        match b.get(*pos) {
            Some(b',') => *pos += 1,
            Some(b'}') => {
                *pos += 1;
                return Ok(HfSet::new(elems));
            }
            _ => return Err(BvmError::MalformedLiteral { offset: *pos, message: "expected ',' or '}'".into() }),
        }
    }
}

impl fmt::Display for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

/// Ground-constant part of a name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Scalars {
    None,
    /// A scalar constant on every atom.
    Const(Rational),
    /// Disjoint nonempty events with distinct values; not a single value on `top`.
    Guarded(Vec<(Event, Rational)>),
}

struct NameNode {
    entries: Vec<(Name, Event)>,
    scalars: Scalars,
    rank: usize,
    /// Atom count of the events inside, 0 if there are none, `u8::MAX` on conflict.
    atoms: u8,
    canonical: bool,
    digest: u64,
}

/// A node of the Boolean-valued universe. Cheap to clone.
#[derive(Clone)]
pub struct Name(Arc<NameNode>);

const CONFLICT: u8 = u8::MAX;

fn merge_atoms(a: u8, b: u8) -> u8 {
    match (a, b) {
        (0, x) | (x, 0) => x,
        (x, y) if x == y => x,
        _ => CONFLICT,
    }
}

impl Name {
    fn from_parts(entries: Vec<(Name, Event)>, scalars: Scalars) -> Name {
        let rank = entries.iter().map(|(c, _)| c.rank() + 1).max().unwrap_or(0);
        let mut atoms = 0u8;
        for (c, g) in &entries {
            atoms = merge_atoms(atoms, c.0.atoms);
            atoms = merge_atoms(atoms, g.atom_count() as u8);
        }
        if let Scalars::Guarded(v) = &scalars {
            for (e, _) in v {
                atoms = merge_atoms(atoms, e.atom_count() as u8);
            }
        }
        let canonical = matches!(scalars, Scalars::None) && entries.iter().all(|(c, g)| g.is_top() && c.0.canonical);
        let mut h = DefaultHasher::new();
        rank.hash(&mut h);
        scalars.hash(&mut h);
        for (c, g) in &entries {
            c.0.digest.hash(&mut h);
            g.hash(&mut h);
        }
        let digest = h.finish();
        Name(Arc::new(NameNode { entries, scalars, rank, atoms, canonical, digest }))
    }

    /// The empty set-node `∅`.
    pub fn empty() -> Name {
        Name::from_parts(Vec::new(), Scalars::None)
    }

    /// Scalar ground constant.
    pub fn scalar(q: Rational) -> Name {
        Name::from_parts(Vec::new(), Scalars::Const(q))
    }

    /// Set-node from `(child, guard)` pairs; duplicate children have their
    /// guards joined and guard-0 entries are dropped.
    pub fn set<I: IntoIterator<Item = (Name, Event)>>(entries: I) -> Name {
        let mut map: BTreeMap<Name, Event> = BTreeMap::new();
        for (c, g) in entries {
            if g.is_bottom() {
                continue;
            }
            map.entry(c).and_modify(|e| *e = e.join(&g)).or_insert(g);
        }
        Name::from_parts(map.into_iter().collect(), Scalars::None)
    }

    /// General normalizing constructor: a set part plus scalar values on
    /// disjoint events. Guards are restricted to the complement of the
    /// scalar support.
    pub fn mixed(algebra: &Algebra, entries: Vec<(Name, Event)>, scalars: Vec<(Event, Rational)>) -> Name {
        let mut by_value: BTreeMap<Rational, Event> = BTreeMap::new();
        for (e, q) in scalars {
            if e.is_bottom() {
                continue;
            }
            by_value.entry(q).and_modify(|x| *x = x.join(&e)).or_insert(e);
        }
        let support = by_value.values().fold(algebra.bottom(), |acc, e| acc.join(e));
        let outside = support.complement();
        let mut map: BTreeMap<Name, Event> = BTreeMap::new();
        for (c, g) in entries {
            let g = g.meet(&outside);
            if g.is_bottom() {
                continue;
            }
            map.entry(c).and_modify(|e| *e = e.join(&g)).or_insert(g);
        }
        let scalars = if by_value.is_empty() {
            Scalars::None
        } else if by_value.len() == 1 && support.is_top() {
            Scalars::Const(by_value.into_keys().next().expect("one value"))
        } else {
            let mut v: Vec<(Event, Rational)> = by_value.into_iter().map(|(q, e)| (e, q)).collect();
            v.sort_by_key(|(e, _)| e.bits().trailing_zeros());
            Scalars::Guarded(v)
        };
        Name::from_parts(map.into_iter().collect(), scalars)
    }

    /// Canonical names of the von Neumann numerals `0..count`, built with
    /// shared children so that large numerals stay quadratic in size.
    pub fn numerals(count: usize, algebra: &Algebra) -> Vec<Name> {
        let mut out: Vec<Name> = Vec::with_capacity(count);
        for _ in 0..count {
            let next = Name::set(out.iter().map(|n| (n.clone(), algebra.top())));
            out.push(next);
        }
        out
    }

    /// `x̌`: the canonical name of a hereditarily finite set, all guards 1.
    pub fn canonical(hf: &HfSet, algebra: &Algebra) -> Name {
        let mut cache: HashMap<&HfSet, Name> = HashMap::new();
        canonical_rec(hf, algebra, &mut cache)
    }

    pub fn rank(&self) -> usize {
        self.0.rank
    }

    /// `(child, guard)` pairs of the set part, sorted by child.
    pub fn entries(&self) -> &[(Name, Event)] {
        &self.0.entries
    }

    /// The guard `x(t)`, `bot` for children outside the domain.
    pub fn guard(&self, child: &Name, algebra: &Algebra) -> Event {
        self.0.entries.iter().find(|(c, _)| c == child).map(|(_, g)| *g).unwrap_or(algebra.bottom())
    }

    pub fn is_canonical(&self) -> bool {
        self.0.canonical
    }

    pub fn is_pure_set(&self) -> bool {
        matches!(self.0.scalars, Scalars::None)
    }

    /// `Some(q)` when this name is the scalar constant `q` on every atom.
    pub fn as_constant(&self) -> Option<&Rational> {
        match &self.0.scalars {
            Scalars::Const(q) => Some(q),
            _ => None,
        }
    }

    /// Scalar pieces `(event, value)`, disjoint, merged by value.
    pub fn scalar_pieces(&self, algebra: &Algebra) -> Vec<(Event, Rational)> {
        match &self.0.scalars {
            Scalars::None => Vec::new(),
            Scalars::Const(q) => vec![(algebra.top(), q.clone())],
            Scalars::Guarded(v) => v.clone(),
        }
    }

    /// Atoms on which this name is a scalar.
    pub fn scalar_support(&self, algebra: &Algebra) -> Event {
        match &self.0.scalars {
            Scalars::None => algebra.bottom(),
            Scalars::Const(_) => algebra.top(),
            Scalars::Guarded(v) => v.iter().fold(algebra.bottom(), |acc, (e, _)| acc.join(e)),
        }
    }

    /// Atom count the name was built over; `None` for algebra-free names
    /// such as `∅` or a bare scalar.
    pub fn atom_count(&self) -> Option<usize> {
        match self.0.atoms {
            0 => None,
            n => Some(n as usize),
        }
    }

    fn check(&self, algebra: &Algebra) -> Result<(), BvmError> {
        let a = self.0.atoms;
        if a == 0 || a as usize == algebra.atom_count() {
            Ok(())
        } else {
            Err(BvmError::MixedAlgebras {
                name_atoms: if a == CONFLICT { 0 } else { a as usize },
                session_atoms: algebra.atom_count(),
            })
        }
    }

    /// Number of distinct nodes reachable from this name.
    pub fn node_count(&self) -> usize {
        fn walk(n: &Name, seen: &mut std::collections::HashSet<Name>) {
            if seen.insert(n.clone()) {
                for (c, _) in n.entries() {
                    walk(c, seen);
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }
}

fn canonical_rec<'a>(hf: &'a HfSet, algebra: &Algebra, cache: &mut HashMap<&'a HfSet, Name>) -> Name {
    if let Some(n) = cache.get(hf) {
        return n.clone();
    }
    let entries: Vec<(Name, Event)> =
        hf.elements().iter().map(|e| (canonical_rec(e, algebra, cache), algebra.top())).collect();
    let n = Name::set(entries);
    cache.insert(hf, n.clone());
    n
}

impl PartialEq for Name {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.digest == other.0.digest && self.cmp(other) == Ordering::Equal)
    }
}

impl Eq for Name {}

impl Hash for Name {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.digest.hash(state);
    }
}

impl PartialOrd for Name {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Structural order: rank, then scalar part, then entries.
impl Ord for Name {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0
            .rank
            .cmp(&other.0.rank)
            .then_with(|| self.0.scalars.cmp(&other.0.scalars))
            .then_with(|| self.0.entries.cmp(&other.0.entries))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.canonical {
            f.write_str("canon")?;
            return write_hf(self, f);
        }
        match &self.0.scalars {
            Scalars::None => write_explicit(self, f),
            Scalars::Const(q) => write!(f, "scalar {}", format_rational(q)),
            Scalars::Guarded(pieces) => {
                f.write_str("mix[")?;
                let mut first = true;
                let atoms = pieces[0].0.atom_count();
                let support = pieces.iter().fold(0u64, |acc, (e, _)| acc | e.bits());
                let algebra = Algebra::new(atoms).expect("valid atom count");
                let rest = algebra.from_bits(!support);
                if !rest.is_bottom() {
                    write!(f, "{rest}: ")?;
                    write_explicit(self, f)?;
                    first = false;
                }
                for (e, q) in pieces {
                    if !first {
                        f.write_str("; ")?;
                    }
                    first = false;
                    write!(f, "{e}: scalar {}", format_rational(q))?;
                }
                f.write_str("]")
            }
        }
    }
}

fn write_hf(n: &Name, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_str("{")?;
    for (i, (c, _)) in n.entries().iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write_hf(c, f)?;
    }
    f.write_str("}")
}

fn write_explicit(n: &Name, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_str("{")?;
    for (i, (c, g)) in n.entries().iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "({c}, {g})")?;
    }
    f.write_str("}")
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Name({self})")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomicKind {
    Membership,
    Equality,
}

/// Host for the memoized truth-value recursion over one algebra.
pub struct TruthSession {
    algebra: Algebra,
    eq_memo: HashMap<(Name, Name), Event>,
    mem_memo: HashMap<(Name, Name), Event>,
    canonical_shortcut: bool,
}

impl TruthSession {
    pub fn new(algebra: Algebra) -> Self {
        TruthSession { algebra, eq_memo: HashMap::new(), mem_memo: HashMap::new(), canonical_shortcut: true }
    }

    /// A session that runs the full recursion even between two canonical
    /// names, whose truth values are otherwise decided structurally as 0 or 1.
    pub fn without_canonical_shortcut(algebra: Algebra) -> Self {
        TruthSession { canonical_shortcut: false, ..TruthSession::new(algebra) }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn cache_len(&self) -> usize {
        self.eq_memo.len() + self.mem_memo.len()
    }

    pub fn clear_cache(&mut self) {
        self.eq_memo.clear();
        self.mem_memo.clear();
    }

    pub fn check_name(&self, x: &Name) -> Result<(), BvmError> {
        x.check(&self.algebra)
    }

    /// `⟦x ∈ y⟧` or `⟦x = y⟧`.
    pub fn truth(&mut self, kind: AtomicKind, x: &Name, y: &Name) -> Result<Event, BvmError> {
        x.check(&self.algebra)?;
        y.check(&self.algebra)?;
        Ok(match kind {
            AtomicKind::Membership => self.mem(x, y),
            AtomicKind::Equality => self.eq(x, y),
        })
    }

    pub fn truth_eq(&mut self, x: &Name, y: &Name) -> Result<Event, BvmError> {
        self.truth(AtomicKind::Equality, x, y)
    }

    pub fn truth_in(&mut self, x: &Name, y: &Name) -> Result<Event, BvmError> {
        self.truth(AtomicKind::Membership, x, y)
    }

    /// `x ∼ y`, i.e. `⟦x = y⟧ = 1`.
    pub fn equivalent(&mut self, x: &Name, y: &Name) -> Result<bool, BvmError> {
        Ok(self.truth_eq(x, y)?.is_top())
    }

    /// `⟦x ∈ y⟧ = ⋁_{t ∈ dom y} y(t) ∧ ⟦t = x⟧`; unchecked.
    pub(crate) fn mem(&mut self, x: &Name, y: &Name) -> Event {
        let key = (x.clone(), y.clone());
        if let Some(e) = self.mem_memo.get(&key) {
            return *e;
        }
        if self.canonical_shortcut && x.is_canonical() && y.is_canonical() {
            let hit = y.entries().binary_search_by(|(t, _)| t.cmp(x)).is_ok();
            return if hit { self.algebra.top() } else { self.algebra.bottom() };
        }
        let mut acc = self.algebra.bottom();
        for (t, g) in y.entries() {
            if g.le(&acc) {
                continue;
            }
            let e = self.eq(t, x);
            acc = acc.join(&g.meet(&e));
            if acc.is_top() {
                break;
            }
        }
        self.mem_memo.insert(key, acc);
        acc
    }

    /// `⟦x = y⟧`: scalar agreement on atoms where both are scalars, the
    /// two-sided inclusion recursion on atoms where both are sets, and 0 on
    /// atoms where the sorts differ. Unchecked.
    pub(crate) fn eq(&mut self, x: &Name, y: &Name) -> Event {
        let key = (x.clone(), y.clone());
        if let Some(e) = self.eq_memo.get(&key) {
            return *e;
        }
        if self.canonical_shortcut && x.is_canonical() && y.is_canonical() {
            return if x == y { self.algebra.top() } else { self.algebra.bottom() };
        }
        let alg = self.algebra;
        let mut scalar_part = alg.bottom();
        let xs = x.scalar_pieces(&alg);
        let ys = y.scalar_pieces(&alg);
        for (a, p) in &xs {
            for (b, q) in &ys {
                if p == q {
                    scalar_part = scalar_part.join(&a.meet(b));
                }
            }
        }
        let both_sets = x.scalar_support(&alg).join(&y.scalar_support(&alg)).complement();
        let mut set_part = both_sets;
        if !set_part.is_bottom() {
            for (t, g) in x.entries() {
                let e = self.mem(t, y);
                set_part = set_part.meet(&g.implies(&e));
                if set_part.is_bottom() {
                    break;
                }
            }
        }
        if !set_part.is_bottom() {
            for (t, g) in y.entries() {
                let e = self.mem(t, x);
                set_part = set_part.meet(&g.implies(&e));
                if set_part.is_bottom() {
                    break;
                }
            }
        }
        let result = scalar_part.join(&set_part);
        self.eq_memo.insert(key, result);
        self.eq_memo.insert((y.clone(), x.clone()), result);
        result
    }

    /// Mixing along a partition of unity given in caller order:
    /// entries `(t, a_i ∧ x_i(t))` joined over `i`, scalars selected per block.
    pub fn mix(&self, blocks: &[Event], xs: &[Name]) -> Result<Name, BvmError> {
        check_pasting(blocks, xs.len(), &self.algebra)?;
        for x in xs {
            self.check_name(x)?;
        }
        Ok(mix_unchecked(&self.algebra, blocks, xs))
    }

    /// Pairwise non-equivalent representatives of `x↓`, sorted by their
    /// serialization. Each is the lexicographically smallest serialization
    /// within its class among the enumerated mixes.
    pub fn descent(&mut self, x: &Name, cap: u128) -> Result<Vec<Name>, BvmError> {
        self.check_name(x)?;
        let alg = self.algebra;
        let guard = x.entries().iter().fold(alg.bottom(), |acc, (_, g)| acc.join(g));
        if !guard.is_top() {
            return Err(BvmError::NotTotal { missing: guard.complement() });
        }
        let n = alg.atom_count();
        let needed = (x.entries().len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if needed > cap {
            return Err(BvmError::CapExceeded { needed, cap });
        }
        let membership: Vec<Event> = x.entries().iter().map(|(t, _)| self.mem(t, x)).collect();
        let candidates: Vec<Vec<usize>> =
            (0..n).map(|w| (0..x.entries().len()).filter(|&i| membership[i].contains_index(w)).collect()).collect();
        let blocks: Vec<Event> = alg.atom_partition().blocks().to_vec();
        let mut classes: Vec<(Name, String)> = Vec::new();
        let mut choice = vec![0usize; n];
        loop {
            let picks: Vec<Name> = (0..n).map(|w| x.entries()[candidates[w][choice[w]]].0.clone()).collect();
            let m = mix_unchecked(&alg, &blocks, &picks);
            let text = m.to_string();
            let mut placed = false;
            for (rep, rep_text) in classes.iter_mut() {
                if self.eq(rep, &m).is_top() {
                    if text < *rep_text {
                        *rep = m.clone();
                        *rep_text = text.clone();
                    }
                    placed = true;
                    break;
                }
            }
            if !placed {
                classes.push((m, text));
            }
            // odometer over per-atom candidate lists
            let mut w = 0;
            loop {
                if w == n {
                    classes.sort_by(|a, b| a.1.cmp(&b.1));
                    return Ok(classes.into_iter().map(|(m, _)| m).collect());
                }
                choice[w] += 1;
                if choice[w] < candidates[w].len() {
                    break;
                }
                choice[w] = 0;
                w += 1;
            }
        }
    }

    /// Lifts a table of rows `(u_i, v_i)` to the name `g = {(pair(u_i, v_i), 1)}`
    /// after checking `⟦u_i = u_j⟧ ≤ ⟦v_i = v_j⟧` for every pair of rows.
    pub fn pair_and_lift(&mut self, table: &[(Name, Name)]) -> Result<(Vec<Name>, Name), BvmError> {
        for (u, v) in table {
            self.check_name(u)?;
            self.check_name(v)?;
        }
        for i in 0..table.len() {
            for j in i..table.len() {
                let du = self.eq(&table[i].0, &table[j].0);
                let dv = self.eq(&table[i].1, &table[j].1);
                let bad = du.minus(&dv);
                if !bad.is_bottom() {
                    return Err(BvmError::ExtensionalityViolated { first: i, second: j, event: bad });
                }
            }
        }
        let pairs: Vec<Name> = table.iter().map(|(u, v)| pair(u, v, &self.algebra)).collect();
        let g = Name::set(pairs.iter().map(|p| (p.clone(), self.algebra.top())));
        Ok((pairs, g))
    }
}

pub(crate) fn mix_unchecked(algebra: &Algebra, blocks: &[Event], xs: &[Name]) -> Name {
    let mut entries = Vec::new();
    let mut scalars = Vec::new();
    for (a, x) in blocks.iter().zip(xs) {
        if a.is_bottom() {
            continue;
        }
        for (t, g) in x.entries() {
            entries.push((t.clone(), a.meet(g)));
        }
        for (e, q) in x.scalar_pieces(algebra) {
            scalars.push((a.meet(&e), q));
        }
    }
    Name::mixed(algebra, entries, scalars)
}

/// Unordered pair `{u, v}` with guards 1.
pub fn doubleton(u: &Name, v: &Name, algebra: &Algebra) -> Name {
    Name::set([(u.clone(), algebra.top()), (v.clone(), algebra.top())])
}

/// Kuratowski pair `{{u}, {u, v}}` with guards 1.
pub fn pair(u: &Name, v: &Name, algebra: &Algebra) -> Name {
    let single = Name::set([(u.clone(), algebra.top())]);
    Name::set([(single, algebra.top()), (doubleton(u, v, algebra), algebra.top())])
}

/// Random generators used by the invariant suites.
pub mod random {
    use rand::Rng;

    use super::*;

    pub fn event<R: Rng>(rng: &mut R, algebra: &Algebra) -> Event {
        algebra.from_bits(rng.gen::<u64>())
    }

    /// Random nonzero event biased towards larger events.
    pub fn guard<R: Rng>(rng: &mut R, algebra: &Algebra) -> Event {
        loop {
            let e = if rng.gen_bool(0.4) { algebra.top() } else { event(rng, algebra) };
            if !e.is_bottom() {
                return e;
            }
        }
    }

    /// Random pure set-node of rank at most `max_rank`, at most `width`
    /// entries per node. Children are drawn from a shared pool so that
    /// structurally equal subnames recur.
    pub fn set_name<R: Rng>(rng: &mut R, algebra: &Algebra, max_rank: usize, width: usize) -> Name {
        let pool = pool(rng, algebra, max_rank.saturating_sub(1), width);
        if max_rank == 0 {
            return Name::empty();
        }
        let k = rng.gen_range(0..=width);
        Name::set((0..k).map(|_| (pool[rng.gen_range(0..pool.len())].clone(), guard(rng, algebra))))
    }

    /// A pool of names of rank ≤ `max_rank`, including `∅`.
    pub fn pool<R: Rng>(rng: &mut R, algebra: &Algebra, max_rank: usize, width: usize) -> Vec<Name> {
        let mut pool = vec![Name::empty()];
        for _ in 0..max_rank {
            let mut layer = Vec::new();
            for _ in 0..3 {
                let k = rng.gen_range(1..=width.max(1));
                layer
                    .push(Name::set((0..k).map(|_| (pool[rng.gen_range(0..pool.len())].clone(), guard(rng, algebra)))));
            }
            pool.extend(layer);
        }
        pool
    }

    /// A random partition of unity in random block order, possibly with
    /// empty blocks.
    pub fn partition<R: Rng>(rng: &mut R, algebra: &Algebra, max_blocks: usize) -> Vec<Event> {
        let k = rng.gen_range(1..=max_blocks.max(1));
        let mut bits = vec![0u64; k];
        for w in 0..algebra.atom_count() {
            bits[rng.gen_range(0..k)] |= 1 << w;
        }
        bits.into_iter().map(|b| algebra.from_bits(b)).collect()
    }
}
