//! Conditional sets in the step-function model: the carrier is every
//! atom-indexed tuple of base labels, `x|a` is `x` restricted to the atoms of
//! `a`, and concatenation pastes tuples atomwise.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::boolalg::{check_pasting, partitions_of_unity, Algebra, AlgebraError, Event};
use crate::bvm::{BvmError, Name, TruthSession};
use crate::error::{Classify, ErrorClass};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CondError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Bvm(#[from] BvmError),
    #[error("the base label set must be nonempty")]
    EmptyBase,
    #[error("duplicate label '{0}'")]
    DuplicateLabel(String),
    #[error("unknown label '{0}'")]
    UnknownLabel(String),
    #[error("element has {found} coordinates but the universe has {expected} atoms")]
    MixedUniverses { expected: usize, found: usize },
    #[error("element label index {0} is outside the base set")]
    LabelOutOfRange(usize),
    #[error("enumeration needs {needed} items, cap is {cap}")]
    CapExceeded { needed: u128, cap: u128 },
    #[error("function table has {found} rows, the carrier has {expected} members")]
    IncompleteTable { expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

impl Classify for CondError {
    fn class(&self) -> ErrorClass {
        match self {
            CondError::Algebra(e) => e.class(),
            CondError::Bvm(e) => e.class(),
            CondError::CapExceeded { .. } => ErrorClass::Cap,
            CondError::Malformed { .. } | CondError::UnknownLabel(_) | CondError::DuplicateLabel(_) => {
                ErrorClass::Parse
            }
            _ => ErrorClass::Precondition,
        }
    }
}

fn malformed(line: usize, message: impl Into<String>) -> CondError {
    CondError::Malformed { line, message: message.into() }
}

/// A carrier member: one base-label index per atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(Vec<usize>);

impl Element {
    pub fn new(labels: Vec<usize>) -> Self {
        Element(labels)
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }
}

/// `x|a`: the condition and the labels of `x` on the atoms of `a`. Every
/// `x|0` is the same null view.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct View {
    pub condition: Event,
    values: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondUniverse {
    labels: Vec<String>,
    algebra: Algebra,
}

impl CondUniverse {
    pub fn new(labels: Vec<String>, algebra: Algebra) -> Result<Self, CondError> {
        if labels.is_empty() {
            return Err(CondError::EmptyBase);
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(CondError::DuplicateLabel(l.clone()));
            }
        }
        Ok(CondUniverse { labels, algebra })
    }

    pub fn with_labels(labels: &[&str], atoms: usize) -> Result<Self, CondError> {
        CondUniverse::new(labels.iter().map(|s| s.to_string()).collect(), Algebra::new(atoms)?)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn base_size(&self) -> usize {
        self.labels.len()
    }

    /// `|E|^atoms`, saturating.
    pub fn carrier_size(&self) -> u128 {
        (self.labels.len() as u128).checked_pow(self.algebra.atom_count() as u32).unwrap_or(u128::MAX)
    }

    pub fn check(&self, x: &Element) -> Result<(), CondError> {
        if x.0.len() != self.algebra.atom_count() {
            return Err(CondError::MixedUniverses { expected: self.algebra.atom_count(), found: x.0.len() });
        }
        if let Some(&l) = x.0.iter().find(|&&l| l >= self.labels.len()) {
            return Err(CondError::LabelOutOfRange(l));
        }
        Ok(())
    }

    /// Position in the canonical enumeration: lexicographic, atom 1 most significant.
    pub fn index(&self, x: &Element) -> u128 {
        let base = self.labels.len() as u128;
        x.0.iter().fold(0u128, |acc, &l| acc * base + l as u128)
    }

    pub fn element(&self, mut index: u128) -> Element {
        let base = self.labels.len() as u128;
        let mut v = vec![0usize; self.algebra.atom_count()];
        for slot in v.iter_mut().rev() {
            *slot = (index % base) as usize;
            index /= base;
        }
        Element(v)
    }

    fn check_cap(&self, cap: u128) -> Result<usize, CondError> {
        let needed = self.carrier_size();
        if needed > cap {
            return Err(CondError::CapExceeded { needed, cap });
        }
        Ok(needed as usize)
    }

    /// The whole carrier in enumeration order.
    pub fn carrier(&self, cap: u128) -> Result<Vec<Element>, CondError> {
        let n = self.check_cap(cap)?;
        Ok((0..n as u128).map(|i| self.element(i)).collect())
    }

    pub fn view(&self, x: &Element, a: &Event) -> View {
        let values = x.0.iter().enumerate().map(|(w, &l)| a.contains_index(w).then_some(l)).collect();
        View { condition: *a, values }
    }

    /// `Σ x_i|a_i` along blocks given in caller order.
    pub fn concatenate(&self, blocks: &[Event], xs: &[Element]) -> Result<Element, CondError> {
        check_pasting(blocks, xs.len(), &self.algebra)?;
        for x in xs {
            self.check(x)?;
        }
        Ok(paste(blocks, xs, self.algebra.atom_count()))
    }

    /// `a_{x,y}`: the atoms where `x` and `y` carry the same label.
    pub fn agreement_event(&self, x: &Element, y: &Element) -> Result<Event, CondError> {
        self.check(x)?;
        self.check(y)?;
        Ok(agreement(&self.algebra, x, y))
    }

    pub fn parse_element(&self, text: &str) -> Result<Element, CondError> {
        let t = text.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| malformed(1, format!("expected a tuple '(l1,...,lN)', got '{t}'")))?;
        let mut v = Vec::new();
        for part in inner.split(',') {
            let p = part.trim();
            let idx = self.labels.iter().position(|l| l == p).ok_or_else(|| CondError::UnknownLabel(p.to_string()))?;
            v.push(idx);
        }
        let x = Element(v);
        self.check(&x)?;
        Ok(x)
    }

    /// Parses tuples separated by whitespace, commas or semicolons.
    pub fn parse_element_list(&self, text: &str) -> Result<Vec<Element>, CondError> {
        let mut out = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            rest = rest.trim_start_matches(|c: char| c.is_whitespace() || c == ',' || c == ';');
            if rest.is_empty() {
                break;
            }
            let end = rest.find(')').ok_or_else(|| malformed(1, "unterminated tuple"))?;
            out.push(self.parse_element(&rest[..=end])?);
            rest = &rest[end + 1..];
        }
        Ok(out)
    }

    pub fn format_element(&self, x: &Element) -> String {
        let parts: Vec<&str> = x.0.iter().map(|&l| self.labels[l].as_str()).collect();
        format!("({})", parts.join(","))
    }

    /// Parses `atoms N` and `conduniv E={a,b,...}` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CondError> {
        let mut atoms: Option<usize> = None;
        let mut labels: Option<Vec<String>> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("atoms") {
                let n = rest.trim().parse().map_err(|_| malformed(i + 1, "expected 'atoms N'"))?;
                atoms = Some(n);
            } else if let Some(rest) = line.strip_prefix("conduniv") {
                let set = rest
                    .trim()
                    .strip_prefix("E")
                    .map(str::trim_start)
                    .and_then(|r| r.strip_prefix('='))
                    .map(str::trim)
                    .and_then(|r| r.strip_prefix('{'))
                    .and_then(|r| r.strip_suffix('}'))
                    .ok_or_else(|| malformed(i + 1, "expected 'conduniv E={a,b,...}'"))?;
                let mut v = Vec::new();
                for l in set.split(',') {
                    let l = l.trim();
                    if l.is_empty() || !l.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                        return Err(malformed(i + 1, format!("bad label '{l}'")));
                    }
                    v.push(l.to_string());
                }
                labels = Some(v);
            } else {
                return Err(malformed(i + 1, "expected 'atoms' or 'conduniv'"));
            }
        }
        let atoms = atoms.ok_or_else(|| malformed(0, "missing 'atoms N'"))?;
        let labels = labels.ok_or_else(|| malformed(0, "missing 'conduniv E={...}'"))?;
        CondUniverse::new(labels, Algebra::new(atoms)?)
    }
}

impl fmt::Display for CondUniverse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "atoms {}", self.algebra.atom_count())?;
        writeln!(f, "conduniv E={{{}}}", self.labels.join(","))
    }
}

fn paste(blocks: &[Event], xs: &[Element], atoms: usize) -> Element {
    let mut v = vec![0usize; atoms];
    for (a, x) in blocks.iter().zip(xs) {
        for w in a.indices() {
            v[w] = x.0[w];
        }
    }
    Element(v)
}

fn agreement(algebra: &Algebra, x: &Element, y: &Element) -> Event {
    let bits = x.0.iter().zip(&y.0).enumerate().filter(|(_, (a, b))| a == b).fold(0u64, |acc, (w, _)| acc | 1 << w);
    algebra.from_bits(bits)
}

pub fn concatenate_cond(u: &CondUniverse, blocks: &[Event], xs: &[Element]) -> Result<Element, CondError> {
    u.concatenate(blocks, xs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    Native,
    /// Carrier with the listed members removed.
    Doctored(Vec<Element>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum C3Failure {
    /// No surviving member has the required restrictions; the paste shown was removed.
    Missing(Element),
    NotUnique(Vec<Element>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct C3Counterexample {
    pub partition: Vec<Event>,
    /// One surviving member per block realizing the selected restriction.
    pub picks: Vec<Element>,
    pub failure: C3Failure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub members: usize,
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub partitions_checked: usize,
    pub selections_checked: usize,
    pub c1_violation: Option<(Element, Event, Element, Event)>,
    pub c2_violation: Option<(Element, Element, Event, Event)>,
    pub c3_counterexample: Option<C3Counterexample>,
}

/// Exhaustive check of C1 (on nonzero conditions), C2 and C3 over the
/// native or doctored carrier.
pub fn check_axioms(u: &CondUniverse, mode: &Mode, cap: u128) -> Result<AxiomReport, CondError> {
    let full = u.carrier(cap)?;
    let members: Vec<Element> = match mode {
        Mode::Native => full,
        Mode::Doctored(removed) => {
            for r in removed {
                u.check(r)?;
            }
            let removed: HashSet<&Element> = removed.iter().collect();
            full.into_iter().filter(|x| !removed.contains(x)).collect()
        }
    };
    let alg = *u.algebra();
    let events: Vec<Event> = alg.events().collect();

    let mut c1_violation = None;
    let mut seen: HashMap<View, (Element, Event)> = HashMap::new();
    'c1: for x in &members {
        for a in events.iter().filter(|a| !a.is_bottom()) {
            let v = u.view(x, a);
            match seen.get(&v) {
                Some((y, b)) if b != a => {
                    c1_violation = Some((y.clone(), *b, x.clone(), *a));
                    break 'c1;
                }
                Some(_) => {}
                None => {
                    seen.insert(v, (x.clone(), *a));
                }
            }
        }
    }

    let mut c2_violation = None;
    'c2: for (i, x) in members.iter().enumerate() {
        for y in &members[i..] {
            for b in &events {
                if u.view(x, b) != u.view(y, b) {
                    continue;
                }
                for a in events.iter().filter(|a| Event::le(a, b)) {
                    if u.view(x, a) != u.view(y, a) {
                        c2_violation = Some((x.clone(), y.clone(), *a, *b));
                        break 'c2;
                    }
                }
            }
        }
    }

    let mut c3_counterexample = None;
    let mut partitions_checked = 0;
    let mut selections_checked = 0;
    'c3: for p in partitions_of_unity(&alg) {
        partitions_checked += 1;
        let blocks = p.blocks().to_vec();
        // distinct restrictions per block, each with its first realizing member
        let options: Vec<Vec<(View, &Element)>> = blocks
            .iter()
            .map(|a| {
                let mut opts: Vec<(View, &Element)> = Vec::new();
                for x in &members {
                    let v = u.view(x, a);
                    if !opts.iter().any(|(w, _)| *w == v) {
                        opts.push((v, x));
                    }
                }
                opts
            })
            .collect();
        if options.iter().any(|o| o.is_empty()) {
            continue;
        }
        let mut choice = vec![0usize; blocks.len()];
        loop {
            selections_checked += 1;
            let matches: Vec<&Element> = members
                .iter()
                .filter(|x| blocks.iter().zip(&choice).enumerate().all(|(i, (a, &c))| u.view(x, a) == options[i][c].0))
                .collect();
            if matches.len() != 1 {
                let picks: Vec<Element> = choice.iter().enumerate().map(|(i, &c)| options[i][c].1.clone()).collect();
                let failure = if matches.is_empty() {
                    C3Failure::Missing(paste(&blocks, &picks, alg.atom_count()))
                } else {
                    C3Failure::NotUnique(matches.into_iter().cloned().collect())
                };
                c3_counterexample = Some(C3Counterexample { partition: blocks, picks, failure });
                break 'c3;
            }
            // odometer, last block fastest
            let mut k = blocks.len();
            loop {
                if k == 0 {
                    continue 'c3;
                }
                k -= 1;
                choice[k] += 1;
                if choice[k] < options[k].len() {
                    break;
                }
                choice[k] = 0;
            }
        }
    }

    Ok(AxiomReport {
        members: members.len(),
        c1: c1_violation.is_none(),
        c2: c2_violation.is_none(),
        c3: c3_counterexample.is_none(),
        partitions_checked,
        selections_checked,
        c1_violation,
        c2_violation,
        c3_counterexample,
    })
}

/// `ū` with domain the numerals `ǩ(v)` of every carrier index and guard `a_{u,v}`.
pub fn bridge_name(u: &CondUniverse, x: &Element, carrier: &[Element], numerals: &[Name]) -> Name {
    let alg = u.algebra();
    Name::set(carrier.iter().zip(numerals).map(|(v, k)| (k.clone(), agreement(alg, x, v))))
}

/// Builds `ū` and checks `⟦ū = v̄⟧ = a_{u,v}` against every carrier member `v`.
pub fn build_and_verify_name(
    univ: &CondUniverse,
    x: &Element,
    s: &mut TruthSession,
    cap: u128,
) -> Result<(Name, bool), CondError> {
    univ.check(x)?;
    let carrier = univ.carrier(cap)?;
    let numerals = Name::numerals(carrier.len(), univ.algebra());
    let ux = bridge_name(univ, x, &carrier, &numerals);
    let mut ok = true;
    for v in &carrier {
        let vn = bridge_name(univ, v, &carrier, &numerals);
        ok &= s.truth_eq(&ux, &vn)? == agreement(univ.algebra(), x, v);
    }
    Ok((ux, ok))
}

#[derive(Debug, Clone)]
pub struct NameBridgeReport {
    pub names: Vec<Name>,
    pub pairs: usize,
    /// `(u, v, ⟦ū = v̄⟧, a_{u,v})` for every disagreeing pair.
    pub mismatches: Vec<(Element, Element, Event, Event)>,
    /// Number of `∼`-classes among the `ū`.
    pub classes: usize,
}

/// Runs the name bridge over every ordered pair of carrier members.
pub fn verify_name_bridge(univ: &CondUniverse, s: &mut TruthSession, cap: u128) -> Result<NameBridgeReport, CondError> {
    let carrier = univ.carrier(cap)?;
    let numerals = Name::numerals(carrier.len(), univ.algebra());
    let names: Vec<Name> = carrier.iter().map(|x| bridge_name(univ, x, &carrier, &numerals)).collect();
    let mut mismatches = Vec::new();
    let mut class_of: Vec<Option<usize>> = vec![None; names.len()];
    let mut classes = 0;
    for i in 0..names.len() {
        for j in 0..names.len() {
            let t = s.truth_eq(&names[i], &names[j])?;
            let a = agreement(univ.algebra(), &carrier[i], &carrier[j]);
            if t != a {
                mismatches.push((carrier[i].clone(), carrier[j].clone(), t, a));
            }
            if j < i && t.is_top() && class_of[i].is_none() {
                class_of[i] = class_of[j];
            }
        }
        if class_of[i].is_none() {
            class_of[i] = Some(classes);
            classes += 1;
        }
    }
    Ok(NameBridgeReport { names, pairs: carrier.len() * carrier.len(), mismatches, classes })
}

/// A stable subset in normal form: a nonempty label set per atom, as bitmasks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StableSubset {
    per_atom: Vec<u64>,
}

impl StableSubset {
    pub fn new(per_atom: Vec<u64>) -> Option<Self> {
        per_atom.iter().all(|&m| m != 0).then_some(StableSubset { per_atom })
    }

    pub fn masks(&self) -> &[u64] {
        &self.per_atom
    }

    pub fn labels_at(&self, atom_index: usize) -> Vec<usize> {
        (0..64).filter(|l| self.per_atom[atom_index] >> l & 1 == 1).collect()
    }

    pub fn contains(&self, x: &Element) -> bool {
        x.0.iter().zip(&self.per_atom).all(|(&l, &m)| l < 64 && m >> l & 1 == 1)
    }

    pub fn members(&self, u: &CondUniverse, cap: u128) -> Result<Vec<Element>, CondError> {
        Ok(u.carrier(cap)?.into_iter().filter(|x| self.contains(x)).collect())
    }

    /// Atomwise intersection; `None` when it is empty at some atom.
    pub fn intersect(&self, other: &StableSubset) -> Option<StableSubset> {
        StableSubset::new(self.per_atom.iter().zip(&other.per_atom).map(|(a, b)| a & b).collect())
    }

    pub fn format(&self, u: &CondUniverse) -> String {
        let parts: Vec<String> = (0..self.per_atom.len())
            .map(|w| {
                let ls: Vec<&str> = self.labels_at(w).into_iter().map(|l| u.labels[l].as_str()).collect();
                format!("{{{}}}", ls.join(","))
            })
            .collect();
        parts.join(" x ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetReport {
    pub closed_under_pastes: bool,
    pub equals_projection_product: bool,
    pub normal_form: Option<StableSubset>,
    /// Partition, members pasted and the missing result.
    pub missing_paste: Option<(Vec<Event>, Vec<Element>, Element)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionReport {
    pub stable: bool,
    /// `f_ω : E → E` per atom, as label-index tables.
    pub decomposition: Option<Vec<Vec<usize>>>,
    /// Partition, members pasted, `f(Σ x_i|a_i)` and `Σ f(x_i)|a_i`.
    pub counterexample: Option<(Vec<Event>, Vec<Element>, Element, Element)>,
    pub conditionally_injective: Option<bool>,
    pub conditionally_surjective: Option<bool>,
}

#[derive(Debug, Clone)]
pub enum Stability<'a> {
    Subset(&'a [Element]),
    /// `f(x)` for every carrier member `x`, in enumeration order.
    Function(&'a [Element]),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StabilityReport {
    Subset(SubsetReport),
    Function(FunctionReport),
}

pub fn stability_check(u: &CondUniverse, what: Stability<'_>, cap: u128) -> Result<StabilityReport, CondError> {
    match what {
        Stability::Subset(s) => subset_stability(u, s, cap).map(StabilityReport::Subset),
        Stability::Function(t) => function_stability(u, t, cap).map(StabilityReport::Function),
    }
}

fn subset_stability(u: &CondUniverse, s: &[Element], cap: u128) -> Result<SubsetReport, CondError> {
    u.check_cap(cap)?;
    for x in s {
        u.check(x)?;
    }
    let alg = *u.algebra();
    let n = alg.atom_count();
    let set: HashSet<&Element> = s.iter().collect();
    let mut members: Vec<&Element> = set.iter().copied().collect();
    members.sort_by_key(|x| u.index(x));

    let mut missing_paste = None;
    if !members.is_empty() {
        'outer: for p in partitions_of_unity(&alg) {
            let blocks = p.blocks().to_vec();
            let options: Vec<Vec<&Element>> = blocks
                .iter()
                .map(|a| {
                    let mut seen = HashSet::new();
                    members.iter().copied().filter(|x| seen.insert(u.view(x, a))).collect()
                })
                .collect();
            let mut choice = vec![0usize; blocks.len()];
            loop {
                let picks: Vec<Element> = choice.iter().enumerate().map(|(i, &c)| options[i][c].clone()).collect();
                let r = paste(&blocks, &picks, n);
                if !set.contains(&r) {
                    missing_paste = Some((blocks, picks, r));
                    break 'outer;
                }
                let mut k = blocks.len();
                loop {
                    if k == 0 {
                        continue 'outer;
                    }
                    k -= 1;
                    choice[k] += 1;
                    if choice[k] < options[k].len() {
                        break;
                    }
                    choice[k] = 0;
                }
            }
        }
    }

    let mut masks = vec![0u64; n];
    for x in &members {
        for (w, &l) in x.0.iter().enumerate() {
            masks[w] |= 1 << l;
        }
    }
    let product = StableSubset::new(masks);
    let equals_projection_product = match &product {
        Some(p) => {
            let size: u128 = p.per_atom.iter().map(|m| m.count_ones() as u128).product();
            size == members.len() as u128
        }
        None => false,
    };
    let closed = missing_paste.is_none() && !members.is_empty();
    Ok(SubsetReport {
        closed_under_pastes: closed,
        equals_projection_product,
        normal_form: if closed { product } else { None },
        missing_paste,
    })
}

fn function_stability(u: &CondUniverse, table: &[Element], cap: u128) -> Result<FunctionReport, CondError> {
    let carrier = u.carrier(cap)?;
    if table.len() != carrier.len() {
        return Err(CondError::IncompleteTable { expected: carrier.len(), found: table.len() });
    }
    for y in table {
        u.check(y)?;
    }
    let alg = *u.algebra();
    let n = alg.atom_count();
    let e = u.base_size();
    // f is stable iff f(x)(ω) depends on x(ω) alone; a dependence on other
    // atoms is exhibited as a paste along {ω} and its complement.
    let mut decomposition: Vec<Vec<Option<(usize, usize)>>> = vec![vec![None; e]; n];
    for (xi, x) in carrier.iter().enumerate() {
        for w in 0..n {
            let out = table[xi].0[w];
            match decomposition[w][x.0[w]] {
                None => decomposition[w][x.0[w]] = Some((out, xi)),
                Some((prev, yi)) if prev != out => {
                    let blocks = vec![alg.from_bits(1 << w), alg.from_bits(1 << w).complement()];
                    let picks = vec![carrier[yi].clone(), x.clone()];
                    let pasted = paste(&blocks, &picks, n);
                    let lhs = table[u.index(&pasted) as usize].clone();
                    let rhs = paste(&blocks, &[table[yi].clone(), table[xi].clone()], n);
                    return Ok(FunctionReport {
                        stable: false,
                        decomposition: None,
                        counterexample: Some((blocks, picks, lhs, rhs)),
                        conditionally_injective: None,
                        conditionally_surjective: None,
                    });
                }
                Some(_) => {}
            }
        }
    }
    let fam: Vec<Vec<usize>> = decomposition
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.expect("every label occurs").0).collect())
        .collect();
    let injective = fam.iter().all(|f| f.iter().collect::<HashSet<_>>().len() == e);
    let surjective = injective;
    Ok(FunctionReport {
        stable: true,
        decomposition: Some(fam),
        counterexample: None,
        conditionally_injective: Some(injective),
        conditionally_surjective: Some(surjective),
    })
}

/// Parses a function table of `(..) -> (..)` lines, one per carrier member.
pub fn parse_function_table(u: &CondUniverse, text: &str, cap: u128) -> Result<Vec<Element>, CondError> {
    let n = u.check_cap(cap)?;
    let mut table: Vec<Option<Element>> = vec![None; n];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (l, r) = line.split_once("->").ok_or_else(|| malformed(i + 1, "expected '(..) -> (..)'"))?;
        let x = u.parse_element(l)?;
        let y = u.parse_element(r)?;
        let slot = &mut table[u.index(&x) as usize];
        if slot.is_some() {
            return Err(malformed(i + 1, format!("row for {} given twice", u.format_element(&x))));
        }
        *slot = Some(y);
    }
    let found = table.iter().filter(|t| t.is_some()).count();
    if found != n {
        return Err(CondError::IncompleteTable { expected: n, found });
    }
    Ok(table.into_iter().map(|t| t.expect("checked")).collect())
}

/// Iterator over all stable subsets, atom 1 most significant.
pub struct StableSubsets {
    full: u64,
    current: Option<Vec<u64>>,
}

impl Iterator for StableSubsets {
    type Item = StableSubset;

    fn next(&mut self) -> Option<StableSubset> {
        let cur = self.current.clone()?;
        let mut next = cur.clone();
        let mut k = next.len();
        self.current = loop {
            if k == 0 {
                break None;
            }
            k -= 1;
            if next[k] < self.full {
                next[k] += 1;
                break Some(next);
            }
            next[k] = 1;
        };
        Some(StableSubset { per_atom: cur })
    }
}

/// `(2^|E| − 1)^atoms` stable subsets, one per atom-indexed tuple of
/// nonempty label sets.
pub fn enumerate_stable_subsets(u: &CondUniverse, cap: u128) -> Result<(u128, StableSubsets), CondError> {
    let e = u.base_size();
    if e > 63 {
        return Err(CondError::CapExceeded { needed: u128::MAX, cap });
    }
    let per = (1u128 << e) - 1;
    let needed = per.checked_pow(u.algebra().atom_count() as u32).unwrap_or(u128::MAX);
    if needed > cap {
        return Err(CondError::CapExceeded { needed, cap });
    }
    let full = (1u64 << e) - 1;
    Ok((needed, StableSubsets { full, current: Some(vec![1; u.algebra().atom_count()]) }))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAP: u128 = 1_000_000;

    fn ab2() -> CondUniverse {
        CondUniverse::with_labels(&["a", "b"], 2).unwrap()
    }

    #[test]
    fn concatenation_examples() {
        let u = ab2();
        let alg = *u.algebra();
        let aa = u.parse_element("(a,a)").unwrap();
        let bb = u.parse_element("(b,b)").unwrap();
        let b1 = alg.atom(1).unwrap();
        let b2 = alg.atom(2).unwrap();
        let r = u.concatenate(&[b1, b2], &[aa.clone(), bb.clone()]).unwrap();
        assert_eq!(u.format_element(&r), "(a,b)");
        assert_eq!(u.concatenate(&[b2, b1], &[bb.clone(), aa.clone()]).unwrap(), r);
        assert_eq!(u.concatenate(&[alg.top()], std::slice::from_ref(&bb)).unwrap(), bb);
        assert!(u.concatenate(&[b1], &[aa]).is_err());
    }

    #[test]
    fn axioms_native_and_doctored() {
        let u = ab2();
        let r = check_axioms(&u, &Mode::Native, CAP).unwrap();
        assert!(r.c1 && r.c2 && r.c3);
        let ab = u.parse_element("(a,b)").unwrap();
        let r = check_axioms(&u, &Mode::Doctored(vec![ab.clone()]), CAP).unwrap();
        assert!(r.c1 && r.c2 && !r.c3);
        let cx = r.c3_counterexample.unwrap();
        assert_eq!(cx.partition, vec![u.algebra().atom(1).unwrap(), u.algebra().atom(2).unwrap()]);
        let picks: Vec<String> = cx.picks.iter().map(|p| u.format_element(p)).collect();
        assert_eq!(picks, ["(a,a)", "(b,b)"]);
        assert_eq!(cx.failure, C3Failure::Missing(ab));
        let one = CondUniverse::with_labels(&["a", "b", "c"], 1).unwrap();
        let r = check_axioms(&one, &Mode::Native, CAP).unwrap();
        assert!(r.c1 && r.c2 && r.c3);
        assert!(matches!(check_axioms(&u, &Mode::Native, 3), Err(CondError::CapExceeded { needed: 4, cap: 3 })));
    }

    #[test]
    fn agreement_examples() {
        let u = ab2();
        let p = |s| u.parse_element(s).unwrap();
        assert_eq!(u.agreement_event(&p("(a,b)"), &p("(a,a)")).unwrap(), u.algebra().atom(1).unwrap());
        assert!(u.agreement_event(&p("(a,b)"), &p("(a,b)")).unwrap().is_top());
        assert!(u.agreement_event(&p("(a,b)"), &p("(b,a)")).unwrap().is_bottom());
        let other = CondUniverse::with_labels(&["a", "b"], 3).unwrap();
        let x3 = other.parse_element("(a,a,a)").unwrap();
        assert!(matches!(u.agreement_event(&x3, &p("(a,a)")), Err(CondError::MixedUniverses { .. })));
    }

    #[test]
    fn name_bridge_on_two_labels() {
        let u = ab2();
        let mut s = TruthSession::new(*u.algebra());
        let r = verify_name_bridge(&u, &mut s, CAP).unwrap();
        assert_eq!(r.pairs, 16);
        assert!(r.mismatches.is_empty());
        assert_eq!(r.classes, 4);
        let (_, ok) = build_and_verify_name(&u, &u.parse_element("(b,a)").unwrap(), &mut s, CAP).unwrap();
        assert!(ok);
    }

    #[test]
    fn stability_examples() {
        let u = ab2();
        let p = |s| u.parse_element(s).unwrap();
        let StabilityReport::Subset(r) =
            stability_check(&u, Stability::Subset(&[p("(a,a)"), p("(b,b)")]), CAP).unwrap()
        else {
            panic!()
        };
        assert!(!r.closed_under_pastes && !r.equals_projection_product);
        assert_eq!(r.missing_paste.unwrap().2, p("(a,b)"));
        let full = u.carrier(CAP).unwrap();
        let StabilityReport::Subset(r) = stability_check(&u, Stability::Subset(&full), CAP).unwrap() else { panic!() };
        assert!(r.closed_under_pastes && r.equals_projection_product);

        let swap: Vec<Element> =
            full.iter().map(|x| Element::new(x.labels().iter().map(|l| 1 - l).collect())).collect();
        let StabilityReport::Function(r) = stability_check(&u, Stability::Function(&swap), CAP).unwrap() else {
            panic!()
        };
        assert!(r.stable && r.conditionally_injective == Some(true) && r.conditionally_surjective == Some(true));
        let collapse: Vec<Element> = full.iter().map(|x| Element::new(vec![0; x.labels().len()])).collect();
        let StabilityReport::Function(r) = stability_check(&u, Stability::Function(&collapse), CAP).unwrap() else {
            panic!()
        };
        assert!(r.stable && r.conditionally_injective == Some(false));
        let shift: Vec<Element> = full.iter().map(|x| Element::new(vec![x.labels()[1], x.labels()[0]])).collect();
        let StabilityReport::Function(r) = stability_check(&u, Stability::Function(&shift), CAP).unwrap() else {
            panic!()
        };
        assert!(!r.stable);
        let (_, _, lhs, rhs) = r.counterexample.unwrap();
        assert_ne!(lhs, rhs);
    }

    #[test]
    fn stable_subset_counts() {
        assert_eq!(enumerate_stable_subsets(&ab2(), CAP).unwrap().0, 9);
        assert_eq!(enumerate_stable_subsets(&ab2(), CAP).unwrap().1.count(), 9);
        let u1 = CondUniverse::with_labels(&["a", "b"], 1).unwrap();
        assert_eq!(enumerate_stable_subsets(&u1, CAP).unwrap().1.count(), 3);
        let single = CondUniverse::with_labels(&["a"], 3).unwrap();
        assert_eq!(enumerate_stable_subsets(&single, CAP).unwrap().1.count(), 1);
    }

    #[test]
    fn universe_file_round_trip() {
        let u = CondUniverse::parse("atoms 2\nconduniv E={a,b}\n").unwrap();
        assert_eq!(u, ab2());
        assert_eq!(CondUniverse::parse(&u.to_string()).unwrap(), u);
        for i in 0..4 {
            assert_eq!(u.index(&u.element(i)), i);
        }
        assert_eq!(u.format_element(&u.element(1)), "(a,b)");
    }
}
