//! Stable L⁰-convex analysis on `(L⁰)^d` over a finite algebra. Every object
//! is atom-indexed and every operation works atom by atom, exactly, except the
//! entropic risk measure which needs `exp` and `ln`.

mod fenchel;
pub mod lp;
mod risk;
mod seq;

use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::boolalg::{check_pasting, Algebra, AlgebraError, Event};
use crate::error::{Classify, ErrorClass};
use crate::lzero::{LzeroError, RandVar};
use crate::rational::{format_rational, parse_rational, Rational};

pub use fenchel::{
    conjugate, fenchel_moreau_check, parse_point_set, subgradient_exists, sublevel, verify_subgradient,
    write_point_set, FenchelReport, GridFunction, Refusal, SubgradientCertificate, SubgradientOutcome, SublevelReport,
};
pub use risk::{entropic_risk, entropic_risk_values, CondProbSpace, RiskFile, RiskReport};
pub use seq::{CauchyReport, StableSeq};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LmodError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Lzero(#[from] LzeroError),
    #[error(
        "shape mismatch: expected {expected_atoms} atoms x {expected_d} coordinates, found {found_atoms} x {found_d}"
    )]
    ShapeMismatch { expected_atoms: usize, expected_d: usize, found_atoms: usize, found_d: usize },
    #[error("atom {atom} has an empty vertex list")]
    EmptyVertexList { atom: usize },
    #[error("radius must be positive on every atom; atom {atom} is not")]
    NonpositiveRadius { atom: usize },
    #[error("hulls intersect on atom {atom} at {point}")]
    HypothesisViolated { atom: usize, point: Point },
    #[error("zero separation margin on atom {atom}")]
    Degenerate { atom: usize },
    #[error("function is +inf at every grid point on atom {atom}")]
    NowhereProper { atom: usize },
    #[error("function takes the value -inf on atom {atom}")]
    ImproperValue { atom: usize },
    #[error("function is +inf at the base point on atom {atom}")]
    InfiniteAtBase { atom: usize },
    #[error("{0} is not a grid point")]
    NotAGridPoint(Point),
    #[error("duplicate grid point {0}")]
    DuplicateGridPoint(Point),
    #[error("empty grid")]
    EmptyGrid,
    #[error("bad weights: {0}")]
    BadWeights(String),
    #[error("gamma must be positive")]
    NonpositiveGamma,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

impl Classify for LmodError {
    fn class(&self) -> ErrorClass {
        match self {
            LmodError::Algebra(e) => e.class(),
            LmodError::Lzero(e) => e.class(),
            LmodError::Malformed { .. } => ErrorClass::Parse,
            _ => ErrorClass::Precondition,
        }
    }
}

pub(crate) fn malformed(line: usize, message: impl Into<String>) -> LmodError {
    LmodError::Malformed { line, message: message.into() }
}

/// A point of `ℚ^d`, displayed as `(x1,...,xd)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(pub Vec<Rational>);

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Point {
    pub fn parse(text: &str) -> Option<Point> {
        let inner = text.trim().strip_prefix('(')?.strip_suffix(')')?;
        if inner.trim().is_empty() {
            return Some(Point(Vec::new()));
        }
        inner.split(',').map(parse_rational).collect::<Option<Vec<_>>>().map(Point)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Parses `(..); (..); ...` into points of dimension `d`.
pub(crate) fn parse_points(text: &str, d: usize, line: usize) -> Result<Vec<Point>, LmodError> {
    let mut out = Vec::new();
    for part in text.split(';') {
        let p = Point::parse(part).ok_or_else(|| malformed(line, format!("bad point '{}'", part.trim())))?;
        if p.dim() != d {
            return Err(malformed(line, format!("point {p} does not have {d} coordinates")));
        }
        out.push(p);
    }
    Ok(out)
}

/// Parses `key=value` header fields such as `atoms=2 d=1`.
pub(crate) fn header_fields(rest: &str, line: usize, keys: &[&str]) -> Result<Vec<usize>, LmodError> {
    let mut out = Vec::new();
    let fields: Vec<&str> = rest.split_whitespace().collect();
    if fields.len() != keys.len() {
        return Err(malformed(line, format!("expected fields {}", keys.join(", "))));
    }
    for (field, key) in fields.iter().zip(keys) {
        let v = field
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .and_then(|r| r.parse().ok())
            .ok_or_else(|| malformed(line, format!("expected '{key}=N'")))?;
        out.push(v);
    }
    Ok(out)
}

/// Strips an `atom i:` prefix, checking `i` against the expected atom.
pub(crate) fn atom_line(line_text: &str, line: usize, expected: usize) -> Result<&str, LmodError> {
    let (head, rest) =
        line_text.split_once(':').ok_or_else(|| malformed(line, format!("expected 'atom {expected}: ...'")))?;
    let i: usize = head
        .trim()
        .strip_prefix("atom")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| malformed(line, format!("expected 'atom {expected}: ...'")))?;
    if i != expected {
        return Err(malformed(line, format!("expected atom {expected}, found atom {i}")));
    }
    Ok(rest)
}

pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// `x ∈ (L⁰)^d`: one point of `ℚ^d` per atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModuleElement {
    coords: Vec<Vec<Rational>>,
}

impl ModuleElement {
    pub fn new(coords: Vec<Vec<Rational>>) -> Result<Self, LmodError> {
        let d = coords.first().map_or(0, |c| c.len());
        Algebra::new(coords.len())?;
        if let Some(bad) = coords.iter().find(|c| c.len() != d) {
            return Err(LmodError::ShapeMismatch {
                expected_atoms: coords.len(),
                expected_d: d,
                found_atoms: coords.len(),
                found_d: bad.len(),
            });
        }
        Ok(ModuleElement { coords })
    }

    pub fn from_ints(coords: &[&[i64]]) -> Result<Self, LmodError> {
        ModuleElement::new(
            coords.iter().map(|c| c.iter().map(|&v| Rational::from_integer(v.into())).collect()).collect(),
        )
    }

    pub fn zero(atoms: usize, d: usize) -> Self {
        ModuleElement { coords: vec![vec![Rational::zero(); d]; atoms] }
    }

    /// The same point of `ℚ^d` on every atom.
    pub fn constant(atoms: usize, p: &[Rational]) -> Self {
        ModuleElement { coords: vec![p.to_vec(); atoms] }
    }

    pub fn atoms(&self) -> usize {
        self.coords.len()
    }

    pub fn dim(&self) -> usize {
        self.coords.first().map_or(0, |c| c.len())
    }

    pub fn at(&self, atom_index: usize) -> &[Rational] {
        &self.coords[atom_index]
    }

    pub fn coords(&self) -> &[Vec<Rational>] {
        &self.coords
    }

    fn same_shape(&self, other: &ModuleElement) -> Result<(), LmodError> {
        if self.atoms() != other.atoms() || self.dim() != other.dim() {
            return Err(LmodError::ShapeMismatch {
                expected_atoms: self.atoms(),
                expected_d: self.dim(),
                found_atoms: other.atoms(),
                found_d: other.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &ModuleElement) -> Result<ModuleElement, LmodError> {
        self.same_shape(other)?;
        let coords =
            self.coords.iter().zip(&other.coords).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect();
        Ok(ModuleElement { coords })
    }

    pub fn sub(&self, other: &ModuleElement) -> Result<ModuleElement, LmodError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ModuleElement {
        ModuleElement { coords: self.coords.iter().map(|c| c.iter().map(|x| -x).collect()).collect() }
    }

    /// `η·x`, atomwise scalar action.
    pub fn scale(&self, eta: &RandVar) -> Result<ModuleElement, LmodError> {
        if eta.len() != self.atoms() {
            return Err(LmodError::ShapeMismatch {
                expected_atoms: self.atoms(),
                expected_d: self.dim(),
                found_atoms: eta.len(),
                found_d: self.dim(),
            });
        }
        let coords = self.coords.iter().zip(eta.values()).map(|(c, e)| c.iter().map(|x| x * e).collect()).collect();
        Ok(ModuleElement { coords })
    }

    /// `Σ 1_{a_i} x_i` along caller-ordered blocks.
    pub fn paste(blocks: &[Event], xs: &[ModuleElement]) -> Result<ModuleElement, LmodError> {
        let first = xs.first().ok_or(AlgebraError::ArityMismatch { blocks: blocks.len(), items: 0 })?;
        check_pasting(blocks, xs.len(), &Algebra::new(first.atoms())?)?;
        for x in xs {
            first.same_shape(x)?;
        }
        let mut coords = first.coords.clone();
        for (a, x) in blocks.iter().zip(xs) {
            for w in a.indices() {
                coords[w] = x.coords[w].clone();
            }
        }
        Ok(ModuleElement { coords })
    }

    /// Parses `[(x1,...); (y1,...); ...]`, one point per atom.
    pub fn parse(text: &str) -> Result<Self, LmodError> {
        let inner = text
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| malformed(1, "expected '[..]'"))?;
        let pts = inner
            .split(';')
            .map(|p| Point::parse(p).ok_or_else(|| malformed(1, format!("bad point '{}'", p.trim()))))
            .collect::<Result<Vec<_>, _>>()?;
        ModuleElement::new(pts.into_iter().map(|p| p.0).collect())
    }
}

impl fmt::Display for ModuleElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| Point(c.clone()).to_string()).collect();
        write!(f, "[{}]", parts.join("; "))
    }
}

/// `μ ∈ E*`: atomwise weight vectors; `μ(x)` is the atomwise dot product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct L0Functional {
    weights: Vec<Vec<Rational>>,
}

impl L0Functional {
    pub fn new(weights: Vec<Vec<Rational>>) -> Result<Self, LmodError> {
        let m = ModuleElement::new(weights)?;
        Ok(L0Functional { weights: m.coords })
    }

    pub fn weights(&self) -> &[Vec<Rational>] {
        &self.weights
    }

    pub fn apply(&self, x: &ModuleElement) -> Result<RandVar, LmodError> {
        if x.atoms() != self.weights.len() || x.dim() != self.weights.first().map_or(0, |w| w.len()) {
            return Err(LmodError::ShapeMismatch {
                expected_atoms: self.weights.len(),
                expected_d: self.weights.first().map_or(0, |w| w.len()),
                found_atoms: x.atoms(),
                found_d: x.dim(),
            });
        }
        Ok(RandVar::new(self.weights.iter().zip(&x.coords).map(|(w, c)| dot(w, c)).collect())?)
    }
}

/// `‖x‖`: the atomwise max-norm.
pub fn l0_norm(x: &ModuleElement) -> RandVar {
    let v = x.coords.iter().map(|c| c.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero)).collect();
    RandVar::new(v).expect("at least one atom")
}

/// `‖x‖` and, when a radius is given, the event `{‖x‖ < ε}`.
pub fn l0_norm_and_ball(x: &ModuleElement, eps: Option<&RandVar>) -> Result<(RandVar, Option<Event>), LmodError> {
    let norm = l0_norm(x);
    let Some(eps) = eps else {
        return Ok((norm, None));
    };
    if eps.len() != x.atoms() {
        return Err(LmodError::ShapeMismatch {
            expected_atoms: x.atoms(),
            expected_d: x.dim(),
            found_atoms: eps.len(),
            found_d: x.dim(),
        });
    }
    if let Some(w) = eps.values().iter().position(|e| !e.is_positive()) {
        return Err(LmodError::NonpositiveRadius { atom: w + 1 });
    }
    let alg = Algebra::new(x.atoms())?;
    let inside =
        alg.event(norm.values().iter().zip(eps.values()).enumerate().filter(|(_, (n, e))| n < e).map(|(w, _)| w + 1))?;
    Ok((norm, Some(inside)))
}

/// A stable subset of `(L⁰)^d` given by one nonempty V-polytope per atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StablePolytope {
    d: usize,
    per_atom: Vec<Vec<Point>>,
}

impl StablePolytope {
    pub fn new(d: usize, per_atom: Vec<Vec<Point>>) -> Result<Self, LmodError> {
        Algebra::new(per_atom.len())?;
        for (w, vs) in per_atom.iter().enumerate() {
            if vs.is_empty() {
                return Err(LmodError::EmptyVertexList { atom: w + 1 });
            }
            if let Some(v) = vs.iter().find(|v| v.dim() != d) {
                return Err(LmodError::ShapeMismatch {
                    expected_atoms: per_atom.len(),
                    expected_d: d,
                    found_atoms: per_atom.len(),
                    found_d: v.dim(),
                });
            }
        }
        Ok(StablePolytope { d, per_atom })
    }

    /// Convenience for `d = 1`: one interval `[lo, hi]` per atom.
    pub fn intervals(bounds: &[(Rational, Rational)]) -> Result<Self, LmodError> {
        StablePolytope::new(
            1,
            bounds.iter().map(|(lo, hi)| vec![Point(vec![lo.clone()]), Point(vec![hi.clone()])]).collect(),
        )
    }

    pub fn atoms(&self) -> usize {
        self.per_atom.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn vertices(&self, atom_index: usize) -> &[Point] {
        &self.per_atom[atom_index]
    }

    pub(crate) fn raw(&self, atom_index: usize) -> Vec<Vec<Rational>> {
        self.per_atom[atom_index].iter().map(|p| p.0.clone()).collect()
    }

    fn same_shape(&self, other: &StablePolytope) -> Result<(), LmodError> {
        if self.atoms() != other.atoms() || self.d != other.d {
            return Err(LmodError::ShapeMismatch {
                expected_atoms: self.atoms(),
                expected_d: self.d,
                found_atoms: other.atoms(),
                found_d: other.d,
            });
        }
        Ok(())
    }

    /// Event of atoms whose hull contains the point.
    pub fn membership_event(&self, x: &ModuleElement) -> Result<Event, LmodError> {
        if x.atoms() != self.atoms() || x.dim() != self.d {
            return Err(LmodError::ShapeMismatch {
                expected_atoms: self.atoms(),
                expected_d: self.d,
                found_atoms: x.atoms(),
                found_d: x.dim(),
            });
        }
        let alg = Algebra::new(self.atoms())?;
        let inside = (0..self.atoms()).filter(|&w| lp::hull_contains(&self.raw(w), x.at(w))).map(|w| w + 1);
        Ok(alg.event(inside)?)
    }

    pub fn contains(&self, x: &ModuleElement) -> Result<bool, LmodError> {
        Ok(self.membership_event(x)?.is_top())
    }

    /// Parses every `polytope atoms=N d=D` section of a file.
    pub fn parse_all(text: &str) -> Result<Vec<StablePolytope>, LmodError> {
        let mut out = Vec::new();
        let mut lines = content_lines(text).peekable();
        while let Some((ln, head)) = lines.next() {
            let rest = head.strip_prefix("polytope").ok_or_else(|| malformed(ln, "expected 'polytope atoms=N d=D'"))?;
            let f = header_fields(rest, ln, &["atoms", "d"])?;
            let (atoms, d) = (f[0], f[1]);
            let mut per_atom = Vec::with_capacity(atoms);
            for w in 1..=atoms {
                let (ln, text) = lines.next().ok_or_else(|| malformed(ln, format!("missing 'atom {w}:' line")))?;
                per_atom.push(parse_points(atom_line(text, ln, w)?, d, ln)?);
            }
            out.push(StablePolytope::new(d, per_atom)?);
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<StablePolytope, LmodError> {
        let mut all = StablePolytope::parse_all(text)?;
        if all.len() != 1 {
            return Err(malformed(1, format!("expected one polytope, found {}", all.len())));
        }
        Ok(all.remove(0))
    }
}

impl fmt::Display for StablePolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "polytope atoms={} d={}", self.atoms(), self.d)?;
        for (w, vs) in self.per_atom.iter().enumerate() {
            let parts: Vec<String> = vs.iter().map(|p| p.to_string()).collect();
            writeln!(f, "atom {}: {}", w + 1, parts.join("; "))?;
        }
        Ok(())
    }
}

/// `Σ 1_{a_k} S_k`: on each atom, the vertex list of the polytope whose block holds it.
pub fn concatenate_sets(blocks: &[Event], sets: &[StablePolytope]) -> Result<StablePolytope, LmodError> {
    let first = sets.first().ok_or(AlgebraError::ArityMismatch { blocks: blocks.len(), items: 0 })?;
    check_pasting(blocks, sets.len(), &Algebra::new(first.atoms())?)?;
    for s in sets {
        first.same_shape(s)?;
    }
    let mut per_atom = first.per_atom.clone();
    for (a, s) in blocks.iter().zip(sets) {
        for w in a.indices() {
            per_atom[w] = s.per_atom[w].clone();
        }
    }
    Ok(StablePolytope { d: first.d, per_atom })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexityReport {
    pub l0_convex: bool,
    pub convex_samples: usize,
    pub l0_absorbing: bool,
    /// First atom whose polytope does not positively span `ℚ^d`.
    pub absorbing_witness: Option<usize>,
    pub l0_balanced: bool,
    /// First atom and vertex `v` with `−v` outside the hull; `None` for the vertex when `0` itself is outside.
    pub balanced_witness: Option<(usize, Option<Point>)>,
}

fn positively_spans(vertices: &[Vec<Rational>], d: usize) -> bool {
    (0..d).all(|i| {
        [Rational::one(), -Rational::one()].into_iter().all(|s| {
            let mut lp = lp::Lp::new(vertices.len());
            for k in 0..d {
                let rhs = if k == i { s.clone() } else { Rational::zero() };
                lp.constraint(vertices.iter().map(|v| v[k].clone()).collect(), lp::Rel::Eq, rhs);
            }
            lp.solve().is_feasible()
        })
    })
}

fn random_hull_point<R: Rng>(rng: &mut R, vertices: &[Vec<Rational>]) -> Vec<Rational> {
    let ws: Vec<i64> = vertices.iter().map(|_| rng.gen_range(0..=4)).collect();
    let total: i64 = ws.iter().sum::<i64>().max(1);
    let ws: Vec<i64> = if ws.iter().all(|&w| w == 0) {
        let mut v = vec![0; vertices.len()];
        v[0] = 1;
        v
    } else {
        ws
    };
    let d = vertices[0].len();
    let mut p = vec![Rational::zero(); d];
    for (w, v) in ws.iter().zip(vertices) {
        let c = Rational::new((*w).into(), total.into());
        for (pi, vi) in p.iter_mut().zip(v) {
            *pi = &*pi + &(&c * vi);
        }
    }
    p
}

/// L⁰-convexity (spot-checked on seeded stable convex combinations),
/// L⁰-absorbing (`x ∈ ηS` for some `η`: the vertices positively span `ℚ^d`
/// on every atom, equivalently `0` is interior) and L⁰-balanced.
pub fn convexity_props<R: Rng>(s: &StablePolytope, rng: &mut R, samples: usize) -> Result<ConvexityReport, LmodError> {
    let n = s.atoms();
    let mut l0_convex = true;
    for _ in 0..samples {
        let x: Vec<Vec<Rational>> = (0..n).map(|w| random_hull_point(rng, &s.raw(w))).collect();
        let y: Vec<Vec<Rational>> = (0..n).map(|w| random_hull_point(rng, &s.raw(w))).collect();
        let eta: Vec<Rational> = (0..n).map(|_| Rational::new(rng.gen_range(0..=8).into(), 8.into())).collect();
        let z = ModuleElement::new(
            (0..n)
                .map(|w| x[w].iter().zip(&y[w]).map(|(a, b)| &eta[w] * a + (Rational::one() - &eta[w]) * b).collect())
                .collect(),
        )?;
        if !s.contains(&z)? {
            l0_convex = false;
            break;
        }
    }
    let absorbing_witness = (0..n).find(|&w| !positively_spans(&s.raw(w), s.d)).map(|w| w + 1);
    let zero = vec![Rational::zero(); s.d];
    let mut balanced_witness = None;
    'atoms: for w in 0..n {
        let raw = s.raw(w);
        if !lp::hull_contains(&raw, &zero) {
            balanced_witness = Some((w + 1, None));
            break;
        }
        for v in &s.per_atom[w] {
            let neg: Vec<Rational> = v.0.iter().map(|c| -c).collect();
            if !lp::hull_contains(&raw, &neg) {
                balanced_witness = Some((w + 1, Some(v.clone())));
                break 'atoms;
            }
        }
    }
    Ok(ConvexityReport {
        l0_convex,
        convex_samples: samples,
        l0_absorbing: absorbing_witness.is_none(),
        absorbing_witness,
        l0_balanced: balanced_witness.is_none(),
        balanced_witness,
    })
}

/// `μ(x) > μ(y) + ε` for all `x ∈ S1`, `y ∈ S2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationCertificate {
    pub mu: L0Functional,
    pub eps: RandVar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateCheck {
    /// Per atom: `min μ·v` over vertices of S1 and `max μ·w + ε` over vertices of S2.
    pub per_atom: Vec<(Rational, Rational)>,
    pub failing_atoms: Vec<usize>,
}

impl CertificateCheck {
    pub fn ok(&self) -> bool {
        self.failing_atoms.is_empty()
    }
}

/// Exact separation on every atom: the hulls must be disjoint, and the LP
/// `max δ : μ·v ≥ c + δ (v ∈ S1), μ·w ≤ c − δ (w ∈ S2), ‖μ‖∞ ≤ 1` gives `μ_ω`
/// and `ε_ω = δ/2`.
pub fn separate(s1: &StablePolytope, s2: &StablePolytope) -> Result<SeparationCertificate, LmodError> {
    s1.same_shape(s2)?;
    let d = s1.d;
    let mut mus = Vec::with_capacity(s1.atoms());
    let mut eps = Vec::with_capacity(s1.atoms());
    for w in 0..s1.atoms() {
        let (a, b) = (s1.raw(w), s2.raw(w));
        if let Some(p) = lp::hull_intersection(&a, &b) {
            return Err(LmodError::HypothesisViolated { atom: w + 1, point: Point(p) });
        }
        // variables: μ_1..μ_d, c, δ (all free)
        let nv = d + 2;
        let mut prob = lp::Lp::new(nv).all_free();
        let mut obj = vec![Rational::zero(); nv];
        obj[d + 1] = Rational::one();
        prob.maximize(obj);
        for v in &a {
            let mut row: Vec<Rational> = v.clone();
            row.push(-Rational::one());
            row.push(-Rational::one());
            prob.constraint(row, lp::Rel::Ge, Rational::zero());
        }
        for v in &b {
            let mut row: Vec<Rational> = v.clone();
            row.push(-Rational::one());
            row.push(Rational::one());
            prob.constraint(row, lp::Rel::Le, Rational::zero());
        }
        for i in 0..d {
            let mut row = vec![Rational::zero(); nv];
            row[i] = Rational::one();
            prob.constraint(row.clone(), lp::Rel::Le, Rational::one());
            prob.constraint(row, lp::Rel::Ge, -Rational::one());
        }
        match prob.solve() {
            lp::LpResult::Optimal { x, value } if value.is_positive() => {
                mus.push(x[..d].to_vec());
                eps.push(value / Rational::from_integer(2.into()));
            }
            _ => return Err(LmodError::Degenerate { atom: w + 1 }),
        }
    }
    let cert = SeparationCertificate { mu: L0Functional::new(mus)?, eps: RandVar::new(eps)? };
    debug_assert!(verify_separation(&cert, s1, s2)?.ok());
    Ok(cert)
}

/// Re-checks a certificate using only the vertex inequalities.
pub fn verify_separation(
    cert: &SeparationCertificate,
    s1: &StablePolytope,
    s2: &StablePolytope,
) -> Result<CertificateCheck, LmodError> {
    s1.same_shape(s2)?;
    let n = s1.atoms();
    if cert.mu.weights.len() != n || cert.eps.len() != n || cert.mu.weights.iter().any(|m| m.len() != s1.d) {
        return Err(LmodError::ShapeMismatch {
            expected_atoms: n,
            expected_d: s1.d,
            found_atoms: cert.mu.weights.len(),
            found_d: cert.mu.weights.first().map_or(0, |m| m.len()),
        });
    }
    let mut per_atom = Vec::with_capacity(n);
    let mut failing_atoms = Vec::new();
    for w in 0..n {
        let mu = &cert.mu.weights[w];
        let lo = s1.per_atom[w].iter().map(|v| dot(mu, &v.0)).min().expect("nonempty");
        let hi = s2.per_atom[w].iter().map(|v| dot(mu, &v.0)).max().expect("nonempty") + &cert.eps.values()[w];
        if !(lo > hi && cert.eps.values()[w].is_positive()) {
            failing_atoms.push(w + 1);
        }
        per_atom.push((lo, hi));
    }
    Ok(CertificateCheck { per_atom, failing_atoms })
}

impl SeparationCertificate {
    pub fn parse(text: &str) -> Result<Self, LmodError> {
        let mut lines = content_lines(text);
        let (ln, head) = lines.next().ok_or_else(|| malformed(1, "empty certificate"))?;
        let rest = head.strip_prefix("separation").ok_or_else(|| malformed(ln, "expected 'separation atoms=N d=D'"))?;
        let f = header_fields(rest, ln, &["atoms", "d"])?;
        let (atoms, d) = (f[0], f[1]);
        let mut mus = Vec::with_capacity(atoms);
        let mut eps = Vec::with_capacity(atoms);
        for w in 1..=atoms {
            let (ln, text) = lines.next().ok_or_else(|| malformed(ln, format!("missing 'atom {w}:' line")))?;
            let body = atom_line(text, ln, w)?.trim();
            let (mu_part, eps_part) =
                body.split_once("eps=").ok_or_else(|| malformed(ln, "expected 'mu=(..) eps=q'"))?;
            let mu = mu_part
                .trim()
                .strip_prefix("mu=")
                .and_then(Point::parse)
                .filter(|p| p.dim() == d)
                .ok_or_else(|| malformed(ln, "expected 'mu=(..)' with d coordinates"))?;
            let e = parse_rational(eps_part).ok_or_else(|| malformed(ln, "bad eps"))?;
            mus.push(mu.0);
            eps.push(e);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(malformed(ln, "trailing input"));
        }
        Ok(SeparationCertificate { mu: L0Functional::new(mus)?, eps: RandVar::new(eps)? })
    }
}

impl fmt::Display for SeparationCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.mu.weights.first().map_or(0, |m| m.len());
        writeln!(f, "separation atoms={} d={}", self.mu.weights.len(), d)?;
        for (w, (mu, e)) in self.mu.weights.iter().zip(self.eps.values()).enumerate() {
            writeln!(f, "atom {}: mu={} eps={}", w + 1, Point(mu.clone()), format_rational(e))?;
        }
        Ok(())
    }
}
