use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Zero};

use super::lp::{Lp, LpResult, Rel};
use super::{atom_line, content_lines, dot, header_fields, malformed, L0Functional, LmodError, Point};
use crate::lzero::{ExtRandVar, ExtRational};
use crate::rational::Rational;

/// `f : E → L̄⁰` sampled on a finite grid of `ℚ^d` shared by all atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridFunction {
    d: usize,
    points: Vec<Point>,
    /// `values[atom][point]`.
    values: Vec<Vec<ExtRational>>,
}

impl GridFunction {
    /// One extended random variable per grid point. `−∞` is rejected;
    /// atoms that are `+∞` everywhere are allowed and reported by
    /// [`GridFunction::proper`].
    pub fn new(d: usize, points: Vec<Point>, values: Vec<ExtRandVar>) -> Result<Self, LmodError> {
        if points.is_empty() {
            return Err(LmodError::EmptyGrid);
        }
        let atoms = values.first().map_or(0, |v| v.len());
        if values.len() != points.len() || values.iter().any(|v| v.len() != atoms) {
            return Err(LmodError::ShapeMismatch {
                expected_atoms: atoms,
                expected_d: points.len(),
                found_atoms: values.iter().map(|v| v.len()).find(|&l| l != atoms).unwrap_or(atoms),
                found_d: values.len(),
            });
        }
        let per_atom: Vec<Vec<ExtRational>> =
            (0..atoms).map(|w| values.iter().map(|v| v.values()[w].clone()).collect()).collect();
        GridFunction::from_rows(d, points, per_atom)
    }

    /// `rows[atom][point]`.
    pub fn from_rows(d: usize, points: Vec<Point>, rows: Vec<Vec<ExtRational>>) -> Result<Self, LmodError> {
        if points.is_empty() {
            return Err(LmodError::EmptyGrid);
        }
        crate::boolalg::Algebra::new(rows.len())?;
        let mut seen = HashSet::new();
        for p in &points {
            if p.dim() != d {
                return Err(LmodError::ShapeMismatch {
                    expected_atoms: rows.len(),
                    expected_d: d,
                    found_atoms: rows.len(),
                    found_d: p.dim(),
                });
            }
            if !seen.insert(p) {
                return Err(LmodError::DuplicateGridPoint(p.clone()));
            }
        }
        for (w, row) in rows.iter().enumerate() {
            if row.len() != points.len() {
                return Err(LmodError::ShapeMismatch {
                    expected_atoms: rows.len(),
                    expected_d: points.len(),
                    found_atoms: rows.len(),
                    found_d: row.len(),
                });
            }
            if row.contains(&ExtRational::NegInf) {
                return Err(LmodError::ImproperValue { atom: w + 1 });
            }
        }
        Ok(GridFunction { d, points, values: rows })
    }

    /// The same finite function of `ℚ^d` on every atom.
    pub fn uniform(atoms: usize, points: Vec<Point>, f: impl Fn(&Point) -> Rational) -> Result<Self, LmodError> {
        let d = points.first().map_or(0, |p| p.dim());
        let row: Vec<ExtRational> = points.iter().map(|p| ExtRational::Finite(f(p))).collect();
        GridFunction::from_rows(d, points, vec![row; atoms])
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn value(&self, atom_index: usize, point_index: usize) -> &ExtRational {
        &self.values[atom_index][point_index]
    }

    pub fn row(&self, atom_index: usize) -> &[ExtRational] {
        &self.values[atom_index]
    }

    /// `f(x)` as an extended random variable.
    pub fn at(&self, point_index: usize) -> ExtRandVar {
        ExtRandVar::new(self.values.iter().map(|r| r[point_index].clone()).collect()).expect("nonempty")
    }

    pub fn point_index(&self, p: &Point) -> Option<usize> {
        self.points.iter().position(|q| q == p)
    }

    /// Whether the atom has a finite value somewhere.
    pub fn proper(&self, atom_index: usize) -> bool {
        self.values[atom_index].iter().any(ExtRational::is_finite)
    }

    fn require_proper(&self) -> Result<(), LmodError> {
        match (0..self.atoms()).find(|&w| !self.proper(w)) {
            Some(w) => Err(LmodError::NowhereProper { atom: w + 1 }),
            None => Ok(()),
        }
    }

    /// File form: a header, `point (..)` lines, then `atom i: v1, v2, ...` rows.
    pub fn parse(text: &str) -> Result<Self, LmodError> {
        let mut lines = content_lines(text).peekable();
        let (ln, head) = lines.next().ok_or_else(|| malformed(1, "empty grid function file"))?;
        let rest =
            head.strip_prefix("gridfunction").ok_or_else(|| malformed(ln, "expected 'gridfunction atoms=N d=D'"))?;
        let f = header_fields(rest, ln, &["atoms", "d"])?;
        let (atoms, d) = (f[0], f[1]);
        let mut points = Vec::new();
        while let Some(&(ln, l)) = lines.peek() {
            let Some(p) = l.strip_prefix("point") else { break };
            let p = Point::parse(p).filter(|p| p.dim() == d).ok_or_else(|| malformed(ln, "bad grid point"))?;
            points.push(p);
            lines.next();
        }
        let mut rows = Vec::with_capacity(atoms);
        for w in 1..=atoms {
            let (ln, l) = lines.next().ok_or_else(|| malformed(ln, format!("missing 'atom {w}:' row")))?;
            let body = atom_line(l, ln, w)?;
            let row = body
                .split(',')
                .map(|v| ExtRational::parse(v.trim()).ok_or_else(|| malformed(ln, format!("bad value '{}'", v.trim()))))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(malformed(ln, "trailing input"));
        }
        GridFunction::from_rows(d, points, rows)
    }
}

impl fmt::Display for GridFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "gridfunction atoms={} d={}", self.atoms(), self.d)?;
        for p in &self.points {
            writeln!(f, "point {p}")?;
        }
        for (w, row) in self.values.iter().enumerate() {
            let vs: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "atom {}: {}", w + 1, vs.join(", "))?;
        }
        Ok(())
    }
}

/// Parses a point set file: `grid d=D` then `point (..)` lines.
pub fn parse_point_set(text: &str) -> Result<(usize, Vec<Point>), LmodError> {
    let mut lines = content_lines(text);
    let (ln, head) = lines.next().ok_or_else(|| malformed(1, "empty grid file"))?;
    let rest = head.strip_prefix("grid").ok_or_else(|| malformed(ln, "expected 'grid d=D'"))?;
    let d = header_fields(rest, ln, &["d"])?[0];
    let mut points = Vec::new();
    for (ln, l) in lines {
        let p = l
            .strip_prefix("point")
            .and_then(Point::parse)
            .filter(|p| p.dim() == d)
            .ok_or_else(|| malformed(ln, "expected 'point (..)' with d coordinates"))?;
        points.push(p);
    }
    Ok((d, points))
}

pub fn write_point_set(d: usize, points: &[Point]) -> String {
    let mut s = format!("grid d={d}\n");
    for p in points {
        s.push_str(&format!("point {p}\n"));
    }
    s
}

/// `f*(μ)(ω) = max_x μ·x − f(x)(ω)` over grid points where `f` is finite.
pub fn conjugate(f: &GridFunction, dual: &[Point]) -> Result<GridFunction, LmodError> {
    f.require_proper()?;
    if dual.is_empty() {
        return Err(LmodError::EmptyGrid);
    }
    let rows = (0..f.atoms())
        .map(|w| {
            dual.iter()
                .map(|mu| {
                    let best = f
                        .points
                        .iter()
                        .zip(&f.values[w])
                        .filter_map(|(x, v)| v.finite().map(|fv| dot(&mu.0, &x.0) - fv))
                        .max()
                        .expect("proper atom");
                    ExtRational::Finite(best)
                })
                .collect()
        })
        .collect();
    GridFunction::from_rows(f.d, dual.to_vec(), rows)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FenchelReport {
    pub conjugate: GridFunction,
    /// `f**` on the primal grid.
    pub biconjugate: GridFunction,
    /// Per atom, the indices of grid points where `f** = f`.
    pub equal_at: Vec<Vec<usize>>,
    /// `f** ≤ f` everywhere.
    pub dominated: bool,
}

impl FenchelReport {
    pub fn all_equal(&self) -> bool {
        let n = self.biconjugate.points.len();
        self.equal_at.iter().all(|e| e.len() == n)
    }
}

/// Computes `f**` on the primal grid through the dual grid.
pub fn fenchel_moreau_check(f: &GridFunction, dual: &[Point]) -> Result<FenchelReport, LmodError> {
    let fstar = conjugate(f, dual)?;
    let fss = conjugate(&fstar, &f.points)?;
    let mut equal_at = Vec::with_capacity(f.atoms());
    let mut dominated = true;
    for w in 0..f.atoms() {
        let mut eq = Vec::new();
        for (i, v) in f.values[w].iter().enumerate() {
            let b = &fss.values[w][i];
            if b == v {
                eq.push(i);
            }
            if b > v {
                dominated = false;
            }
        }
        equal_at.push(eq);
    }
    Ok(FenchelReport { conjugate: fstar, biconjugate: fss, equal_at, dominated })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SublevelReport {
    /// Per atom, the indices of grid points with `f(x)(ω) ≤ η(ω)`.
    pub per_atom: Vec<Vec<usize>>,
    /// Nonempty on every atom.
    pub stable: bool,
}

/// `V_f(η)` restricted to the grid.
pub fn sublevel(f: &GridFunction, eta: &ExtRandVar) -> Result<SublevelReport, LmodError> {
    if eta.len() != f.atoms() {
        return Err(LmodError::ShapeMismatch {
            expected_atoms: f.atoms(),
            expected_d: f.d,
            found_atoms: eta.len(),
            found_d: f.d,
        });
    }
    let per_atom: Vec<Vec<usize>> =
        (0..f.atoms()).map(|w| (0..f.points.len()).filter(|&i| f.values[w][i] <= eta.values()[w]).collect()).collect();
    let stable = per_atom.iter().all(|s| !s.is_empty());
    Ok(SublevelReport { per_atom, stable })
}

/// `μ` with `μ(x − x0) ≤ f(x) − f(x0)` for every grid point `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgradientCertificate {
    pub at: Point,
    pub mu: L0Functional,
}

/// No subgradient on this atom: the constraint at `point` is violated by at
/// least `violation` for every choice of `μ_ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refusal {
    pub atom: usize,
    pub point: Point,
    pub violation: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgradientOutcome {
    /// Per atom, the minimum-∞-norm subgradient or a refusal.
    pub per_atom: Vec<Result<Vec<Rational>, Refusal>>,
    /// Present when every atom admits a subgradient; re-verified.
    pub certificate: Option<SubgradientCertificate>,
}

fn increments(f: &GridFunction, w: usize, base: usize) -> Vec<(usize, Vec<Rational>, Rational)> {
    let f0 = f.values[w][base].finite().expect("finite at base").clone();
    f.points
        .iter()
        .enumerate()
        .filter_map(|(i, x)| {
            f.values[w][i].finite().map(|fx| {
                let dx: Vec<Rational> = x.0.iter().zip(&f.points[base].0).map(|(a, b)| a - b).collect();
                (i, dx, fx - &f0)
            })
        })
        .collect()
}

fn atom_subgradient(f: &GridFunction, w: usize, base: usize) -> Result<Vec<Rational>, Refusal> {
    let d = f.d;
    let cons = increments(f, w, base);
    // variables: μ_1..μ_d (free), t ≥ 0; minimize t = ‖μ‖∞
    let mut lp = Lp::new(d + 1);
    for i in 0..d {
        lp = lp.free(i);
    }
    let mut obj = vec![Rational::zero(); d + 1];
    obj[d] = -Rational::one();
    lp.maximize(obj);
    for (_, dx, df) in &cons {
        let mut row = dx.clone();
        row.push(Rational::zero());
        lp.constraint(row, Rel::Le, df.clone());
    }
    for i in 0..d {
        let mut row = vec![Rational::zero(); d + 1];
        row[i] = Rational::one();
        row[d] = -Rational::one();
        lp.constraint(row.clone(), Rel::Le, Rational::zero());
        row[i] = -Rational::one();
        lp.constraint(row, Rel::Le, Rational::zero());
    }
    if let LpResult::Optimal { x, .. } = lp.solve() {
        return Ok(x[..d].to_vec());
    }
    // least uniform violation: minimize s with μ·Δx − Δf ≤ s
    let mut aux = Lp::new(d + 1).all_free();
    let mut obj = vec![Rational::zero(); d + 1];
    obj[d] = -Rational::one();
    aux.maximize(obj);
    for (_, dx, df) in &cons {
        let mut row = dx.clone();
        row.push(-Rational::one());
        aux.constraint(row, Rel::Le, df.clone());
    }
    let LpResult::Optimal { x, value } = aux.solve() else {
        unreachable!("the base point bounds the violation below by zero")
    };
    let s = -value;
    let mu = &x[..d];
    let (i, _, _) = cons.iter().find(|(_, dx, df)| dot(mu, dx) - df == s).expect("a constraint is tight");
    Err(Refusal { atom: w + 1, point: f.points[*i].clone(), violation: s })
}

/// Decides, per atom, whether `∂f(x0)` meets the grid constraints.
pub fn subgradient_exists(f: &GridFunction, x0: &Point) -> Result<SubgradientOutcome, LmodError> {
    let base = f.point_index(x0).ok_or_else(|| LmodError::NotAGridPoint(x0.clone()))?;
    if let Some(w) = (0..f.atoms()).find(|&w| !f.values[w][base].is_finite()) {
        return Err(LmodError::InfiniteAtBase { atom: w + 1 });
    }
    let per_atom: Vec<Result<Vec<Rational>, Refusal>> = (0..f.atoms()).map(|w| atom_subgradient(f, w, base)).collect();
    let certificate = if per_atom.iter().all(Result::is_ok) {
        let mu = L0Functional::new(per_atom.iter().map(|r| r.clone().expect("checked")).collect())?;
        let cert = SubgradientCertificate { at: x0.clone(), mu };
        debug_assert!(verify_subgradient(&cert, f)?.is_empty());
        Some(cert)
    } else {
        None
    };
    Ok(SubgradientOutcome { per_atom, certificate })
}

/// Violated constraints `(atom, grid point)` of a subgradient certificate.
pub fn verify_subgradient(cert: &SubgradientCertificate, f: &GridFunction) -> Result<Vec<(usize, Point)>, LmodError> {
    let base = f.point_index(&cert.at).ok_or_else(|| LmodError::NotAGridPoint(cert.at.clone()))?;
    let w_count = cert.mu.weights().len();
    if w_count != f.atoms() || cert.mu.weights().iter().any(|m| m.len() != f.d) {
        return Err(LmodError::ShapeMismatch {
            expected_atoms: f.atoms(),
            expected_d: f.d,
            found_atoms: w_count,
            found_d: cert.mu.weights().first().map_or(0, |m| m.len()),
        });
    }
    if let Some(w) = (0..f.atoms()).find(|&w| !f.values[w][base].is_finite()) {
        return Err(LmodError::InfiniteAtBase { atom: w + 1 });
    }
    let mut bad = Vec::new();
    for w in 0..f.atoms() {
        for (i, dx, df) in increments(f, w, base) {
            if dot(&cert.mu.weights()[w], &dx) > df {
                bad.push((w + 1, f.points[i].clone()));
            }
        }
    }
    Ok(bad)
}

impl SubgradientCertificate {
    pub fn parse(text: &str) -> Result<Self, LmodError> {
        let mut lines = content_lines(text);
        let (ln, head) = lines.next().ok_or_else(|| malformed(1, "empty certificate"))?;
        let rest =
            head.strip_prefix("subgradient").ok_or_else(|| malformed(ln, "expected 'subgradient atoms=N d=D'"))?;
        let f = header_fields(rest, ln, &["atoms", "d"])?;
        let (atoms, d) = (f[0], f[1]);
        let (ln, l) = lines.next().ok_or_else(|| malformed(ln, "missing 'at (..)' line"))?;
        let at = l
            .strip_prefix("at")
            .and_then(Point::parse)
            .filter(|p| p.dim() == d)
            .ok_or_else(|| malformed(ln, "expected 'at (..)'"))?;
        let mut mus = Vec::with_capacity(atoms);
        for w in 1..=atoms {
            let (ln, l) = lines.next().ok_or_else(|| malformed(ln, format!("missing 'atom {w}:' line")))?;
            let mu = atom_line(l, ln, w)?
                .trim()
                .strip_prefix("mu=")
                .and_then(Point::parse)
                .filter(|p| p.dim() == d)
                .ok_or_else(|| malformed(ln, "expected 'mu=(..)'"))?;
            mus.push(mu.0);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(malformed(ln, "trailing input"));
        }
        Ok(SubgradientCertificate { at, mu: L0Functional::new(mus)? })
    }
}

impl fmt::Display for SubgradientCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "subgradient atoms={} d={}", self.mu.weights().len(), self.at.dim())?;
        writeln!(f, "at {}", self.at)?;
        for (w, mu) in self.mu.weights().iter().enumerate() {
            writeln!(f, "atom {}: mu={}", w + 1, Point(mu.clone()))?;
        }
        Ok(())
    }
}
