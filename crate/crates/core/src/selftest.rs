//! Seeded invariant suites over every module. Each suite draws from its own
//! ChaCha stream so that suites can be run alone with the same results.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boolalg::Algebra;
use crate::bvm::{random, TruthSession};
use crate::condset::{check_axioms, verify_name_bridge, CondUniverse, Mode};
use crate::folang::{eval_formula, parse_formula, Model, ModelFile, NameExpr, TRANSFER_SUITE};
use crate::lmod::lp::{hull_contains, hull_intersection};
use crate::lmod::{
    entropic_risk, fenchel_moreau_check, l0_norm, separate, subgradient_exists, verify_separation, verify_subgradient,
    CondProbSpace, GridFunction, LmodError, Point, RiskFile, SeparationCertificate, StablePolytope,
};
use crate::lzero::{
    concatenate_rv, ess_bounds, from_name, to_name, truth_cmp_rv, truth_order, Comparison, ExtRational, RandVar,
};
use crate::rational::{int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult { name, cases: 0, failures: 0, first_failure: None }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(detail());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelftestReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "selftest seed={}", self.seed)?;
        for s in &self.suites {
            let verdict = if s.passed() { "ok" } else { "FAIL" };
            writeln!(f, "{:<20} cases={:<6} failures={:<4} {}", s.name, s.cases, s.failures, verdict)?;
            if let Some(d) = &s.first_failure {
                writeln!(f, "  first failure: {d}")?;
            }
        }
        let passed = self.suites.iter().filter(|s| s.passed()).count();
        writeln!(f, "{passed}/{} suites passed", self.suites.len())
    }
}

type Suite = fn(&mut ChaCha8Rng) -> SuiteResult;

pub const SUITES: &[(&str, Suite)] = &[
    ("equality-laws", equality_laws),
    ("mixing", mixing),
    ("transfer", transfer),
    ("gordon", gordon),
    ("conditional-axioms", conditional_axioms),
    ("separation", separation),
    ("fenchel-moreau", fenchel),
    ("subgradients", subgradients),
    ("entropic-risk", risk),
    ("atomwise", atomwise),
    ("round-trip", round_trip),
];

fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

pub fn run(seed: u64) -> SelftestReport {
    let suites = SUITES.iter().enumerate().map(|(i, (_, suite))| suite(&mut stream(seed, i))).collect();
    SelftestReport { seed, suites }
}

/// Runs one suite by name.
pub fn run_suite(name: &str, seed: u64) -> Option<SuiteResult> {
    SUITES.iter().position(|(n, _)| *n == name).map(|i| (SUITES[i].1)(&mut stream(seed, i)))
}

fn algebra(rng: &mut ChaCha8Rng, max_atoms: usize) -> Algebra {
    Algebra::new(rng.gen_range(1..=max_atoms)).expect("small algebra")
}

fn small_rational(rng: &mut ChaCha8Rng, range: i64, den: i64) -> Rational {
    ratio(rng.gen_range(-range * den..=range * den), rng.gen_range(1..=den))
}

fn random_rv(rng: &mut ChaCha8Rng, atoms: usize) -> RandVar {
    RandVar::new((0..atoms).map(|_| ratio(rng.gen_range(-3..=3), rng.gen_range(1..=2))).collect()).expect("nonempty")
}

fn equality_laws(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut r = SuiteResult::new("equality-laws");
    for _ in 0..20 {
        let alg = algebra(rng, 4);
        let mut s = TruthSession::new(alg);
        let names: Vec<_> = (0..10).map(|_| random::set_name(rng, &alg, 4, 3)).collect();
        for x in &names {
            let ok = s.truth_eq(x, x).map(|e| e.is_top()).unwrap_or(false);
            r.check(ok, || format!("[[x = x]] != top for {x}"));
        }
        let t: Vec<Vec<_>> =
            names.iter().map(|x| names.iter().map(|y| s.truth_eq(x, y).expect("same algebra")).collect()).collect();
        for i in 0..names.len() {
            for j in 0..names.len() {
                r.check(t[i][j] == t[j][i], || format!("symmetry fails for names {i}, {j}"));
                for k in 0..names.len() {
                    let ok = crate::boolalg::Event::le(&t[i][j].meet(&t[j][k]), &t[i][k]);
                    r.check(ok, || format!("transitivity fails for names {i}, {j}, {k}"));
                }
            }
        }
    }
    r
}

fn mixing(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut r = SuiteResult::new("mixing");
    for _ in 0..100 {
        let alg = algebra(rng, 4);
        let mut s = TruthSession::new(alg);
        let blocks = random::partition(rng, &alg, 4);
        let xs: Vec<_> = blocks.iter().map(|_| random::set_name(rng, &alg, 3, 3)).collect();
        let m = s.mix(&blocks, &xs).expect("valid partition");
        for (a, x) in blocks.iter().zip(&xs) {
            let t = s.truth_eq(&m, x).expect("same algebra");
            r.check(crate::boolalg::Event::le(a, &t), || format!("[[m = x_i]] = {t} is below the block {a}"));
        }
        let (mut rb, mut rx) = (blocks.clone(), xs.clone());
        rb.reverse();
        rx.reverse();
        let m2 = s.mix(&rb, &rx).expect("valid partition");
        let ok = s.equivalent(&m, &m2).expect("same algebra");
        r.check(ok, || "two mixtures of the same family are not equivalent".into());
    }
    r
}

fn transfer(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut r = SuiteResult::new("transfer");
    let formulas: Vec<_> =
        TRANSFER_SUITE.iter().map(|(l, t)| (*l, parse_formula(t).expect("suite sentences parse"))).collect();
    for _ in 0..20 {
        let alg = algebra(rng, 3);
        let mut s = TruthSession::new(alg);
        let mut m = Model::empty(alg);
        for id in ["x", "y", "z"] {
            m = m.with(id, random::set_name(rng, &alg, 3, 3));
        }
        for (label, f) in &formulas {
            let ok = eval_formula(f, &m, &mut s).map(|e| e.is_top()).unwrap_or(false);
            r.check(ok, || format!("sentence '{label}' is not top"));
        }
    }
    r
}

fn gordon(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut r = SuiteResult::new("gordon");
    for _ in 0..200 {
        let alg = algebra(rng, 5);
        let mut s = TruthSession::new(alg);
        let (a, b) = (random_rv(rng, alg.atom_count()), random_rv(rng, alg.atom_count()));
        let (na, nb) = (to_name(&a), to_name(&b));
        let eq = s.truth_eq(&na, &nb).expect("scalar names");
        r.check(eq == truth_cmp_rv(Comparison::Eq, &a, &b).expect("same shape"), || format!("= differs for {a}, {b}"));
        let le = truth_order(&na, &nb, &alg).expect("scalar names");
        r.check(le == truth_cmp_rv(Comparison::Le, &a, &b).expect("same shape"), || format!("<= differs for {a}, {b}"));
        r.check(from_name(&na, &alg).as_ref() == Ok(&a), || format!("round trip fails for {a}"));
    }
    r
}

fn conditional_axioms(_: &mut ChaCha8Rng) -> SuiteResult {
    let mut r = SuiteResult::new("conditional-axioms");
    const LABELS: [&str; 4] = ["a", "b", "c", "d"];
    for e in 1..=4usize {
        for atoms in 1..=4usize {
            if e.pow(atoms as u32) > 256 {
                continue;
            }
            let u = CondUniverse::with_labels(&LABELS[..e], atoms).expect("small universe");
            let rep = check_axioms(&u, &Mode::Native, 1 << 20).expect("within cap");
            r.check(rep.c1 && rep.c2 && rep.c3, || format!("native axioms fail for |E|={e}, atoms={atoms}"));
            if e.pow(atoms as u32) <= 16 {
                let mut s = TruthSession::new(*u.algebra());
                let bridge = verify_name_bridge(&u, &mut s, 1 << 20).expect("within cap");
                r.check(bridge.mismatches.is_empty(), || format!("name bridge fails for |E|={e}, atoms={atoms}"));
            }
        }
    }
    r
}

fn random_point(rng: &mut ChaCha8Rng, d: usize, lo: i64, hi: i64) -> Point {
    Point((0..d).map(|_| ratio(rng.gen_range(lo * 4..=hi * 4), 4)).collect())
}

/// Atomwise disjoint pair: the second polytope lies beyond a random
/// coordinate hyperplane.
fn disjoint_pair(rng: &mut ChaCha8Rng) -> (StablePolytope, StablePolytope) {
    let atoms = rng.gen_range(1..=4);
    let d = rng.gen_range(1..=3);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for _ in 0..atoms {
        let axis = rng.gen_range(0..d);
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        let gap = ratio(rng.gen_range(1..=8), 4);
        let va: Vec<Point> = (0..rng.gen_range(1..=8)).map(|_| random_point(rng, d, -2, 2)).collect();
        let vb: Vec<Point> = (0..rng.gen_range(1..=8))
            .map(|_| {
                let mut p = random_point(rng, d, -2, 2);
                p.0[axis] = int(sign) * (int(2) + &gap + (&p.0[axis] + int(2)));
                p
            })
            .collect();
        a.push(va);
        b.push(vb);
    }
    (StablePolytope::new(d, a).expect("nonempty"), StablePolytope::new(d, b).expect("nonempty"))
}

fn separation(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut r = SuiteResult::new("separation");
    for _ in 0..50 {
        let (s1, s2) = disjoint_pair(rng);
        match separate(&s1, &s2) {
            Ok(cert) => {
                let ok = verify_separation(&cert, &s1, &s2).map(|c| c.ok()).unwrap_or(false);
                r.check(ok, || format!("certificate fails to verify:\n{cert}"));
            }
            Err(e) => r.check(false, || format!("disjoint pair refused: {e}")),
        }
        // overlap on one atom: copy a vertex of S1 into S2
        let w = rng.gen_range(0..s1.atoms());
        let mut per_atom: Vec<Vec<Point>> = (0..s2.atoms()).map(|i| s2.vertices(i).to_vec()).collect();
        per_atom[w].push(s1.vertices(w)[0].clone());
        let overlapping = StablePolytope::new(s1.dim(), per_atom).expect("nonempty");
        match separate(&s1, &overlapping) {
            Err(LmodError::HypothesisViolated { atom, point }) => {
                let raw = |s: &StablePolytope| -> Vec<Vec<Rational>> {
                    s.vertices(atom - 1).iter().map(|p| p.0.clone()).collect()
                };
                let ok = hull_contains(&raw(&s1), &point.0) && hull_contains(&raw(&overlapping), &point.0);
                r.check(ok, || format!("witness {point} is not in both hulls"));
            }
            other => r.check(false, || format!("overlap not refused: {other:?}")),
        }
    }
    r
}

fn grid(d: usize) -> Vec<Point> {
    let mut pts = vec![vec![]];
    for _ in 0..d {
        pts = pts
            .into_iter()
            .flat_map(|p: Vec<Rational>| (-2..=2).map(move |v| [p.clone(), vec![int(v)]].concat()))
            .collect();
    }
    pts.into_iter().map(Point).collect()
}

/// Per-atom maximum of a few affine pieces with slopes in `{-2..2}^d`.
fn convex_rows(rng: &mut ChaCha8Rng, atoms: usize, points: &[Point]) -> Vec<Vec<ExtRational>> {
    let d = points[0].dim();
    (0..atoms)
        .map(|_| {
            let pieces: Vec<(Vec<Rational>, Rational)> = (0..rng.gen_range(1..=3))
                .map(|_| ((0..d).map(|_| int(rng.gen_range(-2..=2))).collect(), ratio(rng.gen_range(-8..=8), 2)))
                .collect();
            points
                .iter()
                .map(|p| {
                    let v =
                        pieces.iter().map(|(a, b)| crate::lmod::dot(a, &p.0) + b).max().expect("at least one piece");
                    ExtRational::Finite(v)
                })
                .collect()
        })
        .collect()
}

/// Brute-force lower convex envelope of 1-d samples on sorted points.
fn envelope_1d(xs: &[Rational], ys: &[Rational]) -> Vec<Rational> {
    (0..xs.len())
        .map(|k| {
            let mut best = ys[k].clone();
            for i in 0..k {
                for j in k + 1..xs.len() {
                    let t = (&xs[k] - &xs[i]) / (&xs[j] - &xs[i]);
                    let v = &ys[i] + t * (&ys[j] - &ys[i]);
                    if v < best {
                        best = v;
                    }
                }
            }
            best
        })
        .collect()
}

fn fenchel(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut r = SuiteResult::new("fenchel-moreau");
    for _ in 0..20 {
        let d = rng.gen_range(1..=2);
        let atoms = rng.gen_range(1..=3);
        let points = grid(d);
        let f = GridFunction::from_rows(d, points.clone(), convex_rows(rng, atoms, &points)).expect("valid grid");
        let ok = fenchel_moreau_check(&f, &grid(d)).map(|rep| rep.all_equal()).unwrap_or(false);
        r.check(ok, || format!("f** != f for convex\n{f}"));
    }
    for _ in 0..20 {
        let atoms = rng.gen_range(1..=3);
        let points = grid(1);
        let xs: Vec<Rational> = points.iter().map(|p| p.0[0].clone()).collect();
        let rows: Vec<Vec<Rational>> =
            (0..atoms).map(|_| points.iter().map(|_| ratio(rng.gen_range(-12..=12), 2)).collect()).collect();
        let mut dual = Vec::new();
        for row in &rows {
            for i in 0..xs.len() {
                for j in i + 1..xs.len() {
                    let s = Point(vec![(&row[j] - &row[i]) / (&xs[j] - &xs[i])]);
                    if !dual.contains(&s) {
                        dual.push(s);
                    }
                }
            }
        }
        let ext = rows.iter().map(|row| row.iter().cloned().map(ExtRational::Finite).collect()).collect();
        let f = GridFunction::from_rows(1, points.clone(), ext).expect("valid grid");
        let ok = match fenchel_moreau_check(&f, &dual) {
            Ok(rep) => rows.iter().enumerate().all(|(w, row)| {
                let env = envelope_1d(&xs, row);
                rep.biconjugate.row(w).iter().zip(&env).all(|(b, e)| b.finite() == Some(e))
            }),
            Err(_) => false,
        };
        r.check(ok, || format!("f** is not the convex envelope of\n{f}"));
    }
    r
}

fn subgradients(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut r = SuiteResult::new("subgradients");
    for _ in 0..20 {
        let d = rng.gen_range(1..=2);
        let atoms = rng.gen_range(1..=3);
        let points = grid(d);
        // +inf outside a shared box keeps the function convex
        let bound = rng.gen_range(0..=2);
        let inside = |p: &Point| p.0.iter().all(|c| *c >= int(-bound) && *c <= int(2));
        let mut rows = convex_rows(rng, atoms, &points);
        for row in &mut rows {
            for (v, p) in row.iter_mut().zip(&points) {
                if !inside(p) {
                    *v = ExtRational::PosInf;
                }
            }
        }
        let f = GridFunction::from_rows(d, points.clone(), rows).expect("valid grid");
        for p in points.iter().filter(|p| inside(p)) {
            let ok = match subgradient_exists(&f, p) {
                Ok(out) => out
                    .certificate
                    .map(|c| verify_subgradient(&c, &f).map(|bad| bad.is_empty()).unwrap_or(false))
                    .unwrap_or(false),
                Err(_) => false,
            };
            r.check(ok, || format!("no verified subgradient at {p} of\n{f}"));
        }
    }
    r
}

fn random_space(rng: &mut ChaCha8Rng) -> CondProbSpace {
    let n = rng.gen_range(1..=16);
    let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
    let total: i64 = raw.iter().sum();
    let weights = raw.iter().map(|w| ratio(*w, total)).collect();
    let k = rng.gen_range(1..=4.min(n));
    let mut blocks: Vec<Vec<usize>> = (0..k).map(|b| vec![b]).collect();
    for o in k..n {
        blocks[rng.gen_range(0..k)].push(o);
    }
    CondProbSpace::new(weights, blocks).expect("valid space")
}

fn risk(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut r = SuiteResult::new("entropic-risk");
    for _ in 0..100 {
        let space = random_space(rng);
        let x: Vec<Rational> = (0..space.outcomes()).map(|_| small_rational(rng, 5, 4)).collect();
        let gamma = ratio(rng.gen_range(1..=8), 2);
        let ok = entropic_risk(&space, &x, &gamma, rng, 10).map(|rep| rep.passed()).unwrap_or(false);
        r.check(ok, || format!("risk axioms fail for payoff {x:?}"));
    }
    r
}

fn atomwise(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut r = SuiteResult::new("atomwise");
    for _ in 0..100 {
        let alg = algebra(rng, 3);
        let n = alg.atom_count();
        let fam: Vec<RandVar> = (0..rng.gen_range(1..=4)).map(|_| random_rv(rng, n)).collect();
        let (sup, inf) = ess_bounds(&fam).expect("nonempty family");
        let ok = (0..n).all(|w| {
            let col = fam.iter().map(|v| &v.values()[w]);
            Some(&sup.values()[w]) == col.clone().max() && Some(&inf.values()[w]) == col.min()
        });
        r.check(ok, || "ess bounds differ from atomwise max/min".into());

        let blocks = random::partition(rng, &alg, 3);
        let xs: Vec<RandVar> = blocks.iter().map(|_| random_rv(rng, n)).collect();
        let pasted = concatenate_rv(&blocks, &xs).expect("valid partition");
        let ok = (0..n).all(|w| {
            let k = blocks.iter().position(|b| b.contains_index(w)).expect("partition covers");
            pasted.values()[w] == xs[k].values()[w]
        });
        r.check(ok, || "pasting differs from atomwise selection".into());

        let d = rng.gen_range(1..=2);
        let coords: Vec<Vec<Rational>> = (0..n).map(|_| random_point(rng, d, -3, 3).0).collect();
        let x = crate::lmod::ModuleElement::new(coords.clone()).expect("shape");
        let norm = l0_norm(&x);
        let ok = (0..n).all(|w| Some(&norm.values()[w]) == coords[w].iter().map(crate::rational::abs).max().as_ref());
        r.check(ok, || format!("norm differs from atomwise max-abs for {x}"));

        let a: Vec<Vec<Point>> = (0..n).map(|_| (0..3).map(|_| random_point(rng, d, -2, 2)).collect()).collect();
        let b: Vec<Vec<Point>> = (0..n).map(|_| (0..3).map(|_| random_point(rng, d, -2, 2)).collect()).collect();
        let (sa, sb) =
            (StablePolytope::new(d, a.clone()).expect("shape"), StablePolytope::new(d, b.clone()).expect("shape"));
        let disjoint = (0..n).all(|w| {
            let raw = |v: &[Point]| -> Vec<Vec<Rational>> { v.iter().map(|p| p.0.clone()).collect() };
            hull_intersection(&raw(&a[w]), &raw(&b[w])).is_none()
        });
        let ok = separate(&sa, &sb).is_ok() == disjoint;
        r.check(ok, || "separation feasibility differs from atomwise hull disjointness".into());
    }
    r
}

fn round_trip(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut r = SuiteResult::new("round-trip");
    for _ in 0..30 {
        let alg = algebra(rng, 3);
        let n = alg.atom_count();
        let mut mf = ModelFile::new(alg);
        mf.bind_rv("r", random_rv(rng, n)).expect("fresh id");
        mf.bind("x", NameExpr::Canon(crate::bvm::HfSet::numeral(rng.gen_range(0..4)))).expect("fresh id");
        mf.bind("y", NameExpr::Ident("x".into())).expect("fresh id");
        let text = mf.to_string();
        r.check(ModelFile::parse(&text).as_ref() == Ok(&mf), || format!("model file round trip fails:\n{text}"));

        let (s1, s2) = disjoint_pair(rng);
        let text = s1.to_string();
        r.check(StablePolytope::parse(&text).as_ref() == Ok(&s1), || format!("polytope round trip fails:\n{text}"));
        if let Ok(cert) = separate(&s1, &s2) {
            let text = cert.to_string();
            let ok = SeparationCertificate::parse(&text).as_ref() == Ok(&cert);
            r.check(ok, || format!("certificate round trip fails:\n{text}"));
        }

        let points = grid(rng.gen_range(1..=2));
        let f = GridFunction::from_rows(points[0].dim(), points.clone(), convex_rows(rng, n, &points)).expect("grid");
        let text = f.to_string();
        r.check(GridFunction::parse(&text).as_ref() == Ok(&f), || format!("grid round trip fails:\n{text}"));

        let space = random_space(rng);
        let payoff = (0..space.outcomes()).map(|_| small_rational(rng, 5, 4)).collect();
        let rf = RiskFile { space, payoff };
        let text = rf.to_string();
        r.check(RiskFile::parse(&text).as_ref() == Ok(&rf), || format!("risk file round trip fails:\n{text}"));
    }
    r
}
