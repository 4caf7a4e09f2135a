//! Acceptance criteria, one pass/fail line each. Run with
//! `cargo test -p bvlab-cli --test acceptance -- --nocapture` to see the table.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bvlab::boolalg::{Algebra, Event};
use bvlab::bvm::{random, Name, TruthSession};
use bvlab::condset::{check_axioms, verify_name_bridge, CondUniverse, Mode};
use bvlab::folang::{eval_formula, parse_formula, Model, ModelFile, NameExpr, TRANSFER_SUITE};
use bvlab::lmod::lp::hull_weights;
use bvlab::lmod::{
    entropic_risk_values, fenchel_moreau_check, parse_point_set, separate, subgradient_exists, write_point_set,
    CondProbSpace, GridFunction, LmodError, Point, RiskFile, SeparationCertificate, StablePolytope,
    SubgradientCertificate,
};
use bvlab::lzero::{to_name, truth_cmp_rv, truth_order, Comparison, ExtRational, RandVar};
use bvlab::rational::{int, ratio, to_f64, Rational};
use common::{lower_envelope_1d, Q};

const SEED: u64 = 20_240_601;

const CASH_TOL: f64 = 1e-9;
const MONOTONE_TOL: f64 = 1e-12;
const CONVEX_TOL: f64 = 1e-9;
const NORMALIZATION_TOL: f64 = 1e-12;

struct Outcome {
    detail: String,
    failure: Option<String>,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { detail: detail.into(), failure: None }
}

fn fail(detail: impl Into<String>, why: impl Into<String>) -> Outcome {
    Outcome { detail: detail.into(), failure: Some(why.into()) }
}

macro_rules! ensure {
    ($cond:expr, $detail:expr, $($why:tt)*) => {{
        let ok: bool = $cond;
        if !ok {
            return fail($detail, format!($($why)*));
        }
    }};
}

fn rng(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ (criterion << 32))
}

fn within(limit: Option<Duration>, elapsed: Duration, o: Outcome) -> Outcome {
    match (limit, o.failure) {
        (Some(l), None) if elapsed >= l => {
            Outcome { detail: o.detail, failure: Some(format!("took {elapsed:.2?}, limit {l:?}")) }
        }
        (_, failure) => Outcome { detail: o.detail, failure },
    }
}

fn c1_equality_laws() -> Outcome {
    let mut rng = rng(1);
    let mut names_checked = 0;
    let mut triples = 0;
    for _ in 0..20 {
        let alg = Algebra::new(rng.gen_range(1..=4)).unwrap();
        let mut s = TruthSession::new(alg);
        let names: Vec<Name> = (0..10).map(|_| random::set_name(&mut rng, &alg, 4, 3)).collect();
        names_checked += names.len();
        let t: Vec<Vec<Event>> =
            names.iter().map(|x| names.iter().map(|y| s.truth_eq(x, y).unwrap()).collect()).collect();
        for i in 0..names.len() {
            ensure!(t[i][i].is_top(), "", "reflexivity fails for {}", names[i]);
            for j in 0..names.len() {
                ensure!(t[i][j] == t[j][i], "", "symmetry fails for {} and {}", names[i], names[j]);
                for k in 0..names.len() {
                    ensure!(
                        Event::le(&t[i][j].meet(&t[j][k]), &t[i][k]),
                        "",
                        "transitivity fails for names {i}, {j}, {k}"
                    );
                    triples += 1;
                }
            }
        }
    }
    pass(format!("{names_checked} names, {triples} triples"))
}

/// `Σ a_i x_i` written out entrywise: each entry of `x_i` keeps its guard cut down to `a_i`.
fn mixture_by_hand(blocks: &[Event], xs: &[Name]) -> Name {
    Name::set(blocks.iter().zip(xs).flat_map(|(a, x)| x.entries().iter().map(move |(c, g)| (c.clone(), g.meet(a)))))
}

fn c2_mixing() -> Outcome {
    let mut rng = rng(2);
    for _ in 0..100 {
        let alg = Algebra::new(rng.gen_range(1..=4)).unwrap();
        let mut s = TruthSession::new(alg);
        let k = rng.gen_range(1..=alg.atom_count());
        let mut bits = vec![0u64; k];
        for w in 0..alg.atom_count() {
            bits[rng.gen_range(0..k)] |= 1 << w;
        }
        let blocks: Vec<Event> = bits.iter().map(|b| alg.from_bits(*b)).collect();
        let xs: Vec<Name> = blocks.iter().map(|_| random::set_name(&mut rng, &alg, 3, 3)).collect();
        let m = s.mix(&blocks, &xs).unwrap();
        for (a, x) in blocks.iter().zip(&xs) {
            let t = s.truth_eq(&m, x).unwrap();
            ensure!(Event::le(a, &t), "", "[[m = x_i]] = {t} misses the block {a}");
        }
        let second = mixture_by_hand(&blocks, &xs);
        ensure!(s.equivalent(&m, &second).unwrap(), "", "hand-built mixture is not equivalent");
    }
    pass("100 instances")
}

fn c3_transfer() -> Outcome {
    let mut rng = rng(3);
    let formulas: Vec<_> = TRANSFER_SUITE.iter().map(|(l, t)| (*l, parse_formula(t).unwrap())).collect();
    ensure!(formulas.len() == 10, "", "expected 10 sentences, found {}", formulas.len());
    for _ in 0..20 {
        let alg = Algebra::new(rng.gen_range(1..=3)).unwrap();
        let mut s = TruthSession::new(alg);
        let mut m = Model::empty(alg);
        for id in ["x", "y", "z"] {
            m = m.with(id, random::set_name(&mut rng, &alg, 3, 3));
        }
        for (label, f) in &formulas {
            let v = eval_formula(f, &m, &mut s).unwrap();
            ensure!(v.is_top(), "", "'{label}' evaluates to {v}");
        }
    }
    pass("10 sentences x 20 models")
}

fn c4_gordon() -> Outcome {
    let mut rng = rng(4);
    for _ in 0..200 {
        let atoms = rng.gen_range(1..=5);
        let alg = Algebra::new(atoms).unwrap();
        let mut s = TruthSession::new(alg);
        let draw = |rng: &mut ChaCha8Rng| {
            RandVar::new((0..atoms).map(|_| ratio(rng.gen_range(-3..=3), rng.gen_range(1..=2))).collect()).unwrap()
        };
        let (r, q) = (draw(&mut rng), draw(&mut rng));
        let bits = |f: &dyn Fn(&Q, &Q) -> bool| {
            alg.from_bits((0..atoms).filter(|&w| f(&r.values()[w], &q.values()[w])).fold(0, |acc, w| acc | 1 << w))
        };
        let (eq_oracle, le_oracle) = (bits(&|a, b| a == b), bits(&|a, b| a <= b));
        let (nr, nq) = (to_name(&r), to_name(&q));
        let eq = s.truth_eq(&nr, &nq).unwrap();
        let le = truth_order(&nr, &nq, &alg).unwrap();
        ensure!(eq == truth_cmp_rv(Comparison::Eq, &r, &q).unwrap() && eq == eq_oracle, "", "= differs for {r}, {q}");
        ensure!(le == truth_cmp_rv(Comparison::Le, &r, &q).unwrap() && le == le_oracle, "", "<= differs for {r}, {q}");
    }
    pass("200 pairs, = and <=")
}

fn c5_conditional() -> Outcome {
    const LABELS: [&str; 4] = ["a", "b", "c", "d"];
    let (mut universes, mut pairs) = (0, 0);
    for e in 1..=4usize {
        for atoms in 1..=4usize {
            let size = e.pow(atoms as u32);
            let u = CondUniverse::with_labels(&LABELS[..e], atoms).unwrap();
            let rep = check_axioms(&u, &Mode::Native, 1 << 20).unwrap();
            ensure!(rep.c1 && rep.c2 && rep.c3, "", "axioms fail for |E|={e}, atoms={atoms}");
            universes += 1;
            if size <= 16 {
                let mut s = TruthSession::new(*u.algebra());
                let rep = verify_name_bridge(&u, &mut s, 1 << 20).unwrap();
                ensure!(rep.mismatches.is_empty(), "", "name bridge fails for |E|={e}, atoms={atoms}");
                // agreement events from the label tuples directly
                let carrier = u.carrier(1 << 20).unwrap();
                for (i, x) in carrier.iter().enumerate() {
                    for (j, y) in carrier.iter().enumerate() {
                        let agree = x.labels().iter().zip(y.labels()).enumerate().filter(|(_, (p, q))| p == q);
                        let bits = agree.fold(0u64, |acc, (w, _)| acc | 1 << w);
                        let t = s.truth_eq(&rep.names[i], &rep.names[j]).unwrap();
                        ensure!(t == u.algebra().from_bits(bits), "", "pair {i}, {j} over |E|={e}, atoms={atoms}");
                        pairs += 1;
                    }
                }
            }
        }
    }
    pass(format!("{universes} universes, {pairs} name pairs"))
}

fn q_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<Q> {
    (0..d).map(|_| ratio(rng.gen_range(-16..=16), rng.gen_range(1..=4))).collect()
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Strict vertex inequalities of a separation certificate, checked directly.
fn certificate_holds(c: &SeparationCertificate, s1: &StablePolytope, s2: &StablePolytope) -> bool {
    (0..s1.atoms()).all(|w| {
        let mu = &c.mu.weights()[w];
        let eps = &c.eps.values()[w];
        let lo = s1.vertices(w).iter().map(|v| dot(mu, &v.0)).min().unwrap();
        let hi = s2.vertices(w).iter().map(|v| dot(mu, &v.0)).max().unwrap();
        *eps > int(0) && lo > hi + eps
    })
}

fn in_hull(vs: &[Point], p: &[Q]) -> bool {
    let raw: Vec<Vec<Q>> = vs.iter().map(|v| v.0.clone()).collect();
    match hull_weights(&raw, p) {
        Some(w) => {
            w.iter().all(|x| *x >= int(0))
                && w.iter().cloned().sum::<Q>() == int(1)
                && (0..p.len()).all(|i| w.iter().zip(&raw).map(|(a, v)| a * &v[i]).sum::<Q>() == p[i])
        }
        None => false,
    }
}

fn c6_separation() -> Outcome {
    let mut rng = rng(6);
    let mut refused = 0;
    for _ in 0..50 {
        let atoms = rng.gen_range(1..=4);
        let d = rng.gen_range(1..=3);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for _ in 0..atoms {
            // a random integer normal splits the two vertex clouds
            let normal: Vec<Q> = loop {
                let n: Vec<Q> = (0..d).map(|_| int(rng.gen_range(-2..=2))).collect();
                if n.iter().any(|c| *c != int(0)) {
                    break n;
                }
            };
            let cloud = |want_low: bool, rng: &mut ChaCha8Rng| {
                let k = rng.gen_range(1..=8);
                let mut pts = Vec::new();
                while pts.len() < k {
                    let p = q_point(rng, d);
                    let side = dot(&normal, &p);
                    if (want_low && side <= int(0)) || (!want_low && side >= int(1)) {
                        pts.push(Point(p));
                    }
                }
                pts
            };
            a.push(cloud(true, &mut rng));
            b.push(cloud(false, &mut rng));
        }
        let (s1, s2) = (StablePolytope::new(d, a).unwrap(), StablePolytope::new(d, b.clone()).unwrap());
        match separate(&s1, &s2) {
            Ok(c) => ensure!(certificate_holds(&c, &s1, &s2), "", "certificate fails\n{c}"),
            Err(e) => return fail("", format!("disjoint pair refused: {e}")),
        }
        let w = rng.gen_range(0..atoms);
        b[w].push(s1.vertices(w)[rng.gen_range(0..s1.vertices(w).len())].clone());
        let overlapping = StablePolytope::new(d, b).unwrap();
        match separate(&s1, &overlapping) {
            Err(LmodError::HypothesisViolated { atom, point }) => {
                let ok = in_hull(s1.vertices(atom - 1), &point.0) && in_hull(overlapping.vertices(atom - 1), &point.0);
                ensure!(ok, "", "witness {point} on atom {atom} is not in both hulls");
                refused += 1;
            }
            other => return fail("", format!("overlap not refused: {other:?}")),
        }
    }
    pass(format!("50 certificates verified, {refused} overlaps refused"))
}

fn grid(d: usize, lo: i64, hi: i64) -> Vec<Point> {
    common::tuples((hi - lo + 1) as usize, d)
        .into_iter()
        .map(|t| Point(t.iter().map(|&i| int(lo + i as i64)).collect()))
        .collect()
}

/// Per-atom max of affine pieces with slopes in `{-1,0,1}^d`.
fn convex_pl(rng: &mut ChaCha8Rng, atoms: usize, points: &[Point]) -> Vec<Vec<Q>> {
    let d = points[0].dim();
    (0..atoms)
        .map(|_| {
            let pieces: Vec<(Vec<Q>, Q)> = (0..rng.gen_range(1..=4))
                .map(|_| ((0..d).map(|_| int(rng.gen_range(-1..=1))).collect(), ratio(rng.gen_range(-6..=6), 2)))
                .collect();
            points.iter().map(|p| pieces.iter().map(|(a, b)| dot(a, &p.0) + b).max().unwrap()).collect()
        })
        .collect()
}

fn finite_rows(rows: &[Vec<Q>]) -> Vec<Vec<ExtRational>> {
    rows.iter().map(|r| r.iter().cloned().map(ExtRational::Finite).collect()).collect()
}

fn c7_fenchel() -> Outcome {
    let mut rng = rng(7);
    for _ in 0..20 {
        let d = rng.gen_range(1..=2);
        let points = grid(d, -2, 2);
        let atoms = rng.gen_range(1..=3);
        let rows = convex_pl(&mut rng, atoms, &points);
        let f = GridFunction::from_rows(d, points.clone(), finite_rows(&rows)).unwrap();
        let rep = fenchel_moreau_check(&f, &grid(d, -1, 1)).unwrap();
        for (w, row) in rows.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                ensure!(rep.biconjugate.value(w, i).finite() == Some(v), "", "f** != f at {} on\n{f}", points[i]);
            }
        }
    }
    for _ in 0..20 {
        let points = grid(1, -3, 3);
        let xs: Vec<Q> = points.iter().map(|p| p.0[0].clone()).collect();
        let rows: Vec<Vec<Q>> =
            (0..rng.gen_range(1..=3)).map(|_| xs.iter().map(|_| ratio(rng.gen_range(-12..=12), 2)).collect()).collect();
        // dual grid: every chord slope of every atom
        let mut slopes: Vec<Q> = Vec::new();
        for row in &rows {
            for i in 0..xs.len() {
                for j in i + 1..xs.len() {
                    slopes.push((&row[j] - &row[i]) / (&xs[j] - &xs[i]));
                }
            }
        }
        slopes.sort();
        slopes.dedup();
        let dual: Vec<Point> = slopes.into_iter().map(|s| Point(vec![s])).collect();
        let f = GridFunction::from_rows(1, points.clone(), finite_rows(&rows)).unwrap();
        let rep = fenchel_moreau_check(&f, &dual).unwrap();
        for (w, row) in rows.iter().enumerate() {
            let env = lower_envelope_1d(&xs, row);
            for (i, e) in env.iter().enumerate() {
                ensure!(
                    rep.biconjugate.value(w, i).finite() == Some(e),
                    "",
                    "f** != envelope at {} on\n{f}",
                    points[i]
                );
            }
        }
    }
    pass("20 convex equal, 20 non-convex match the envelope")
}

fn c8_subgradients() -> Outcome {
    let mut rng = rng(8);
    let mut certs = 0;
    for _ in 0..20 {
        let d = rng.gen_range(1..=2);
        let points = grid(d, -2, 2);
        let atoms = rng.gen_range(1..=3);
        let rows = convex_pl(&mut rng, atoms, &points);
        // +inf off a shared box keeps every atom convex
        let lo = int(rng.gen_range(-2..=0));
        let inside: Vec<bool> = points.iter().map(|p| p.0.iter().all(|c| *c >= lo)).collect();
        let ext: Vec<Vec<ExtRational>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .zip(&inside)
                    .map(|(v, &ins)| if ins { ExtRational::Finite(v.clone()) } else { ExtRational::PosInf })
                    .collect()
            })
            .collect();
        let f = GridFunction::from_rows(d, points.clone(), ext).unwrap();
        for (i0, x0) in points.iter().enumerate().filter(|(i, _)| inside[*i]) {
            let out = subgradient_exists(&f, x0).unwrap();
            let Some(cert) = out.certificate else {
                return fail("", format!("no subgradient at {x0} of\n{f}"));
            };
            for (w, row) in rows.iter().enumerate() {
                let mu = &cert.mu.weights()[w];
                for (i, x) in points.iter().enumerate().filter(|(i, _)| inside[*i]) {
                    let dx: Vec<Q> = x.0.iter().zip(&x0.0).map(|(a, b)| a - b).collect();
                    ensure!(
                        dot(mu, &dx) <= &row[i] - &row[i0],
                        "",
                        "certificate at {x0} fails at {x} on atom {}",
                        w + 1
                    );
                }
            }
            certs += 1;
        }
    }
    pass(format!("{certs} certificates verified"))
}

fn random_space(rng: &mut ChaCha8Rng) -> CondProbSpace {
    let n = rng.gen_range(1..=16);
    let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=20)).collect();
    let total: i64 = raw.iter().sum();
    let k = rng.gen_range(1..=n.min(4));
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut blocks: Vec<Vec<usize>> = order[..k].iter().map(|&o| vec![o]).collect();
    for &o in &order[k..] {
        blocks[rng.gen_range(0..k)].push(o);
    }
    for b in &mut blocks {
        b.sort();
    }
    CondProbSpace::new(raw.iter().map(|w| ratio(*w, total)).collect(), blocks).unwrap()
}

/// Direct formula without the log-sum-exp shift, for moderate payoffs.
fn naive_risk(space: &CondProbSpace, x: &[f64], gamma: f64) -> Vec<f64> {
    space
        .blocks()
        .iter()
        .map(|b| {
            let mass: f64 = b.iter().map(|&o| to_f64(&space.weights()[o])).sum();
            let s: f64 = b.iter().map(|&o| to_f64(&space.weights()[o]) / mass * (-gamma * x[o]).exp()).sum();
            s.ln() / gamma
        })
        .collect()
}

fn c9_risk() -> Outcome {
    let mut rng = rng(9);
    let (mut cash, mut mono, mut conv, mut norm) = (0f64, 0f64, 0f64, 0f64);
    for _ in 0..100 {
        let space = random_space(&mut rng);
        let n = space.outcomes();
        let gamma = to_f64(&ratio(rng.gen_range(1..=8), 4));
        let draw = |rng: &mut ChaCha8Rng| (0..n).map(|_| rng.gen_range(-80..=80) as f64 / 16.0).collect::<Vec<f64>>();
        let rho = |x: &[f64]| entropic_risk_values(&space, x, gamma).unwrap();
        norm = rho(&vec![0.0; n]).iter().fold(norm, |m, v| m.max(v.abs()));
        for _ in 0..10 {
            let (x, y) = (draw(&mut rng), draw(&mut rng));
            let (rx, ry) = (rho(&x), rho(&y));
            for (a, b) in rx.iter().zip(naive_risk(&space, &x, gamma)) {
                ensure!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "", "value {a} differs from direct formula {b}");
            }
            let eta: Vec<f64> = (0..space.blocks().len()).map(|_| rng.gen_range(-40..=40) as f64 / 8.0).collect();
            let mut shifted = x.clone();
            for (k, b) in space.blocks().iter().enumerate() {
                for &o in b {
                    shifted[o] += eta[k];
                }
            }
            for (k, v) in rho(&shifted).iter().enumerate() {
                cash = cash.max((v + eta[k] - rx[k]).abs());
            }
            let up: Vec<f64> = x.iter().map(|v| v + rng.gen_range(0..=16) as f64 / 8.0).collect();
            for (v, r) in rho(&up).iter().zip(&rx) {
                mono = mono.max(v - r);
            }
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * a + 0.5 * b).collect();
            for (k, v) in rho(&mid).iter().enumerate() {
                conv = conv.max(v - 0.5 * (rx[k] + ry[k]));
            }
        }
    }
    let detail = format!("cash {cash:.1e}, monotone {mono:.1e}, convex {conv:.1e}, rho(0) {norm:.1e}");
    ensure!(cash <= CASH_TOL, detail, "cash invariance error {cash:e}");
    ensure!(mono <= MONOTONE_TOL, detail, "monotonicity violation {mono:e}");
    ensure!(conv <= CONVEX_TOL, detail, "convexity violation {conv:e}");
    ensure!(norm <= NORMALIZATION_TOL, detail, "normalization error {norm:e}");
    pass(detail)
}

fn c10_atomwise() -> Outcome {
    let mut counts = Vec::new();
    for (name, check) in common::atomwise::CHECKS {
        match check() {
            Ok(n) => counts.push(format!("{name} {n}")),
            Err(e) => return fail(counts.join(", "), format!("{name}: {e}")),
        }
    }
    pass(counts.join(", "))
}

fn round_trip<T: PartialEq + std::fmt::Debug, E: std::fmt::Debug>(
    what: &str,
    text: &str,
    parse: impl Fn(&str) -> Result<T, E>,
    print: impl Fn(&T) -> String,
) -> Result<(), String> {
    let a = parse(text).map_err(|e| format!("{what}: {e:?}"))?;
    let b = parse(&print(&a)).map_err(|e| format!("{what} reparse: {e:?}"))?;
    if a == b {
        Ok(())
    } else {
        Err(format!("{what}: round trip changed the value"))
    }
}

fn file_round_trips(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut n = 0;
    for _ in 0..20 {
        let atoms = rng.gen_range(1..=3);
        let alg = Algebra::new(atoms).unwrap();
        let mut m = ModelFile::new(alg);
        let rv =
            RandVar::new((0..atoms).map(|_| ratio(rng.gen_range(-9..=9), rng.gen_range(1..=3))).collect()).unwrap();
        m.bind_rv("r", rv).unwrap();
        m.bind("x", NameExpr::Canon(bvlab::bvm::HfSet::numeral(rng.gen_range(0..3)))).unwrap();
        m.bind("y", NameExpr::Mix(vec![(bvlab::boolalg::EventLit::Top, NameExpr::Ident("x".into()))])).unwrap();
        round_trip("model", &m.to_string(), ModelFile::parse, ToString::to_string)?;

        let d = rng.gen_range(1..=3);
        let per_atom: Vec<Vec<Point>> =
            (0..atoms).map(|_| (0..rng.gen_range(1..=4)).map(|_| Point(q_point(rng, d))).collect()).collect();
        let p = StablePolytope::new(d, per_atom).unwrap();
        round_trip("polytope", &p.to_string(), StablePolytope::parse, ToString::to_string)?;

        let points = grid(d.min(2), -1, 1);
        let rows = convex_pl(rng, atoms, &points);
        let f = GridFunction::from_rows(d.min(2), points.clone(), finite_rows(&rows)).unwrap();
        round_trip("grid function", &f.to_string(), GridFunction::parse, ToString::to_string)?;
        round_trip("point set", &write_point_set(d.min(2), &points), parse_point_set, |(d, p)| write_point_set(*d, p))?;
        let cert = subgradient_exists(&f, &points[0]).unwrap().certificate.unwrap();
        round_trip("subgradient certificate", &cert.to_string(), SubgradientCertificate::parse, ToString::to_string)?;

        let shifted: Vec<Vec<Point>> = (0..atoms)
            .map(|w| p.vertices(w).iter().map(|v| Point(v.0.iter().map(|c| c + int(100)).collect())).collect())
            .collect();
        let far = StablePolytope::new(d, shifted).unwrap();
        let sep = separate(&p, &far).unwrap();
        round_trip("separation certificate", &sep.to_string(), SeparationCertificate::parse, ToString::to_string)?;

        let space = random_space(rng);
        let payoff: Vec<Rational> = (0..space.outcomes()).map(|_| ratio(rng.gen_range(-9..=9), 4)).collect();
        let rf = RiskFile { space, payoff };
        round_trip("risk", &rf.to_string(), RiskFile::parse, ToString::to_string)?;

        let labels = ["p", "q", "r"];
        let u = CondUniverse::with_labels(&labels[..rng.gen_range(1..=3)], atoms).unwrap();
        round_trip("universe", &u.to_string(), CondUniverse::parse, ToString::to_string)?;
        n += 9;
    }
    Ok(n)
}

fn c11_cli() -> Outcome {
    let mut rng = rng(11);
    let files = match file_round_trips(&mut rng) {
        Ok(n) => n,
        Err(e) => return fail("", e),
    };
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };
    let risk = write("risk.txt", "outcomes 1/4,1/4,1/2\nblocks {1,2}{3}\npayoff 0,-1,5/2\n");
    let sets = write("sets.poly", "polytope atoms=2 d=1\natom 1: (2); (3)\natom 2: (0); (1)\npolytope atoms=2 d=1\natom 1: (0); (1)\natom 2: (5); (7)\n");
    let model = write("m.bv", "atoms 2\nname x = {(canon{}, {1}), (canon{{}}, top)}\n");
    let runs: Vec<Vec<String>> = vec![
        vec!["risk".into(), "--space".into(), risk, "--gamma".into(), "3/2".into(), "--seed".into(), "9".into()],
        vec!["separate".into(), "--sets".into(), sets],
        vec!["descend".into(), "--model".into(), model.clone(), "--name".into(), "x".into()],
        vec!["eval".into(), "--model".into(), model, "--formula".into(), "exists t in x : t = canon{}".into()],
        vec!["selftest".into(), "--suite".into(), "mixing".into(), "--seed".into(), "5".into()],
    ];
    for args in &runs {
        let argv = || std::iter::once("bvlab".to_string()).chain(args.iter().cloned());
        let (a, b) = (bvlab_cli::run(argv()), bvlab_cli::run(argv()));
        ensure!(a.exit_code == 0, "", "{:?} exited {}: {}", args, a.exit_code, a.stderr);
        ensure!(a == b, "", "{:?} is not deterministic", args);
    }
    let start = Instant::now();
    let st = bvlab_cli::run(["bvlab", "selftest", "--seed", "3"]);
    let took = start.elapsed();
    ensure!(st.exit_code == 0, "", "selftest failed:\n{}", st.stdout);
    ensure!(took < Duration::from_secs(120), "", "selftest took {took:.2?}");
    pass(format!("{files} file round trips, {} deterministic runs, selftest {took:.2?}", runs.len()))
}

#[test]
fn acceptance_criteria() {
    type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 11] = [
        ("1  equality-truth laws", c1_equality_laws, Some(Duration::from_secs(10))),
        ("2  mixing principle", c2_mixing, Some(Duration::from_secs(10))),
        ("3  transfer smoke suite", c3_transfer, None),
        ("4  gordon correspondence", c4_gordon, None),
        ("5  conditional axioms + name bridge", c5_conditional, Some(Duration::from_secs(30))),
        ("6  separation", c6_separation, None),
        ("7  fenchel-moreau", c7_fenchel, None),
        ("8  subgradients", c8_subgradients, None),
        ("9  entropic risk", c9_risk, None),
        ("10 atomwise oracles", c10_atomwise, None),
        ("11 cli determinism + round trip", c11_cli, Some(Duration::from_secs(120))),
    ];
    let mut failed = Vec::new();
    for (label, run, limit) in criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let o = within(limit, elapsed, o);
        let verdict = if o.failure.is_none() { "PASS" } else { "FAIL" };
        println!("[{verdict}] {label:<38} {elapsed:>9.2?}  {}", o.detail);
        if let Some(why) = o.failure {
            println!("       {why}");
            failed.push(label);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
