//! Library operations against the per-atom oracles on exhaustive small
//! instances (at most 3 atoms, d at most 2). Each check returns the number of
//! instances compared or the first disagreement.

use bvlab::boolalg::{Algebra, Event};
use bvlab::lmod::{
    concatenate_sets, conjugate, l0_norm_and_ball, separate, sublevel, verify_separation, GridFunction, LmodError,
    ModuleElement, Point, StablePolytope,
};
use bvlab::lzero::{concatenate_rv, ess_bounds, ExtRandVar, ExtRational, RandVar};
use bvlab::rational::{int, ratio};

use super::*;

pub type Check = Result<usize, String>;

fn rvs(atoms: usize, values: &[Q]) -> Vec<RandVar> {
    tuples(values.len(), atoms)
        .into_iter()
        .map(|t| RandVar::new(t.iter().map(|&i| values[i].clone()).collect()).unwrap())
        .collect()
}

fn events(alg: &Algebra, blocks: &[u64]) -> Vec<Event> {
    blocks.iter().map(|b| alg.from_bits(*b)).collect()
}

/// Partitions in both written block orders.
fn ordered_partitions(atoms: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for p in set_partitions(atoms) {
        let mut r = p.clone();
        r.reverse();
        out.push(p);
        if r != out[out.len() - 1] {
            out.push(r);
        }
    }
    out
}

pub fn ess_bounds_check() -> Check {
    let values = [int(-1), int(0), ratio(1, 2), int(2)];
    let mut n = 0;
    for atoms in 1..=3 {
        let pool = rvs(atoms, &values);
        for size in 1..=2 {
            for pick in tuples(pool.len(), size) {
                let fam: Vec<RandVar> = pick.iter().map(|&i| pool[i].clone()).collect();
                let (sup, inf) = ess_bounds(&fam).map_err(|e| e.to_string())?;
                for w in 0..atoms {
                    let col: Vec<&Q> = fam.iter().map(|v| &v.values()[w]).collect();
                    let (mx, mn) = (col.iter().max().unwrap(), col.iter().min().unwrap());
                    if &&sup.values()[w] != mx || &&inf.values()[w] != mn {
                        return Err(format!("ess bounds of {fam:?} differ on atom {}", w + 1));
                    }
                }
                n += 1;
            }
        }
    }
    Ok(n)
}

pub fn concatenate_rv_check() -> Check {
    let values = [int(0), int(1), ratio(-3, 2)];
    let mut n = 0;
    for atoms in 1..=3 {
        let alg = Algebra::new(atoms).unwrap();
        let pool = rvs(atoms, &values);
        for blocks in ordered_partitions(atoms) {
            for pick in tuples(pool.len(), blocks.len()) {
                let xs: Vec<RandVar> = pick.iter().map(|&i| pool[i].clone()).collect();
                let got = concatenate_rv(&events(&alg, &blocks), &xs).map_err(|e| e.to_string())?;
                for w in 0..atoms {
                    if got.values()[w] != xs[block_of(&blocks, w)].values()[w] {
                        return Err(format!("paste of {xs:?} along {blocks:?} differs on atom {}", w + 1));
                    }
                }
                n += 1;
            }
        }
    }
    Ok(n)
}

fn pt(coords: &[i64]) -> Point {
    Point(coords.iter().map(|&c| int(c)).collect())
}

fn poly_pool(d: usize, atoms: usize) -> Vec<StablePolytope> {
    let shapes: Vec<Vec<Point>> = if d == 1 {
        vec![vec![pt(&[0]), pt(&[1])], vec![pt(&[1]), pt(&[2])], vec![pt(&[2])]]
    } else {
        vec![vec![pt(&[0, 0]), pt(&[2, 0]), pt(&[0, 2])], vec![pt(&[1, 1]), pt(&[2, 2])], vec![pt(&[2, 1])]]
    };
    // polytope i uses shape (i + w) mod 3 on atom w
    (0..3).map(|i| StablePolytope::new(d, (0..atoms).map(|w| shapes[(i + w) % 3].clone()).collect()).unwrap()).collect()
}

pub fn concatenate_sets_check() -> Check {
    let mut n = 0;
    for (d, max_atoms) in [(1, 3), (2, 2)] {
        let grid: Vec<P> = tuples(3, d).into_iter().map(|t| t.iter().map(|&c| int(c as i64)).collect()).collect();
        for atoms in 1..=max_atoms {
            let alg = Algebra::new(atoms).unwrap();
            let pool = poly_pool(d, atoms);
            for blocks in ordered_partitions(atoms) {
                for pick in tuples(pool.len(), blocks.len()) {
                    let sets: Vec<StablePolytope> = pick.iter().map(|&i| pool[i].clone()).collect();
                    let got = concatenate_sets(&events(&alg, &blocks), &sets).map_err(|e| e.to_string())?;
                    for coords in tuples(grid.len(), atoms) {
                        let x = ModuleElement::new(coords.iter().map(|&i| grid[i].clone()).collect()).unwrap();
                        let expected = (0..atoms).all(|w| {
                            let vs: Vec<P> =
                                sets[block_of(&blocks, w)].vertices(w).iter().map(|p| p.0.clone()).collect();
                            hull_contains(&vs, &grid[coords[w]])
                        });
                        if got.contains(&x).map_err(|e| e.to_string())? != expected {
                            return Err(format!("membership of {x} in the paste along {blocks:?} differs"));
                        }
                        n += 1;
                    }
                }
            }
        }
    }
    Ok(n)
}

pub fn norm_check() -> Check {
    let values = [int(-2), ratio(-1, 2), int(0), int(1)];
    let radii = [ratio(1, 2), int(1), int(2)];
    let mut n = 0;
    for (atoms, d) in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)] {
        for t in tuples(values.len(), atoms * d) {
            let coords: Vec<P> = (0..atoms).map(|w| (0..d).map(|i| values[t[w * d + i]].clone()).collect()).collect();
            let x = ModuleElement::new(coords.clone()).unwrap();
            for r in tuples(radii.len(), atoms) {
                let eps = RandVar::new(r.iter().map(|&i| radii[i].clone()).collect()).unwrap();
                let (norm, ball) = l0_norm_and_ball(&x, Some(&eps)).map_err(|e| e.to_string())?;
                let ball = ball.expect("radius given");
                for w in 0..atoms {
                    let m = max_abs(&coords[w]);
                    if norm.values()[w] != m || ball.contains_index(w) != (m < radii[r[w]]) {
                        return Err(format!("norm or ball of {x} with radius {eps} differs on atom {}", w + 1));
                    }
                }
                n += 1;
            }
        }
    }
    Ok(n)
}

fn grid_functions(d: usize, atoms: usize) -> (Vec<Point>, Vec<Vec<Vec<Option<Q>>>>) {
    let (points, values): (Vec<Point>, Vec<Option<Q>>) = if d == 1 {
        ((-1..=1).map(|c| pt(&[c])).collect(), vec![None, Some(int(0)), Some(int(1)), Some(int(-1))])
    } else {
        (
            tuples(2, 2).iter().map(|t| pt(&[t[0] as i64, t[1] as i64])).collect(),
            vec![None, Some(int(0)), Some(ratio(3, 2))],
        )
    };
    let per_atom: Vec<Vec<Option<Q>>> = tuples(values.len(), points.len())
        .into_iter()
        .map(|t| t.iter().map(|&i| values[i].clone()).collect::<Vec<_>>())
        .filter(|row| row.iter().any(Option::is_some))
        .collect();
    let fns =
        tuples(per_atom.len(), atoms).into_iter().map(|t| t.iter().map(|&i| per_atom[i].clone()).collect()).collect();
    (points, fns)
}

fn to_grid(d: usize, points: &[Point], rows: &[Vec<Option<Q>>]) -> GridFunction {
    let ext = rows
        .iter()
        .map(|row| row.iter().map(|v| v.clone().map_or(ExtRational::PosInf, ExtRational::Finite)).collect())
        .collect();
    GridFunction::from_rows(d, points.to_vec(), ext).unwrap()
}

pub fn conjugate_check() -> Check {
    let mut n = 0;
    for (d, atoms) in [(1, 1), (1, 2), (2, 1)] {
        let (points, fns) = grid_functions(d, atoms);
        let raw: Vec<P> = points.iter().map(|p| p.0.clone()).collect();
        let dual: Vec<Point> = if d == 1 {
            (-2..=2).map(|c| pt(&[c])).collect()
        } else {
            tuples(3, 2).iter().map(|t| pt(&[t[0] as i64 - 1, t[1] as i64 - 1])).collect()
        };
        for rows in &fns {
            let f = to_grid(d, &points, rows);
            let g = conjugate(&f, &dual).map_err(|e| e.to_string())?;
            for (w, row) in rows.iter().enumerate() {
                for (j, mu) in dual.iter().enumerate() {
                    if g.value(w, j).finite() != Some(&conjugate_at(&raw, row, &mu.0)) {
                        return Err(format!("conjugate at {mu} differs on atom {} for\n{f}", w + 1));
                    }
                }
            }
            n += 1;
        }
    }
    Ok(n)
}

pub fn sublevel_check() -> Check {
    let levels =
        [ExtRational::NegInf, ExtRational::Finite(int(0)), ExtRational::Finite(ratio(1, 2)), ExtRational::PosInf];
    let mut n = 0;
    for (d, atoms) in [(1, 1), (1, 2), (2, 1)] {
        let (points, fns) = grid_functions(d, atoms);
        for rows in &fns {
            let f = to_grid(d, &points, rows);
            for t in tuples(levels.len(), atoms) {
                let eta = ExtRandVar::new(t.iter().map(|&i| levels[i].clone()).collect()).unwrap();
                let rep = sublevel(&f, &eta).map_err(|e| e.to_string())?;
                for (w, row) in rows.iter().enumerate() {
                    let expected: Vec<usize> = (0..points.len())
                        .filter(|&i| match (&row[i], &levels[t[w]]) {
                            (_, ExtRational::PosInf) => true,
                            (None, _) | (_, ExtRational::NegInf) => false,
                            (Some(v), ExtRational::Finite(e)) => v <= e,
                        })
                        .collect();
                    if rep.per_atom[w] != expected {
                        return Err(format!("sublevel at {eta} differs on atom {} for\n{f}", w + 1));
                    }
                }
                n += 1;
            }
        }
    }
    Ok(n)
}

fn vertex_sets(d: usize) -> Vec<Vec<P>> {
    let grid: Vec<P> = if d == 1 {
        (0..=3).map(|c| vec![int(c)]).collect()
    } else {
        tuples(3, 2).iter().map(|t| vec![int(t[0] as i64), int(t[1] as i64)]).collect()
    };
    let mut sets: Vec<Vec<P>> = grid.iter().map(|p| vec![p.clone()]).collect();
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            sets.push(vec![grid[i].clone(), grid[j].clone()]);
        }
    }
    if d == 2 {
        sets.push(vec![grid[0].clone(), grid[2].clone(), grid[6].clone()]);
        sets.push(vec![grid[8].clone(), grid[5].clone(), grid[7].clone()]);
    }
    sets
}

pub fn separation_check() -> Check {
    let mut n = 0;
    for (d, atoms) in [(1, 1), (1, 2), (2, 1)] {
        let sets = vertex_sets(d);
        let poly = |ids: &[usize]| {
            StablePolytope::new(d, ids.iter().map(|&i| sets[i].iter().cloned().map(Point).collect()).collect()).unwrap()
        };
        let pairs = tuples(sets.len(), 2);
        for combo in tuples(pairs.len(), atoms) {
            let a: Vec<usize> = combo.iter().map(|&c| pairs[c][0]).collect();
            let b: Vec<usize> = combo.iter().map(|&c| pairs[c][1]).collect();
            let (s1, s2) = (poly(&a), poly(&b));
            let first_meet = (0..atoms).find(|&w| hulls_intersect(&sets[a[w]], &sets[b[w]]));
            match (separate(&s1, &s2), first_meet) {
                (Ok(cert), None) => {
                    if !verify_separation(&cert, &s1, &s2).map_err(|e| e.to_string())?.ok() {
                        return Err(format!("certificate fails for\n{s1}{s2}"));
                    }
                }
                (Err(LmodError::HypothesisViolated { atom, point }), Some(w)) => {
                    let (va, vb) = (&sets[a[atom - 1]], &sets[b[atom - 1]]);
                    if atom != w + 1 || !hull_contains(va, &point.0) || !hull_contains(vb, &point.0) {
                        return Err(format!("bad refusal (atom {atom}, witness {point}) for\n{s1}{s2}"));
                    }
                }
                (got, expected) => {
                    return Err(format!("feasibility differs: got {got:?}, oracle meet at {expected:?} for\n{s1}{s2}"));
                }
            }
            n += 1;
        }
    }
    Ok(n)
}

pub const CHECKS: &[(&str, fn() -> Check)] = &[
    ("ess_bounds", ess_bounds_check),
    ("concatenate_rv", concatenate_rv_check),
    ("concatenate_sets", concatenate_sets_check),
    ("norm", norm_check),
    ("conjugate", conjugate_check),
    ("sublevel", sublevel_check),
    ("separation feasibility", separation_check),
];
