//! Classical per-atom oracles, coded without the library's LP or pasting
//! machinery. Shared with the acceptance target through `#[path]`.
#![allow(dead_code, clippy::type_complexity, clippy::needless_range_loop, clippy::manual_memcpy)]

pub mod atomwise;

use bvlab::rational::Rational;
use num_traits::{Signed, Zero};

pub type Q = Rational;
pub type P = Vec<Q>;

/// Atom indices of a bitmask event.
pub fn bits_contain(bits: u64, w: usize) -> bool {
    bits >> w & 1 == 1
}

/// Index of the block holding atom `w`.
pub fn block_of(blocks: &[u64], w: usize) -> usize {
    blocks.iter().position(|b| bits_contain(*b, w)).expect("blocks cover every atom")
}

/// Every ordered partition of `{0..n}` into nonempty blocks, as bitmasks in
/// restricted-growth order.
pub fn set_partitions(n: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn rec(i: usize, max: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<u64>>) {
        if i == rgs.len() {
            let k = rgs.iter().max().map_or(0, |m| m + 1);
            let mut blocks = vec![0u64; k];
            for (w, &b) in rgs.iter().enumerate() {
                blocks[b] |= 1 << w;
            }
            out.push(blocks);
            return;
        }
        for b in 0..=max {
            rgs[i] = b;
            rec(i + 1, max.max(b + 1), rgs, out);
        }
    }
    if n > 0 {
        rec(0, 0, &mut rgs, &mut out);
    }
    out
}

/// All `k`-tuples over `0..m`.
pub fn tuples(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out.into_iter().flat_map(|t| (0..m).map(move |i| [t.clone(), vec![i]].concat())).collect();
    }
    out
}

fn cross(o: &[Q], a: &[Q], b: &[Q]) -> Q {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

fn between(a: &Q, b: &Q, p: &Q) -> bool {
    (a <= p && p <= b) || (b <= p && p <= a)
}

fn on_segment(a: &[Q], b: &[Q], p: &[Q]) -> bool {
    cross(a, b, p).is_zero() && between(&a[0], &b[0], &p[0]) && between(&a[1], &b[1], &p[1])
}

fn in_triangle(a: &[Q], b: &[Q], c: &[Q], p: &[Q]) -> bool {
    let (d1, d2, d3) = (cross(a, b, p), cross(b, c, p), cross(c, a, p));
    let neg = d1.is_negative() || d2.is_negative() || d3.is_negative();
    let pos = d1.is_positive() || d2.is_positive() || d3.is_positive();
    !(neg && pos)
}

/// Point-in-hull for `d ≤ 2`: interval test on the line, Carathéodory
/// (vertex, segment or triangle) in the plane.
pub fn hull_contains(vs: &[P], p: &[Q]) -> bool {
    match p.len() {
        1 => {
            let lo = vs.iter().map(|v| &v[0]).min().expect("nonempty");
            let hi = vs.iter().map(|v| &v[0]).max().expect("nonempty");
            lo <= &p[0] && &p[0] <= hi
        }
        2 => {
            let n = vs.len();
            for i in 0..n {
                if vs[i] == p {
                    return true;
                }
                for j in i + 1..n {
                    if on_segment(&vs[i], &vs[j], p) {
                        return true;
                    }
                    for k in j + 1..n {
                        if !cross(&vs[i], &vs[j], &vs[k]).is_zero() && in_triangle(&vs[i], &vs[j], &vs[k], p) {
                            return true;
                        }
                    }
                }
            }
            false
        }
        d => panic!("oracle covers d <= 2, got {d}"),
    }
}

fn segments_meet(a: &[Q], b: &[Q], c: &[Q], d: &[Q]) -> bool {
    let (d1, d2) = (cross(c, d, a), cross(c, d, b));
    let (d3, d4) = (cross(a, b, c), cross(a, b, d));
    let opposite = |x: &Q, y: &Q| (x.is_positive() && y.is_negative()) || (x.is_negative() && y.is_positive());
    if opposite(&d1, &d2) && opposite(&d3, &d4) {
        return true;
    }
    on_segment(c, d, a) || on_segment(c, d, b) || on_segment(a, b, c) || on_segment(a, b, d)
}

/// Whether two hulls meet, for `d ≤ 2`.
pub fn hulls_intersect(a: &[P], b: &[P]) -> bool {
    match a[0].len() {
        1 => {
            let (alo, ahi) = (a.iter().map(|v| &v[0]).min().unwrap(), a.iter().map(|v| &v[0]).max().unwrap());
            let (blo, bhi) = (b.iter().map(|v| &v[0]).min().unwrap(), b.iter().map(|v| &v[0]).max().unwrap());
            alo <= bhi && blo <= ahi
        }
        2 => {
            if a.iter().any(|v| hull_contains(b, v)) || b.iter().any(|v| hull_contains(a, v)) {
                return true;
            }
            for i in 0..a.len() {
                for j in i + 1..a.len() {
                    for k in 0..b.len() {
                        for l in k + 1..b.len() {
                            if segments_meet(&a[i], &a[j], &b[k], &b[l]) {
                                return true;
                            }
                        }
                    }
                }
            }
            false
        }
        d => panic!("oracle covers d <= 2, got {d}"),
    }
}

pub fn max_abs(v: &[Q]) -> Q {
    v.iter().map(|q| q.abs()).fold(Q::zero(), |m, q| if q > m { q } else { m })
}

/// `max_x μ·x − f(x)` over finite samples.
pub fn conjugate_at(points: &[P], values: &[Option<Q>], mu: &[Q]) -> Q {
    let mut best: Option<Q> = None;
    for (x, v) in points.iter().zip(values) {
        if let Some(fx) = v {
            let s: Q = mu.iter().zip(x).map(|(a, b)| a * b).sum::<Q>() - fx;
            if best.as_ref().is_none_or(|b| s > *b) {
                best = Some(s);
            }
        }
    }
    best.expect("some finite value")
}

/// Lower convex envelope of 1-d samples at each sample point: the least
/// chord value over pairs straddling the point.
pub fn lower_envelope_1d(xs: &[Q], ys: &[Q]) -> Vec<Q> {
    (0..xs.len())
        .map(|k| {
            let mut best = ys[k].clone();
            for i in 0..xs.len() {
                for j in 0..xs.len() {
                    if xs[i] < xs[k] && xs[k] < xs[j] {
                        let t = (&xs[k] - &xs[i]) / (&xs[j] - &xs[i]);
                        let v = &ys[i] + t * (&ys[j] - &ys[i]);
                        if v < best {
                            best = v;
                        }
                    }
                }
            }
            best
        })
        .collect()
}

/// Labels per atom of a carrier member of `E^atoms`, indexed lexicographically
/// with atom 1 most significant.
pub fn decode(mut index: usize, e: usize, atoms: usize) -> Vec<usize> {
    let mut v = vec![0; atoms];
    for w in (0..atoms).rev() {
        v[w] = index % e;
        index /= e;
    }
    v
}

pub fn encode(v: &[usize], e: usize) -> usize {
    v.iter().fold(0, |acc, &l| acc * e + l)
}

/// `f` commutes with every paste of carrier members along every partition.
pub fn commutes_with_pastes(f: &[usize], e: usize, atoms: usize) -> bool {
    let n = f.len();
    for blocks in set_partitions(atoms) {
        for pick in tuples(n, blocks.len()) {
            let mut pasted = vec![0; atoms];
            let mut image = vec![0; atoms];
            for w in 0..atoms {
                let k = block_of(&blocks, w);
                pasted[w] = decode(pick[k], e, atoms)[w];
                image[w] = decode(f[pick[k]], e, atoms)[w];
            }
            if decode(f[encode(&pasted, e)], e, atoms) != image {
                return false;
            }
        }
    }
    true
}

/// A subset of the carrier (as a membership mask) is closed under pastes.
pub fn closed_under_pastes(member: &[bool], e: usize, atoms: usize) -> bool {
    let elems: Vec<usize> = (0..member.len()).filter(|&i| member[i]).collect();
    if elems.is_empty() {
        return true;
    }
    for blocks in set_partitions(atoms) {
        for pick in tuples(elems.len(), blocks.len()) {
            let pasted: Vec<usize> =
                (0..atoms).map(|w| decode(elems[pick[block_of(&blocks, w)]], e, atoms)[w]).collect();
            if !member[encode(&pasted, e)] {
                return false;
            }
        }
    }
    true
}
