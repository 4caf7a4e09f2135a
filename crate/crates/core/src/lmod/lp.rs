//! Exact two-phase simplex over rationals. Bland's rule (lowest index enters,
//! lowest basic index leaves on ratio ties) makes every run terminate and
//! every answer reproducible.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpResult {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

impl LpResult {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpResult::Infeasible)
    }
}

/// `maximize c·x` subject to linear rows; variables are `≥ 0` unless marked free.
#[derive(Debug, Clone)]
pub struct Lp {
    n: usize,
    free: Vec<bool>,
    objective: Vec<Rational>,
    rows: Vec<(Vec<Rational>, Rel, Rational)>,
}

impl Lp {
    pub fn new(n: usize) -> Self {
        Lp { n, free: vec![false; n], objective: vec![Rational::zero(); n], rows: Vec::new() }
    }

    pub fn free(mut self, i: usize) -> Self {
        self.free[i] = true;
        self
    }

    pub fn all_free(mut self) -> Self {
        self.free = vec![true; self.n];
        self
    }

    pub fn maximize(&mut self, c: Vec<Rational>) {
        assert_eq!(c.len(), self.n);
        self.objective = c;
    }

    pub fn constraint(&mut self, coeffs: Vec<Rational>, rel: Rel, rhs: Rational) {
        assert_eq!(coeffs.len(), self.n);
        self.rows.push((coeffs, rel, rhs));
    }

    pub fn solve(&self) -> LpResult {
        // column layout: split originals, then slacks/surpluses, then artificials
        let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(self.n);
        let mut ncols = 0;
        for &f in &self.free {
            if f {
                col_of.push((ncols, Some(ncols + 1)));
                ncols += 2;
            } else {
                col_of.push((ncols, None));
                ncols += 1;
            }
        }
        let structural = ncols;
        let m = self.rows.len();
        let mut rows: Vec<(Vec<Rational>, Rel, Rational)> = Vec::with_capacity(m);
        for (coeffs, rel, rhs) in &self.rows {
            let mut r = vec![Rational::zero(); structural];
            for (i, a) in coeffs.iter().enumerate() {
                let (p, q) = col_of[i];
                r[p] = a.clone();
                if let Some(q) = q {
                    r[q] = -a.clone();
                }
            }
            let (mut rel, mut rhs) = (*rel, rhs.clone());
            if rhs.is_negative() {
                r.iter_mut().for_each(|v| *v = -v.clone());
                rhs = -rhs;
                rel = match rel {
                    Rel::Le => Rel::Ge,
                    Rel::Ge => Rel::Le,
                    Rel::Eq => Rel::Eq,
                };
            }
            rows.push((r, rel, rhs));
        }
        let slack_count = rows.iter().filter(|(_, r, _)| *r != Rel::Eq).count();
        let art_count = rows.iter().filter(|(_, r, _)| *r != Rel::Le).count();
        let art_start = structural + slack_count;
        let width = art_start + art_count;
        let mut t: Vec<Vec<Rational>> = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut s_idx, mut a_idx) = (structural, art_start);
        for (r, rel, rhs) in rows {
            let mut row = r;
            row.resize(width + 1, Rational::zero());
            row[width] = rhs;
            match rel {
                Rel::Le => {
                    row[s_idx] = Rational::one();
                    basis.push(s_idx);
                    s_idx += 1;
                }
                Rel::Ge => {
                    row[s_idx] = -Rational::one();
                    s_idx += 1;
                    row[a_idx] = Rational::one();
                    basis.push(a_idx);
                    a_idx += 1;
                }
                Rel::Eq => {
                    row[a_idx] = Rational::one();
                    basis.push(a_idx);
                    a_idx += 1;
                }
            }
            t.push(row);
        }
        let mut tab = Tableau { t, basis, width, allowed: width };

        if art_count > 0 {
            let mut c1 = vec![Rational::zero(); width];
            for c in c1.iter_mut().skip(art_start) {
                *c = -Rational::one();
            }
            match tab.run(&c1) {
                Phase::Optimal(v) if v.is_negative() => return LpResult::Infeasible,
                Phase::Optimal(_) => {}
                Phase::Unbounded => unreachable!("phase one is bounded above by zero"),
            }
            tab.evict_artificials(art_start);
            tab.allowed = art_start;
        }

        let mut c2 = vec![Rational::zero(); width];
        for (i, c) in self.objective.iter().enumerate() {
            let (p, q) = col_of[i];
            c2[p] = c.clone();
            if let Some(q) = q {
                c2[q] = -c.clone();
            }
        }
        match tab.run(&c2) {
            Phase::Unbounded => LpResult::Unbounded,
            Phase::Optimal(value) => {
                let mut colval = vec![Rational::zero(); width];
                for (i, &b) in tab.basis.iter().enumerate() {
                    colval[b] = tab.t[i][width].clone();
                }
                let x = col_of
                    .iter()
                    .map(|&(p, q)| match q {
                        Some(q) => &colval[p] - &colval[q],
                        None => colval[p].clone(),
                    })
                    .collect();
                LpResult::Optimal { x, value }
            }
        }
    }
}

enum Phase {
    Optimal(Rational),
    Unbounded,
}

struct Tableau {
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
    /// Columns at or beyond this index may not enter the basis.
    allowed: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, z: Option<&mut Vec<Rational>>) {
        let p = self.t[r][c].clone();
        for v in self.t[r].iter_mut() {
            *v = &*v / &p;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v = &*v - &(&f * pv);
                }
            }
        }
        if let Some(z) = z {
            if !z[c].is_zero() {
                let f = z[c].clone();
                for (v, pv) in z.iter_mut().zip(&prow) {
                    if !pv.is_zero() {
                        *v = &*v - &(&f * pv);
                    }
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `c·x` from the current basis; returns the optimal value.
    fn run(&mut self, c: &[Rational]) -> Phase {
        let w = self.width;
        let mut z: Vec<Rational> = c.to_vec();
        z.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            if !z[b].is_zero() {
                let f = z[b].clone();
                for (v, tv) in z.iter_mut().zip(&self.t[i]) {
                    *v = &*v - &(&f * tv);
                }
            }
        }
        loop {
            let Some(enter) = (0..self.allowed).find(|&j| z[j].is_positive()) else {
                return Phase::Optimal(-z[w].clone());
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.t[i][w] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Phase::Unbounded;
            };
            self.pivot(r, enter, Some(&mut z));
        }
    }

    /// Pivots zero-valued artificials out of the basis after phase one,
    /// dropping rows that turn out to be redundant.
    fn evict_artificials(&mut self, art_start: usize) {
        let mut i = 0;
        while i < self.t.len() {
            if self.basis[i] >= art_start {
                match (0..art_start).find(|&j| !self.t[i][j].is_zero()) {
                    Some(j) => self.pivot(i, j, None),
                    None => {
                        self.t.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}

/// Whether `point` lies in the convex hull of `vertices`; returns weights.
pub fn hull_weights(vertices: &[Vec<Rational>], point: &[Rational]) -> Option<Vec<Rational>> {
    let k = vertices.len();
    let mut lp = Lp::new(k);
    lp.constraint(vec![Rational::one(); k], Rel::Eq, Rational::one());
    for (i, p) in point.iter().enumerate() {
        lp.constraint(vertices.iter().map(|v| v[i].clone()).collect(), Rel::Eq, p.clone());
    }
    match lp.solve() {
        LpResult::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

pub fn hull_contains(vertices: &[Vec<Rational>], point: &[Rational]) -> bool {
    hull_weights(vertices, point).is_some()
}

/// A common point of two convex hulls, if any.
pub fn hull_intersection(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let (ka, kb) = (a.len(), b.len());
    let d = a.first().map_or(0, |v| v.len());
    let mut lp = Lp::new(ka + kb);
    let mut sum_a = vec![Rational::zero(); ka + kb];
    sum_a[..ka].iter_mut().for_each(|v| *v = Rational::one());
    lp.constraint(sum_a, Rel::Eq, Rational::one());
    let mut sum_b = vec![Rational::zero(); ka + kb];
    sum_b[ka..].iter_mut().for_each(|v| *v = Rational::one());
    lp.constraint(sum_b, Rel::Eq, Rational::one());
    for i in 0..d {
        let mut row: Vec<Rational> = a.iter().map(|v| v[i].clone()).collect();
        row.extend(b.iter().map(|w| -w[i].clone()));
        lp.constraint(row, Rel::Eq, Rational::zero());
    }
    match lp.solve() {
        LpResult::Optimal { x, .. } => {
            let mut p = vec![Rational::zero(); d];
            for (lam, v) in x[..ka].iter().zip(a) {
                for (pi, vi) in p.iter_mut().zip(v) {
                    *pi = &*pi + &(lam * vi);
                }
            }
            Some(p)
        }
        _ => None,
    }
}
