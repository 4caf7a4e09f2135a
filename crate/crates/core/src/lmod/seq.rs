use super::{l0_norm, LmodError, ModuleElement};
use crate::boolalg::Algebra;
use crate::lzero::{IndexedNat, RandVar};

/// `x_0, ..., x_K` followed by a constant tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableSeq {
    prefix: Vec<ModuleElement>,
    tail: ModuleElement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CauchyReport {
    /// Least index per atom from which every term equals the tail.
    pub settles_at: IndexedNat,
    /// Least index per atom from which all pairs of terms are within `ε`.
    pub within_eps_from: IndexedNat,
    pub cauchy: bool,
    pub limit: ModuleElement,
}

impl StableSeq {
    pub fn new(prefix: Vec<ModuleElement>, tail: ModuleElement) -> Result<Self, LmodError> {
        for x in &prefix {
            if x.atoms() != tail.atoms() || x.dim() != tail.dim() {
                return Err(LmodError::ShapeMismatch {
                    expected_atoms: tail.atoms(),
                    expected_d: tail.dim(),
                    found_atoms: x.atoms(),
                    found_d: x.dim(),
                });
            }
        }
        Ok(StableSeq { prefix, tail })
    }

    pub fn prefix(&self) -> &[ModuleElement] {
        &self.prefix
    }

    pub fn tail(&self) -> &ModuleElement {
        &self.tail
    }

    fn term(&self, k: u64) -> &ModuleElement {
        usize::try_from(k).ok().and_then(|k| self.prefix.get(k)).unwrap_or(&self.tail)
    }

    /// `x_𝔫 = Σ_k 1_{𝔫=k} x_k`.
    pub fn eval(&self, idx: &IndexedNat) -> Result<ModuleElement, LmodError> {
        if idx.len() != self.tail.atoms() {
            return Err(LmodError::ShapeMismatch {
                expected_atoms: self.tail.atoms(),
                expected_d: self.tail.dim(),
                found_atoms: idx.len(),
                found_d: self.tail.dim(),
            });
        }
        let coords = idx.values().iter().enumerate().map(|(w, &k)| self.term(k).at(w).to_vec()).collect();
        ModuleElement::new(coords)
    }

    /// Exact Cauchy analysis: terms past the prefix all equal the tail, so
    /// the sequence converges to it and is Cauchy for every `ε > 0`.
    pub fn cauchy_report(&self, eps: &RandVar) -> Result<CauchyReport, LmodError> {
        let n = self.tail.atoms();
        if eps.len() != n {
            return Err(LmodError::ShapeMismatch {
                expected_atoms: n,
                expected_d: self.tail.dim(),
                found_atoms: eps.len(),
                found_d: self.tail.dim(),
            });
        }
        if let Some(w) = eps.values().iter().position(|e| *e <= num_traits::Zero::zero()) {
            return Err(LmodError::NonpositiveRadius { atom: w + 1 });
        }
        let k = self.prefix.len();
        let mut settles = Vec::with_capacity(n);
        let mut within = Vec::with_capacity(n);
        for w in 0..n {
            let mut s = k;
            while s > 0 && self.prefix[s - 1].at(w) == self.tail.at(w) {
                s -= 1;
            }
            settles.push(s as u64);
            // every pair of terms from index m on is within ε_ω
            let dist = |a: &ModuleElement, b: &ModuleElement| {
                let diff = ModuleElement::new(vec![a.at(w).iter().zip(b.at(w)).map(|(x, y)| x - y).collect()])
                    .expect("one atom");
                l0_norm(&diff).values()[0].clone()
            };
            let mut m = s;
            while m > 0 {
                let cand = m - 1;
                let ok = (cand..=k)
                    .all(|i| (cand..=k).all(|j| dist(self.term(i as u64), self.term(j as u64)) <= eps.values()[w]));
                if !ok {
                    break;
                }
                m = cand;
            }
            within.push(m as u64);
        }
        Algebra::new(n)?;
        Ok(CauchyReport {
            settles_at: IndexedNat::new(settles)?,
            within_eps_from: IndexedNat::new(within)?,
            cauchy: true,
            limit: self.tail.clone(),
        })
    }
}
