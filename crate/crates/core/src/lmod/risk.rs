use std::fmt;

use num_traits::Signed;
use rand::Rng;

use super::{content_lines, malformed, LmodError};
use crate::boolalg::{parse_event_lit, EventLit};
use crate::rational::{format_rational, parse_rational, to_f64, Rational};

pub const CASH_TOL: f64 = 1e-9;
pub const MONOTONE_TOL: f64 = 1e-12;
pub const CONVEX_TOL: f64 = 1e-9;
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Finitely many outcomes with positive weights summing to one, grouped into
/// the blocks that form the atoms of the coarse algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondProbSpace {
    weights: Vec<Rational>,
    /// 0-based outcome indices per block.
    blocks: Vec<Vec<usize>>,
}

impl CondProbSpace {
    pub fn new(weights: Vec<Rational>, blocks: Vec<Vec<usize>>) -> Result<Self, LmodError> {
        if weights.is_empty() {
            return Err(LmodError::BadWeights("no outcomes".into()));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_positive()) {
            return Err(LmodError::BadWeights(format!("weight of outcome {} is not positive", i + 1)));
        }
        let total: Rational = weights.iter().cloned().sum();
        if total != Rational::from_integer(1.into()) {
            return Err(LmodError::BadWeights(format!("weights sum to {}", format_rational(&total))));
        }
        let mut owner = vec![None; weights.len()];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(LmodError::BadWeights(format!("block {} is empty", b + 1)));
            }
            for &o in block {
                if o >= weights.len() {
                    return Err(LmodError::BadWeights(format!("outcome {} does not exist", o + 1)));
                }
                if owner[o].replace(b).is_some() {
                    return Err(LmodError::BadWeights(format!("outcome {} is in two blocks", o + 1)));
                }
            }
        }
        if let Some(o) = owner.iter().position(Option::is_none) {
            return Err(LmodError::BadWeights(format!("outcome {} is in no block", o + 1)));
        }
        crate::boolalg::Algebra::new(blocks.len())?;
        Ok(CondProbSpace { weights, blocks })
    }

    pub fn outcomes(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    fn block_of(&self, outcome: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&outcome)).expect("blocks cover the outcomes")
    }
}

/// `ρ(x)` per block: `(1/γ)·ln Σ_{ω∈B} p(ω|B)·exp(−γ·x(ω))`, evaluated with a
/// shifted log-sum-exp.
pub fn entropic_risk_values(space: &CondProbSpace, x: &[f64], gamma: f64) -> Result<Vec<f64>, LmodError> {
    if x.len() != space.outcomes() {
        return Err(LmodError::ShapeMismatch {
            expected_atoms: space.outcomes(),
            expected_d: 1,
            found_atoms: x.len(),
            found_d: 1,
        });
    }
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(LmodError::NonpositiveGamma);
    }
    let w: Vec<f64> = space.weights.iter().map(to_f64).collect();
    Ok(space
        .blocks
        .iter()
        .map(|b| {
            let mass: f64 = b.iter().map(|&o| w[o]).sum();
            let shift = b.iter().map(|&o| -gamma * x[o]).fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = b.iter().map(|&o| w[o] / mass * (-gamma * x[o] - shift).exp()).sum();
            (shift + s.ln()) / gamma
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub values: Vec<f64>,
    pub probes: usize,
    /// `max |ρ(0)|`.
    pub normalization_error: f64,
    /// `max |ρ(x+η) + η − ρ(x)|` over probes and blocks.
    pub cash_error: f64,
    /// `max (ρ(y) − ρ(x))⁺` over probes with `y ≥ x`.
    pub monotonicity_violation: f64,
    /// `max (ρ((x+y)/2) − (ρ(x)+ρ(y))/2)⁺`.
    pub convexity_violation: f64,
    /// Changing the payoff outside a block never changes that block's risk.
    pub local: bool,
}

impl RiskReport {
    pub fn passed(&self) -> bool {
        self.normalization_error <= NORMALIZATION_TOL
            && self.cash_error <= CASH_TOL
            && self.monotonicity_violation <= MONOTONE_TOL
            && self.convexity_violation <= CONVEX_TOL
            && self.local
    }
}

fn random_payoff<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-400..=400) as f64 / 40.0).collect()
}

/// Risk of `x` plus the axiom report over `probes` seeded random probes
/// around `x`.
pub fn entropic_risk<R: Rng>(
    space: &CondProbSpace,
    x: &[Rational],
    gamma: &Rational,
    rng: &mut R,
    probes: usize,
) -> Result<RiskReport, LmodError> {
    if !gamma.is_positive() {
        return Err(LmodError::NonpositiveGamma);
    }
    let g = to_f64(gamma);
    let xf: Vec<f64> = x.iter().map(to_f64).collect();
    let rho = |v: &[f64]| entropic_risk_values(space, v, g);
    let values = rho(&xf)?;
    let n = space.outcomes();
    let nb = space.blocks.len();
    let normalization_error = rho(&vec![0.0; n])?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (mut cash_error, mut monotonicity_violation, mut convexity_violation) = (0.0f64, 0.0f64, 0.0f64);
    let mut local = true;
    for k in 0..probes {
        let base = if k == 0 { xf.clone() } else { random_payoff(rng, n) };
        let rb = rho(&base)?;

        let eta: Vec<f64> = (0..nb).map(|_| rng.gen_range(-200..=200) as f64 / 40.0).collect();
        let shifted: Vec<f64> = (0..n).map(|o| base[o] + eta[space.block_of(o)]).collect();
        for (b, v) in rho(&shifted)?.iter().enumerate() {
            cash_error = cash_error.max((v + eta[b] - rb[b]).abs());
        }

        let up: Vec<f64> = base.iter().map(|v| v + rng.gen_range(0..=80) as f64 / 40.0).collect();
        for (v, r) in rho(&up)?.iter().zip(&rb) {
            monotonicity_violation = monotonicity_violation.max(v - r);
        }

        let other = random_payoff(rng, n);
        let ro = rho(&other)?;
        let mid: Vec<f64> = base.iter().zip(&other).map(|(a, b)| 0.5 * a + 0.5 * b).collect();
        for (b, v) in rho(&mid)?.iter().enumerate() {
            convexity_violation = convexity_violation.max(v - (0.5 * rb[b] + 0.5 * ro[b]));
        }

        let target = rng.gen_range(0..nb);
        let mixed: Vec<f64> = (0..n).map(|o| if space.block_of(o) == target { base[o] } else { other[o] }).collect();
        local &= rho(&mixed)?[target].to_bits() == rb[target].to_bits();
    }
    Ok(RiskReport {
        values,
        probes,
        normalization_error,
        cash_error,
        monotonicity_violation,
        convexity_violation,
        local,
    })
}

/// Risk file: `outcomes w1,...,wm`, `blocks {..}{..}`, `payoff x1,...,xm`,
/// with 1-based outcome numbers in the blocks line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiskFile {
    pub space: CondProbSpace,
    pub payoff: Vec<Rational>,
}

fn rational_list(text: &str, line: usize) -> Result<Vec<Rational>, LmodError> {
    text.split(',')
        .map(|v| parse_rational(v).ok_or_else(|| malformed(line, format!("bad rational '{}'", v.trim()))))
        .collect()
}

impl RiskFile {
    pub fn parse(text: &str) -> Result<Self, LmodError> {
        let (mut weights, mut blocks, mut payoff) = (None, None, None);
        for (ln, l) in content_lines(text) {
            if let Some(rest) = l.strip_prefix("outcomes") {
                weights = Some(rational_list(rest, ln)?);
            } else if let Some(rest) = l.strip_prefix("blocks") {
                let mut bs = Vec::new();
                for piece in rest.split_inclusive('}') {
                    let piece = piece.trim();
                    if piece.is_empty() {
                        continue;
                    }
                    match parse_event_lit(piece) {
                        Ok(EventLit::Atoms(a)) => bs.push(a.into_iter().map(|o| o.wrapping_sub(1)).collect()),
                        _ => return Err(malformed(ln, format!("bad block '{piece}'"))),
                    }
                }
                blocks = Some(bs);
            } else if let Some(rest) = l.strip_prefix("payoff") {
                payoff = Some(rational_list(rest, ln)?);
            } else {
                return Err(malformed(ln, "expected 'outcomes', 'blocks' or 'payoff'"));
            }
        }
        let weights = weights.ok_or_else(|| malformed(0, "missing 'outcomes' line"))?;
        let blocks = blocks.ok_or_else(|| malformed(0, "missing 'blocks' line"))?;
        let payoff = payoff.ok_or_else(|| malformed(0, "missing 'payoff' line"))?;
        let space = CondProbSpace::new(weights, blocks)?;
        if payoff.len() != space.outcomes() {
            return Err(LmodError::ShapeMismatch {
                expected_atoms: space.outcomes(),
                expected_d: 1,
                found_atoms: payoff.len(),
                found_d: 1,
            });
        }
        Ok(RiskFile { space, payoff })
    }
}

impl fmt::Display for RiskFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ws: Vec<String> = self.space.weights.iter().map(format_rational).collect();
        writeln!(f, "outcomes {}", ws.join(","))?;
        f.write_str("blocks ")?;
        for b in &self.space.blocks {
            let os: Vec<String> = b.iter().map(|o| (o + 1).to_string()).collect();
            write!(f, "{{{}}}", os.join(","))?;
        }
        writeln!(f)?;
        let ps: Vec<String> = self.payoff.iter().map(format_rational).collect();
        writeln!(f, "payoff {}", ps.join(","))
    }
}
