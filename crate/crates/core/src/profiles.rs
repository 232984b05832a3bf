//! Lambda-profiles of the maps `(b, c, d) -> lambda` and the incidence counts
//! they determine.
//!
//! `K(lambda)` counts triples with `b + cd = lambda`, `L(lambda)` those with
//! `b(c + d) = lambda`. The incidence counts are `I = sum K^2` and
//! `J = sum L^2`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::setgen::{same_field, FSet, TripleWeights, WeightSystem};

/// Maximum number of `(b, c, d)` triples a profile may visit.
pub const PROFILE_BUDGET: u128 = 1_000_000_000;

/// Maximum number of sextuples the enumeration oracle may visit.
pub const INCIDENCE_ORACLE_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapKind {
    /// `b + c d`
    #[serde(rename = "B_PLUS_CD")]
    BPlusCd,
    /// `b (c + d)`
    #[serde(rename = "B_TIMES_CplusD")]
    BTimesCPlusD,
    /// `(b + c) / (d + c)`
    #[serde(rename = "FRAC1")]
    Frac1,
    /// `b / (c + d)`
    #[serde(rename = "FRAC2")]
    Frac2,
}

impl MapKind {
    /// Image of a triple, `None` when a denominator vanishes.
    #[inline]
    pub fn apply(self, f: &PrimeField, b: u32, c: u32, d: u32) -> Option<u32> {
        match self {
            MapKind::BPlusCd => Some(f.add(b, f.mul(c, d))),
            MapKind::BTimesCPlusD => Some(f.mul(b, f.add(c, d))),
            MapKind::Frac1 => f
                .inv(f.add(d, c))
                .ok()
                .map(|den| f.mul(f.add(b, c), den)),
            MapKind::Frac2 => f.inv(f.add(c, d)).ok().map(|den| f.mul(b, den)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LambdaProfile {
    field: Arc<PrimeField>,
    counts: Vec<u64>,
    map_kind: MapKind,
    skipped: u64,
    bcd_exceeds_p2: bool,
}

impl LambdaProfile {
    pub fn field(&self) -> &Arc<PrimeField> {
        &self.field
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn map_kind(&self) -> MapKind {
        self.map_kind
    }

    /// Triples whose image was undefined (fraction maps only).
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    /// Set when `BCD > p^2`, outside the range where the incidence lemmas apply.
    pub fn bcd_exceeds_p2(&self) -> bool {
        self.bcd_exceeds_p2
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn sum_of_squares(&self) -> u64 {
        self.counts.iter().map(|&k| k * k).sum()
    }
}

#[derive(Debug, Clone)]
pub struct WeightedProfile {
    pub values: Vec<Complex64>,
    pub map_kind: MapKind,
    pub skipped: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IncidenceKind {
    I,
    J,
}

impl IncidenceKind {
    pub fn map_kind(self) -> MapKind {
        match self {
            IncidenceKind::I => MapKind::BPlusCd,
            IncidenceKind::J => MapKind::BTimesCPlusD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IncidenceCount {
    pub value: u64,
    pub kind: IncidenceKind,
}

fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        Err(Error::BudgetExceeded { needed, budget })
    } else {
        Ok(())
    }
}

fn triple_count(b: &FSet, c: &FSet, d: &FSet) -> u128 {
    b.len() as u128 * c.len() as u128 * d.len() as u128
}

fn prepare(b: &FSet, c: &FSet, d: &FSet) -> Result<(Arc<PrimeField>, bool)> {
    same_field(&[b, c, d])?;
    let n = triple_count(b, c, d);
    check_budget(n, PROFILE_BUDGET)?;
    let p = b.field().modulus() as u128;
    Ok((b.field().clone(), n > p * p))
}

/// Histogram of a binary operation over `C x D`, as `(value, multiplicity)` pairs.
fn pair_distribution(f: &PrimeField, c: &FSet, d: &FSet, op: impl Fn(u32, u32) -> u32) -> Vec<(u32, u64)> {
    let mut hist = vec![0u64; f.modulus() as usize];
    for &x in c.elements() {
        for &y in d.elements() {
            hist[op(x, y) as usize] += 1;
        }
    }
    hist.iter()
        .enumerate()
        .filter(|(_, &m)| m > 0)
        .map(|(v, &m)| (v as u32, m))
        .collect()
}

/// `K(lambda) = #{(b, c, d) : b + cd = lambda}`.
///
/// Builds the distribution of `cd` once, then shifts it by each `b`, so the
/// cost is `O(CD + B * min(CD, p))`.
pub fn k_profile(b: &FSet, c: &FSet, d: &FSet) -> Result<LambdaProfile> {
    let (field, warn) = prepare(b, c, d)?;
    let f = &*field;
    let support = pair_distribution(f, c, d, |x, y| f.mul(x, y));
    let mut counts = vec![0u64; f.modulus() as usize];
    for &bb in b.elements() {
        for &(v, m) in &support {
            counts[f.add(bb, v) as usize] += m;
        }
    }
    Ok(LambdaProfile {
        field,
        counts,
        map_kind: MapKind::BPlusCd,
        skipped: 0,
        bcd_exceeds_p2: warn,
    })
}

/// `L(lambda) = #{(b, c, d) : b(c + d) = lambda}`.
pub fn l_profile(b: &FSet, c: &FSet, d: &FSet) -> Result<LambdaProfile> {
    let (field, warn) = prepare(b, c, d)?;
    let f = &*field;
    let support = pair_distribution(f, c, d, |x, y| f.add(x, y));
    let mut counts = vec![0u64; f.modulus() as usize];
    for &bb in b.elements() {
        for &(v, m) in &support {
            counts[f.mul(bb, v) as usize] += m;
        }
    }
    Ok(LambdaProfile {
        field,
        counts,
        map_kind: MapKind::BTimesCPlusD,
        skipped: 0,
        bcd_exceeds_p2: warn,
    })
}

/// Profile of any map by a direct triple loop; undefined triples are skipped
/// and counted.
pub fn map_profile(b: &FSet, c: &FSet, d: &FSet, map_kind: MapKind) -> Result<LambdaProfile> {
    match map_kind {
        MapKind::BPlusCd => return k_profile(b, c, d),
        MapKind::BTimesCPlusD => return l_profile(b, c, d),
        MapKind::Frac1 | MapKind::Frac2 => {}
    }
    let (field, warn) = prepare(b, c, d)?;
    let f = &*field;
    let mut counts = vec![0u64; f.modulus() as usize];
    let mut skipped = 0;
    for &bb in b.elements() {
        for &cc in c.elements() {
            for &dd in d.elements() {
                match map_kind.apply(f, bb, cc, dd) {
                    Some(l) => counts[l as usize] += 1,
                    None => skipped += 1,
                }
            }
        }
    }
    Ok(LambdaProfile {
        field,
        counts,
        map_kind,
        skipped,
        bcd_exceeds_p2: warn,
    })
}

/// `W(lambda) = sum of beta_{b,c,d} over triples mapping to lambda`.
pub fn weighted_profile(
    b: &FSet,
    c: &FSet,
    d: &FSet,
    weights: &WeightSystem,
    map_kind: MapKind,
) -> Result<WeightedProfile> {
    let (field, _) = prepare(b, c, d)?;
    let f = &*field;
    let p = f.modulus() as usize;
    match (weights.triple(), map_kind) {
        (TripleWeights::ConstantOne, _) => {
            let prof = map_profile(b, c, d, map_kind)?;
            Ok(WeightedProfile {
                values: prof.counts.iter().map(|&k| Complex64::new(k as f64, 0.0)).collect(),
                map_kind,
                skipped: prof.skipped,
            })
        }
        (
            TripleWeights::Factored { beta, gamma, delta },
            MapKind::BPlusCd | MapKind::BTimesCPlusD,
        ) => {
            // Distribution of gamma_c delta_d over the values of the (c, d) operation.
            let mut pair = vec![Complex64::new(0.0, 0.0); p];
            let mut hit = vec![false; p];
            for (j, &cc) in c.elements().iter().enumerate() {
                for (l, &dd) in d.elements().iter().enumerate() {
                    let v = if map_kind == MapKind::BPlusCd {
                        f.mul(cc, dd)
                    } else {
                        f.add(cc, dd)
                    };
                    pair[v as usize] += gamma[j] * delta[l];
                    hit[v as usize] = true;
                }
            }
            let support: Vec<(u32, Complex64)> = (0..p)
                .filter(|&v| hit[v])
                .map(|v| (v as u32, pair[v]))
                .collect();
            let mut values = vec![Complex64::new(0.0, 0.0); p];
            for (i, &bb) in b.elements().iter().enumerate() {
                for &(v, w) in &support {
                    let lambda = if map_kind == MapKind::BPlusCd {
                        f.add(bb, v)
                    } else {
                        f.mul(bb, v)
                    };
                    values[lambda as usize] += beta[i] * w;
                }
            }
            Ok(WeightedProfile { values, map_kind, skipped: 0 })
        }
        _ => {
            let mut values = vec![Complex64::new(0.0, 0.0); p];
            let mut skipped = 0;
            for (i, &bb) in b.elements().iter().enumerate() {
                for (j, &cc) in c.elements().iter().enumerate() {
                    for (l, &dd) in d.elements().iter().enumerate() {
                        match map_kind.apply(f, bb, cc, dd) {
                            Some(lambda) => values[lambda as usize] += weights.beta(i, j, l),
                            None => skipped += 1,
                        }
                    }
                }
            }
            Ok(WeightedProfile { values, map_kind, skipped })
        }
    }
}

/// `I(B, C, D) = sum_lambda K(lambda)^2`.
pub fn incidence_i(b: &FSet, c: &FSet, d: &FSet) -> Result<IncidenceCount> {
    Ok(IncidenceCount {
        value: k_profile(b, c, d)?.sum_of_squares(),
        kind: IncidenceKind::I,
    })
}

/// `J(B, C, D) = sum_lambda L(lambda)^2`.
pub fn incidence_j(b: &FSet, c: &FSet, d: &FSet) -> Result<IncidenceCount> {
    Ok(IncidenceCount {
        value: l_profile(b, c, d)?.sum_of_squares(),
        kind: IncidenceKind::J,
    })
}

/// Counts incidences by enumerating all sextuples `(b1, c1, d1, b2, c2, d2)`.
pub fn incidence_oracle(b: &FSet, c: &FSet, d: &FSet, kind: IncidenceKind) -> Result<IncidenceCount> {
    same_field(&[b, c, d])?;
    let n = triple_count(b, c, d);
    check_budget(n * n, INCIDENCE_ORACLE_BUDGET)?;
    let f = &**b.field();
    let lhs = |x: u32, y: u32, z: u32| match kind {
        IncidenceKind::I => f.add(x, f.mul(y, z)),
        IncidenceKind::J => f.mul(x, f.add(y, z)),
    };
    let mut value = 0u64;
    for &b1 in b.elements() {
        for &c1 in c.elements() {
            for &d1 in d.elements() {
                let left = lhs(b1, c1, d1);
                for &b2 in b.elements() {
                    for &c2 in c.elements() {
                        for &d2 in d.elements() {
                            if lhs(b2, c2, d2) == left {
                                value += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(IncidenceCount { value, kind })
}
