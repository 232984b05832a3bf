//! Reproducible generation of the sets `A, B, C, D` and their weights.
//!
//! All randomness comes from [`SplitMix64`], so a `(p, spec)` pair names one
//! set on every platform.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeField;

/// Cap on the number of cells of a general tensor weight.
pub const MAX_TENSOR_CELLS: u64 = 1 << 24;

/// Resolution of random unit weights: angles are `2 pi j / 2^16`.
const ANGLE_STEPS: u64 = 1 << 16;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn unit(&mut self) -> Complex64 {
        let j = self.next_u64() % ANGLE_STEPS;
        Complex64::from_polar(1.0, TAU * j as f64 / ANGLE_STEPS as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    /// `{start, start+1, ..., start+len-1}`, which must avoid zero.
    Interval { start: u64, len: u64 },
    Random { size: usize, seed: u64 },
    /// The subgroup of index `index`, i.e. of order `(p-1)/index`.
    Subgroup { index: u64 },
    /// `start * ratio^i mod p` for `i < len`, de-duplicated.
    Geometric { start: u64, ratio: u64, len: u64 },
    Explicit { elements: Vec<u64> },
}

/// A sorted set of nonzero field elements together with the spec that built it.
#[derive(Debug, Clone)]
pub struct FSet {
    field: Arc<PrimeField>,
    elements: Vec<u32>,
    spec: SetSpec,
}

impl FSet {
    pub fn generate(field: Arc<PrimeField>, spec: SetSpec) -> Result<Self> {
        let p = field.modulus() as u64;
        let mut elements: Vec<u32> = match &spec {
            SetSpec::Interval { start, len } => {
                if *len as u128 > (p - 1) as u128 {
                    return Err(Error::SizeTooLarge { size: *len as usize, max: p - 1 });
                }
                if *start == 0 || start + len > p {
                    return Err(Error::IntervalOutOfRange { start: *start, len: *len, p });
                }
                (*start..start + len).map(|x| x as u32).collect()
            }
            SetSpec::Random { size, seed } => {
                if *size as u64 > p - 1 {
                    return Err(Error::SizeTooLarge { size: *size, max: p - 1 });
                }
                let mut rng = SplitMix64::new(*seed);
                let mut present = vec![false; p as usize];
                let mut out = Vec::with_capacity(*size);
                while out.len() < *size {
                    let x = 1 + rng.next_u64() % (p - 1);
                    if !present[x as usize] {
                        present[x as usize] = true;
                        out.push(x as u32);
                    }
                }
                out
            }
            SetSpec::Subgroup { index } => {
                let order = p - 1;
                if *index == 0 || !order.is_multiple_of(*index) {
                    return Err(Error::BadSubgroupIndex { index: *index, order });
                }
                let t = *index as u32;
                (1..p as u32)
                    .filter(|&x| field.dlog_table()[x as usize].is_multiple_of(t))
                    .collect()
            }
            SetSpec::Geometric { start, ratio, len } => {
                let (s, r) = (start % p, ratio % p);
                if *len > 0 && (s == 0 || (r == 0 && *len > 1)) {
                    return Err(Error::ZeroInProgression { start: *start, ratio: *ratio, p });
                }
                let mut out = Vec::new();
                let mut x = s;
                for _ in 0..*len {
                    out.push(x as u32);
                    x = x * r % p;
                }
                out
            }
            SetSpec::Explicit { elements } => {
                if elements.iter().any(|&x| x % p == 0) {
                    return Err(Error::ZeroInExplicitSet);
                }
                elements.iter().map(|&x| (x % p) as u32).collect()
            }
        };
        elements.sort_unstable();
        elements.dedup();
        Ok(Self { field, elements, spec })
    }

    pub fn field(&self) -> &Arc<PrimeField> {
        &self.field
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn spec(&self) -> &SetSpec {
        &self.spec
    }

    pub fn contains(&self, x: u32) -> bool {
        self.elements.binary_search(&x).is_ok()
    }
}

/// Checks that all sets live over the same prime.
pub(crate) fn same_field(sets: &[&FSet]) -> Result<()> {
    let p0 = sets[0].field.modulus();
    for s in &sets[1..] {
        if s.field.modulus() != p0 {
            return Err(Error::FieldMismatch(p0 as u64, s.field.modulus() as u64));
        }
    }
    Ok(())
}

/// The four sets of a sum instance.
#[derive(Debug, Clone)]
pub struct SetSystem {
    pub a: FSet,
    pub b: FSet,
    pub c: FSet,
    pub d: FSet,
}

impl SetSystem {
    pub fn new(a: FSet, b: FSet, c: FSet, d: FSet) -> Result<Self> {
        same_field(&[&a, &b, &c, &d])?;
        Ok(Self { a, b, c, d })
    }

    pub fn field(&self) -> &Arc<PrimeField> {
        self.a.field()
    }

    /// `(A, B, C, D)` cardinalities.
    pub fn dims(&self) -> [usize; 4] {
        [self.a.len(), self.b.len(), self.c.len(), self.d.len()]
    }

    /// `max{B, C, D}`.
    pub fn max_bcd(&self) -> usize {
        self.b.len().max(self.c.len()).max(self.d.len())
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        for (name, s) in [("A", &self.a), ("B", &self.b), ("C", &self.c), ("D", &self.d)] {
            if s.is_empty() {
                return Err(Error::EmptySet(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    ConstantOne,
    RandomUnitFactored { seed: u64 },
    RandomUnitTensor { seed: u64 },
}

impl WeightSpec {
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            Self::ConstantOne => Self::ConstantOne,
            Self::RandomUnitFactored { .. } => Self::RandomUnitFactored { seed },
            Self::RandomUnitTensor { .. } => Self::RandomUnitTensor { seed },
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::ConstantOne => "constant",
            Self::RandomUnitFactored { .. } => "factored",
            Self::RandomUnitTensor { .. } => "tensor",
        }
    }
}

/// The weight `beta` on `B x C x D`.
#[derive(Debug, Clone)]
pub enum TripleWeights {
    ConstantOne,
    /// `beta_{b,c,d} = beta_b * gamma_c * delta_d`.
    Factored {
        beta: Vec<Complex64>,
        gamma: Vec<Complex64>,
        delta: Vec<Complex64>,
    },
    /// Row-major over `(b, c, d)` indices.
    Tensor {
        dims: [usize; 3],
        values: Vec<Complex64>,
    },
}

#[derive(Debug, Clone)]
pub struct WeightSystem {
    spec: WeightSpec,
    alpha: Vec<Complex64>,
    triple: TripleWeights,
}

impl WeightSystem {
    pub fn generate(spec: WeightSpec, sets: &SetSystem) -> Result<Self> {
        let [a, b, c, d] = sets.dims();
        let one = Complex64::new(1.0, 0.0);
        let (alpha, triple) = match spec {
            WeightSpec::ConstantOne => (vec![one; a], TripleWeights::ConstantOne),
            WeightSpec::RandomUnitFactored { seed } => {
                let mut rng = SplitMix64::new(seed);
                let alpha = (0..a).map(|_| rng.unit()).collect();
                let beta = (0..b).map(|_| rng.unit()).collect();
                let gamma = (0..c).map(|_| rng.unit()).collect();
                let delta = (0..d).map(|_| rng.unit()).collect();
                (alpha, TripleWeights::Factored { beta, gamma, delta })
            }
            WeightSpec::RandomUnitTensor { seed } => {
                let cells = b as u64 * c as u64 * d as u64;
                if cells > MAX_TENSOR_CELLS {
                    return Err(Error::TensorTooLarge { cells });
                }
                let mut rng = SplitMix64::new(seed);
                let alpha = (0..a).map(|_| rng.unit()).collect();
                let values = (0..cells).map(|_| rng.unit()).collect();
                (alpha, TripleWeights::Tensor { dims: [b, c, d], values })
            }
        };
        Ok(Self { spec, alpha, triple })
    }

    /// Builds a weight system from explicit components.
    pub fn from_parts(alpha: Vec<Complex64>, triple: TripleWeights) -> Self {
        Self {
            spec: WeightSpec::ConstantOne,
            alpha,
            triple,
        }
    }

    pub fn spec(&self) -> WeightSpec {
        self.spec
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn triple(&self) -> &TripleWeights {
        &self.triple
    }

    pub fn is_multilinear(&self) -> bool {
        !matches!(self.triple, TripleWeights::Tensor { .. })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.triple, TripleWeights::ConstantOne)
            && self.alpha.iter().all(|&z| z == Complex64::new(1.0, 0.0))
    }

    /// `beta_{b,c,d}` by position in the sorted sets.
    #[inline]
    pub fn beta(&self, i: usize, j: usize, l: usize) -> Complex64 {
        match &self.triple {
            TripleWeights::ConstantOne => Complex64::new(1.0, 0.0),
            TripleWeights::Factored { beta, gamma, delta } => beta[i] * gamma[j] * delta[l],
            TripleWeights::Tensor { dims, values } => values[(i * dims[1] + j) * dims[2] + l],
        }
    }

    /// Checks the component lengths against the set cardinalities.
    pub fn check_shape(&self, sets: &SetSystem) -> Result<()> {
        let [a, b, c, d] = sets.dims();
        let ok = self.alpha.len() == a
            && match &self.triple {
                TripleWeights::ConstantOne => true,
                TripleWeights::Factored { beta, gamma, delta } => {
                    beta.len() == b && gamma.len() == c && delta.len() == d
                }
                TripleWeights::Tensor { dims, values } => {
                    *dims == [b, c, d] && values.len() == b * c * d
                }
            };
        if ok {
            Ok(())
        } else {
            Err(Error::WeightShapeMismatch)
        }
    }

    /// `(max |alpha_a|, max |beta_{b,c,d}|)`.
    pub fn max_moduli(&self) -> (f64, f64) {
        let amax = self.alpha.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let bmax = match &self.triple {
            TripleWeights::ConstantOne => 1.0,
            TripleWeights::Factored { beta, gamma, delta } => {
                let m = |v: &[Complex64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
                m(beta) * m(gamma) * m(delta)
            }
            TripleWeights::Tensor { values, .. } => {
                values.iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
        };
        (amax, bmax)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u64) -> Arc<PrimeField> {
        Arc::new(PrimeField::new(p).unwrap())
    }

    fn gen(p: u64, spec: SetSpec) -> Result<Vec<u32>> {
        FSet::generate(field(p), spec).map(|s| s.elements().to_vec())
    }

    #[test]
    fn splitmix_reference_stream() {
        // Reference outputs of splitmix64 seeded with 0.
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(rng.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn set_examples() {
        assert_eq!(gen(7, SetSpec::Subgroup { index: 2 }).unwrap(), vec![1, 2, 4]);
        assert_eq!(gen(7, SetSpec::Interval { start: 1, len: 3 }).unwrap(), vec![1, 2, 3]);
        assert_eq!(
            gen(7, SetSpec::Explicit { elements: vec![0, 1] }),
            Err(Error::ZeroInExplicitSet)
        );
    }

    #[test]
    fn set_errors() {
        assert_eq!(
            gen(7, SetSpec::Random { size: 7, seed: 0 }),
            Err(Error::SizeTooLarge { size: 7, max: 6 })
        );
        assert_eq!(
            gen(7, SetSpec::Subgroup { index: 4 }),
            Err(Error::BadSubgroupIndex { index: 4, order: 6 })
        );
        assert!(matches!(
            gen(7, SetSpec::Interval { start: 5, len: 3 }),
            Err(Error::IntervalOutOfRange { .. })
        ));
        assert!(matches!(
            gen(7, SetSpec::Geometric { start: 7, ratio: 2, len: 3 }),
            Err(Error::ZeroInProgression { .. })
        ));
    }

    #[test]
    fn geometric_reports_realized_size() {
        // 2 has order 3 mod 7, so ten terms collapse to {1, 2, 4}.
        assert_eq!(
            gen(7, SetSpec::Geometric { start: 1, ratio: 2, len: 10 }).unwrap(),
            vec![1, 2, 4]
        );
    }

    #[test]
    fn random_sets_are_reproducible_and_zero_free() {
        for seed in 0..20 {
            let spec = SetSpec::Random { size: 32, seed };
            let x = gen(1009, spec.clone()).unwrap();
            let y = gen(1009, spec).unwrap();
            assert_eq!(x, y);
            assert_eq!(x.len(), 32);
            assert!(x.windows(2).all(|w| w[0] < w[1]));
            assert!(x[0] >= 1 && *x.last().unwrap() <= 1008);
        }
        // A full draw terminates and yields all of F_p^*.
        assert_eq!(gen(11, SetSpec::Random { size: 10, seed: 3 }).unwrap(), (1..11).collect::<Vec<_>>());
    }

    #[test]
    fn subgroups_are_closed() {
        let f = field(1009);
        for index in [1u64, 2, 3, 4, 6, 7, 8, 9, 12, 14, 16, 18] {
            let s = FSet::generate(f.clone(), SetSpec::Subgroup { index }).unwrap();
            assert_eq!(s.len() as u64, 1008 / index);
            for &x in s.elements() {
                for &y in s.elements() {
                    assert!(s.contains(f.mul(x, y)));
                }
            }
        }
    }

    fn system(p: u64, sizes: [usize; 4]) -> SetSystem {
        let f = field(p);
        let mk = |size, seed| FSet::generate(f.clone(), SetSpec::Random { size, seed }).unwrap();
        SetSystem::new(mk(sizes[0], 0), mk(sizes[1], 1), mk(sizes[2], 2), mk(sizes[3], 3)).unwrap()
    }

    #[test]
    fn weight_examples() {
        let sets = system(101, [4, 5, 6, 7]);
        let w = WeightSystem::generate(WeightSpec::ConstantOne, &sets).unwrap();
        assert!(w.is_constant());
        assert_eq!(w.beta(3, 4, 5), Complex64::new(1.0, 0.0));

        let w = WeightSystem::generate(WeightSpec::RandomUnitFactored { seed: 1 }, &sets).unwrap();
        w.check_shape(&sets).unwrap();
        for i in 0..5 {
            for j in 0..6 {
                for l in 0..7 {
                    assert!((w.beta(i, j, l).norm() - 1.0).abs() < 1e-14);
                }
            }
        }
        let (am, bm) = w.max_moduli();
        assert!(am <= 1.0 + 1e-15 && bm <= 1.0 + 1e-15);

        let big = system(1009, [1, 300, 300, 300]);
        assert_eq!(
            WeightSystem::generate(WeightSpec::RandomUnitTensor { seed: 0 }, &big).unwrap_err(),
            Error::TensorTooLarge { cells: 27_000_000 }
        );
    }

    #[test]
    fn tensor_weights_are_unit() {
        let sets = system(101, [3, 4, 5, 6]);
        let w = WeightSystem::generate(WeightSpec::RandomUnitTensor { seed: 9 }, &sets).unwrap();
        assert!(!w.is_multilinear());
        w.check_shape(&sets).unwrap();
        let (am, bm) = w.max_moduli();
        assert!(am <= 1.0 + 1e-15 && bm <= 1.0 + 1e-15);
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let a = FSet::generate(field(7), SetSpec::Interval { start: 1, len: 2 }).unwrap();
        let b = FSet::generate(field(11), SetSpec::Interval { start: 1, len: 2 }).unwrap();
        assert_eq!(
            SetSystem::new(a.clone(), b, a.clone(), a).unwrap_err(),
            Error::FieldMismatch(7, 11)
        );
    }
}
