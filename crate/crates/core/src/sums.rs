//! Exact evaluation of the multilinear character sums and their relatives.
//!
//! Every sum has two routes: a direct loop over `A x B x C x D`
//! ([`sum_oracle`]) and a collapsed route that groups the triples by the
//! value `lambda` they produce and pairs the weighted profile `W(lambda)`
//! with the translate transform of `A` ([`sum_collapsed`]).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::accum::{CompensatedSum, ComplexSum};
use crate::character::{eval_add_char, MultChar};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::profiles::{weighted_profile, MapKind, WeightedProfile, PROFILE_BUDGET};
use crate::setgen::{FSet, SetSystem, TripleWeights, WeightSystem};

/// Maximum number of `(a, b, c, d)` terms the direct loop may visit.
pub const TERM_BUDGET: u128 = 1_000_000_000;

/// Largest supported moment order.
pub const MAX_NU: u32 = 8;

/// Relative tolerance between the two evaluation routes.
pub const AGREEMENT_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    /// `chi(a + b + cd)`
    S,
    /// `chi(a + b(c + d))`
    T,
    /// `chi(a + (b + c)/(d + c))`
    #[serde(rename = "FRAC1")]
    Frac1,
    /// `chi(a + b/(c + d))`
    #[serde(rename = "FRAC2")]
    Frac2,
    /// `e_p(a(b + cd))`
    U,
    /// `e_p(ab(c + d))`
    V,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::S,
        Variant::T,
        Variant::Frac1,
        Variant::Frac2,
        Variant::U,
        Variant::V,
    ];

    pub fn map_kind(self) -> MapKind {
        match self {
            Variant::S | Variant::U => MapKind::BPlusCd,
            Variant::T | Variant::V => MapKind::BTimesCPlusD,
            Variant::Frac1 => MapKind::Frac1,
            Variant::Frac2 => MapKind::Frac2,
        }
    }

    /// True for the multiplicative-character variants.
    pub fn uses_character(self) -> bool {
        !matches!(self, Variant::U | Variant::V)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::S => "S",
            Variant::T => "T",
            Variant::Frac1 => "FRAC1",
            Variant::Frac2 => "FRAC2",
            Variant::U => "U",
            Variant::V => "V",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::BadParameters(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Oracle,
    Collapsed,
    Permuted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumValue {
    pub value: Complex64,
    pub method: Method,
    /// Number of `(a, b, c, d)` terms that enter the sum.
    pub term_count: u64,
}

impl SumValue {
    pub fn abs(&self) -> f64 {
        self.value.norm()
    }
}

#[derive(Debug, Clone)]
pub struct SumInstance {
    sets: SetSystem,
    weights: WeightSystem,
    chi: Option<MultChar>,
    variant: Variant,
}

impl SumInstance {
    pub fn new(sets: SetSystem, weights: WeightSystem, chi: Option<MultChar>, variant: Variant) -> Result<Self> {
        sets.require_nonempty()?;
        weights.check_shape(&sets)?;
        if variant.uses_character() {
            let chi = chi.as_ref().ok_or(Error::TrivialCharacter)?;
            chi.require_nontrivial()?;
            let (p, q) = (sets.field().modulus(), chi.field().modulus());
            if p != q {
                return Err(Error::FieldMismatch(p as u64, q as u64));
            }
        }
        Ok(Self { sets, weights, chi, variant })
    }

    pub fn sets(&self) -> &SetSystem {
        &self.sets
    }

    pub fn weights(&self) -> &WeightSystem {
        &self.weights
    }

    pub fn chi(&self) -> Option<&MultChar> {
        self.chi.as_ref()
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn field(&self) -> &Arc<PrimeField> {
        self.sets.field()
    }

    pub fn with_variant(&self, variant: Variant) -> Result<Self> {
        Self::new(self.sets.clone(), self.weights.clone(), self.chi.clone(), variant)
    }

    fn character(&self) -> Result<&MultChar> {
        self.chi.as_ref().ok_or(Error::TrivialCharacter)
    }

    /// `f(lambda)` for this variant: the character translate transform, or
    /// the additive transform for `U` and `V`.
    pub fn transform(&self) -> Result<Vec<Complex64>> {
        if self.variant.uses_character() {
            translate_vector(&self.sets.a, self.weights.alpha(), self.character()?)
        } else {
            Ok(additive_transform(&self.sets.a, self.weights.alpha()))
        }
    }

    pub fn weighted_profile(&self) -> Result<WeightedProfile> {
        weighted_profile(&self.sets.b, &self.sets.c, &self.sets.d, &self.weights, self.variant.map_kind())
    }
}

fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        Err(Error::BudgetExceeded { needed, budget })
    } else {
        Ok(())
    }
}

/// Direct quadruple loop over `A x B x C x D`.
pub fn sum_oracle(inst: &SumInstance) -> Result<SumValue> {
    let [na, nb, nc, nd] = inst.sets.dims();
    check_budget(na as u128 * nb as u128 * nc as u128 * nd as u128, TERM_BUDGET)?;
    let f = &**inst.field();
    let p = f.modulus() as u64;
    let alpha = inst.weights.alpha();
    let chi = if inst.variant.uses_character() {
        Some(inst.character()?)
    } else {
        None
    };
    let a_set = inst.sets.a.elements();
    let mut acc = ComplexSum::new();
    let mut terms = 0u64;
    for (i, &b) in inst.sets.b.elements().iter().enumerate() {
        for (j, &c) in inst.sets.c.elements().iter().enumerate() {
            for (l, &d) in inst.sets.d.elements().iter().enumerate() {
                let (b, c, d) = (b as u64, c as u64, d as u64);
                let beta = inst.weights.beta(i, j, l);
                for (ai, &a) in a_set.iter().enumerate() {
                    let a = a as u64;
                    let value = match inst.variant {
                        Variant::S => chi.unwrap().eval(((a + b + c * d) % p) as u32),
                        Variant::T => chi.unwrap().eval(((a + b * ((c + d) % p)) % p) as u32),
                        Variant::Frac1 => {
                            let Ok(den) = f.inv(((d + c) % p) as u32) else { continue };
                            let frac = (b + c) % p * den as u64 % p;
                            chi.unwrap().eval(((a + frac) % p) as u32)
                        }
                        Variant::Frac2 => {
                            let Ok(den) = f.inv(((c + d) % p) as u32) else { continue };
                            chi.unwrap().eval(((a + b * den as u64 % p) % p) as u32)
                        }
                        Variant::U => eval_add_char(f, (a * ((b + c * d) % p) % p) as u32),
                        Variant::V => eval_add_char(f, (a * b % p * ((c + d) % p) % p) as u32),
                    };
                    acc.add(alpha[ai] * beta * value);
                    terms += 1;
                }
            }
        }
    }
    Ok(SumValue {
        value: acc.value(),
        method: Method::Oracle,
        term_count: terms,
    })
}

/// Collapsed evaluation `sum_lambda W(lambda) f(lambda)`.
pub fn sum_collapsed(inst: &SumInstance) -> Result<SumValue> {
    let [na, nb, nc, nd] = inst.sets.dims();
    check_budget(nb as u128 * nc as u128 * nd as u128, PROFILE_BUDGET)?;
    check_budget(inst.field().modulus() as u128 * na as u128, TERM_BUDGET)?;
    let w = inst.weighted_profile()?;
    let f = inst.transform()?;
    let acc: ComplexSum = w.values.iter().zip(&f).map(|(w, f)| w * f).sum();
    let triples = (nb * nc * nd) as u64 - w.skipped;
    Ok(SumValue {
        value: acc.value(),
        method: Method::Collapsed,
        term_count: triples * na as u64,
    })
}

/// Absolute tolerance allowed between the two routes for a given oracle value.
///
/// Relative `1e-9`, switching to `1e-9 * term_count` absolute when the value
/// itself is below that scale.
pub fn agreement_tolerance(oracle: &SumValue) -> f64 {
    let floor = AGREEMENT_RTOL * oracle.term_count as f64;
    let mag = oracle.abs();
    if mag < floor {
        floor
    } else {
        AGREEMENT_RTOL * mag
    }
}

pub fn routes_agree(oracle: &SumValue, other: &SumValue) -> bool {
    (oracle.value - other.value).norm() <= agreement_tolerance(oracle)
}

/// `f(lambda) = sum_a alpha_a chi(a + lambda)` for every `lambda in F_p`.
pub fn translate_vector(a: &FSet, alpha: &[Complex64], chi: &MultChar) -> Result<Vec<Complex64>> {
    chi.require_nontrivial()?;
    if alpha.len() != a.len() {
        return Err(Error::WeightShapeMismatch);
    }
    let f = &**chi.field();
    if f.modulus() != a.field().modulus() {
        return Err(Error::FieldMismatch(a.field().modulus() as u64, f.modulus() as u64));
    }
    Ok((0..f.modulus())
        .map(|lambda| {
            let acc: ComplexSum = a
                .elements()
                .iter()
                .zip(alpha)
                .map(|(&x, &w)| w * chi.eval(f.add(x, lambda)))
                .sum();
            acc.value()
        })
        .collect())
}

/// `g(lambda) = sum_a alpha_a e_p(a lambda)` for every `lambda in F_p`.
pub fn additive_transform(a: &FSet, alpha: &[Complex64]) -> Vec<Complex64> {
    let f = &**a.field();
    (0..f.modulus())
        .map(|lambda| {
            let acc: ComplexSum = a
                .elements()
                .iter()
                .zip(alpha)
                .map(|(&x, &w)| w * eval_add_char(f, f.mul(x, lambda)))
                .sum();
            acc.value()
        })
        .collect()
}

/// `sum_lambda |v(lambda)|^{2 nu}`.
pub fn moment_of(values: &[Complex64], nu: u32) -> Result<f64> {
    if nu == 0 || nu > MAX_NU {
        return Err(Error::NuOutOfRange(nu));
    }
    let acc: CompensatedSum = values.iter().map(|z| z.norm_sqr().powi(nu as i32)).sum();
    Ok(acc.value())
}

/// `sum_lambda |sum_a alpha_a chi(lambda + a)|^{2 nu}`.
pub fn moment(a: &FSet, alpha: &[Complex64], chi: &MultChar, nu: u32) -> Result<f64> {
    if nu == 0 || nu > MAX_NU {
        return Err(Error::NuOutOfRange(nu));
    }
    moment_of(&translate_vector(a, alpha, chi)?, nu)
}

/// `p * sum |alpha|^2 - |sum alpha|^2`, the exact second moment.
pub fn second_moment_identity(p: u32, alpha: &[Complex64]) -> f64 {
    let sq: CompensatedSum = alpha.iter().map(|z| z.norm_sqr()).sum();
    let total: ComplexSum = alpha.iter().copied().sum();
    p as f64 * sq.value() - total.value().norm_sqr()
}

/// `sum_u sum_v phi_u psi_v chi(u + v)`.
pub fn sum_bilinear(
    u: &FSet,
    v: &FSet,
    phi: &[Complex64],
    psi: &[Complex64],
    chi: &MultChar,
) -> Result<SumValue> {
    chi.require_nontrivial()?;
    if phi.len() != u.len() || psi.len() != v.len() {
        return Err(Error::WeightShapeMismatch);
    }
    let f = &**chi.field();
    let mut acc = ComplexSum::new();
    for (&x, &wx) in u.elements().iter().zip(phi) {
        for (&y, &wy) in v.elements().iter().zip(psi) {
            acc.add(wx * wy * chi.eval(f.add(x, y)));
        }
    }
    Ok(SumValue {
        value: acc.value(),
        method: Method::Oracle,
        term_count: (u.len() * v.len()) as u64,
    })
}

/// Which of the two rewritten forms [`permuted_sum_s`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutedForm {
    /// `chi(c) chi(d + (a + b) c^{-1})`
    PullC,
    /// `chi(d) chi(c + (a + b) d^{-1})`
    PullD,
}

fn factor_vectors(w: &WeightSystem, dims: [usize; 4]) -> Result<[Vec<Complex64>; 3]> {
    let one = Complex64::new(1.0, 0.0);
    match w.triple() {
        TripleWeights::ConstantOne => Ok([vec![one; dims[1]], vec![one; dims[2]], vec![one; dims[3]]]),
        TripleWeights::Factored { beta, gamma, delta } => Ok([beta.clone(), gamma.clone(), delta.clone()]),
        TripleWeights::Tensor { .. } => Err(Error::GeneralTensorWeights),
    }
}

/// Evaluates `S` after pulling `chi(c)` (or `chi(d)`) out of each term.
///
/// Both sides vanish together when `a + b + cd = 0`, with `chi(0) = 0`.
pub fn permuted_sum_s(inst: &SumInstance, form: PermutedForm) -> Result<SumValue> {
    if inst.variant != Variant::S {
        return Err(Error::UnsupportedVariant(inst.variant.name()));
    }
    let dims = inst.sets.dims();
    let [beta, gamma, delta] = factor_vectors(&inst.weights, dims)?;
    check_budget(dims.iter().map(|&n| n as u128).product(), TERM_BUDGET)?;
    let chi = inst.character()?;
    let f = &**inst.field();
    let alpha = inst.weights.alpha();
    let mut acc = ComplexSum::new();
    for (ai, &a) in inst.sets.a.elements().iter().enumerate() {
        for (bi, &b) in inst.sets.b.elements().iter().enumerate() {
            let ab = f.add(a, b);
            let w_ab = alpha[ai] * beta[bi];
            for (ci, &c) in inst.sets.c.elements().iter().enumerate() {
                let c_inv = f.inv(c)?;
                for (di, &d) in inst.sets.d.elements().iter().enumerate() {
                    let term = match form {
                        PermutedForm::PullC => chi.eval(c) * chi.eval(f.add(d, f.mul(ab, c_inv))),
                        PermutedForm::PullD => chi.eval(d) * chi.eval(f.add(c, f.mul(ab, f.inv(d)?))),
                    };
                    acc.add(w_ab * gamma[ci] * delta[di] * term);
                }
            }
        }
    }
    Ok(SumValue {
        value: acc.value(),
        method: Method::Permuted,
        term_count: dims.iter().map(|&n| n as u64).product(),
    })
}
