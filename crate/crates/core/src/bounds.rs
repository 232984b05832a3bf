//! Closed-form bound expressions and the exact inequality chain behind them.
//!
//! Bounds come in two kinds. Exact inequalities ([`Exactness::ExactInequality`])
//! must dominate the measured quantity on every instance. Bounds that hold
//! only up to an unspecified constant ([`Exactness::ImpliedConstant`]) are
//! evaluated and their ratios logged; they are never asserted as stated.
//!
//! Every expression is a sum of monomials `coef * prod base^exp`. Monomials
//! are evaluated directly when that stays below `1e300`, otherwise in
//! natural-log space; [`BoundValue::ln_value`] is always available.

use num_complex::Complex64;
use serde::Serialize;

use crate::accum::CompensatedSum;
use crate::error::{Error, Result};
use crate::profiles::{map_profile, LambdaProfile};
use crate::sums::{moment_of, sum_collapsed, SumInstance, MAX_NU};

/// Relative slack allowed on exact inequalities.
pub const EXACT_SLACK: f64 = 1e-12;

/// Monomials whose natural log exceeds this switch to log-space evaluation.
const LN_DIRECT_LIMIT: f64 = 690.775_527_898_213_7; // ln(1e300)

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    ExactInequality,
    ImpliedConstant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub nu: u32,
    /// `max{B, C, D}`, always recomputed from `b, c, d`.
    pub m: f64,
}

impl BoundParams {
    fn new(p: f64, a: f64, b: f64, c: f64, d: f64, nu: u32) -> Self {
        Self {
            p,
            a,
            b,
            c,
            d,
            nu,
            m: b.max(c).max(d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundValue {
    pub name: &'static str,
    pub value: f64,
    pub ln_value: f64,
    pub exactness: Exactness,
    pub params: BoundParams,
    /// `BCD > p^2`: the incidence estimates are stated only below this.
    pub bcd_exceeds_p2: bool,
}

/// `coef * prod base^exp`.
#[derive(Debug, Clone)]
struct Monomial {
    coef: f64,
    factors: Vec<(f64, f64)>,
}

impl Monomial {
    fn new(factors: &[(f64, f64)]) -> Self {
        Self {
            coef: 1.0,
            factors: factors.to_vec(),
        }
    }

    fn ln(&self) -> f64 {
        self.coef.ln() + self.factors.iter().map(|&(b, e)| e * b.ln()).sum::<f64>()
    }

    fn direct(&self) -> f64 {
        self.factors.iter().fold(self.coef, |acc, &(b, e)| acc * b.powf(e))
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Monomial {
            coef: self.coef * other.coef,
            factors,
        }
    }
}

/// A sum of monomials.
#[derive(Debug, Clone)]
struct Poly(Vec<Monomial>);

impl Poly {
    fn times(&self, other: &Poly) -> Poly {
        Poly(
            self.0
                .iter()
                .flat_map(|m| other.0.iter().map(move |n| m.times(n)))
                .collect(),
        )
    }

    /// `(value, ln value)`, direct when every monomial is representable.
    fn eval(&self) -> (f64, f64) {
        let lns: Vec<f64> = self.0.iter().map(Monomial::ln).collect();
        if lns.iter().all(|&l| l < LN_DIRECT_LIMIT) {
            let v: CompensatedSum = self.0.iter().map(Monomial::direct).sum();
            let v = v.value();
            (v, v.ln())
        } else {
            let ln = log_sum_exp(&lns);
            (ln.exp(), ln)
        }
    }

    #[cfg(test)]
    fn eval_log_space(&self) -> (f64, f64) {
        let ln = log_sum_exp(&self.0.iter().map(Monomial::ln).collect::<Vec<_>>());
        (ln.exp(), ln)
    }
}

fn log_sum_exp(lns: &[f64]) -> f64 {
    let top = lns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + lns.iter().map(|&l| (l - top).exp()).sum::<f64>().ln()
}

fn check_sizes(values: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in values {
        if !v.is_finite() || v < 1.0 {
            return Err(Error::BadParameters(format!("{name} = {v} must be a finite value >= 1")));
        }
    }
    Ok(())
}

fn check_nu(nu: u32) -> Result<()> {
    if nu == 0 {
        Err(Error::BadParameters("nu must be >= 1".into()))
    } else {
        Ok(())
    }
}

fn finish(name: &'static str, poly: &Poly, exactness: Exactness, params: BoundParams) -> BoundValue {
    let (value, ln_value) = poly.eval();
    BoundValue {
        name,
        value,
        ln_value,
        exactness,
        params,
        bcd_exceeds_p2: (params.b.ln() + params.c.ln() + params.d.ln()) > 2.0 * params.p.ln(),
    }
}

fn bcd_power(b: f64, c: f64, d: f64, e: f64) -> Vec<(f64, f64)> {
    vec![(b, e), (c, e), (d, e)]
}

fn thm11_poly(p: f64, a: f64, b: f64, c: f64, d: f64, nu: u32) -> Poly {
    let m = b.max(c).max(d);
    let nu_f = nu as f64;
    let first = Monomial::new(&bcd_power(b, c, d, 1.0 - 1.0 / (4.0 * nu_f)));
    let mut second = bcd_power(b, c, d, 1.0 - 1.0 / (2.0 * nu_f));
    second.push((m, 1.0 / (2.0 * nu_f)));
    let sets = Poly(vec![first, Monomial::new(&second)]);
    let tail = if nu == 1 {
        Poly(vec![Monomial::new(&[(a, 0.5), (p, 0.5)])])
    } else {
        Poly(vec![
            Monomial::new(&[(a, 1.0), (p, 1.0 / (4.0 * nu_f))]),
            Monomial::new(&[(a, 0.5), (p, 1.0 / (2.0 * nu_f))]),
        ])
    };
    sets.times(&tail)
}

/// The main estimate for `S` and `T`, up to its implied constant.
pub fn bound_thm11(p: f64, a: f64, b: f64, c: f64, d: f64, nu: u32) -> Result<BoundValue> {
    check_sizes(&[("p", p), ("A", a), ("B", b), ("C", c), ("D", d)])?;
    check_nu(nu)?;
    Ok(finish(
        "thm11",
        &thm11_poly(p, a, b, c, d, nu),
        Exactness::ImpliedConstant,
        BoundParams::new(p, a, b, c, d, nu),
    ))
}

/// `ABCD sqrt(p / (A M))`.
///
/// Exact for `S` under modulus-one weights: fixing the two smaller of
/// `B, C, D` leaves a bilinear sum in `a` and an injective image of the
/// largest variable.
pub fn bound_trivial(p: f64, a: f64, b: f64, c: f64, d: f64) -> Result<BoundValue> {
    check_sizes(&[("p", p), ("A", a), ("B", b), ("C", c), ("D", d)])?;
    let m = b.max(c).max(d);
    let poly = Poly(vec![Monomial::new(&[
        (a, 0.5),
        (b, 1.0),
        (c, 1.0),
        (d, 1.0),
        (p, 0.5),
        (m, -0.5),
    ])]);
    Ok(finish("trivial", &poly, Exactness::ExactInequality, BoundParams::new(p, a, b, c, d, 1)))
}

/// `sqrt(p Phi Psi)` with `Phi = sum |phi|^2`, `Psi = sum |psi|^2`.
pub fn bound_bilinear(p: f64, phi: f64, psi: f64) -> Result<BoundValue> {
    check_sizes(&[("p", p)])?;
    if !(phi >= 0.0 && psi >= 0.0 && phi.is_finite() && psi.is_finite()) {
        return Err(Error::BadParameters(format!("norms must be finite and >= 0, got {phi}, {psi}")));
    }
    let value = (p * phi * psi).sqrt();
    Ok(BoundValue {
        name: "bilinear",
        value,
        ln_value: value.ln(),
        exactness: Exactness::ExactInequality,
        params: BoundParams::new(p, phi.max(1.0), psi.max(1.0), 1.0, 1.0, 1),
        bcd_exceeds_p2: false,
    })
}

/// `(BCD)^{3/2} + BCD M`, the shape of the incidence estimates for `I` and `J`.
pub fn bound_incidence(p: f64, b: f64, c: f64, d: f64) -> Result<BoundValue> {
    check_sizes(&[("p", p), ("B", b), ("C", c), ("D", d)])?;
    let m = b.max(c).max(d);
    let poly = Poly(vec![
        Monomial::new(&bcd_power(b, c, d, 1.5)),
        Monomial::new(&[(b, 1.0), (c, 1.0), (d, 1.0), (m, 1.0)]),
    ]);
    Ok(finish("incidence", &poly, Exactness::ImpliedConstant, BoundParams::new(p, 1.0, b, c, d, 1)))
}

/// `Ap` for `nu = 1` (exact), `A^{2nu} p^{1/2} + A^nu p` otherwise.
pub fn bound_moment(p: f64, a: f64, nu: u32) -> Result<BoundValue> {
    check_sizes(&[("p", p), ("A", a)])?;
    check_nu(nu)?;
    let nu_f = nu as f64;
    let (poly, exactness) = if nu == 1 {
        (Poly(vec![Monomial::new(&[(a, 1.0), (p, 1.0)])]), Exactness::ExactInequality)
    } else {
        (
            Poly(vec![
                Monomial::new(&[(a, 2.0 * nu_f), (p, 0.5)]),
                Monomial::new(&[(a, nu_f), (p, 1.0)]),
            ]),
            Exactness::ImpliedConstant,
        )
    };
    let mut out = finish("moment", &poly, exactness, BoundParams::new(p, a, 1.0, 1.0, 1.0, nu));
    out.bcd_exceeds_p2 = false;
    Ok(out)
}

/// `p^{1/2} ((BCD)^{3/4} + (BCD M)^{1/2}) A^{1/2}`, for the exponential sums.
pub fn bound_uv(p: f64, a: f64, b: f64, c: f64, d: f64) -> Result<BoundValue> {
    check_sizes(&[("p", p), ("A", a), ("B", b), ("C", c), ("D", d)])?;
    let m = b.max(c).max(d);
    let head = Poly(vec![Monomial::new(&[(p, 0.5), (a, 0.5)])]);
    let sets = Poly(vec![
        Monomial::new(&bcd_power(b, c, d, 0.75)),
        Monomial::new(&[(b, 0.5), (c, 0.5), (d, 0.5), (m, 0.5)]),
    ]);
    Ok(finish("uv", &head.times(&sets), Exactness::ImpliedConstant, BoundParams::new(p, a, b, c, d, 1)))
}

/// `sqrt(p * incidence * A)`: the exact Cauchy step for `U` (with `I`) and
/// `V` (with `J`).
pub fn bound_uv_exact(p: f64, a: f64, incidence: f64) -> Result<BoundValue> {
    check_sizes(&[("p", p), ("A", a)])?;
    let mut out = bound_bilinear(p, a, incidence)?;
    out.name = "uv_exact";
    Ok(out)
}

/// `((bound_incidence) (BCD)^{2nu-2} (bound_moment))^{1/(2nu)}`: the
/// Hölder chain with both lemma shapes substituted.
pub fn chain_form_bound(p: f64, a: f64, b: f64, c: f64, d: f64, nu: u32) -> Result<f64> {
    let inc = bound_incidence(p, b, c, d)?;
    let mom = bound_moment(p, a, nu)?;
    let nu_f = nu as f64;
    let ln = (inc.ln_value + (2.0 * nu_f - 2.0) * (b.ln() + c.ln() + d.ln()) + mom.ln_value) / (2.0 * nu_f);
    Ok(ln.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HansonBranch {
    /// `C < p^{1/2}`: `A^56 B^28 C^33 D^4 >= p^{60+eps}`.
    SmallC,
    /// `C >= p^{1/2}`: `A^112 B^56 D^8 >= p^{87+eps}`.
    LargeC,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HansonReport {
    pub branch: HansonBranch,
    /// Left side divided by `ln p`, i.e. the exponent of `p` it represents.
    pub lhs_exponent: f64,
    pub rhs_exponent: f64,
    pub satisfied: bool,
    /// `A, B, C, D >= p^eps`.
    pub sizes_ok: bool,
}

fn ge_with_tol(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - EXACT_SLACK * lhs.abs().max(rhs.abs()).max(1.0)
}

/// Evaluates the earlier nontriviality hypotheses for constant weights.
pub fn hanson_conditions(p: f64, a: f64, b: f64, c: f64, d: f64, eps: f64) -> Result<HansonReport> {
    check_sizes(&[("A", a), ("B", b), ("C", c), ("D", d)])?;
    if !(p > 1.0 && p.is_finite()) || !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::BadParameters(format!("need p > 1 and eps > 0, got {p}, {eps}")));
    }
    let lp = p.ln();
    let (la, lb, lc, ld) = (a.ln(), b.ln(), c.ln(), d.ln());
    let branch = if ge_with_tol(lc, 0.5 * lp) {
        HansonBranch::LargeC
    } else {
        HansonBranch::SmallC
    };
    let (lhs, rhs) = match branch {
        HansonBranch::SmallC => (56.0 * la + 28.0 * lb + 33.0 * lc + 4.0 * ld, 60.0 + eps),
        HansonBranch::LargeC => (112.0 * la + 56.0 * lb + 8.0 * ld, 87.0 + eps),
    };
    let lhs_exponent = lhs / lp;
    Ok(HansonReport {
        branch,
        lhs_exponent,
        rhs_exponent: rhs,
        satisfied: ge_with_tol(lhs, rhs * lp),
        sizes_ok: [la, lb, lc, ld].iter().all(|&l| ge_with_tol(l, eps * lp)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NontrivialityFlags {
    /// `BCD > p^{1+eps}`.
    pub bcd_gt_p: bool,
    /// `A >= p^{2/5+eps}`.
    pub a_ge_p_2_5: bool,
    /// `M <= (BCD)^{1/2}`.
    pub m_le_sqrt_bcd: bool,
    /// `BCD <= p^2`.
    pub bcd_le_p2: bool,
    /// `A (BCD)^{1/2} > p^{1+eps}`, the range where the exponential-sum bound is nontrivial.
    pub uv_nontrivial: bool,
    /// `ABCD (p/BCD)^{1/(4nu)}`.
    pub simplified_bound: f64,
    /// `ABCD`, the count of terms.
    pub term_count: f64,
    pub thm11: f64,
    pub thm11_below_term_count: bool,
}

pub fn nontriviality_report(p: f64, a: f64, b: f64, c: f64, d: f64, nu: u32, eps: f64) -> Result<NontrivialityFlags> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::BadParameters(format!("eps = {eps} must be >= 0")));
    }
    let thm11 = bound_thm11(p, a, b, c, d, nu)?;
    let lp = p.ln();
    let lbcd = b.ln() + c.ln() + d.ln();
    let m = b.max(c).max(d);
    let nu_f = nu as f64;
    let simplified = Poly(vec![Monomial::new(&[
        (a, 1.0),
        (b, 1.0 - 1.0 / (4.0 * nu_f)),
        (c, 1.0 - 1.0 / (4.0 * nu_f)),
        (d, 1.0 - 1.0 / (4.0 * nu_f)),
        (p, 1.0 / (4.0 * nu_f)),
    ])])
    .eval()
    .0;
    let term_count = a * b * c * d;
    Ok(NontrivialityFlags {
        bcd_gt_p: lbcd > (1.0 + eps) * lp,
        a_ge_p_2_5: ge_with_tol(a.ln(), (0.4 + eps) * lp),
        m_le_sqrt_bcd: ge_with_tol(0.5 * lbcd, m.ln()),
        bcd_le_p2: ge_with_tol(2.0 * lp, lbcd),
        uv_nontrivial: a.ln() + 0.5 * lbcd > (1.0 + eps) * lp,
        simplified_bound: simplified,
        term_count,
        thm11: thm11.value,
        thm11_below_term_count: thm11.ln_value < term_count.ln(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainReport {
    pub nu: u32,
    /// `|sum|`.
    pub sum_abs: f64,
    /// `sum_lambda P(lambda) |f(lambda)|`, with `P` the count profile of the variant's map.
    pub profile_stage: f64,
    /// `((sum P)^{2nu-2} (sum P^2) (sum |f|^{2nu}))^{1/(2nu)}`.
    pub holder_stage: f64,
    pub monotone: bool,
}

/// `x <= y` up to [`EXACT_SLACK`] relative.
pub fn le_with_slack(x: f64, y: f64) -> bool {
    x <= y * (1.0 + EXACT_SLACK)
}

/// Checks `|sum| <= sum P |f| <= ((sum P)^{2nu-2} sum P^2 sum |f|^{2nu})^{1/(2nu)}`.
///
/// `P` is `K` for `S` and `U`, `L` for `T` and `V`, and the fraction-map
/// profile for the fraction variants. Each step is an exact inequality when
/// all weights have modulus at most one.
pub fn holder_chain_check(inst: &SumInstance, nu: u32) -> Result<ChainReport> {
    if nu == 0 || nu > MAX_NU {
        return Err(Error::NuOutOfRange(nu));
    }
    let sets = inst.sets();
    let sum_abs = sum_collapsed(inst)?.abs();
    let f = inst.transform()?;
    let prof = map_profile(&sets.b, &sets.c, &sets.d, inst.variant().map_kind())?;
    holder_chain_from_parts(sum_abs, &prof, &f, nu)
}

/// The chain of [`holder_chain_check`] from precomputed pieces.
pub fn holder_chain_from_parts(sum_abs: f64, prof: &LambdaProfile, f: &[Complex64], nu: u32) -> Result<ChainReport> {
    let profile_stage: CompensatedSum = prof
        .counts()
        .iter()
        .zip(f)
        .map(|(&k, z)| k as f64 * z.norm())
        .sum();
    let profile_stage = profile_stage.value();
    let total = prof.total() as f64;
    let squares = prof.sum_of_squares() as f64;
    let mom = moment_of(f, nu)?;
    let nu_f = nu as f64;
    let holder_stage = if mom == 0.0 || total == 0.0 {
        0.0
    } else {
        (((2.0 * nu_f - 2.0) * total.ln() + squares.ln() + mom.ln()) / (2.0 * nu_f)).exp()
    };
    Ok(ChainReport {
        nu,
        sum_abs,
        profile_stage,
        holder_stage,
        monotone: le_with_slack(sum_abs, profile_stage) && le_with_slack(profile_stage, holder_stage),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(x: f64, y: f64) -> f64 {
        (x - y).abs() / y.abs()
    }

    #[test]
    fn thm11_examples() {
        let v = bound_thm11(1009.0, 32.0, 32.0, 32.0, 32.0, 1).unwrap();
        let f1 = 2f64.powf(11.25) + 1024.0;
        let f2 = (32.0f64 * 1009.0).sqrt();
        assert!(rel(v.value, f1 * f2) < 1e-12);
        assert!(rel(v.value, 6.216e5) < 1e-3);
        assert_eq!(v.exactness, Exactness::ImpliedConstant);

        let v = bound_thm11(1009.0, 64.0, 64.0, 64.0, 64.0, 1).unwrap();
        assert!(rel(v.value, (2f64.powf(13.5) + 4096.0) * 8.0 * 1009f64.sqrt()) < 1e-12);
        assert!(rel(v.value, 3.985e6) < 1e-3);

        // Equal sizes n and nu = 1: order n^{11/4} p^{1/2}, the first term dominating.
        for n in [16.0f64, 64.0, 256.0] {
            let v = bound_thm11(1009.0, n, n, n, n, 1).unwrap();
            let lead = n.powf(2.75) * 1009f64.sqrt();
            assert!(v.value >= lead && v.value <= 2.0 * lead);
        }
    }

    #[test]
    fn thm11_nu_two_branch() {
        let (p, a, b, c, d) = (101.0f64, 10.0f64, 12.0f64, 14.0f64, 16.0f64);
        let x = b * c * d;
        let expect = (x.powf(1.0 - 1.0 / 8.0) + x.powf(0.75) * 16f64.powf(0.25))
            * (a * p.powf(1.0 / 8.0) + a.sqrt() * p.powf(0.25));
        assert!(rel(bound_thm11(p, a, b, c, d, 2).unwrap().value, expect) < 1e-12);
    }

    #[test]
    fn bad_parameters() {
        assert!(matches!(bound_thm11(101.0, 0.0, 1.0, 1.0, 1.0, 1), Err(Error::BadParameters(_))));
        assert!(matches!(bound_thm11(101.0, 1.0, 1.0, 1.0, 1.0, 0), Err(Error::BadParameters(_))));
        assert!(matches!(bound_trivial(101.0, 1.0, f64::NAN, 1.0, 1.0), Err(Error::BadParameters(_))));
        assert!(matches!(bound_bilinear(5.0, -1.0, 1.0), Err(Error::BadParameters(_))));
    }

    #[test]
    fn trivial_examples() {
        let v = bound_trivial(1009.0, 32.0, 32.0, 32.0, 32.0).unwrap();
        assert!(rel(v.value, 2f64.powi(20) * (1009.0f64 / 1024.0).sqrt()) < 1e-12);
        assert!(rel(v.value, 1.0409e6) < 1e-4);
        assert!(rel(bound_trivial(101.0, 1.0, 1.0, 1.0, 1.0).unwrap().value, 101f64.sqrt()) < 1e-15);
        assert_eq!(v.exactness, Exactness::ExactInequality);
    }

    #[test]
    fn bilinear_examples() {
        let v = bound_bilinear(5.0, 2.0, 1.0).unwrap();
        assert!(rel(v.value, 10f64.sqrt()) < 1e-15);
        assert!(2.0 <= v.value);
        assert_eq!(bound_bilinear(101.0, 0.0, 7.0).unwrap().value, 0.0);
        // sqrt(p A BCD) with Psi = BCD.
        let g = bound_bilinear(1009.0, 32.0, 32768.0).unwrap();
        assert!(rel(g.value, (1009.0f64 * 32.0 * 32768.0).sqrt()) < 1e-15);
    }

    #[test]
    fn incidence_examples() {
        assert_eq!(bound_incidence(1009.0, 16.0, 16.0, 16.0).unwrap().value, 327_680.0);
        assert_eq!(bound_incidence(1009.0, 1.0, 1.0, 1.0).unwrap().value, 2.0);
        assert!(!bound_incidence(101.0, 16.0, 16.0, 16.0).unwrap().bcd_exceeds_p2);
        assert!(bound_incidence(101.0, 32.0, 32.0, 32.0).unwrap().bcd_exceeds_p2);
    }

    #[test]
    fn moment_examples() {
        let v = bound_moment(5.0, 2.0, 1).unwrap();
        assert_eq!(v.value, 10.0);
        assert_eq!(v.exactness, Exactness::ExactInequality);
        let v = bound_moment(101.0, 10.0, 2).unwrap();
        assert!(rel(v.value, 1e4 * 101f64.sqrt() + 1e2 * 101.0) < 1e-14);
        assert!(rel(v.value, 1.1060e5) < 1e-4);
        assert_eq!(v.exactness, Exactness::ImpliedConstant);
    }

    #[test]
    fn uv_examples() {
        let uv = bound_uv(1009.0, 32.0, 32.0, 32.0, 32.0).unwrap();
        let thm = bound_thm11(1009.0, 32.0, 32.0, 32.0, 32.0, 1).unwrap();
        assert!(rel(uv.value, thm.value) < 1e-12);
        assert!(rel(bound_uv_exact(101.0, 4.0, 9.0).unwrap().value, 3.0 * 2.0 * 101f64.sqrt()) < 1e-15);
    }

    #[test]
    fn hanson_examples() {
        let p = 1e6f64;
        let n = p.powf(0.55);
        let r = hanson_conditions(p, n, n, n, n, 0.01).unwrap();
        assert_eq!(r.branch, HansonBranch::LargeC);
        assert!((r.lhs_exponent - 96.8).abs() < 1e-9);
        assert_eq!(r.rhs_exponent, 87.01);
        assert!(r.satisfied);

        let n = p.powf(0.1);
        let r = hanson_conditions(p, n, n, n, n, 0.01).unwrap();
        assert_eq!(r.branch, HansonBranch::SmallC);
        assert!((r.lhs_exponent - 12.1).abs() < 1e-9);
        assert!(!r.satisfied);

        let r = hanson_conditions(p, 2.0, 2.0, p.sqrt(), 2.0, 0.01).unwrap();
        assert_eq!(r.branch, HansonBranch::LargeC);
        assert!(matches!(hanson_conditions(p, 2.0, 2.0, 2.0, 2.0, 0.0), Err(Error::BadParameters(_))));
    }

    #[test]
    fn nontriviality_examples() {
        let r = nontriviality_report(1009.0, 64.0, 64.0, 64.0, 64.0, 1, 0.0).unwrap();
        assert!(r.bcd_gt_p);
        assert!(r.thm11_below_term_count);
        assert_eq!(r.term_count, 16_777_216.0);
        assert!(rel(r.thm11, 3.985e6) < 1e-3);
        assert!(r.bcd_le_p2);

        let r = nontriviality_report(1009.0, 8.0, 8.0, 8.0, 8.0, 1, 0.0).unwrap();
        assert!(!r.bcd_gt_p);
        for n in [1.0f64, 2.0, 7.0, 100.0, 1e6] {
            assert!(nontriviality_report(1009.0, n, n, n, n, 1, 0.0).unwrap().m_le_sqrt_bcd);
        }
        let r = nontriviality_report(1009.0, 64.0, 64.0, 64.0, 64.0, 3, 0.0).unwrap();
        let expect = 64f64.powi(4) * (1009.0f64 / 262_144.0).powf(1.0 / 12.0);
        assert!(rel(r.simplified_bound, expect) < 1e-12);
    }

    #[test]
    fn chain_form_matches_main_bound_termwise() {
        // The main bound is the sum of the chain-form products each raised to
        // 1/(2nu), so it sits between the chain form and n^{1-1/(2nu)} times it.
        let mut rng = crate::setgen::SplitMix64::new(11);
        for _ in 0..50 {
            let p = [101.0, 1009.0, 65537.0, 1e7][(rng.next_u64() % 4) as usize];
            let size = |r: &mut crate::setgen::SplitMix64| 1.0 + (r.next_u64() % 5000) as f64;
            let (a, b, c, d) = (size(&mut rng), size(&mut rng), size(&mut rng), size(&mut rng));
            let nu = 1 + (rng.next_u64() % 4) as u32;
            let main = bound_thm11(p, a, b, c, d, nu).unwrap().value;
            let chain = chain_form_bound(p, a, b, c, d, nu).unwrap();
            let products: f64 = if nu == 1 { 2.0 } else { 4.0 };
            let upper = products.powf(1.0 - 1.0 / (2.0 * nu as f64));
            let ratio = main / chain;
            assert!(ratio >= 1.0 - 1e-12 && ratio <= upper * (1.0 + 1e-12), "p={p} {a} {b} {c} {d} nu={nu}: {ratio}");
        }
    }

    #[test]
    fn log_space_agrees_with_direct_evaluation() {
        for nu in 1..=4 {
            for &(p, n) in &[(101.0, 8.0), (1009.0, 64.0), (65537.0, 4096.0), (1e7, 3e5)] {
                let poly = thm11_poly(p, n, n * 1.5, n, n * 0.75, nu);
                let (direct, _) = poly.eval();
                let (logged, _) = poly.eval_log_space();
                assert!(rel(logged, direct) < 1e-12, "nu={nu} p={p} n={n}");
            }
        }
        // Beyond binary64: the log value is still meaningful.
        let huge = bound_thm11(1e7, 1e150, 1e150, 1e150, 1e150, 1).unwrap();
        assert!(huge.value.is_infinite());
        let expect = (0.75 * 450.0 + 75.0 + 0.5 * 7.0) * 10f64.ln();
        assert!(rel(huge.ln_value, expect) < 1e-3);
    }
}
