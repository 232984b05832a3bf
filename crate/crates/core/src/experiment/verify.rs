use std::sync::Arc;

use rayon::prelude::*;

use crate::character::MultChar;
use crate::error::Error;
use crate::field::PrimeField;
use crate::profiles::{incidence_oracle, k_profile, l_profile, IncidenceKind};
use crate::setgen::{FSet, WeightSpec};
use crate::sums::Variant;

use super::config::{CharSpec, ExperimentConfig, NamedChar, SetSpecs, SweepGrid};
use super::report::ReportRow;
use super::runner::{run, RunError, RunOptions};

pub const CORPUS_PRIMES: [u64; 3] = [101, 257, 1009];
pub const CORPUS_SIZES: [usize; 3] = [8, 16, 32];
pub const CORPUS_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
pub const CORPUS_NU: [u32; 3] = [1, 2, 3];

/// Ceiling on every logged implied-constant ratio over the corpus.
pub const RATIO_CAP: f64 = 32.0;
/// Per-ratio caps calibrated on the first full corpus run, roughly twice
/// the observed maxima (0.0234, 1.5254, 1.5316, 0.9144).
pub const CALIBRATED_CAPS: RatioMaxima = RatioMaxima {
    sum_over_thm11: 0.05,
    i_over_incidence: 3.0,
    j_over_incidence: 3.0,
    moment_nu2: 2.0,
};
/// Incidence oracle is run when `BCD` is at most this.
pub const INCIDENCE_ORACLE_MAX_BCD: usize = 1000;
/// Prime used for the full orthogonality table.
pub const ORTHOGONALITY_PRIME: u64 = 101;
pub const ORTHOGONALITY_TOL: f64 = 1e-7;

/// The two sweep configs (constant and factored random-unit weights) that
/// make up the built-in corpus.
pub fn corpus_configs() -> Vec<ExperimentConfig> {
    [WeightSpec::ConstantOne, WeightSpec::RandomUnitFactored { seed: 0 }]
        .into_iter()
        .map(|weights| ExperimentConfig {
            p: CORPUS_PRIMES[0],
            char_exponent: CharSpec::Named(NamedChar::Legendre),
            sets: None,
            weights,
            variants: Variant::ALL.to_vec(),
            nu_list: CORPUS_NU.to_vec(),
            epsilon: 0.0,
            seed: 0,
            format: None,
            sweep: Some(SweepGrid {
                primes: Some(CORPUS_PRIMES.to_vec()),
                sizes: Some(CORPUS_SIZES.to_vec()),
                seeds: Some(CORPUS_SEEDS.to_vec()),
            }),
        })
        .collect()
}

/// Largest observed value of each implied-constant ratio.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RatioMaxima {
    /// `|S| / thm11` over `S` rows.
    pub sum_over_thm11: f64,
    pub i_over_incidence: f64,
    pub j_over_incidence: f64,
    /// `moment / moment_bound` at `nu = 2`.
    pub moment_nu2: f64,
}

impl RatioMaxima {
    pub fn from_rows(rows: &[ReportRow]) -> Self {
        let mut m = Self::default();
        for r in rows {
            if r.variant == Variant::S {
                m.sum_over_thm11 = m.sum_over_thm11.max(r.ratio_thm11);
            }
            m.i_over_incidence = m.i_over_incidence.max(r.I as f64 / r.incidence_bound);
            m.j_over_incidence = m.j_over_incidence.max(r.J as f64 / r.incidence_bound);
            if r.nu == 2 && r.variant.uses_character() {
                m.moment_nu2 = m.moment_nu2.max(r.moment / r.moment_bound);
            }
        }
        m
    }

    fn as_array(&self) -> [f64; 4] {
        [self.sum_over_thm11, self.i_over_incidence, self.j_over_incidence, self.moment_nu2]
    }

    pub fn within(&self, cap: f64) -> bool {
        self.as_array().iter().all(|&x| x <= cap)
    }

    /// Componentwise comparison against per-ratio caps.
    pub fn within_caps(&self, caps: &RatioMaxima) -> bool {
        self.as_array().iter().zip(caps.as_array()).all(|(&x, c)| x <= c)
    }
}

/// Per-set-system counting checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CountingReport {
    pub systems: usize,
    /// Systems where a profile total differs from `BCD`.
    pub total_mismatches: usize,
    /// Systems checked against the sextuple oracle.
    pub oracle_checked: usize,
    pub oracle_mismatches: usize,
}

/// `sum K = sum L = BCD` on every corpus set system, and `I`, `J` against
/// the sextuple enumeration where `BCD` is small.
pub fn counting_checks() -> Result<CountingReport, Error> {
    let mut jobs = Vec::new();
    for &p in &CORPUS_PRIMES {
        for &n in &CORPUS_SIZES {
            for &s in &CORPUS_SEEDS {
                jobs.push((p, n, s));
            }
        }
    }
    let fields: Vec<Arc<PrimeField>> = CORPUS_PRIMES
        .iter()
        .map(|&p| PrimeField::new(p).map(Arc::new))
        .collect::<Result<_, _>>()?;
    let results: Vec<Result<(bool, Option<bool>), Error>> = jobs
        .par_iter()
        .map(|&(p, n, s)| {
            let field = fields[CORPUS_PRIMES.iter().position(|&q| q == p).unwrap()].clone();
            let specs = SetSpecs::random(n, s);
            let b = FSet::generate(field.clone(), specs.b)?;
            let c = FSet::generate(field.clone(), specs.c)?;
            let d = FSet::generate(field, specs.d)?;
            let bcd = (b.len() * c.len() * d.len()) as u64;
            let kp = k_profile(&b, &c, &d)?;
            let lp = l_profile(&b, &c, &d)?;
            let totals_ok = kp.total() == bcd && lp.total() == bcd;
            let oracle = if bcd as usize <= INCIDENCE_ORACLE_MAX_BCD {
                let i = incidence_oracle(&b, &c, &d, IncidenceKind::I)?.value;
                let j = incidence_oracle(&b, &c, &d, IncidenceKind::J)?.value;
                Some(i == kp.sum_of_squares() && j == lp.sum_of_squares())
            } else {
                None
            };
            Ok((totals_ok, oracle))
        })
        .collect();
    let mut rep = CountingReport::default();
    for r in results {
        let (totals_ok, oracle) = r?;
        rep.systems += 1;
        rep.total_mismatches += usize::from(!totals_ok);
        if let Some(ok) = oracle {
            rep.oracle_checked += 1;
            rep.oracle_mismatches += usize::from(!ok);
        }
    }
    Ok(rep)
}

/// Largest deviation of the orthogonality sum from `p - 1` or `-1` over all
/// pairs `(u, v)`, for the Legendre character and the exponent-1 character.
pub fn orthogonality_max_error(p: u64) -> Result<f64, Error> {
    let field = Arc::new(PrimeField::new(p)?);
    let chars = [MultChar::legendre(field.clone()), MultChar::new(field.clone(), 1)?];
    let pu = field.modulus();
    let mut worst = 0.0f64;
    for chi in &chars {
        let row_max: Vec<f64> = (0..pu)
            .into_par_iter()
            .map(|u| {
                let mut w = 0.0f64;
                for v in 0..pu {
                    let want = if u == v { (pu - 1) as f64 } else { -1.0 };
                    let got = chi.orthogonality_sum(u, v)?;
                    w = w.max((got.re - want).abs().max(got.im.abs()));
                }
                Ok(w)
            })
            .collect::<Result<_, Error>>()?;
        worst = row_max.into_iter().fold(worst, f64::max);
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub rows: Vec<ReportRow>,
    pub counting: CountingReport,
    pub orthogonality_error: f64,
    pub ratios: RatioMaxima,
}

impl VerifyReport {
    pub fn failed_rows(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.all_passed())
    }

    /// True when every exact check holds: per-row inequalities and
    /// identities, profile totals, incidence oracle and orthogonality.
    pub fn exact_ok(&self) -> bool {
        self.failed_rows().next().is_none()
            && self.counting.total_mismatches == 0
            && self.counting.oracle_mismatches == 0
            && self.orthogonality_error <= ORTHOGONALITY_TOL
    }
}

/// Runs the full built-in corpus.
pub fn verify(opts: RunOptions) -> Result<VerifyReport, RunError> {
    let mut rows = Vec::new();
    for cfg in corpus_configs() {
        rows.extend(run(&cfg, true, opts)?);
    }
    let wrap = |source| RunError::Compute {
        p: ORTHOGONALITY_PRIME,
        k: 0,
        seed: 0,
        source,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| RunError::ThreadPool(e.to_string()))?;
    let (counting, orthogonality_error) = pool.install(|| {
        (counting_checks(), orthogonality_max_error(ORTHOGONALITY_PRIME))
    });
    let counting = counting.map_err(wrap)?;
    let orthogonality_error = orthogonality_error.map_err(wrap)?;
    let ratios = RatioMaxima::from_rows(&rows);
    Ok(VerifyReport {
        rows,
        counting,
        orthogonality_error,
        ratios,
    })
}
