use std::collections::btree_map::{BTreeMap, Entry};
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::accum::CompensatedSum;
use crate::bounds::{
    bound_bilinear, bound_incidence, bound_moment, bound_thm11, bound_trivial, bound_uv, bound_uv_exact,
    holder_chain_from_parts, le_with_slack, nontriviality_report,
};
use crate::character::MultChar;
use crate::error::Error;
use crate::field::PrimeField;
use crate::profiles::{k_profile, l_profile, map_profile};
use crate::setgen::{FSet, SetSystem, WeightSystem};
use crate::sums::{moment_of, routes_agree, second_moment_identity, sum_collapsed, sum_oracle, SumInstance, Variant};

use super::config::{ExperimentConfig, FieldIssue, InstanceSpec};
use super::report::{Check, ReportRow};

/// Relative tolerance on the exact second-moment identity.
pub const MOMENT_IDENTITY_RTOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid config:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    ConfigInvalid(Vec<FieldIssue>),
    #[error("instance p={p} k={k} seed={seed}: {source}")]
    Compute {
        p: u64,
        k: u64,
        seed: u64,
        #[source]
        source: Error,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Worker threads for instance-level parallelism; `0` lets rayon decide.
    pub threads: usize,
    /// Record wall time per row. Off by default so reports are reproducible.
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { threads: 1, timings: false }
    }
}

fn check(name: &'static str, passed: bool, detail: impl FnOnce() -> String) -> Check {
    Check {
        name,
        passed,
        detail: if passed { String::new() } else { detail() },
    }
}

/// Evaluates one instance for every requested variant and `nu`.
pub fn evaluate_instance(
    field: Arc<PrimeField>,
    spec: &InstanceSpec,
    variants: &[Variant],
    nu_list: &[u32],
    epsilon: f64,
    timings: bool,
) -> Result<Vec<ReportRow>, Error> {
    let t_setup = Instant::now();
    let gen = |s: &crate::setgen::SetSpec| FSet::generate(field.clone(), s.clone());
    let sets = SetSystem::new(gen(&spec.sets.a)?, gen(&spec.sets.b)?, gen(&spec.sets.c)?, gen(&spec.sets.d)?)?;
    let weights = WeightSystem::generate(spec.weights, &sets)?;
    let chi = if spec.k == 0 {
        None
    } else {
        Some(MultChar::new(field.clone(), spec.k)?)
    };
    let k_prof = k_profile(&sets.b, &sets.c, &sets.d)?;
    let l_prof = l_profile(&sets.b, &sets.c, &sets.d)?;
    let incidence_i = k_prof.sum_of_squares();
    let incidence_j = l_prof.sum_of_squares();
    let setup_ms = t_setup.elapsed().as_secs_f64() * 1e3;

    let p = field.modulus() as u64;
    let [na, nb, nc, nd] = sets.dims();
    let m = sets.max_bcd();
    let (pf, af, bf, cf, df) = (p as f64, na as f64, nb as f64, nc as f64, nd as f64);
    let trivial = bound_trivial(pf, af, bf, cf, df)?;
    let incidence_bound = bound_incidence(pf, bf, cf, df)?;
    let uv_bound = bound_uv(pf, af, bf, cf, df)?;
    let alpha_sq: CompensatedSum = weights.alpha().iter().map(|z| z.norm_sqr()).sum();
    let alpha_sq = alpha_sq.value();

    let mut rows = Vec::with_capacity(variants.len() * nu_list.len());
    for &variant in variants {
        let t_variant = Instant::now();
        let inst = SumInstance::new(sets.clone(), weights.clone(), chi.clone(), variant)?;
        let oracle = sum_oracle(&inst)?;
        let collapsed = sum_collapsed(&inst)?;
        let f: Vec<Complex64> = inst.transform()?;
        let w = inst.weighted_profile()?;
        let w_sq: CompensatedSum = w.values.iter().map(|z| z.norm_sqr()).sum();
        let bilinear = bound_bilinear(pf, alpha_sq, w_sq.value())?;
        let prof = match variant {
            Variant::S | Variant::U => k_prof.clone(),
            Variant::T | Variant::V => l_prof.clone(),
            Variant::Frac1 | Variant::Frac2 => map_profile(&sets.b, &sets.c, &sets.d, variant.map_kind())?,
        };
        let variant_ms = t_variant.elapsed().as_secs_f64() * 1e3;

        for &nu in nu_list {
            let t_nu = Instant::now();
            let thm11 = bound_thm11(pf, af, bf, cf, df, nu)?;
            let moment = moment_of(&f, nu)?;
            let moment_bound = bound_moment(pf, af, nu)?;
            let chain = holder_chain_from_parts(collapsed.abs(), &prof, &f, nu)?;
            let flags = nontriviality_report(pf, af, bf, cf, df, nu, epsilon)?;
            let sum_abs = oracle.abs();

            let mut checks = vec![
                check("routes_agree", routes_agree(&oracle, &collapsed), || {
                    format!("oracle {} vs collapsed {}", oracle.value, collapsed.value)
                }),
                check("triangle", sum_abs <= oracle.term_count as f64 * (1.0 + 1e-12), || {
                    format!("|sum| = {sum_abs} > {} terms", oracle.term_count)
                }),
                check("bilinear_grouped", le_with_slack(sum_abs, bilinear.value), || {
                    format!("|sum| = {sum_abs} > sqrt(p Phi Psi) = {}", bilinear.value)
                }),
                check("holder_chain", chain.monotone, || format!("{chain:?}")),
            ];
            if variant == Variant::S {
                checks.push(check("trivial_bound", le_with_slack(sum_abs, trivial.value), || {
                    format!("|S| = {sum_abs} > {}", trivial.value)
                }));
            }
            if nu == 1 {
                let identity = if variant.uses_character() {
                    second_moment_identity(p as u32, weights.alpha())
                } else {
                    pf * alpha_sq
                };
                checks.push(check(
                    "moment_identity",
                    (moment - identity).abs() <= MOMENT_IDENTITY_RTOL * identity.abs().max(1.0),
                    || format!("moment {moment} vs identity {identity}"),
                ));
                checks.push(check("moment_le_ap", le_with_slack(moment, moment_bound.value), || {
                    format!("moment {moment} > Ap = {}", moment_bound.value)
                }));
            }
            if matches!(variant, Variant::U | Variant::V) {
                let inc = if variant == Variant::U { incidence_i } else { incidence_j };
                let exact = bound_uv_exact(pf, af, inc as f64)?;
                checks.push(check("uv_cauchy", le_with_slack(sum_abs, exact.value), || {
                    format!("|{variant}| = {sum_abs} > sqrt(p I A) = {}", exact.value)
                }));
            }

            let nu_ms = t_nu.elapsed().as_secs_f64() * 1e3;
            rows.push(ReportRow {
                p,
                k: spec.k,
                variant,
                nu,
                A: na,
                B: nb,
                C: nc,
                D: nd,
                M: m,
                seed: spec.seed,
                sum_abs_oracle: sum_abs,
                sum_abs_collapsed: collapsed.abs(),
                I: incidence_i,
                J: incidence_j,
                thm11: thm11.value,
                trivial: trivial.value,
                bilinear_equiv: bilinear.value,
                incidence_bound: incidence_bound.value,
                moment,
                moment_bound: moment_bound.value,
                uv_bound: uv_bound.value,
                ratio_thm11: sum_abs / thm11.value,
                ratio_trivial: sum_abs / trivial.value,
                chain_ok: chain.monotone,
                bcd_le_p2: flags.bcd_le_p2,
                nontrivial_bcd: flags.bcd_gt_p,
                nontrivial_a: flags.a_ge_p_2_5,
                time_ms: if timings { setup_ms + variant_ms + nu_ms } else { 0.0 },
                checks,
            });
        }
    }
    Ok(rows)
}

/// Validates `config` and evaluates every instance, in grid order.
pub fn run(config: &ExperimentConfig, sweeping: bool, opts: RunOptions) -> Result<Vec<ReportRow>, RunError> {
    let issues = config.validate(sweeping);
    if !issues.is_empty() {
        return Err(RunError::ConfigInvalid(issues));
    }
    let instances = config.instances(sweeping);
    let mut fields = BTreeMap::new();
    for inst in &instances {
        if let Entry::Vacant(e) = fields.entry(inst.p) {
            let f = PrimeField::new(inst.p).map_err(|source| RunError::Compute {
                p: inst.p,
                k: inst.k,
                seed: inst.seed,
                source,
            })?;
            e.insert(Arc::new(f));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| RunError::ThreadPool(e.to_string()))?;
    let per_instance: Vec<Result<Vec<ReportRow>, RunError>> = pool.install(|| {
        instances
            .par_iter()
            .map(|inst| {
                evaluate_instance(
                    fields[&inst.p].clone(),
                    inst,
                    &config.variants,
                    &config.nu_list,
                    config.epsilon,
                    opts.timings,
                )
                .map_err(|source| RunError::Compute {
                    p: inst.p,
                    k: inst.k,
                    seed: inst.seed,
                    source,
                })
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in per_instance {
        rows.extend(r?);
    }
    Ok(rows)
}
