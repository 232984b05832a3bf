use std::fmt;

use serde::{Deserialize, Serialize};

use crate::field::{is_prime, MAX_MODULUS};
use crate::setgen::{SetSpec, WeightSpec, MAX_TENSOR_CELLS};
use crate::sums::{Variant, MAX_NU, TERM_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedChar {
    /// The quadratic character, exponent `(p-1)/2`.
    Legendre,
}

/// A character given either by its exponent `k` or by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CharSpec {
    Exponent(u64),
    Named(NamedChar),
}

impl Default for CharSpec {
    fn default() -> Self {
        CharSpec::Named(NamedChar::Legendre)
    }
}

impl CharSpec {
    pub fn exponent(&self, p: u64) -> u64 {
        match self {
            CharSpec::Exponent(k) => *k,
            CharSpec::Named(NamedChar::Legendre) => (p - 1) / 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpecs {
    pub a: SetSpec,
    pub b: SetSpec,
    pub c: SetSpec,
    pub d: SetSpec,
}

impl SetSpecs {
    /// Four random sets of one size; set `r` (0..4 for `A..D`) draws with seed `4 seed + r`.
    pub fn random(size: usize, seed: u64) -> Self {
        let mk = |r: u64| SetSpec::Random {
            size,
            seed: seed.wrapping_mul(4).wrapping_add(r),
        };
        Self {
            a: mk(0),
            b: mk(1),
            c: mk(2),
            d: mk(3),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &SetSpec)> {
        [("a", &self.a), ("b", &self.b), ("c", &self.c), ("d", &self.d)].into_iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub primes: Option<Vec<u64>>,
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
}

fn default_nu_list() -> Vec<u32> {
    vec![1]
}

/// One experiment, as read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: u64,
    #[serde(default)]
    pub char_exponent: CharSpec,
    #[serde(default)]
    pub sets: Option<SetSpecs>,
    #[serde(default = "default_weights")]
    pub weights: WeightSpec,
    pub variants: Vec<Variant>,
    #[serde(default = "default_nu_list")]
    pub nu_list: Vec<u32>,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub sweep: Option<SweepGrid>,
}

fn default_weights() -> WeightSpec {
    WeightSpec::ConstantOne
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldIssue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// One fully specified instance of a run or sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub p: u64,
    pub k: u64,
    pub seed: u64,
    pub sets: SetSpecs,
    pub weights: WeightSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn primes(&self, sweeping: bool) -> Vec<u64> {
        match (&self.sweep, sweeping) {
            (Some(SweepGrid { primes: Some(ps), .. }), true) => ps.clone(),
            _ => vec![self.p],
        }
    }

    /// Expands the config into instances in grid order (primes, sizes, seeds).
    ///
    /// Without `sweeping` only the base instance is produced. In a sweep,
    /// random weight seeds are replaced by the grid seed, and a `sizes` grid
    /// replaces the configured sets with [`SetSpecs::random`].
    pub fn instances(&self, sweeping: bool) -> Vec<InstanceSpec> {
        let grid = self.sweep.clone().filter(|_| sweeping).unwrap_or_default();
        let seeds = grid.seeds.clone().unwrap_or_else(|| vec![self.seed]);
        let mut out = Vec::new();
        for p in self.primes(sweeping) {
            let k = self.char_exponent.exponent(p);
            let sizes: Vec<Option<usize>> = match &grid.sizes {
                Some(s) => s.iter().copied().map(Some).collect(),
                None => vec![None],
            };
            for size in &sizes {
                for &seed in &seeds {
                    let sets = match (size, &self.sets) {
                        (Some(n), _) => SetSpecs::random(*n, seed),
                        (None, Some(s)) => s.clone(),
                        (None, None) => continue,
                    };
                    let weights = if sweeping {
                        self.weights.with_seed(seed)
                    } else {
                        self.weights
                    };
                    out.push(InstanceSpec { p, k, seed, sets, weights });
                }
            }
        }
        out
    }

    /// Field-level validation; empty on success.
    pub fn validate(&self, sweeping: bool) -> Vec<FieldIssue> {
        let mut issues = Vec::new();
        let mut push = |field: &str, message: String| {
            issues.push(FieldIssue {
                field: field.to_string(),
                message,
            })
        };
        let primes = self.primes(sweeping);
        let field_name = if sweeping && self.sweep.as_ref().is_some_and(|g| g.primes.is_some()) {
            "sweep.primes"
        } else {
            "p"
        };
        let mut good_primes = Vec::new();
        for &p in &primes {
            if !(3..=MAX_MODULUS).contains(&p) {
                push(field_name, format!("{p} is outside 3..=2^26"));
            } else if !is_prime(p) {
                push(field_name, format!("{p} is not prime"));
            } else {
                good_primes.push(p);
            }
        }
        if primes.is_empty() {
            push(field_name, "no primes given".into());
        }
        if self.variants.is_empty() {
            push("variants", "at least one variant is required".into());
        }
        let needs_char = self.variants.iter().any(|v| v.uses_character());
        for &p in &good_primes {
            let k = self.char_exponent.exponent(p);
            if k > p - 2 {
                push("char_exponent", format!("exponent {k} exceeds p - 2 = {} for p = {p}", p - 2));
            } else if k == 0 && needs_char {
                push("char_exponent", "character variants need a nontrivial character (k != 0)".into());
            }
        }
        if self.nu_list.is_empty() {
            push("nu_list", "at least one nu is required".into());
        }
        for &nu in &self.nu_list {
            if nu == 0 || nu > MAX_NU {
                push("nu_list", format!("nu = {nu} outside 1..={MAX_NU}"));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            push("epsilon", format!("{} must be finite and >= 0", self.epsilon));
        }
        let sweep_sizes = self
            .sweep
            .as_ref()
            .filter(|_| sweeping)
            .and_then(|g| g.sizes.clone());
        if sweeping {
            if let Some(g) = &self.sweep {
                if g.sizes.as_ref().is_some_and(|s| s.is_empty()) {
                    push("sweep.sizes", "empty grid".into());
                }
                if g.seeds.as_ref().is_some_and(|s| s.is_empty()) {
                    push("sweep.seeds", "empty grid".into());
                }
            }
        }
        if sweep_sizes.is_none() && self.sets.is_none() {
            push("sets", "required unless the sweep supplies sizes".into());
        }
        for &p in &good_primes {
            if let Some(sizes) = &sweep_sizes {
                for &n in sizes {
                    if n == 0 || n as u64 > p - 1 {
                        push("sweep.sizes", format!("size {n} outside 1..={} for p = {p}", p - 1));
                    } else {
                        self.check_dims(&mut push, p, [n; 4]);
                    }
                }
            } else if let Some(sets) = &self.sets {
                let field = match crate::field::PrimeField::new(p) {
                    Ok(f) => std::sync::Arc::new(f),
                    Err(_) => continue,
                };
                let mut dims = [0usize; 4];
                for (i, (name, spec)) in sets.iter().enumerate() {
                    match crate::setgen::FSet::generate(field.clone(), spec.clone()) {
                        Ok(s) if s.is_empty() => push(&format!("sets.{name}"), "set is empty".into()),
                        Ok(s) => dims[i] = s.len(),
                        Err(e) => push(&format!("sets.{name}"), e.to_string()),
                    }
                }
                if dims.iter().all(|&n| n > 0) {
                    self.check_dims(&mut push, p, dims);
                }
            }
        }
        issues
    }

    fn check_dims(&self, push: &mut impl FnMut(&str, String), p: u64, dims: [usize; 4]) {
        let terms: u128 = dims.iter().map(|&n| n as u128).product();
        if terms > TERM_BUDGET {
            push("sets", format!("{terms} terms for p = {p} exceed the budget {TERM_BUDGET}"));
        }
        let cells = (dims[1] * dims[2] * dims[3]) as u64;
        if matches!(self.weights, WeightSpec::RandomUnitTensor { .. }) && cells > MAX_TENSOR_CELLS {
            push("weights", format!("tensor over {cells} cells exceeds 2^24"));
        }
    }
}
