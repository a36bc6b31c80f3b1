//! Temperature rescaling and Sinkhorn-balanced pair sampling.
//!
//! Training pairs are drawn from a matrix of pair probabilities whose row and
//! column marginals must both match a temperature-rescaled language
//! distribution. Sequentially sampling source then target cannot satisfy the
//! target marginals when some languages are only paired with a few others,
//! so the matrix itself is balanced with Sinkhorn-Knopp iterative
//! proportional fitting: alternately rescale rows and columns toward the
//! target until both sets of sums agree within tolerance. Scaling is
//! multiplicative, so pairs with no bitext (zero entries) stay exactly zero
//! and never receive probability mass.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::LanguageCatalog;

pub const DEFAULT_TEMPERATURE: f64 = 5.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("counts are all zero; no distribution to rescale")]
    AllZeroCounts,
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("pair mass for {a:?}-{b:?} must be non-negative, got {value}")]
    NegativeMass { a: String, b: String, value: f64 },
    #[error("pair {a:?}-{b:?} listed more than once")]
    DuplicatePair { a: String, b: String },
    #[error("pair matrix references unknown language {0:?}")]
    UnknownLanguage(String),
    #[error("pair {0:?}-{0:?} pairs a language with itself")]
    SelfPair(String),
    #[error("pair matrix has no mass")]
    EmptyMatrix,
    #[error("matrix is {matrix} languages but target has {target}")]
    DimensionMismatch { matrix: usize, target: usize },
    #[error("infeasible support: language {0:?} has positive target probability but no bitext pairs")]
    InfeasibleSupport(String),
    #[error("cannot sample from an unconverged balancing result")]
    Unconverged,
    #[error("language {0:?} has an empty token multiset")]
    EmptyMultiset(String),
    #[error("matrix shape invalid: {0}")]
    BadShape(String),
}

/// Target marginal distribution over languages after temperature rescaling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginalTarget {
    pub probabilities: Vec<f64>,
    pub temperature: f64,
}

/// Rescales raw counts to probabilities proportional to `count^(1/T)`.
/// T = 1 reproduces the raw proportions; larger T flattens toward uniform.
/// Zero counts stay exactly zero.
pub fn temperature_rescale(counts: &[f64], temperature: f64) -> Result<MarginalTarget, SamplingError> {
    if temperature <= 0.0 {
        return Err(SamplingError::NonPositiveTemperature(temperature));
    }
    let exponent = 1.0 / temperature;
    let rescaled: Vec<f64> = counts
        .iter()
        .map(|&c| if c == 0.0 { 0.0 } else { c.powf(exponent) })
        .collect();
    let sum: f64 = rescaled.iter().sum();
    if sum <= 0.0 {
        return Err(SamplingError::AllZeroCounts);
    }
    Ok(MarginalTarget {
        probabilities: rescaled.into_iter().map(|v| v / sum).collect(),
        temperature,
    })
}

/// Symmetric matrix of pair probabilities over a fixed language ordering.
/// Entries are non-negative, the diagonal is zero, and the total mass is 1.
#[derive(Debug, Clone)]
pub struct PairMassMatrix {
    langs: Vec<String>,
    entries: Vec<f64>,
}

impl PairMassMatrix {
    /// Builds the empirical pair distribution from unordered pair counts.
    /// Each unordered pair contributes equal mass to both ordered cells.
    pub fn from_pair_counts(
        langs: Vec<String>,
        pairs: &[(String, String, f64)],
    ) -> Result<Self, SamplingError> {
        let l = langs.len();
        let index: BTreeMap<&str, usize> = langs
            .iter()
            .enumerate()
            .map(|(i, iso)| (iso.as_str(), i))
            .collect();
        let mut entries = vec![0.0; l * l];
        for (a, b, count) in pairs {
            if a == b {
                return Err(SamplingError::SelfPair(a.clone()));
            }
            if *count < 0.0 {
                return Err(SamplingError::NegativeMass {
                    a: a.clone(),
                    b: b.clone(),
                    value: *count,
                });
            }
            let (&i, &j) = match (index.get(a.as_str()), index.get(b.as_str())) {
                (Some(i), Some(j)) => (i, j),
                (None, _) => return Err(SamplingError::UnknownLanguage(a.clone())),
                (_, None) => return Err(SamplingError::UnknownLanguage(b.clone())),
            };
            if entries[i * l + j] != 0.0 {
                return Err(SamplingError::DuplicatePair {
                    a: a.clone(),
                    b: b.clone(),
                });
            }
            entries[i * l + j] = *count;
            entries[j * l + i] = *count;
        }
        let total: f64 = entries.iter().sum();
        if total <= 0.0 {
            return Err(SamplingError::EmptyMatrix);
        }
        for v in &mut entries {
            *v /= total;
        }
        Ok(Self { langs, entries })
    }

    /// Builds the pair distribution from a catalog's bitext counts.
    pub fn from_catalog(catalog: &LanguageCatalog) -> Result<Self, SamplingError> {
        let langs: Vec<String> = catalog.languages().iter().map(|l| l.iso.clone()).collect();
        let mut pairs = Vec::new();
        for lang in catalog.languages() {
            for (partner, &count) in &lang.bitext_sentences {
                if lang.iso < *partner {
                    pairs.push((lang.iso.clone(), partner.clone(), count as f64));
                }
            }
        }
        Self::from_pair_counts(langs, &pairs)
    }

    pub fn len(&self) -> usize {
        self.langs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.langs.is_empty()
    }

    pub fn langs(&self) -> &[String] {
        &self.langs
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.langs.len() + j]
    }

    /// Per-language mass (row sums). Proportional to each language's total
    /// pair count, and the default basis for the marginal target.
    pub fn language_totals(&self) -> Vec<f64> {
        let l = self.langs.len();
        (0..l)
            .map(|i| self.entries[i * l..(i + 1) * l].iter().sum())
            .collect()
    }

    /// Default marginal target: temperature-rescaled per-language totals.
    pub fn default_target(&self, temperature: f64) -> Result<MarginalTarget, SamplingError> {
        temperature_rescale(&self.language_totals(), temperature)
    }
}

/// Outcome of balancing a pair matrix toward target marginals.
#[derive(Debug, Clone)]
pub struct SinkhornResult {
    langs: Vec<String>,
    matrix: Vec<f64>,
    pub iterations: usize,
    pub max_marginal_error: f64,
    pub converged: bool,
}

impl SinkhornResult {
    /// Reassembles a result from its parts (e.g. a matrix loaded from disk).
    pub fn from_parts(
        langs: Vec<String>,
        matrix: Vec<f64>,
        iterations: usize,
        max_marginal_error: f64,
        converged: bool,
    ) -> Result<Self, SamplingError> {
        if matrix.len() != langs.len() * langs.len() {
            return Err(SamplingError::BadShape(format!(
                "{} languages require {} entries, got {}",
                langs.len(),
                langs.len() * langs.len(),
                matrix.len()
            )));
        }
        if matrix.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(SamplingError::BadShape(
                "entries must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            langs,
            matrix,
            iterations,
            max_marginal_error,
            converged,
        })
    }

    pub fn len(&self) -> usize {
        self.langs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.langs.is_empty()
    }

    pub fn langs(&self) -> &[String] {
        &self.langs
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.langs.len() + j]
    }

    pub fn total_mass(&self) -> f64 {
        self.matrix.iter().sum()
    }

    /// Nonzero cells in row-major order as (src index, tgt index, probability).
    pub fn nonzero_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let l = self.langs.len();
        self.matrix
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(move |(k, v)| (k / l, k % l, *v))
    }

    pub fn diagnostics_json(&self) -> serde_json::Value {
        serde_json::json!({
            "iterations": self.iterations,
            "max_marginal_error": self.max_marginal_error,
            "converged": self.converged,
        })
    }
}

/// Balances `q` so every row and column sum matches the target marginals
/// within `tol`, by alternating row and column proportional fitting.
///
/// Zero entries of `q` remain bit-exact zero. Languages whose target
/// probability is zero end up with an all-zero row and column. A language
/// with positive target but an empty row is reported as infeasible before
/// any iteration runs. Hitting `max_iter` returns a result with
/// `converged == false` and the residual error; it is never silently
/// reported as converged.
pub fn sinkhorn_balance(
    q: &PairMassMatrix,
    target: &MarginalTarget,
    tol: f64,
    max_iter: usize,
) -> Result<SinkhornResult, SamplingError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let l = q.len();
    if target.probabilities.len() != l {
        return Err(SamplingError::DimensionMismatch {
            matrix: l,
            target: target.probabilities.len(),
        });
    }
    let t = &target.probabilities;
    for i in 0..l {
        if t[i] > 0.0 && (0..l).all(|j| q.get(i, j) == 0.0) {
            return Err(SamplingError::InfeasibleSupport(q.langs[i].clone()));
        }
    }

    let mut p = q.entries.clone();
    let mut iterations = 0;
    let mut err = f64::INFINITY;

    while iterations < max_iter {
        // Row fitting.
        for i in 0..l {
            let row = &mut p[i * l..(i + 1) * l];
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                let f = t[i] / sum;
                for v in row.iter_mut() {
                    *v *= f;
                }
            }
        }
        // Column fitting.
        for j in 0..l {
            let mut sum = 0.0;
            for i in 0..l {
                sum += p[i * l + j];
            }
            if sum > 0.0 {
                let f = t[j] / sum;
                for i in 0..l {
                    p[i * l + j] *= f;
                }
            }
        }
        iterations += 1;

        // Columns are exact after column fitting; rows carry the residual.
        err = 0.0;
        for i in 0..l {
            let row_sum: f64 = p[i * l..(i + 1) * l].iter().sum();
            err = err.max((row_sum - t[i]).abs());
        }
        for j in 0..l {
            let mut col_sum = 0.0;
            for i in 0..l {
                col_sum += p[i * l + j];
            }
            err = err.max((col_sum - t[j]).abs());
        }
        if err < tol {
            break;
        }
    }

    Ok(SinkhornResult {
        langs: q.langs.clone(),
        matrix: p,
        iterations,
        max_marginal_error: err,
        converged: err < tol,
    })
}

/// Inverse-CDF sampler over a converged balanced matrix. Cells are flattened
/// row-major, so a (seed, result) pair fully determines the draw sequence.
pub struct PairSampler {
    langs: Vec<String>,
    cells: Vec<(usize, usize)>,
    cdf: Vec<f64>,
    rng: ChaCha20Rng,
}

impl PairSampler {
    pub fn new(result: &SinkhornResult, seed: u64) -> Result<Self, SamplingError> {
        if !result.converged {
            return Err(SamplingError::Unconverged);
        }
        let mut cells = Vec::new();
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        for (i, j, v) in result.nonzero_entries() {
            acc += v;
            cells.push((i, j));
            cdf.push(acc);
        }
        if cells.is_empty() {
            return Err(SamplingError::EmptyMatrix);
        }
        Ok(Self {
            langs: result.langs.clone(),
            cells,
            cdf,
            rng: ChaCha20Rng::seed_from_u64(seed),
        })
    }

    /// Draws one ordered (src, tgt) cell index pair.
    pub fn draw(&mut self) -> (usize, usize) {
        let total = *self.cdf.last().expect("non-empty");
        let t = self.rng.gen::<f64>() * total;
        let idx = self.cdf.partition_point(|&c| c <= t).min(self.cells.len() - 1);
        self.cells[idx]
    }

    /// Draws one ordered (src, tgt) iso pair.
    pub fn draw_isos(&mut self) -> (&str, &str) {
        let (i, j) = self.draw();
        (self.langs[i].as_str(), self.langs[j].as_str())
    }
}

/// Fraction of token occurrences per language that the dictionary covers.
pub fn dictionary_coverage(
    dictionary: &BTreeSet<String>,
    corpus_tokens: &BTreeMap<String, BTreeMap<String, u64>>,
) -> Result<BTreeMap<String, f64>, SamplingError> {
    let mut out = BTreeMap::new();
    for (lang, multiset) in corpus_tokens {
        let total: u64 = multiset.values().sum();
        if total == 0 {
            return Err(SamplingError::EmptyMultiset(lang.clone()));
        }
        let covered: u64 = multiset
            .iter()
            .filter(|(token, _)| dictionary.contains(*token))
            .map(|(_, count)| *count)
            .sum();
        out.insert(lang.clone(), covered as f64 / total as f64);
    }
    Ok(out)
}
