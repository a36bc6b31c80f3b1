//! Sparse language-pair mining plans and backtranslation direction selection.
//!
//! A plan is a set of unordered language pairs chosen for mining; training
//! directions are derived as both orientations of each pair. The bridge
//! strategy mines every pair inside a grouping, every pair of bridge
//! languages, and every language against English; random strategies are
//! seeded baselines for comparison.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::LanguageCatalog;

#[derive(Debug, Error)]
pub enum MiningError {
    #[error("grouping {0:?} has no bridge language")]
    NoBridgeInGrouping(String),
    #[error("sparsity target {0} outside [0, 1]")]
    SparsityOutOfRange(f64),
    #[error(
        "sparsity target {target} allows only {allowed} pairs but {forced} English pairs are mandatory"
    )]
    TooManyForcedPairs {
        target: f64,
        allowed: usize,
        forced: usize,
    },
    #[error("plan references {0:?}, which is not in the catalog")]
    UnknownLanguage(String),
    #[error("plan contains self-pair {0:?}")]
    SelfPair(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Bridge,
    Random,
    RandomWithEn,
    Full,
}

/// An unordered pair, stored with the lexicographically smaller iso first.
pub type Pair = (String, String);

fn ordered(a: &str, b: &str) -> Pair {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MiningPlan {
    pub strategy: Strategy,
    pub seed: Option<u64>,
    pub catalog_hash: String,
    pairs: BTreeSet<Pair>,
}

impl MiningPlan {
    fn new(strategy: Strategy, seed: Option<u64>, catalog: &LanguageCatalog) -> Self {
        Self {
            strategy,
            seed,
            catalog_hash: catalog.content_hash(),
            pairs: BTreeSet::new(),
        }
    }

    fn insert(&mut self, a: &str, b: &str) {
        debug_assert_ne!(a, b, "self-pairs are never planned");
        self.pairs.insert(ordered(a, b));
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        self.pairs.contains(&ordered(a, b))
    }

    /// Unordered pairs in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = &Pair> {
        self.pairs.iter()
    }

    /// Both orientations of every pair, lexicographic by (src, tgt).
    pub fn ordered_directions(&self) -> Vec<(String, String)> {
        let mut out = Vec::with_capacity(self.pairs.len() * 2);
        for (a, b) in &self.pairs {
            out.push((a.clone(), b.clone()));
            out.push((b.clone(), a.clone()));
        }
        out.sort();
        out
    }

    /// Checks that every referenced iso exists in the catalog and that no
    /// pair is degenerate.
    pub fn validate(&self, catalog: &LanguageCatalog) -> Result<(), MiningError> {
        for (a, b) in &self.pairs {
            if a == b {
                return Err(MiningError::SelfPair(a.clone()));
            }
            for iso in [a, b] {
                if !catalog.contains(iso) {
                    return Err(MiningError::UnknownLanguage(iso.clone()));
                }
            }
        }
        Ok(())
    }

    /// Plan body as TSV rows `src\ttgt` with src < tgt.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (a, b) in &self.pairs {
            out.push_str(a);
            out.push('\t');
            out.push_str(b);
            out.push('\n');
        }
        out
    }

    /// Sidecar metadata (strategy, seed, sparsity, catalog hash) as JSON.
    pub fn sidecar_json(&self, catalog: &LanguageCatalog) -> serde_json::Value {
        serde_json::json!({
            "strategy": self.strategy,
            "seed": self.seed,
            "pairs": self.len(),
            "sparsity": sparsity(self, catalog),
            "catalog_hash": self.catalog_hash,
        })
    }

    /// Parses a plan body written by [`MiningPlan::to_tsv`].
    pub fn from_tsv(
        content: &str,
        path: &str,
        strategy: Strategy,
        seed: Option<u64>,
        catalog: &LanguageCatalog,
    ) -> Result<Self, crate::io::TsvError> {
        let mut plan = Self::new(strategy, seed, catalog);
        for row in crate::io::parse_tsv(content, path, 2)? {
            plan.pairs
                .insert((row.fields[0].to_string(), row.fields[1].to_string()));
        }
        Ok(plan)
    }
}

/// Builds the bridge-strategy plan: all intra-grouping pairs, all pairs of
/// bridge languages, and every language paired with English. Fails if any
/// grouping lacks a bridge language.
pub fn build_bridge_plan(catalog: &LanguageCatalog) -> Result<MiningPlan, MiningError> {
    for (grouping_id, members) in catalog.groupings() {
        let has_bridge = members
            .iter()
            .any(|iso| catalog.get(iso).map(|l| l.is_bridge).unwrap_or(false));
        if !has_bridge {
            return Err(MiningError::NoBridgeInGrouping(grouping_id.clone()));
        }
    }

    let mut plan = MiningPlan::new(Strategy::Bridge, None, catalog);

    for members in catalog.groupings().values() {
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                plan.insert(a, b);
            }
        }
    }

    let bridges: Vec<&str> = catalog.bridges().map(|l| l.iso.as_str()).collect();
    for (i, a) in bridges.iter().enumerate() {
        for b in &bridges[i + 1..] {
            plan.insert(a, b);
        }
    }

    let english = catalog.english_iso();
    for lang in catalog.languages() {
        if lang.iso != english {
            plan.insert(&lang.iso, english);
        }
    }

    Ok(plan)
}

/// Every unordered pair in the catalog.
pub fn build_full_plan(catalog: &LanguageCatalog) -> MiningPlan {
    let mut plan = MiningPlan::new(Strategy::Full, None, catalog);
    let isos: Vec<&str> = catalog.languages().iter().map(|l| l.iso.as_str()).collect();
    for (i, a) in isos.iter().enumerate() {
        for b in &isos[i + 1..] {
            plan.insert(a, b);
        }
    }
    plan
}

/// Uniformly samples pairs without replacement until the plan holds
/// `round((1 - sparsity_target) * C(L, 2))` pairs. With `include_english`,
/// all English pairs are forced in first and only the remainder is sampled.
/// Deterministic for a fixed seed.
pub fn build_random_plan(
    catalog: &LanguageCatalog,
    sparsity_target: f64,
    include_english: bool,
    seed: u64,
) -> Result<MiningPlan, MiningError> {
    if !(0.0..=1.0).contains(&sparsity_target) {
        return Err(MiningError::SparsityOutOfRange(sparsity_target));
    }
    let l = catalog.len();
    let all_pairs = l * (l.saturating_sub(1)) / 2;
    let target = ((1.0 - sparsity_target) * all_pairs as f64).round() as usize;

    let strategy = if include_english {
        Strategy::RandomWithEn
    } else {
        Strategy::Random
    };
    let mut plan = MiningPlan::new(strategy, Some(seed), catalog);

    let english = catalog.english_iso().to_string();
    let forced = if include_english { l - 1 } else { 0 };
    if target < forced {
        return Err(MiningError::TooManyForcedPairs {
            target: sparsity_target,
            allowed: target,
            forced,
        });
    }

    let mut candidates: Vec<Pair> = Vec::with_capacity(all_pairs);
    let isos: Vec<&str> = catalog.languages().iter().map(|l| l.iso.as_str()).collect();
    for (i, a) in isos.iter().enumerate() {
        for b in &isos[i + 1..] {
            let pair = ordered(a, b);
            if include_english && (pair.0 == english || pair.1 == english) {
                plan.pairs.insert(pair);
            } else {
                candidates.push(pair);
            }
        }
    }
    candidates.sort();

    let remaining = target - plan.len();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, candidates.len(), remaining);
    for idx in picked.iter() {
        plan.pairs.insert(candidates[idx].clone());
    }
    Ok(plan)
}

/// Fraction of all possible unordered pairs NOT in the plan.
pub fn sparsity(plan: &MiningPlan, catalog: &LanguageCatalog) -> f64 {
    debug_assert!(plan.validate(catalog).is_ok());
    let l = catalog.len();
    let all_pairs = l * (l.saturating_sub(1)) / 2;
    if all_pairs == 0 {
        return 1.0;
    }
    1.0 - plan.len() as f64 / all_pairs as f64
}

/// Suggests the top-k languages per grouping by total bitext count as bridge
/// candidates, ties broken lexicographically.
pub fn suggest_bridges(
    catalog: &LanguageCatalog,
    per_grouping: usize,
) -> Vec<(String, Vec<String>)> {
    let mut out = Vec::new();
    for (grouping_id, members) in catalog.groupings() {
        let mut ranked: Vec<(&str, u64)> = members
            .iter()
            .filter_map(|iso| catalog.get(iso))
            .map(|l| (l.iso.as_str(), l.total_bitext()))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        out.push((
            grouping_id.clone(),
            ranked
                .into_iter()
                .take(per_grouping)
                .map(|(iso, _)| iso.to_string())
                .collect(),
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BtSelection {
    /// Ordered (src, tgt) directions, weakest score first.
    pub directions: Vec<(String, String)>,
    pub score_window: (f64, f64),
    pub limit: usize,
}

pub const BT_SCORE_LO: f64 = 2.0;
pub const BT_SCORE_HI: f64 = 10.0;
pub const BT_LIMIT: usize = 100;

/// Selects backtranslation directions: every direction whose score lies in
/// `[lo, hi]` (inclusive both ends), sorted by ascending score so truncation
/// to `limit` keeps the weakest directions. Ties break on (src, tgt).
pub fn select_bt_directions(
    scores: &[((String, String), f64)],
    lo: f64,
    hi: f64,
    limit: usize,
) -> BtSelection {
    let mut qualifying: Vec<(&(String, String), f64)> = scores
        .iter()
        .filter(|(_, s)| (lo..=hi).contains(s))
        .map(|(d, s)| (d, *s))
        .collect();
    qualifying.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .expect("scores are finite")
            .then_with(|| a.0.cmp(b.0))
    });
    qualifying.truncate(limit);
    BtSelection {
        directions: qualifying.into_iter().map(|(d, _)| d.clone()).collect(),
        score_window: (lo, hi),
        limit,
    }
}
