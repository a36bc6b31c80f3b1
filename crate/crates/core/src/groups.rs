//! Language groups for language-specific layers: every language above a
//! data-size threshold gets its own group; the rest are clustered by
//! vocabulary overlap into a fixed number of groups with roughly balanced
//! training data.
//!
//! Clustering is greedy agglomerative over Jaccard overlap of top-token
//! sets, with a mass cap that keeps any cluster from hoarding the data, and
//! lexicographic tie-breaking so identical inputs always produce identical
//! groupings.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("profile for {0:?} has an empty token set")]
    EmptyTokenSet(String),
    #[error("duplicate profile for language {0:?}")]
    DuplicateLanguage(String),
    #[error("overlap matrix needs at least two profiles")]
    NeedTwoProfiles,
    #[error("target cluster count must be at least 1")]
    TargetZero,
    #[error("{remaining} languages below the singleton threshold cannot form {target} clusters")]
    TooFewRemaining { remaining: usize, target: usize },
    #[error("language {0:?} is not covered by the grouping plan")]
    UnknownLanguage(String),
}

pub const DEFAULT_SINGLETON_THRESHOLD: u64 = 100_000_000;
pub const DEFAULT_TARGET_CLUSTERS: usize = 18;
pub const DEFAULT_BALANCE_SLACK: f64 = 2.0;
pub const DEFAULT_TOP_TOKENS: usize = 50_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VocabProfile {
    pub language: String,
    pub top_tokens: BTreeSet<String>,
    pub total_sentences: u64,
}

impl VocabProfile {
    /// Keeps the `top_n` most frequent tokens (count descending, token
    /// ascending on ties).
    pub fn from_token_counts(
        language: &str,
        counts: impl IntoIterator<Item = (String, u64)>,
        top_n: usize,
        total_sentences: u64,
    ) -> Self {
        let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(top_n);
        Self {
            language: language.to_string(),
            top_tokens: ranked.into_iter().map(|(t, _)| t).collect(),
            total_sentences,
        }
    }
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let intersection = a.intersection(b).count();
    let union = a.len() + b.len() - intersection;
    if union == 0 {
        return 0.0;
    }
    intersection as f64 / union as f64
}

/// Symmetric pairwise Jaccard overlaps with a unit diagonal, over languages
/// sorted by iso.
#[derive(Debug, Clone)]
pub struct OverlapMatrix {
    langs: Vec<String>,
    values: Vec<f64>,
}

impl OverlapMatrix {
    pub fn langs(&self) -> &[String] {
        &self.langs
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.langs.len() + j]
    }

    pub fn get_by_iso(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.langs.iter().position(|l| l == a)?;
        let j = self.langs.iter().position(|l| l == b)?;
        Some(self.get(i, j))
    }
}

/// Computes vocabulary overlap between every pair of profiles.
pub fn overlap_matrix(profiles: &[VocabProfile]) -> Result<OverlapMatrix, GroupError> {
    if profiles.len() < 2 {
        return Err(GroupError::NeedTwoProfiles);
    }
    let mut sorted: Vec<&VocabProfile> = profiles.iter().collect();
    sorted.sort_by(|a, b| a.language.cmp(&b.language));
    for w in sorted.windows(2) {
        if w[0].language == w[1].language {
            return Err(GroupError::DuplicateLanguage(w[0].language.clone()));
        }
    }
    for p in &sorted {
        if p.top_tokens.is_empty() {
            return Err(GroupError::EmptyTokenSet(p.language.clone()));
        }
    }
    let n = sorted.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in i + 1..n {
            let v = jaccard(&sorted[i].top_tokens, &sorted[j].top_tokens);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(OverlapMatrix {
        langs: sorted.iter().map(|p| p.language.clone()).collect(),
        values,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupingPlan {
    /// Member isos per group, each sorted; groups sorted by first member.
    pub groups: Vec<Vec<String>>,
    pub k: usize,
    pub singleton_threshold: u64,
}

impl GroupingPlan {
    pub fn group_of(&self, iso: &str) -> Result<usize, GroupError> {
        self.groups
            .iter()
            .position(|g| g.iter().any(|m| m == iso))
            .ok_or_else(|| GroupError::UnknownLanguage(iso.to_string()))
    }

    pub fn contains(&self, iso: &str) -> bool {
        self.group_of(iso).is_ok()
    }

    /// All member isos, sorted.
    pub fn languages(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .groups
            .iter()
            .flat_map(|g| g.iter().map(|s| s.as_str()))
            .collect();
        out.sort_unstable();
        out
    }
}

struct Cluster {
    members: Vec<usize>,
    mass: u64,
    rep: String,
}

/// Builds the grouping plan: singleton groups for languages strictly above
/// `singleton_threshold` sentences, then greedy agglomeration of the rest by
/// highest pairwise overlap until exactly `target_clusters` clusters remain.
/// Merges that would push a cluster past `(remaining mass / target) * slack`
/// are deferred; if no merge fits the cap, the lightest pair merges anyway
/// so the target count is always reached.
pub fn build_groups(
    profiles: &[VocabProfile],
    singleton_threshold: u64,
    target_clusters: usize,
    balance_slack: f64,
) -> Result<GroupingPlan, GroupError> {
    if target_clusters == 0 {
        return Err(GroupError::TargetZero);
    }
    let mut sorted: Vec<&VocabProfile> = profiles.iter().collect();
    sorted.sort_by(|a, b| a.language.cmp(&b.language));
    for w in sorted.windows(2) {
        if w[0].language == w[1].language {
            return Err(GroupError::DuplicateLanguage(w[0].language.clone()));
        }
    }
    for p in &sorted {
        if p.top_tokens.is_empty() {
            return Err(GroupError::EmptyTokenSet(p.language.clone()));
        }
    }

    let mut groups: Vec<Vec<String>> = Vec::new();
    let mut rest: Vec<&VocabProfile> = Vec::new();
    for p in sorted {
        if p.total_sentences > singleton_threshold {
            groups.push(vec![p.language.clone()]);
        } else {
            rest.push(p);
        }
    }
    if rest.len() < target_clusters {
        return Err(GroupError::TooFewRemaining {
            remaining: rest.len(),
            target: target_clusters,
        });
    }

    let n = rest.len();
    let mut overlap = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = jaccard(&rest[i].top_tokens, &rest[j].top_tokens);
            overlap[i * n + j] = v;
            overlap[j * n + i] = v;
        }
    }

    let total_mass: u64 = rest.iter().map(|p| p.total_sentences).sum();
    let cap = total_mass as f64 / target_clusters as f64 * balance_slack;

    let mut clusters: Vec<Cluster> = rest
        .iter()
        .enumerate()
        .map(|(i, p)| Cluster {
            members: vec![i],
            mass: p.total_sentences,
            rep: p.language.clone(),
        })
        .collect();

    while clusters.len() > target_clusters {
        // Inter-cluster overlap is the best pairwise member overlap.
        let score = |a: &Cluster, b: &Cluster| -> f64 {
            let mut best = 0.0f64;
            for &x in &a.members {
                for &y in &b.members {
                    best = best.max(overlap[x * n + y]);
                }
            }
            best
        };

        let mut best: Option<(f64, usize, usize)> = None;
        let mut fallback: Option<(u64, usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let combined = clusters[i].mass + clusters[j].mass;
                let keys = |x: usize, y: usize| {
                    (clusters[x].rep.clone(), clusters[y].rep.clone())
                };
                if (combined as f64) <= cap {
                    let s = score(&clusters[i], &clusters[j]);
                    let better = match &best {
                        None => true,
                        Some((bs, bi, bj)) => {
                            s > *bs || (s == *bs && keys(i, j) < keys(*bi, *bj))
                        }
                    };
                    if better {
                        best = Some((s, i, j));
                    }
                }
                let lighter = match &fallback {
                    None => true,
                    Some((fm, fi, fj)) => {
                        combined < *fm || (combined == *fm && keys(i, j) < keys(*fi, *fj))
                    }
                };
                if lighter {
                    fallback = Some((combined, i, j));
                }
            }
        }

        let (i, j) = match (best, fallback) {
            (Some((_, i, j)), _) => (i, j),
            (None, Some((_, i, j))) => (i, j),
            (None, None) => unreachable!("len > target >= 1 implies a pair exists"),
        };
        let absorbed = clusters.swap_remove(j.max(i));
        let keeper = &mut clusters[j.min(i)];
        keeper.members.extend(absorbed.members);
        keeper.mass += absorbed.mass;
        if absorbed.rep < keeper.rep {
            keeper.rep = absorbed.rep;
        }
        clusters.sort_by(|a, b| a.rep.cmp(&b.rep));
    }

    for c in clusters {
        let mut members: Vec<String> = c
            .members
            .into_iter()
            .map(|i| rest[i].language.clone())
            .collect();
        members.sort();
        groups.push(members);
    }
    groups.sort();

    Ok(GroupingPlan {
        k: groups.len(),
        groups,
        singleton_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(lang: &str, tokens: &[&str], total: u64) -> VocabProfile {
        VocabProfile {
            language: lang.to_string(),
            top_tokens: tokens.iter().map(|t| t.to_string()).collect(),
            total_sentences: total,
        }
    }

    #[test]
    fn jaccard_examples() {
        let a = profile("aa", &["a", "b", "c"], 1);
        let b = profile("bb", &["a", "b", "c"], 1);
        let c = profile("cc", &["x", "y"], 1);
        let d = profile("dd", &["b", "c", "d"], 1);
        let m = overlap_matrix(&[a, b, c, d]).unwrap();
        assert_eq!(m.get_by_iso("aa", "bb").unwrap(), 1.0);
        assert_eq!(m.get_by_iso("aa", "cc").unwrap(), 0.0);
        assert_eq!(m.get_by_iso("aa", "dd").unwrap(), 0.5);
        assert_eq!(m.get_by_iso("aa", "aa").unwrap(), 1.0);
    }

    #[test]
    fn overlap_rejects_empty_token_set() {
        let a = profile("aa", &["a"], 1);
        let b = profile("bb", &[], 1);
        assert!(matches!(
            overlap_matrix(&[a, b]),
            Err(GroupError::EmptyTokenSet(l)) if l == "bb"
        ));
    }

    #[test]
    fn identical_vocab_merges_first() {
        let profiles = vec![
            profile("aa", &["x", "y", "z"], 10),
            profile("bb", &["x", "y", "z"], 10),
            profile("cc", &["p", "q"], 10),
        ];
        let plan = build_groups(&profiles, 1_000, 2, 2.0).unwrap();
        assert_eq!(plan.k, 2);
        assert!(plan
            .groups
            .contains(&vec!["aa".to_string(), "bb".to_string()]));
    }

    #[test]
    fn singleton_rule_is_strictly_greater() {
        let profiles = vec![
            profile("big", &["a"], 101),
            profile("edge", &["a"], 100),
            profile("low", &["a"], 1),
        ];
        let plan = build_groups(&profiles, 100, 1, 2.0).unwrap();
        // "big" exceeds the threshold; "edge" sits exactly on it and stays
        // clustered with "low".
        assert_eq!(plan.k, 2);
        assert!(plan.groups.contains(&vec!["big".to_string()]));
        assert!(plan
            .groups
            .contains(&vec!["edge".to_string(), "low".to_string()]));
    }

    #[test]
    fn partition_property() {
        let profiles: Vec<VocabProfile> = (0..12)
            .map(|i| {
                profile(
                    &format!("l{i:02}"),
                    &[&format!("t{}", i / 3), "shared"],
                    (i as u64 + 1) * 7,
                )
            })
            .collect();
        let plan = build_groups(&profiles, 1_000, 4, 2.0).unwrap();
        let mut seen = BTreeSet::new();
        for g in &plan.groups {
            for m in g {
                assert!(seen.insert(m.clone()), "{m} appears twice");
            }
        }
        assert_eq!(seen.len(), 12);
        assert_eq!(plan.k, 4);
    }

    #[test]
    fn deterministic_for_identical_inputs() {
        let profiles: Vec<VocabProfile> = (0..10)
            .map(|i| profile(&format!("l{i}"), &[&format!("t{}", i % 4), "s"], 50))
            .collect();
        let a = build_groups(&profiles, 1_000, 3, 2.0).unwrap();
        let mut reversed = profiles.clone();
        reversed.reverse();
        let b = build_groups(&reversed, 1_000, 3, 2.0).unwrap();
        assert_eq!(a.groups, b.groups);
    }

    #[test]
    fn too_few_remaining_errors() {
        let profiles = vec![profile("aa", &["a"], 1), profile("bb", &["b"], 1)];
        assert!(matches!(
            build_groups(&profiles, 100, 3, 2.0),
            Err(GroupError::TooFewRemaining {
                remaining: 2,
                target: 3
            })
        ));
    }

    #[test]
    fn profile_keeps_top_n_by_count() {
        let p = VocabProfile::from_token_counts(
            "xx",
            vec![
                ("rare".to_string(), 1),
                ("common".to_string(), 10),
                ("mid".to_string(), 5),
            ],
            2,
            100,
        );
        assert!(p.top_tokens.contains("common"));
        assert!(p.top_tokens.contains("mid"));
        assert!(!p.top_tokens.contains("rare"));
    }

    #[test]
    fn group_lookup() {
        let profiles = vec![
            profile("aa", &["x"], 10),
            profile("bb", &["x"], 10),
        ];
        let plan = build_groups(&profiles, 1_000, 1, 2.0).unwrap();
        assert_eq!(plan.group_of("aa").unwrap(), plan.group_of("bb").unwrap());
        assert!(plan.group_of("zz").is_err());
    }
}
