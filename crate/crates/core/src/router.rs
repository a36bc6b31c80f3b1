//! Sublayer routing for language-specific layers, plus the multi-source
//! self-ensemble log-probability combiner.
//!
//! Routing is deterministic: encoder queries select the group of the source
//! language, decoder queries the group of the target language. During
//! training a fraction of records is re-routed to a uniformly chosen other
//! group; inference uses rate 0 and is a pure function of the query.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::{GroupError, GroupingPlan, OverlapMatrix};

pub const DEFAULT_REROUTE_RATE: f64 = 0.2;

#[derive(Debug, Error)]
pub enum RouteError {
    #[error("reroute rate must lie in [0, 1), got {0}")]
    RateOutOfRange(f64),
    #[error(transparent)]
    Grouping(#[from] GroupError),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid ensemble weights: {0}")]
    BadWeights(String),
    #[error("input {index} does not exponentiate to a distribution (sum {sum})")]
    NotADistribution { index: usize, sum: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Encoder,
    Decoder,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RouteQuery {
    pub src_lang: String,
    pub tgt_lang: String,
    pub side: Side,
}

impl RouteQuery {
    pub fn new(src_lang: &str, tgt_lang: &str, side: Side) -> Self {
        Self {
            src_lang: src_lang.to_string(),
            tgt_lang: tgt_lang.to_string(),
            side,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteDecision {
    pub group_id: usize,
    pub rerouted: bool,
    pub assigned_group_id: usize,
}

/// How re-routing picks the replacement group.
#[derive(Debug, Clone, Copy, Default)]
pub enum RerouteMode<'a> {
    /// Uniform over the other K-1 groups.
    #[default]
    Uniform,
    /// Weighted by vocabulary overlap between the assigned group's members
    /// and the candidate group's members; falls back to uniform when every
    /// candidate has zero overlap.
    Similarity(&'a OverlapMatrix),
}

/// Deterministic sublayer selection with random re-routing.
pub fn route<R: Rng>(
    query: &RouteQuery,
    grouping: &GroupingPlan,
    reroute_rate: f64,
    rng: &mut R,
) -> Result<RouteDecision, RouteError> {
    route_with_mode(query, grouping, reroute_rate, RerouteMode::Uniform, rng)
}

pub fn route_with_mode<R: Rng>(
    query: &RouteQuery,
    grouping: &GroupingPlan,
    reroute_rate: f64,
    mode: RerouteMode<'_>,
    rng: &mut R,
) -> Result<RouteDecision, RouteError> {
    if !(0.0..1.0).contains(&reroute_rate) {
        return Err(RouteError::RateOutOfRange(reroute_rate));
    }
    let routing_lang = match query.side {
        Side::Encoder => &query.src_lang,
        Side::Decoder => &query.tgt_lang,
    };
    // Both endpoint languages must belong to the grouping in use.
    let other_lang = match query.side {
        Side::Encoder => &query.tgt_lang,
        Side::Decoder => &query.src_lang,
    };
    grouping.group_of(other_lang)?;
    let assigned = grouping.group_of(routing_lang)?;

    let k = grouping.groups.len();
    if k > 1 && reroute_rate > 0.0 && rng.gen::<f64>() < reroute_rate {
        let group_id = match mode {
            RerouteMode::Uniform => {
                let pick = rng.gen_range(0..k - 1);
                if pick >= assigned {
                    pick + 1
                } else {
                    pick
                }
            }
            RerouteMode::Similarity(overlap) => {
                pick_by_similarity(assigned, grouping, overlap, rng)
            }
        };
        return Ok(RouteDecision {
            group_id,
            rerouted: true,
            assigned_group_id: assigned,
        });
    }

    Ok(RouteDecision {
        group_id: assigned,
        rerouted: false,
        assigned_group_id: assigned,
    })
}

fn pick_by_similarity<R: Rng>(
    assigned: usize,
    grouping: &GroupingPlan,
    overlap: &OverlapMatrix,
    rng: &mut R,
) -> usize {
    let candidates: Vec<usize> = (0..grouping.groups.len())
        .filter(|&g| g != assigned)
        .collect();
    let weights: Vec<f64> = candidates
        .iter()
        .map(|&g| group_overlap(&grouping.groups[assigned], &grouping.groups[g], overlap))
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return candidates[rng.gen_range(0..candidates.len())];
    }
    let mut t = rng.gen::<f64>() * total;
    for (g, w) in candidates.iter().zip(&weights) {
        t -= w;
        if t < 0.0 {
            return *g;
        }
    }
    *candidates.last().expect("k > 1")
}

/// Mean pairwise overlap between two groups' member languages. Languages
/// missing from the matrix contribute zero.
fn group_overlap(a: &[String], b: &[String], overlap: &OverlapMatrix) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for x in a {
        for y in b {
            sum += overlap.get_by_iso(x, y).unwrap_or(0.0);
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Weighted average of token log-probability vectors. Scores are used for
/// ranking, so no renormalization is applied. Terms with zero weight are
/// skipped, so one-hot weights reduce exactly to the corresponding input.
pub fn combine_logprobs(
    distributions: &[Vec<f64>],
    weights: &[f64],
) -> Result<Vec<f64>, RouteError> {
    if distributions.is_empty() {
        return Err(RouteError::BadWeights("no distributions given".into()));
    }
    if weights.len() != distributions.len() {
        return Err(RouteError::LengthMismatch {
            expected: distributions.len(),
            got: weights.len(),
        });
    }
    let v = distributions[0].len();
    for (index, d) in distributions.iter().enumerate() {
        if d.len() != v {
            return Err(RouteError::LengthMismatch {
                expected: v,
                got: d.len(),
            });
        }
        let sum: f64 = d.iter().map(|lp| lp.exp()).sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(RouteError::NotADistribution { index, sum });
        }
    }
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(RouteError::BadWeights("weights must be non-negative".into()));
    }
    let wsum: f64 = weights.iter().sum();
    if (wsum - 1.0).abs() > 1e-9 {
        return Err(RouteError::BadWeights(format!(
            "weights sum to {wsum}, expected 1"
        )));
    }

    let mut out = vec![0.0; v];
    for (d, &w) in distributions.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (o, lp) in out.iter_mut().zip(d) {
            *o += w * lp;
        }
    }
    Ok(out)
}

pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in scores.iter().enumerate() {
        if *v > scores[best] {
            best = i;
        }
    }
    best
}
