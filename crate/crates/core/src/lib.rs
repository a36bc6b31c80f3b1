//! Building blocks for planning and preparing many-to-many multilingual
//! translation corpora: language catalog handling, sparse pair mining plans,
//! Sinkhorn-balanced pair sampling, bitext filtering, shard planning,
//! vocabulary-overlap language grouping, and sublayer routing.

pub mod catalog;
pub mod filter;
pub mod groups;
pub mod io;
pub mod mining;
pub mod router;
pub mod sampling;
pub mod script;
pub mod shard;

pub use catalog::{Language, LanguageCatalog, ResourceTier, TierThresholds};
pub use filter::{BitextRecord, DropRule, FilterConfig, FilterOutcome, FilterReport, Origin};
pub use groups::{GroupingPlan, OverlapMatrix, VocabProfile};
pub use mining::{BtSelection, MiningPlan, Strategy};
pub use router::{RouteDecision, RouteQuery, Side};
pub use sampling::{MarginalTarget, PairMassMatrix, PairSampler, SinkhornResult};
pub use shard::{ShardAssignment, ShardPlan};
