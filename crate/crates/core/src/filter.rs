//! Bitext postprocessing chain: evaluation-set removal, punctuation,
//! length and length-ratio limits, core-character filtering, deduplication,
//! and backtranslation tagging.
//!
//! Per-record rules run in a fixed order and a record is attributed to the
//! first rule it fails. All thresholds are strict "greater than" comparisons:
//! a sentence at exactly 50% punctuation, exactly 250 subwords, or exactly
//! ratio 3.0 is kept. The chain applies the per-record rules first, then
//! deduplication, then tags surviving backtranslated records.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::catalog::LanguageCatalog;
use crate::script;

/// Reserved encoder-side marker prefixed to backtranslated source text.
pub const BT_TOKEN: &str = "__bt__";

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("{side} text is empty")]
    EmptyText { side: &'static str },
    #[error("no core-character table for language {0:?}")]
    MissingCoreTable(String),
    #[error("cannot BT-tag a mined record")]
    TagMined,
    #[error("record language {0:?} is not in the catalog")]
    UnknownLanguage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Mined,
    Backtranslated,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Mined => write!(f, "mined"),
            Origin::Backtranslated => write!(f, "backtranslated"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitextRecord {
    pub src_lang: String,
    pub tgt_lang: String,
    pub src_text: String,
    pub tgt_text: String,
    pub origin: Origin,
    pub bt_tagged: bool,
}

impl BitextRecord {
    pub fn mined(src_lang: &str, tgt_lang: &str, src_text: &str, tgt_text: &str) -> Self {
        Self {
            src_lang: src_lang.into(),
            tgt_lang: tgt_lang.into(),
            src_text: src_text.into(),
            tgt_text: tgt_text.into(),
            origin: Origin::Mined,
            bt_tagged: false,
        }
    }

    pub fn backtranslated(src_lang: &str, tgt_lang: &str, src_text: &str, tgt_text: &str) -> Self {
        Self {
            origin: Origin::Backtranslated,
            ..Self::mined(src_lang, tgt_lang, src_text, tgt_text)
        }
    }

    /// Source text as serialized: BT-tagged records carry the `__bt__` prefix.
    pub fn serialized_src(&self) -> String {
        if self.bt_tagged {
            format!("{BT_TOKEN} {}", self.src_text)
        } else {
            self.src_text.clone()
        }
    }

    pub fn direction(&self) -> String {
        format!("{}-{}", self.src_lang, self.tgt_lang)
    }

    /// Checks the record invariants: non-empty texts, tag implies
    /// backtranslated origin, and (when a catalog is given) known languages.
    pub fn validate(&self, catalog: Option<&LanguageCatalog>) -> Result<(), FilterError> {
        if self.src_text.trim().is_empty() {
            return Err(FilterError::EmptyText { side: "source" });
        }
        if self.tgt_text.trim().is_empty() {
            return Err(FilterError::EmptyText { side: "target" });
        }
        if self.bt_tagged && self.origin != Origin::Backtranslated {
            return Err(FilterError::TagMined);
        }
        if let Some(cat) = catalog {
            for iso in [&self.src_lang, &self.tgt_lang] {
                if !cat.contains(iso) {
                    return Err(FilterError::UnknownLanguage(iso.clone()));
                }
            }
        }
        Ok(())
    }
}

/// Trims and collapses runs of whitespace to single spaces. This is the
/// normalization used for deduplication keys and blocklist matching.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn is_punct_or_symbol(c: char) -> bool {
    matches!(
        c.general_category_group(),
        GeneralCategoryGroup::Punctuation | GeneralCategoryGroup::Symbol
    )
}

/// Fraction of punctuation and symbol characters among non-whitespace
/// characters.
pub fn punctuation_ratio(text: &str) -> Result<f64, FilterError> {
    let mut punct = 0usize;
    let mut total = 0usize;
    for c in text.chars() {
        if c.is_whitespace() {
            continue;
        }
        total += 1;
        if is_punct_or_symbol(c) {
            punct += 1;
        }
    }
    if total == 0 {
        return Err(FilterError::EmptyText { side: "source" });
    }
    Ok(punct as f64 / total as f64)
}

/// Pluggable subword counter. The default whitespace splitter keeps tests
/// and desk-scale runs independent of any trained segmentation model; a
/// trained-model adapter implements the same trait.
pub trait SubwordCounter {
    fn count_subwords(&self, text: &str) -> usize;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceCounter;

impl SubwordCounter for WhitespaceCounter {
    fn count_subwords(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }
}

/// Per-language set of "core" characters. Whitespace, numbers, and
/// punctuation always count as core; Latin letters count as core for
/// languages whose declared scripts are all non-Latin.
#[derive(Debug, Clone)]
pub struct CoreCharTable {
    ranges: Vec<(u32, u32)>,
    latin_exception: bool,
}

impl CoreCharTable {
    pub fn new(ranges: Vec<(u32, u32)>, latin_exception: bool) -> Self {
        Self {
            ranges,
            latin_exception,
        }
    }

    /// Builds the table from catalog script names. Unknown script names
    /// contribute no ranges.
    pub fn from_scripts(scripts: &[String]) -> Self {
        let mut ranges = Vec::new();
        let mut any_latin = false;
        for s in scripts {
            if script::is_latin(s) {
                any_latin = true;
            }
            if let Some(r) = script::ranges_for(s) {
                ranges.extend(r);
            }
        }
        Self {
            ranges,
            latin_exception: !any_latin,
        }
    }

    pub fn is_core(&self, c: char) -> bool {
        if c.is_whitespace() || c.is_numeric() || is_punct_or_symbol(c) {
            return true;
        }
        if script::char_in_ranges(c, &self.ranges) {
            return true;
        }
        if self.latin_exception {
            if let Some(latin) = script::ranges_for("latin") {
                return script::char_in_ranges(c, &latin);
            }
        }
        false
    }

    /// Fraction of characters not marked core.
    pub fn non_core_ratio(&self, text: &str) -> f64 {
        let total = text.chars().count();
        if total == 0 {
            return 0.0;
        }
        let non_core = text.chars().filter(|&c| !self.is_core(c)).count();
        non_core as f64 / total as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MissingTablePolicy {
    /// Skip the core-character rule for languages without a table.
    #[default]
    Skip,
    /// Treat a missing table as a hard error.
    Error,
}

#[derive(Debug, Clone)]
pub struct FilterConfig {
    pub punct_threshold: f64,
    pub max_subwords: usize,
    pub max_len_ratio: f64,
    pub core_char_threshold: f64,
    pub core_char_tables: HashMap<String, CoreCharTable>,
    pub eval_blocklist: HashSet<String>,
    pub missing_table_policy: MissingTablePolicy,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            punct_threshold: 0.5,
            max_subwords: 250,
            max_len_ratio: 3.0,
            core_char_threshold: 0.5,
            core_char_tables: HashMap::new(),
            eval_blocklist: HashSet::new(),
            missing_table_policy: MissingTablePolicy::default(),
        }
    }
}

impl FilterConfig {
    /// Populates core-character tables for every catalog language from its
    /// declared scripts. Existing explicit tables are kept.
    pub fn with_core_tables_from(mut self, catalog: &LanguageCatalog) -> Self {
        for lang in catalog.languages() {
            self.core_char_tables
                .entry(lang.iso.clone())
                .or_insert_with(|| CoreCharTable::from_scripts(&lang.scripts));
        }
        self
    }

    /// Replaces the blocklist with normalized evaluation sentences.
    pub fn with_eval_blocklist<I: IntoIterator<Item = S>, S: AsRef<str>>(
        mut self,
        sentences: I,
    ) -> Self {
        self.eval_blocklist = sentences
            .into_iter()
            .map(|s| normalize_whitespace(s.as_ref()))
            .collect();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropRule {
    EvalOverlap,
    Punctuation,
    MaxSubwords,
    LenRatio,
    CoreChars,
    Duplicate,
}

impl fmt::Display for DropRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DropRule::EvalOverlap => "eval_overlap",
            DropRule::Punctuation => "punctuation",
            DropRule::MaxSubwords => "max_subwords",
            DropRule::LenRatio => "len_ratio",
            DropRule::CoreChars => "core_chars",
            DropRule::Duplicate => "duplicate",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterOutcome {
    Keep,
    Drop(DropRule),
}

/// Drops the record when either side matches a normalized evaluation
/// sentence, regardless of which language pair the sentence came from.
pub fn remove_eval_overlap(record: &BitextRecord, blocklist: &HashSet<String>) -> FilterOutcome {
    if blocklist.contains(&normalize_whitespace(&record.src_text))
        || blocklist.contains(&normalize_whitespace(&record.tgt_text))
    {
        FilterOutcome::Drop(DropRule::EvalOverlap)
    } else {
        FilterOutcome::Keep
    }
}

/// Applies the per-record rules in fixed order: evaluation blocklist,
/// punctuation (either side), subword length (either side), length ratio,
/// core characters. Returns the first failing rule.
pub fn filter_record<C: SubwordCounter>(
    record: &BitextRecord,
    config: &FilterConfig,
    counter: &C,
) -> Result<FilterOutcome, FilterError> {
    record.validate(None)?;

    if let FilterOutcome::Drop(rule) = remove_eval_overlap(record, &config.eval_blocklist) {
        return Ok(FilterOutcome::Drop(rule));
    }

    for text in [&record.src_text, &record.tgt_text] {
        if punctuation_ratio(text)? > config.punct_threshold {
            return Ok(FilterOutcome::Drop(DropRule::Punctuation));
        }
    }

    let src_len = counter.count_subwords(&record.src_text);
    let tgt_len = counter.count_subwords(&record.tgt_text);
    if src_len > config.max_subwords || tgt_len > config.max_subwords {
        return Ok(FilterOutcome::Drop(DropRule::MaxSubwords));
    }

    let (lo, hi) = if src_len <= tgt_len {
        (src_len, tgt_len)
    } else {
        (tgt_len, src_len)
    };
    if lo == 0 || hi as f64 / lo as f64 > config.max_len_ratio {
        return Ok(FilterOutcome::Drop(DropRule::LenRatio));
    }

    for (lang, text) in [
        (&record.src_lang, &record.src_text),
        (&record.tgt_lang, &record.tgt_text),
    ] {
        match config.core_char_tables.get(lang.as_str()) {
            Some(table) => {
                if table.non_core_ratio(text) > config.core_char_threshold {
                    return Ok(FilterOutcome::Drop(DropRule::CoreChars));
                }
            }
            None => match config.missing_table_policy {
                MissingTablePolicy::Skip => {}
                MissingTablePolicy::Error => {
                    return Err(FilterError::MissingCoreTable(lang.clone()))
                }
            },
        }
    }

    Ok(FilterOutcome::Keep)
}

/// Sets the BT tag on a backtranslated record. Idempotent; tagging a mined
/// record is an error.
pub fn tag_backtranslation(mut record: BitextRecord) -> Result<BitextRecord, FilterError> {
    if record.origin != Origin::Backtranslated {
        return Err(FilterError::TagMined);
    }
    record.bt_tagged = true;
    Ok(record)
}

/// Order-preserving deduplication on (normalized src, normalized tgt) keys.
/// The key does not include the languages, but swapping a record's direction
/// swaps its texts, so both orientations of a pair survive.
pub struct Deduper {
    seen: HashSet<(String, String)>,
}

impl Deduper {
    pub fn new() -> Self {
        Self {
            seen: HashSet::new(),
        }
    }

    /// True when the record is the first occurrence of its key.
    pub fn first_occurrence(&mut self, record: &BitextRecord) -> bool {
        self.seen.insert((
            normalize_whitespace(&record.src_text),
            normalize_whitespace(&record.tgt_text),
        ))
    }
}

impl Default for Deduper {
    fn default() -> Self {
        Self::new()
    }
}

/// Emits the first occurrence of each normalized record, preserving order.
pub fn dedup_stream(records: impl IntoIterator<Item = BitextRecord>) -> Vec<BitextRecord> {
    let mut deduper = Deduper::new();
    records
        .into_iter()
        .filter(|r| deduper.first_occurrence(r))
        .collect()
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct DirectionStats {
    pub input: u64,
    pub kept: u64,
    pub drops: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct FilterReport {
    pub input_count: u64,
    pub kept_count: u64,
    pub drops: BTreeMap<String, u64>,
    pub per_direction: BTreeMap<String, DirectionStats>,
}

impl FilterReport {
    fn note(&mut self, direction: String, outcome: Option<DropRule>) {
        self.input_count += 1;
        let dir = self.per_direction.entry(direction).or_default();
        dir.input += 1;
        match outcome {
            None => {
                self.kept_count += 1;
                dir.kept += 1;
            }
            Some(rule) => {
                *self.drops.entry(rule.to_string()).or_default() += 1;
                *dir.drops.entry(rule.to_string()).or_default() += 1;
            }
        }
    }

    pub fn total_drops(&self) -> u64 {
        self.drops.values().sum()
    }

    /// Conservation check: every input record is either kept or attributed
    /// to exactly one drop rule, globally and per direction.
    pub fn is_conserved(&self) -> bool {
        if self.input_count != self.kept_count + self.total_drops() {
            return false;
        }
        self.per_direction.values().all(|d| {
            let drops: u64 = d.drops.values().sum();
            d.input == d.kept + drops
        })
    }
}

/// Stateful filter chain: per-record rules, then deduplication, then BT
/// tagging, with drop accounting per rule and per direction.
pub struct FilterChain<C: SubwordCounter = WhitespaceCounter> {
    config: FilterConfig,
    counter: C,
    deduper: Deduper,
    report: FilterReport,
}

impl FilterChain<WhitespaceCounter> {
    pub fn new(config: FilterConfig) -> Self {
        Self::with_counter(config, WhitespaceCounter)
    }
}

impl<C: SubwordCounter> FilterChain<C> {
    pub fn with_counter(config: FilterConfig, counter: C) -> Self {
        Self {
            config,
            counter,
            deduper: Deduper::new(),
            report: FilterReport::default(),
        }
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    /// Runs one record through the chain. `Ok(None)` means dropped (and
    /// accounted); `Ok(Some(..))` is the surviving, possibly tagged record.
    pub fn process(&mut self, record: BitextRecord) -> Result<Option<BitextRecord>, FilterError> {
        let outcome = filter_record(&record, &self.config, &self.counter)?;
        self.process_prefiltered(record, outcome)
    }

    /// Continues the chain for a record whose per-record outcome was already
    /// computed (the per-record rules are pure and may run on parallel
    /// workers); deduplication, tagging, and accounting stay sequential here.
    pub fn process_prefiltered(
        &mut self,
        record: BitextRecord,
        outcome: FilterOutcome,
    ) -> Result<Option<BitextRecord>, FilterError> {
        let direction = record.direction();
        match outcome {
            FilterOutcome::Drop(rule) => {
                self.report.note(direction, Some(rule));
                Ok(None)
            }
            FilterOutcome::Keep => {
                if !self.deduper.first_occurrence(&record) {
                    self.report.note(direction, Some(DropRule::Duplicate));
                    return Ok(None);
                }
                let record = if record.origin == Origin::Backtranslated && !record.bt_tagged {
                    tag_backtranslation(record)?
                } else {
                    record
                };
                self.report.note(direction, None);
                Ok(Some(record))
            }
        }
    }

    /// Convenience wrapper over [`FilterChain::process`] for whole streams.
    pub fn run(
        &mut self,
        records: impl IntoIterator<Item = BitextRecord>,
    ) -> Result<Vec<BitextRecord>, FilterError> {
        let mut kept = Vec::new();
        for record in records {
            if let Some(r) = self.process(record)? {
                kept.push(r);
            }
        }
        Ok(kept)
    }

    pub fn report(&self) -> &FilterReport {
        &self.report
    }

    pub fn finish(self) -> FilterReport {
        self.report
    }
}
